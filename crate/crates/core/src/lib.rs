pub mod cube;
pub mod error;
pub mod io;
pub mod synth;

pub use cube::{BoundingBox, HyperspectralCube, HyperspectralSequence};
pub use error::{Error, Result};
pub mod feature_map;
pub mod sshmg;
pub mod unmixing;
pub mod eval;
pub mod tracker;
pub mod colorize;
pub mod config;
pub mod cli;
