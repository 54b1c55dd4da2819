//! Material distribution learning: library construction, endmember
//! selection and per-pixel abundance estimation.
//!
//! Spectra are columns. A pixel matrix `X` is `L x N` (bands by pixels),
//! a library `A` is `L x M` and an endmember set `E` is `L x R`.

mod abundance;
mod clsunsal;
mod hysime;
mod kmeans;
mod library;
mod spu;
mod vca;

use nalgebra::DMatrix;

use crate::cube::HyperspectralCube;
use crate::error::{Error, Result};

pub use abundance::{abundance_feature_map, abundance_map, AbundanceMap};
pub use clsunsal::{clsunsal, clsunsal_lambda_max, default_lambda, AdmmParams, ClsunsalResult};
pub use hysime::{hysime, HysimeEstimate, NoiseEstimator};
pub use kmeans::{kmeans, KMeansResult};
pub use library::{build_library, SpectralLibrary};
pub use spu::{spu_abundances, SimplexSolver};
pub use vca::vca;

/// Selected scene endmembers (columns) and where they came from: library
/// atom indices after selection, pixel indices after VCA.
#[derive(Clone, Debug, PartialEq)]
pub struct EndmemberSet {
    pub spectra: DMatrix<f64>,
    pub source_indices: Vec<usize>,
}

impl EndmemberSet {
    pub fn new(spectra: DMatrix<f64>, source_indices: Vec<usize>) -> Result<Self> {
        if spectra.ncols() == 0 {
            return Err(Error::InvalidArgument("endmember set is empty".into()));
        }
        if spectra.ncols() != source_indices.len() {
            return Err(Error::DimensionMismatch(
                "one source index per endmember is required".into(),
            ));
        }
        Ok(Self {
            spectra,
            source_indices,
        })
    }

    pub fn bands(&self) -> usize {
        self.spectra.nrows()
    }

    pub fn count(&self) -> usize {
        self.spectra.ncols()
    }

    /// Ratio of smallest to largest singular value.
    pub fn inverse_condition(&self) -> f64 {
        let sv = self.spectra.singular_values();
        let max = sv.max();
        if max == 0.0 {
            0.0
        } else {
            sv.min() / max
        }
    }
}

/// All pixels of a cube as an `L x N` matrix, pixels in row-major order.
pub fn pixel_matrix(cube: &HyperspectralCube) -> DMatrix<f64> {
    let n = cube.width() * cube.height();
    DMatrix::from_fn(cube.bands(), n, |k, i| cube.band(k)[i] as f64)
}

/// Spectral angle between two columns, radians.
pub fn column_angle(a: &DMatrix<f64>, i: usize, b: &DMatrix<f64>, j: usize) -> f64 {
    let x = a.column(i);
    let y = b.column(j);
    (x.dot(&y) / (x.norm() * y.norm())).clamp(-1.0, 1.0).acos()
}

/// Row sums of `S`, their top-`R` atoms (lower index wins ties), returned
/// as the scene endmembers.
pub fn select_endmembers(
    s: &DMatrix<f64>,
    library: &SpectralLibrary,
    r: usize,
) -> Result<EndmemberSet> {
    let m = library.atom_count();
    if s.nrows() != m {
        return Err(Error::DimensionMismatch(format!(
            "abundance matrix has {} rows for {m} atoms",
            s.nrows()
        )));
    }
    if r == 0 || r > m {
        return Err(Error::InvalidArgument(format!(
            "cannot select {r} endmembers from {m} atoms"
        )));
    }
    let sums: Vec<f64> = (0..m).map(|i| s.row(i).sum()).collect();
    if sums.iter().all(|&v| v <= 0.0) {
        return Err(Error::Numerical("no material detected".into()));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| sums[b].total_cmp(&sums[a]).then(a.cmp(&b)));
    order.truncate(r);
    let spectra = library.atoms().select_columns(&order);
    let set = EndmemberSet::new(spectra, order)?;
    if set.inverse_condition() < 1e-10 {
        return Err(Error::Numerical(
            "selected endmembers are linearly dependent".into(),
        ));
    }
    Ok(set)
}
