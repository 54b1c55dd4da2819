//! Dark-calibrates a synthetic frame and writes a false-color PPM using the
//! bundled color matching functions.
//!
//! cargo run --example colorize_frame -- out.ppm

use hypertrack::colorize::{dark_calibrate, resample_cmfs, to_false_color, write_ppm, CmfData};
use hypertrack::synth::{synth_scene, Preset};

fn main() -> hypertrack::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "frame.ppm".into());
    let (seq, _) = synth_scene(&Preset::MaterialPanel.config(), 2)?;
    let raw = &seq.frames()[0];
    let dark = raw.scaled(0.0)?;
    let cube = dark_calibrate(raw, &dark)?;
    let cmfs = resample_cmfs(&CmfData::bundled(), cube.wavelengths())?;
    let img = to_false_color(&cube, &cmfs)?;
    write_ppm(out.as_ref(), &img)?;
    println!("wrote {out} ({}x{})", img.width, img.height);
    Ok(())
}
