//! Computes SSHMG features for the target region of a synthetic frame and
//! shows that scaling the cube leaves them unchanged.

use hypertrack::sshmg::{sshmg, SshmgParams};
use hypertrack::synth::{synth_scene, Preset};

fn main() -> hypertrack::Result<()> {
    let (seq, gt) = synth_scene(&Preset::SameColorClutter.config(), 5)?;
    let region = seq.frames()[0].crop(&gt[0], 2.0)?;
    let p = SshmgParams::default();
    let fm = sshmg(&region, &p)?;
    println!(
        "region {}x{}x{} -> {}x{} cells, {} channels",
        region.width(),
        region.height(),
        region.bands(),
        fm.cells_x,
        fm.cells_y,
        fm.channels
    );
    let brighter = sshmg(&region.scaled(2.0)?, &p)?;
    println!("max change after doubling brightness: {:e}", fm.max_abs_diff(&brighter));
    Ok(())
}
