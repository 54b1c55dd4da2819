//! Renders a preset scene, builds a library from the material panel and
//! tracks the target, printing mean IoU for the full and band-mean runs.
//!
//! cargo run --release --example track_synthetic -- same-color-clutter

use hypertrack::eval::mean_iou;
use hypertrack::synth::{synth_scene, Preset};
use hypertrack::tracker::{track, TrackerConfig};
use hypertrack::unmixing::build_library;

fn main() -> hypertrack::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "linear-motion".into());
    let preset = Preset::from_name(&name)?;
    let (panel, _) = synth_scene(&Preset::MaterialPanel.config(), 1)?;
    let library = build_library(panel.frames(), 6, 6, 1)?;

    let (seq, gt) = synth_scene(&preset.config(), 7)?;
    let cfg = TrackerConfig::default();
    let out = track(&seq, gt[0], Some(&library), &cfg)?;
    println!(
        "{name}: mean IoU {:.3} in {:.2} s, endmembers {:?}",
        mean_iou(&out.trajectory, &gt)?,
        out.metadata.seconds,
        out.metadata.endmembers.as_ref().map(|e| &e.atoms)
    );

    let gray = seq.map_frames(|f| f.band_mean_replicated())?;
    let out = track(&gray, gt[0], Some(&library), &cfg)?;
    println!("{name} band-mean: mean IoU {:.3}", mean_iou(&out.trajectory, &gt)?);
    Ok(())
}
