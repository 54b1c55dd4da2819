//! Builds a spectral library from the material panel, selects scene
//! endmembers around the target with sparse unmixing and HySime, and
//! reports per-pixel abundances at the target center.

use hypertrack::synth::{synth_scene, Preset};
use hypertrack::tracker::{select_scene_endmembers, TrackerConfig};
use hypertrack::unmixing::{abundance_map, build_library};

fn main() -> hypertrack::Result<()> {
    let (panel, _) = synth_scene(&Preset::MaterialPanel.config(), 1)?;
    let library = build_library(panel.frames(), 6, 6, 1)?;
    println!("library: {} atoms over {} bands", library.atom_count(), library.bands());

    let (seq, gt) = synth_scene(&Preset::SameColorClutter.config(), 7)?;
    let frame = &seq.frames()[0];
    let (set, log) = select_scene_endmembers(frame, &gt[0], &library, &TrackerConfig::default())?;
    println!(
        "selected atoms {:?} (HySime raw {:?}), lambda {:.3e}, {} ADMM iterations",
        log.atoms, log.hysime_raw, log.unmix_lambda, log.admm_iterations
    );

    let map = abundance_map(frame, &set)?;
    let (cx, cy) = (gt[0].cx as usize, gt[0].cy as usize);
    println!("abundances at target center: {:.3?}", map.pixel(cx, cy));
    Ok(())
}
