//! Renders a preset to disk as `.hsb` frames with `meta.json` and
//! `groundtruth_rect.txt`, then loads it back and checks the round trip.
//!
//! cargo run --example synth_io -- /tmp/scene

use std::path::PathBuf;

use hypertrack::io::{load_groundtruth, load_sequence, write_boxes, write_sequence};
use hypertrack::synth::{synth_scene, Preset};

fn main() -> hypertrack::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "scene_out".into()));
    let (seq, gt) = synth_scene(&Preset::LinearMotion.config(), 3)?;
    write_sequence(&seq, &dir)?;
    write_boxes(&dir.join("groundtruth_rect.txt"), &gt)?;

    let back = load_sequence(&dir)?;
    let boxes = load_groundtruth(&dir.join("groundtruth_rect.txt"))?;
    let f = &back.frames()[0];
    println!(
        "{} frames of {}x{}x{} at {} fps, identical: {}, boxes: {}",
        back.len(),
        f.width(),
        f.height(),
        f.bands(),
        back.frame_rate(),
        back == seq,
        boxes.len()
    );
    Ok(())
}
