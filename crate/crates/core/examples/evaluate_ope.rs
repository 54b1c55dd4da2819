//! One-pass evaluation over two presets with a constant-box baseline and the
//! full tracker, printing success AUC and precision at 20 px.

use hypertrack::eval::run_ope;
use hypertrack::eval::OpeSequence;
use hypertrack::synth::{synth_scene, Preset};
use hypertrack::tracker::{track, TrackerConfig};
use hypertrack::unmixing::build_library;

fn main() -> hypertrack::Result<()> {
    let (panel, _) = synth_scene(&Preset::MaterialPanel.config(), 1)?;
    let library = build_library(panel.frames(), 6, 6, 1)?;
    let mut dataset = Vec::new();
    for preset in [Preset::LinearMotion, Preset::SameColorClutter] {
        let (frames, groundtruth) = synth_scene(&preset.config(), 11)?;
        dataset.push(OpeSequence {
            name: preset.name().into(),
            frames,
            groundtruth,
            attributes: preset.attributes(),
        });
    }

    let still = run_ope(&dataset, |seq, init| Ok(vec![init; seq.len()]));
    let cfg = TrackerConfig::default();
    let full = run_ope(&dataset, |seq, init| {
        Ok(track(seq, init, Some(&library), &cfg)?.trajectory)
    });
    for (label, report) in [("constant box", &still), ("tracker", &full)] {
        if let Some(c) = &report.overall {
            println!("{label}: AUC {:.3}, precision@20 {:.3}", c.auc, c.precision_at_20);
        }
    }
    Ok(())
}
