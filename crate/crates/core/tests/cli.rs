use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hypertrack::cube::{linear_wavelengths, HyperspectralCube, HyperspectralSequence};
use hypertrack::eval::EvalReport;
use hypertrack::feature_map::FeatureMap;
use hypertrack::io::write_sequence;

fn hypertrack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypertrack"))
        .args(args)
        .env_remove("HYPERTRACK_THREADS")
        .output()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn synth_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        let o = hypertrack(&["synth", "--preset", "same-color-clutter", "--seed", "7", "--out", p(d)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(dir_bytes(&a), dir_bytes(&b));
    let manifest = fs::read_to_string(a.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"BC\""));
    let o = hypertrack(&["synth", "--preset", "nope", "--out", p(&a)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn track_reports_missing_library() {
    let tmp = tempfile::tempdir().unwrap();
    let seq = tmp.path().join("seq");
    assert!(hypertrack(&["synth", "--preset", "linear-motion", "--out", p(&seq)]).status.success());
    let missing = tmp.path().join("no-such-library.json");
    let o = hypertrack(&["track", "--sequence", p(&seq), "--library", p(&missing), "--out", p(tmp.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no-such-library.json"));
    let o = hypertrack(&["track", "--sequence", p(&seq), "--out", p(tmp.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn single_group_track_writes_one_line_per_frame() {
    let tmp = tempfile::tempdir().unwrap();
    let seq = tmp.path().join("seq");
    let out = tmp.path().join("out");
    assert!(hypertrack(&["synth", "--preset", "linear-motion", "--seed", "3", "--out", p(&seq)]).status.success());
    let o = hypertrack(&["--jobs", "2", "track", "--sequence", p(&seq), "--feature", "sshmg-only", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("results.txt")).unwrap();
    assert_eq!(text.lines().count(), 30);
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["features"], "sshmg-only");
    assert_eq!(meta["per_frame"].as_array().unwrap().len(), 30);
}

fn write_manifest(dir: &Path, results: &str) {
    fs::write(dir.join("gt.txt"), "0,0,10,10\n5,5,10,10\n10,10,10,10\n").unwrap();
    fs::write(dir.join("res.txt"), results).unwrap();
    fs::write(
        dir.join("m.json"),
        r#"{"sequences": [
            {"name": "s1", "results": "res.txt", "groundtruth": "gt.txt", "attributes": ["BC"]},
            {"name": "s2", "results": "gt.txt", "groundtruth": "gt.txt", "attributes": ["IPR"]}
        ]}"#,
    )
    .unwrap();
}

#[test]
fn eval_perfect_results_and_attributes() {
    let tmp = tempfile::tempdir().unwrap();
    write_manifest(tmp.path(), "0,0,10,10\n5,5,10,10\n10,10,10,10\n");
    let out = tmp.path().join("report");
    let o = hypertrack(&["eval", "--manifest", p(&tmp.path().join("m.json")), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: EvalReport = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.overall.as_ref().unwrap().auc, 20.0 / 21.0);
    assert!(report.per_attribute.contains_key("BC") && report.per_attribute.contains_key("IPR"));
    let csv = fs::read_to_string(out.join("curves.csv")).unwrap();
    assert!(csv.starts_with("curve,threshold,overall,BC,IPR"));
}

#[test]
fn eval_rejects_unscorable_results() {
    for results in ["", "0,0,10,10\n"] {
        let tmp = tempfile::tempdir().unwrap();
        write_manifest(tmp.path(), results);
        let out = tmp.path().join("report");
        let o = hypertrack(&["eval", "--manifest", p(&tmp.path().join("m.json")), "--out", p(&out)]);
        assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
        assert!(stderr(&o).contains("s1"));
    }
}

#[test]
fn features_of_constant_cube_are_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let wl = linear_wavelengths(8, 470.0, 620.0);
    let cube = HyperspectralCube::from_fn(12, 9, wl, |_, _, _| 0.4).unwrap();
    let seq = HyperspectralSequence::new(vec![cube], 10.0).unwrap();
    write_sequence(&seq, &tmp.path().join("c")).unwrap();
    let out = tmp.path().join("f.json");
    let o = hypertrack(&["features", "--sequence", p(&tmp.path().join("c")), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let fm: FeatureMap = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!((fm.cells_x, fm.cells_y), (3, 3));
    assert!(fm.data.iter().all(|&v| v == 0.0));
}

#[test]
fn unmix_library_and_colorize_round() {
    let tmp = tempfile::tempdir().unwrap();
    let panel = tmp.path().join("panel");
    let lib = tmp.path().join("lib.json");
    assert!(hypertrack(&["synth", "--preset", "material-panel", "--seed", "1", "--out", p(&panel)]).status.success());
    let o = hypertrack(&["build-library", "--sequence", p(&panel), "--seed", "1", "--out", p(&lib)]);
    assert!(o.status.success(), "{}", stderr(&o));

    // two materials: the red target over green background
    let scene = tmp.path().join("scene");
    assert!(hypertrack(&["synth", "--preset", "same-color-clutter", "--out", p(&scene)]).status.success());
    let out = tmp.path().join("unmix");
    let o = hypertrack(&[
        "unmix", "--sequence", p(&scene), "--library", p(&lib), "--r", "2", "--out", p(&out), "--pgm",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let fm: FeatureMap = serde_json::from_str(&fs::read_to_string(out.join("abundances.json")).unwrap()).unwrap();
    assert_eq!(fm.channels, 2);
    for y in 0..fm.cells_y {
        for x in 0..fm.cells_x {
            let s: f64 = fm.cell(x, y).iter().sum();
            assert!((s - 1.0).abs() < 1e-6 && fm.cell(x, y).iter().all(|&v| v >= 0.0));
        }
    }
    for c in 0..2 {
        let pgm = fs::read(out.join(format!("abundance_{c:02}.pgm"))).unwrap();
        assert!(pgm.starts_with(b"P5\n128 96\n255\n"));
    }

    let img = tmp.path().join("img");
    let o = hypertrack(&["colorize", "--sequence", p(&panel), "--out", p(&img)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ppm = fs::read(img.join("frame_00000.ppm")).unwrap();
    assert!(ppm.starts_with(b"P6\n96 64\n255\n"));
    assert_eq!(ppm.len(), 13 + 96 * 64 * 3);
}

#[test]
fn thread_variable_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_hypertrack"))
        .args(["synth", "--preset", "linear-motion", "--out", "/nonexistent/x"])
        .env("HYPERTRACK_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("HYPERTRACK_THREADS"));
}

#[test]
fn help_lists_defaults() {
    let o = hypertrack(&["track", "--help"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    for flag in ["--eta", "--filter-lambda", "--scales", "--feature", "--library", "[default: 0.0023]"] {
        assert!(text.contains(flag), "{flag}");
    }
}
