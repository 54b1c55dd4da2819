//! Command-line front end.
//!
//! Exit codes: 0 success, 1 any other failure, 2 missing library file,
//! 3 results that cannot be scored (length mismatch or empty).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::colorize::{
    dark_calibrate, resample_cmfs, spectral_correct, to_false_color, write_pgm, write_ppm, CmfData,
    CorrectionMatrix,
};
use crate::config::RunConfig;
use crate::cube::{BoundingBox, HyperspectralSequence};
use crate::error::Error;
use crate::eval::{evaluate_sequence, run_ope, EvalReport, Failure, OpeSequence};
use crate::feature_map::FeatureMap;
use crate::io::{
    ensure_dir, load_groundtruth, load_sequence, parse_boxes, read_cube, read_json,
    write_boxes, write_json, write_sequence, GROUNDTRUTH_FILE,
};
use crate::sshmg::sshmg;
use crate::synth::{synth_scene, Preset};
use crate::tracker::{select_scene_endmembers, track, EndmemberCount, FeatureSet, TrackerConfig};
use crate::unmixing::{abundance_map, build_library, SpectralLibrary};

pub const THREADS_ENV: &str = "HYPERTRACK_THREADS";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::new(1, e.to_string())
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "hypertrack", version, about = "Material-based object tracking in hyperspectral video")]
pub struct Cli {
    /// Worker threads; also capped by HYPERTRACK_THREADS.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Track a target through a sequence directory.
    Track(TrackArgs),
    /// Score trajectories or run one-pass evaluation over a manifest.
    Eval(EvalArgs),
    /// Render a preset synthetic scene.
    Synth(SynthArgs),
    /// Per-pixel material abundances of one frame.
    Unmix(UnmixArgs),
    /// Gradient-histogram feature map of one frame.
    Features(FeaturesArgs),
    /// False-color PPM rendering of every frame.
    Colorize(ColorizeArgs),
    /// Build a spectral library from sequences.
    BuildLibrary(BuildLibraryArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FeatureArg {
    Mht,
    SshmgOnly,
    AbundanceOnly,
}

impl From<FeatureArg> for FeatureSet {
    fn from(f: FeatureArg) -> Self {
        match f {
            FeatureArg::Mht => FeatureSet::Mht,
            FeatureArg::SshmgOnly => FeatureSet::SshmgOnly,
            FeatureArg::AbundanceOnly => FeatureSet::AbundanceOnly,
        }
    }
}

fn parse_count(s: &str) -> std::result::Result<EndmemberCount, String> {
    if s == "auto" {
        return Ok(EndmemberCount::Auto);
    }
    match s.parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("expected \"auto\" or a positive integer, got {s:?}")),
        Ok(n) => Ok(EndmemberCount::Fixed(n)),
    }
}

/// Tracker settings. Each flag overrides the config file, which overrides
/// the built-in default.
#[derive(Args, Debug, Default, Clone)]
pub struct TunableArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Feature groups [default: mht].
    #[arg(long, value_enum)]
    pub feature: Option<FeatureArg>,
    /// Appearance learning rate [default: 0.0023].
    #[arg(long)]
    pub eta: Option<f64>,
    /// Filter regularization [default: 0.01].
    #[arg(long)]
    pub filter_lambda: Option<f64>,
    /// Filter ADMM iterations per frame [default: 2].
    #[arg(long)]
    pub admm_iters: Option<usize>,
    /// Search area as a multiple of the target area [default: 5].
    #[arg(long)]
    pub padding: Option<f64>,
    /// Comma-separated scale factors [default: 0.985,1,1.015].
    #[arg(long, value_delimiter = ',')]
    pub scales: Option<Vec<f64>>,
    /// Gradient-histogram cell size [default: 4].
    #[arg(long)]
    pub z: Option<usize>,
    /// Azimuth bins [default: 9].
    #[arg(long)]
    pub n_theta: Option<usize>,
    /// Elevation bins [default: 4].
    #[arg(long)]
    pub n_phi: Option<usize>,
    /// Histogram truncation [default: 0.2].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Endmember count, "auto" or an integer [default: auto].
    #[arg(long, value_parser = parse_count)]
    pub r: Option<EndmemberCount>,
    /// Group-sparsity weight [default: 1e-3 * max|A^T X|].
    #[arg(long)]
    pub unmix_lambda: Option<f64>,
    /// Keep the group weights fixed at their initial values.
    #[arg(long)]
    pub no_reliability: bool,
}

impl TunableArgs {
    /// Config file first, then flags.
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut run = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let t = &mut run.tracker;
        if let Some(f) = self.feature {
            t.features = f.into();
        }
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),*) => {
                $(if let Some(v) = self.$flag.clone() { t.$($field).+ = v; })*
            };
        }
        set!(eta => eta, filter_lambda => filter_lambda, admm_iters => admm_iters,
             padding => padding, scales => scales, z => sshmg.z, n_theta => sshmg.n_theta,
             n_phi => sshmg.n_phi, alpha => sshmg.alpha, r => unmixing.r);
        if let Some(l) = self.unmix_lambda {
            t.unmixing.unmix_lambda = Some(l);
        }
        if self.no_reliability {
            t.reliability = false;
        }
        t.validate()?;
        Ok(run)
    }
}

#[derive(Args, Debug)]
pub struct TrackArgs {
    /// Sequence directory (meta.json + frames).
    #[arg(long)]
    pub sequence: Option<PathBuf>,
    /// Initial box "x,y,w,h"; defaults to the first ground-truth line.
    #[arg(long)]
    pub init: Option<String>,
    /// Ground-truth file [default: <sequence>/groundtruth_rect.txt].
    #[arg(long)]
    pub groundtruth: Option<PathBuf>,
    /// Spectral library JSON (needed unless --feature sshmg-only).
    #[arg(long)]
    pub library: Option<PathBuf>,
    /// Output directory for results.txt and run.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Track on band-mean frames (every band replaced by the pixel mean).
    #[arg(long)]
    pub band_mean: bool,
    #[command(flatten)]
    pub tunables: TunableArgs,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Manifest JSON listing sequences, ground truth, attributes and
    /// either results files or sequence directories to track.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory for report.json and curves.csv.
    #[arg(long)]
    pub out: PathBuf,
    /// Spectral library used when the manifest asks for tracking.
    #[arg(long)]
    pub library: Option<PathBuf>,
    #[command(flatten)]
    pub tunables: TunableArgs,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// linear-motion, same-color-clutter, in-plane-rotation or material-panel.
    #[arg(long)]
    pub preset: String,
    /// Noise seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output sequence directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct UnmixArgs {
    /// Sequence directory.
    #[arg(long)]
    pub sequence: PathBuf,
    /// Frame index.
    #[arg(long, default_value_t = 0)]
    pub frame: usize,
    /// Spectral library JSON.
    #[arg(long)]
    pub library: PathBuf,
    /// Region "x,y,w,h" used to pick endmembers [default: whole frame].
    #[arg(long)]
    pub region: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write one grayscale PGM per material.
    #[arg(long)]
    pub pgm: bool,
    #[command(flatten)]
    pub tunables: TunableArgs,
}

#[derive(Args, Debug)]
pub struct FeaturesArgs {
    /// Sequence directory.
    #[arg(long)]
    pub sequence: PathBuf,
    /// Frame index.
    #[arg(long, default_value_t = 0)]
    pub frame: usize,
    /// Output FeatureMap JSON.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub tunables: TunableArgs,
}

#[derive(Args, Debug)]
pub struct ColorizeArgs {
    /// Sequence directory.
    #[arg(long)]
    pub sequence: PathBuf,
    /// Output directory for the PPM frames.
    #[arg(long)]
    pub out: PathBuf,
    /// CMF table (wavelength x y z per line) [default: bundled CIE 2006 10 deg].
    #[arg(long)]
    pub cmf: Option<PathBuf>,
    /// Dark frame (.hsb, same shape) subtracted first.
    #[arg(long)]
    pub dark: Option<PathBuf>,
    /// Correction matrix JSON, K rows of K numbers [default: identity].
    #[arg(long)]
    pub correction: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BuildLibraryArgs {
    /// Sequence directories; every frame contributes.
    #[arg(long = "sequence", required = true)]
    pub sequences: Vec<PathBuf>,
    /// Endmembers extracted per frame.
    #[arg(long, default_value_t = 6)]
    pub per_cube_r: usize,
    /// Library size after clustering.
    #[arg(long, default_value_t = 6)]
    pub atoms: usize,
    /// Seed for extraction and clustering.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output library JSON.
    #[arg(long)]
    pub out: PathBuf,
}

/// One manifest entry; relative paths are taken from the manifest's
/// directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub results: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groundtruth: Option<PathBuf>,
    #[serde(default)]
    pub attributes: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub sequences: Vec<ManifestEntry>,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn thread_cap(jobs: Option<usize>) -> CliResult<Option<usize>> {
    let env = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(v.trim().parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::new(1, format!("{THREADS_ENV} must be a positive integer, got {v:?}"))
        })?),
        Err(_) => None,
    };
    if jobs == Some(0) {
        return Err(CliError::new(1, "--jobs must be at least 1"));
    }
    Ok(match (jobs, env) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    })
}

fn dispatch(cli: Cli) -> CliResult {
    let pool = match thread_cap(cli.jobs)? {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    }
    .map_err(|e| CliError::new(1, format!("cannot start worker threads: {e}")))?;
    pool.install(|| match cli.command {
        Command::Track(a) => cmd_track(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Unmix(a) => cmd_unmix(a),
        Command::Features(a) => cmd_features(a),
        Command::Colorize(a) => cmd_colorize(a),
        Command::BuildLibrary(a) => cmd_build_library(a),
    })
}

fn load_library(path: &Path) -> CliResult<SpectralLibrary> {
    if !path.is_file() {
        return Err(CliError::new(2, format!("library file not found: {}", path.display())));
    }
    Ok(SpectralLibrary::load(path)?)
}

/// Loads the library when the feature set needs one.
fn library_for(cfg: &TrackerConfig, path: Option<&Path>) -> CliResult<Option<SpectralLibrary>> {
    if cfg.features == FeatureSet::SshmgOnly {
        return path.map(load_library).transpose();
    }
    match path {
        Some(p) => load_library(p).map(Some),
        None => Err(CliError::new(
            2,
            "abundance features need a spectral library; pass --library or use --feature sshmg-only",
        )),
    }
}

fn parse_box(text: &str, flag: &str) -> CliResult<BoundingBox> {
    let boxes = parse_boxes(text, Path::new(flag))?;
    match boxes.as_slice() {
        [b] => Ok(*b),
        _ => Err(CliError::new(1, format!("{flag} expects a single x,y,w,h box"))),
    }
}

fn cmd_track(a: TrackArgs) -> CliResult {
    let run = a.tunables.resolve()?;
    let seq_dir = a
        .sequence
        .or(run.paths.sequence.clone())
        .ok_or_else(|| CliError::new(1, "--sequence is required"))?;
    let out = a
        .out
        .or(run.paths.output.clone())
        .ok_or_else(|| CliError::new(1, "--out is required"))?;
    let library = library_for(&run.tracker, a.library.as_deref().or(run.paths.library.as_deref()))?;
    let mut seq = load_sequence(&seq_dir)?;
    if a.band_mean {
        seq = seq.map_frames(|f| f.band_mean_replicated())?;
    }
    let init = match a.init {
        Some(text) => parse_box(&text, "--init")?,
        None => {
            let gt_path = a.groundtruth.unwrap_or_else(|| seq_dir.join(GROUNDTRUTH_FILE));
            *load_groundtruth(&gt_path)?
                .first()
                .ok_or_else(|| CliError::new(1, format!("{} is empty", gt_path.display())))?
        }
    };
    let result = track(&seq, init, library.as_ref(), &run.tracker)?;
    ensure_dir(&out)?;
    write_boxes(&out.join("results.txt"), &result.trajectory)?;
    write_json(&out.join("run.json"), &result.metadata)?;
    println!(
        "tracked {} frames in {:.2} s -> {}",
        result.trajectory.len(),
        result.metadata.seconds,
        out.join("results.txt").display()
    );
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> CliResult {
    let run = a.tunables.resolve()?;
    let manifest: Manifest = read_json(&a.manifest)?;
    let base = a.manifest.parent().unwrap_or(Path::new(".")).to_path_buf();
    let mut scored = BTreeMap::new();
    let mut failures = Vec::new();
    let mut unscorable = Vec::new();
    let mut to_track = Vec::new();
    for e in &manifest.sequences {
        let gt_path = match (&e.groundtruth, &e.sequence) {
            (Some(g), _) => base.join(g),
            (None, Some(s)) => base.join(s).join(GROUNDTRUTH_FILE),
            (None, None) => {
                return Err(CliError::new(1, format!("{}: no ground truth or sequence given", e.name)))
            }
        };
        let gt = load_groundtruth(&gt_path)?;
        match (&e.results, &e.sequence) {
            (Some(r), _) => {
                let traj = load_groundtruth(&base.join(r))?;
                if traj.is_empty() || traj.len() != gt.len() {
                    let msg = format!(
                        "{}: {} result boxes for {} ground-truth boxes",
                        e.name,
                        traj.len(),
                        gt.len()
                    );
                    unscorable.push(msg.clone());
                    failures.push(Failure {
                        sequence: e.name.clone(),
                        error: msg,
                    });
                    continue;
                }
                scored.insert(e.name.clone(), evaluate_sequence(&traj, &gt, &e.attributes)?);
            }
            (None, Some(s)) => to_track.push(OpeSequence {
                name: e.name.clone(),
                frames: load_sequence(&base.join(s))?,
                groundtruth: gt,
                attributes: e.attributes.clone(),
            }),
            (None, None) => unreachable!(),
        }
    }
    if !to_track.is_empty() {
        let library = library_for(&run.tracker, a.library.as_deref().or(run.paths.library.as_deref()))?;
        let tracked = run_ope(&to_track, |seq: &HyperspectralSequence, init| {
            Ok(track(seq, init, library.as_ref(), &run.tracker)?.trajectory)
        });
        scored.extend(tracked.per_sequence);
        failures.extend(tracked.failures);
    }
    let report = EvalReport::aggregate(scored, failures);
    ensure_dir(&a.out)?;
    write_json(&a.out.join("report.json"), &report)?;
    fs::write(a.out.join("curves.csv"), report.curves_csv()).map_err(|e| Error::io(a.out.join("curves.csv"), e))?;
    if let Some(o) = &report.overall {
        println!("precision@20 {:.4}  AUC {:.4}", o.precision_at_20, o.auc);
    }
    for f in &report.failures {
        eprintln!("failed: {}: {}", f.sequence, f.error);
    }
    if !unscorable.is_empty() {
        return Err(CliError::new(3, unscorable.join("; ")));
    }
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> CliResult {
    let preset = Preset::from_name(&a.preset)?;
    let (seq, gt) = synth_scene(&preset.config(), a.seed)?;
    write_sequence(&seq, &a.out)?;
    write_boxes(&a.out.join(GROUNDTRUTH_FILE), &gt)?;
    let manifest = Manifest {
        sequences: vec![ManifestEntry {
            name: preset.name().to_string(),
            sequence: Some(PathBuf::from(".")),
            results: None,
            groundtruth: Some(PathBuf::from(GROUNDTRUTH_FILE)),
            attributes: preset.attributes(),
        }],
    };
    write_json(&a.out.join(MANIFEST_FILE), &manifest)?;
    println!("wrote {} frames to {}", seq.len(), a.out.display());
    Ok(())
}

fn frame_of(seq: &HyperspectralSequence, i: usize) -> CliResult<&crate::cube::HyperspectralCube> {
    seq.frames()
        .get(i)
        .ok_or_else(|| CliError::new(1, format!("frame {i} is out of range ({} frames)", seq.len())))
}

fn cmd_unmix(a: UnmixArgs) -> CliResult {
    let run = a.tunables.resolve()?;
    let library = load_library(&a.library)?;
    let seq = load_sequence(&a.sequence)?;
    let frame = frame_of(&seq, a.frame)?;
    let region = match &a.region {
        Some(t) => parse_box(t, "--region")?,
        None => BoundingBox::from_top_left(0.0, 0.0, frame.width() as f64, frame.height() as f64)?,
    };
    let (e, log) = select_scene_endmembers(frame, &region, &library, &run.tracker)?;
    let map = abundance_map(frame, &e)?;
    ensure_dir(&a.out)?;
    let fm = FeatureMap::new(map.width, map.height, map.r, map.data.clone())?;
    write_json(&a.out.join("abundances.json"), &fm)?;
    write_json(&a.out.join("endmembers.json"), &log)?;
    if a.pgm {
        for c in 0..map.r {
            write_pgm(&a.out.join(format!("abundance_{c:02}.pgm")), map.width, map.height, &map.channel(c))?;
        }
    }
    println!("{} materials (library atoms {:?}) -> {}", map.r, log.atoms, a.out.display());
    Ok(())
}

fn cmd_features(a: FeaturesArgs) -> CliResult {
    let run = a.tunables.resolve()?;
    let seq = load_sequence(&a.sequence)?;
    let fm = sshmg(frame_of(&seq, a.frame)?, &run.tracker.sshmg)?;
    if let Some(dir) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    write_json(&a.out, &fm)?;
    println!("{}x{} cells, {} channels -> {}", fm.cells_x, fm.cells_y, fm.channels, a.out.display());
    Ok(())
}

fn cmd_colorize(a: ColorizeArgs) -> CliResult {
    let seq = load_sequence(&a.sequence)?;
    let first = seq.first();
    let raw = match &a.cmf {
        Some(p) => CmfData::load(p)?,
        None => CmfData::bundled(),
    };
    let cmfs = resample_cmfs(&raw, first.wavelengths())?;
    let dark = a
        .dark
        .as_ref()
        .map(|p| read_cube(p, first.wavelengths().to_vec()))
        .transpose()?;
    let correction = match &a.correction {
        Some(p) => {
            let rows: Vec<Vec<f64>> = read_json(p)?;
            let k = rows.len();
            if rows.iter().any(|r| r.len() != k) {
                return Err(CliError::new(1, format!("{}: correction matrix must be square", p.display())));
            }
            Some(CorrectionMatrix::new(nalgebra::DMatrix::from_fn(k, k, |i, j| rows[i][j]))?)
        }
        None => None,
    };
    ensure_dir(&a.out)?;
    for (i, frame) in seq.frames().iter().enumerate() {
        let mut cube = frame.clone();
        if let Some(d) = &dark {
            cube = dark_calibrate(&cube, d)?;
        }
        if let Some(c) = &correction {
            cube = spectral_correct(&cube, c)?;
        }
        write_ppm(&a.out.join(format!("frame_{i:05}.ppm")), &to_false_color(&cube, &cmfs)?)?;
    }
    println!("wrote {} images to {}", seq.len(), a.out.display());
    Ok(())
}

fn cmd_build_library(a: BuildLibraryArgs) -> CliResult {
    let mut cubes = Vec::new();
    for dir in &a.sequences {
        cubes.extend(load_sequence(dir)?.frames().iter().cloned());
    }
    let lib = build_library(&cubes, a.per_cube_r, a.atoms, a.seed)?;
    if let Some(dir) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    lib.save(&a.out)?;
    println!("{} atoms over {} bands -> {}", lib.atom_count(), lib.bands(), a.out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn help_defaults_match_config() {
        let d = TrackerConfig::default();
        let mut cmd = Cli::command();
        let help = cmd.find_subcommand_mut("track").unwrap().render_long_help().to_string();
        for needle in [
            format!("[default: {}]", d.eta),
            format!("[default: {}]", d.filter_lambda),
            format!("[default: {}]", d.admm_iters),
            format!("[default: {}]", d.padding),
            format!("[default: {}]", d.sshmg.z),
            format!("[default: {}]", d.sshmg.n_theta),
            format!("[default: {}]", d.sshmg.n_phi),
            format!("[default: {}]", d.sshmg.alpha),
            format!(
                "[default: {}]",
                d.scales.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
            ),
        ] {
            assert!(help.contains(&needle), "missing {needle}");
        }
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.json");
        fs::write(&p, r#"{"tracker": {"eta": 0.5, "filter_lambda": 0.2}}"#).unwrap();
        let args = TunableArgs {
            config: Some(p),
            eta: Some(0.1),
            r: Some(EndmemberCount::Fixed(3)),
            feature: Some(FeatureArg::SshmgOnly),
            ..TunableArgs::default()
        };
        let run = args.resolve().unwrap();
        assert_eq!(run.tracker.eta, 0.1);
        assert_eq!(run.tracker.filter_lambda, 0.2);
        assert_eq!(run.tracker.unmixing.r, EndmemberCount::Fixed(3));
        assert_eq!(run.tracker.features, FeatureSet::SshmgOnly);
    }

    #[test]
    fn endmember_count_parsing() {
        assert_eq!(parse_count("auto"), Ok(EndmemberCount::Auto));
        assert_eq!(parse_count("4"), Ok(EndmemberCount::Fixed(4)));
        assert!(parse_count("0").is_err() && parse_count("x").is_err());
    }
}
