//! Run configuration file: every tunable with its default, plus paths.
//!
//! ```json
//! {
//!   "tracker": {
//!     "sshmg": {"z": 4, "n_theta": 9, "n_phi": 4, "alpha": 0.2},
//!     "eta": 0.0023,
//!     "unmixing": {"unmix_lambda": null, "admm": {"mu": 0.1}, "r": "auto"}
//!   },
//!   "paths": {"library": "lib.json"}
//! }
//! ```
//!
//! Missing keys take their defaults; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::io::read_json;
use crate::tracker::TrackerConfig;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsConfig {
    pub library: Option<PathBuf>,
    pub sequence: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl PathsConfig {
    /// Resolves relative paths against `base`.
    pub fn resolved(&self, base: &Path) -> Self {
        let fix = |p: &Option<PathBuf>| p.as_ref().map(|p| base.join(p));
        Self {
            library: fix(&self.library),
            sequence: fix(&self.sequence),
            output: fix(&self.output),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub tracker: TrackerConfig,
    pub paths: PathsConfig,
}

impl RunConfig {
    /// Reads and validates a config file; relative paths are taken from the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: RunConfig = read_json(path)?;
        cfg.tracker.validate()?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.paths = cfg.paths.resolved(base);
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracker::{EndmemberCount, FeatureSet};

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"tracker": {"eta": 0.01, "sshmg": {"z": 3}, "features": "sshmg-only",
                "unmixing": {"r": 2}}}"#,
        )
        .unwrap();
        assert_eq!(cfg.tracker.eta, 0.01);
        assert_eq!(cfg.tracker.sshmg.z, 3);
        assert_eq!(cfg.tracker.sshmg.n_theta, 9);
        assert_eq!(cfg.tracker.features, FeatureSet::SshmgOnly);
        assert_eq!(cfg.tracker.unmixing.r, EndmemberCount::Fixed(2));
        assert_eq!(cfg.tracker.filter_lambda, 0.01);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for text in [
            r#"{"trackr": {}}"#,
            r#"{"tracker": {"etaa": 1}}"#,
            r#"{"tracker": {"sshmg": {"zz": 1}}}"#,
            r#"{"tracker": {"unmixing": {"admm": {"rho": 1}}}}"#,
            r#"{"paths": {"lib": "x"}}"#,
        ] {
            assert!(serde_json::from_str::<RunConfig>(text).is_err(), "{text}");
        }
    }

    #[test]
    fn load_resolves_paths() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.json");
        std::fs::write(&p, r#"{"paths": {"library": "lib.json"}}"#).unwrap();
        let cfg = RunConfig::load(&p).unwrap();
        assert_eq!(cfg.paths.library, Some(dir.path().join("lib.json")));
        std::fs::write(&p, r#"{"tracker": {"eta": 2.0}}"#).unwrap();
        assert!(RunConfig::load(&p).is_err());
    }
}
