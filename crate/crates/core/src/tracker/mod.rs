//! Reliability-weighted correlation filter tracking over feature groups.
//!
//! Each frame the search region (a square of `padding` times the target
//! area) is resampled to a fixed template, turned into per-group feature
//! maps on the gradient-histogram cell grid, weighted by the group
//! reliabilities and correlated with the learned filters at a few scales.

pub mod fft;
mod filter;
mod reliability;

use std::ops::Range;
use std::time::Instant;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cube::{BoundingBox, HyperspectralCube, HyperspectralSequence};
use crate::error::{Error, Result};
use crate::feature_map::FeatureMap;
use crate::sshmg::{sshmg, SshmgParams};
use crate::unmixing::{
    abundance_feature_map, clsunsal, default_lambda, hysime, pixel_matrix, select_endmembers,
    AdmmParams, EndmemberSet, NoiseEstimator, SpectralLibrary,
};
use fft::Fft2;

pub use filter::{
    hann_window, learn_filters, make_label, CropMask, FilterAdmm, FilterParams, Filters,
    GaussianLabel,
};
pub use reliability::{
    blend_weights, distance_score, overlap_score, reliability_update, smoothness_score,
    ReliabilityScores,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureSet {
    /// Gradient histograms and abundances.
    Mht,
    SshmgOnly,
    AbundanceOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    Sshmg,
    Abundance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum AutoTag {
    Auto,
}

/// Endmember count: HySime estimate or a fixed number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EndmemberCount {
    Fixed(usize),
    #[serde(with = "auto")]
    Auto,
}

mod auto {
    use super::AutoTag;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        AutoTag::Auto.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        AutoTag::deserialize(d).map(|_| ())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UnmixingConfig {
    /// Group-sparsity weight; `None` picks `1e-3·max|AᵀX|`.
    pub unmix_lambda: Option<f64>,
    pub admm: AdmmParams,
    pub r: EndmemberCount,
}

impl Default for UnmixingConfig {
    fn default() -> Self {
        Self {
            unmix_lambda: None,
            admm: AdmmParams::default(),
            r: EndmemberCount::Auto,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackerConfig {
    pub sshmg: SshmgParams,
    pub eta: f64,
    pub filter_lambda: f64,
    pub scales: Vec<f64>,
    /// Search area as a multiple of the target area.
    pub padding: f64,
    pub admm_iters: usize,
    pub mu_init: f64,
    pub mu_beta: f64,
    pub mu_max: f64,
    /// Search regions are resampled so their side lies in this pixel range.
    pub min_sample_px: f64,
    pub max_sample_px: f64,
    /// Label bandwidth relative to `sqrt(w·h)` of the target in cells.
    pub label_sigma_factor: f64,
    pub hann_window: bool,
    pub features: FeatureSet,
    pub reliability: bool,
    pub unmixing: UnmixingConfig,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            sshmg: SshmgParams::default(),
            eta: 0.0023,
            filter_lambda: 0.01,
            scales: vec![0.985, 1.0, 1.015],
            padding: 5.0,
            admm_iters: 2,
            mu_init: 1.0,
            mu_beta: 10.0,
            mu_max: 1e3,
            min_sample_px: 150.0,
            max_sample_px: 200.0,
            label_sigma_factor: 1.0 / 16.0,
            hann_window: true,
            features: FeatureSet::Mht,
            reliability: true,
            unmixing: UnmixingConfig::default(),
        }
    }
}

impl TrackerConfig {
    pub fn filter_params(&self) -> FilterParams {
        FilterParams {
            lambda: self.filter_lambda,
            mu_init: self.mu_init,
            beta: self.mu_beta,
            mu_max: self.mu_max,
            iters: self.admm_iters,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sshmg.validate()?;
        self.filter_params().validate()?;
        self.unmixing.admm.validate()?;
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidArgument(format!("eta must lie in [0, 1], got {}", self.eta)));
        }
        if self.scales.is_empty() || self.scales.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidArgument("scales must be a non-empty list of positive numbers".into()));
        }
        if !(self.padding >= 1.0 && self.padding.is_finite()) {
            return Err(Error::InvalidArgument(format!("padding must be >= 1, got {}", self.padding)));
        }
        if !(self.min_sample_px > 0.0 && self.max_sample_px >= self.min_sample_px) {
            return Err(Error::InvalidArgument("sample size range is invalid".into()));
        }
        if !(self.label_sigma_factor > 0.0) {
            return Err(Error::InvalidArgument("label_sigma_factor must be > 0".into()));
        }
        if let Some(l) = self.unmixing.unmix_lambda {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::InvalidArgument(format!("unmix_lambda must be >= 0, got {l}")));
            }
        }
        if self.unmixing.r == EndmemberCount::Fixed(0) {
            return Err(Error::InvalidArgument("R must be at least 1".into()));
        }
        Ok(())
    }

    pub fn groups(&self) -> Vec<GroupKind> {
        match self.features {
            FeatureSet::Mht => vec![GroupKind::Sshmg, GroupKind::Abundance],
            FeatureSet::SshmgOnly => vec![GroupKind::Sshmg],
            FeatureSet::AbundanceOnly => vec![GroupKind::Abundance],
        }
    }
}

/// Search-window geometry fixed at initialization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub base_w: f64,
    pub base_h: f64,
    /// Side of the square search region at unit scale, pixels.
    pub search_side: f64,
    /// Side of the resampled template, pixels (a multiple of the cell size).
    pub template_px: usize,
    pub cells: usize,
    pub cell_px: usize,
}

impl Geometry {
    pub fn new(bbox: &BoundingBox, cfg: &TrackerConfig) -> Self {
        let z = cfg.sshmg.z;
        let search_side = (cfg.padding * bbox.w * bbox.h).sqrt();
        let target = search_side.clamp(cfg.min_sample_px, cfg.max_sample_px);
        let cells = ((target / z as f64).round() as usize).max(2);
        Self {
            base_w: bbox.w,
            base_h: bbox.h,
            search_side,
            template_px: cells * z,
            cells,
            cell_px: z,
        }
    }

    /// Template pixels per frame pixel.
    pub fn sample_ratio(&self) -> f64 {
        self.template_px as f64 / self.search_side
    }

    /// Frame pixels spanned by one cell at scale factor `sf`.
    pub fn cell_size(&self, sf: f64) -> f64 {
        self.cell_px as f64 / self.sample_ratio() * sf
    }

    /// Target extent in whole cells.
    pub fn target_cells(&self) -> (usize, usize) {
        let r = self.sample_ratio() / self.cell_px as f64;
        (
            ((self.base_w * r).floor() as usize).clamp(1, self.cells),
            ((self.base_h * r).floor() as usize).clamp(1, self.cells),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureGroup {
    pub kind: GroupKind,
    pub channels: Range<usize>,
}

/// Feature planes of one search window in the Fourier domain.
#[derive(Clone, Debug)]
pub struct WindowFeatures {
    pub x_hat: Vec<Vec<Complex64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Detection {
    pub bbox: BoundingBox,
    pub scale: f64,
    pub peak: f64,
    pub group_boxes: Vec<BoundingBox>,
    /// Final response at the chosen scale, row-major over the cell grid,
    /// zero shift at index 0.
    pub response: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameLog {
    pub frame: usize,
    pub weights: Vec<f64>,
    pub scores: Option<Vec<ReliabilityScores>>,
    pub scale_factor: f64,
    pub peak: f64,
    pub millis: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndmemberLog {
    pub atoms: Vec<usize>,
    pub r: usize,
    pub hysime_raw: Option<usize>,
    pub hysime_degenerate: bool,
    pub unmix_lambda: f64,
    pub admm_iterations: usize,
    pub admm_converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub config: TrackerConfig,
    pub frames: usize,
    pub geometry: Geometry,
    pub groups: Vec<FeatureGroup>,
    pub endmembers: Option<EndmemberLog>,
    pub per_frame: Vec<FrameLog>,
    pub seconds: f64,
}

/// Tracker state carried between frames.
#[derive(Clone, Debug)]
pub struct Tracker {
    cfg: TrackerConfig,
    geometry: Geometry,
    frame_shape: (usize, usize, usize),
    groups: Vec<FeatureGroup>,
    endmembers: Option<EndmemberSet>,
    endmember_log: Option<EndmemberLog>,
    fft: Fft2,
    window: Option<Vec<f64>>,
    label: GaussianLabel,
    mask: CropMask,
    scale_factor: f64,
    bbox: BoundingBox,
    group_boxes: Vec<BoundingBox>,
    model: Vec<Vec<Complex64>>,
    weights: Vec<f64>,
    filters: Filters,
}

const MIN_SCALE_FACTOR: f64 = 0.25;
const MAX_SCALE_FACTOR: f64 = 4.0;

fn circular_peak(map: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &v) in map.iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

/// Sub-cell offset of a peak from a least-squares quadratic on its 3x3
/// (circular) neighbourhood; zero when the fit is not a maximum.
pub fn subgrid_offset(map: &[f64], n: usize, px: usize, py: usize) -> (f64, f64) {
    if n < 3 {
        return (0.0, 0.0);
    }
    let at = |dx: isize, dy: isize| {
        let x = (px as isize + dx).rem_euclid(n as isize) as usize;
        let y = (py as isize + dy).rem_euclid(n as isize) as usize;
        map[y * n + x]
    };
    let (mut b, mut c, mut d, mut e, mut g) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for dy in -1..=1isize {
        for dx in -1..=1isize {
            let v = at(dx, dy);
            let (x, y) = (dx as f64, dy as f64);
            b += x * v;
            c += y * v;
            d += (x * x - 2.0 / 3.0) * v;
            e += (y * y - 2.0 / 3.0) * v;
            g += x * y * v;
        }
    }
    // f = a + b x + c y + d x² + e y² + g xy after dividing by the basis norms
    let (b, c, d, e, g) = (b / 6.0, c / 6.0, d / 2.0, e / 2.0, g / 4.0);
    let (hxx, hyy, hxy) = (2.0 * d, 2.0 * e, g);
    let det = hxx * hyy - hxy * hxy;
    if !(hxx < 0.0 && det > 0.0) {
        return (0.0, 0.0);
    }
    let ox = (-b * hyy + c * hxy) / det;
    let oy = (-c * hxx + b * hxy) / det;
    (ox.clamp(-0.5, 0.5), oy.clamp(-0.5, 0.5))
}

/// Signed circular shift of index `i` on a ring of `n` cells.
fn signed_shift(i: usize, n: usize) -> f64 {
    let i = i as isize;
    let n = n as isize;
    if i > (n - 1) / 2 {
        (i - n) as f64
    } else {
        i as f64
    }
}

impl Tracker {
    /// Initializes on the first frame. Endmembers are selected from the
    /// target box when the abundance group is enabled.
    pub fn new(
        frame: &HyperspectralCube,
        bbox: BoundingBox,
        library: Option<&SpectralLibrary>,
        cfg: &TrackerConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        bbox.validate()?;
        let kinds = cfg.groups();
        let (endmembers, endmember_log) = if kinds.contains(&GroupKind::Abundance) {
            let lib = library.ok_or_else(|| {
                Error::InvalidArgument("abundance features need a spectral library".into())
            })?;
            let (e, log) = select_scene_endmembers(frame, &bbox, lib, cfg)?;
            (Some(e), Some(log))
        } else {
            (None, None)
        };
        let geometry = Geometry::new(&bbox, cfg);
        let n = geometry.cells;
        let (tw, th) = geometry.target_cells();
        let sigma = ((tw * th) as f64).sqrt() * cfg.label_sigma_factor;
        let label = make_label((n, n), (n / 2, n / 2), sigma)?;
        let mask = CropMask::centered(n, n, tw, th);

        let mut groups = Vec::with_capacity(kinds.len());
        let mut at = 0;
        for kind in kinds {
            let k = match kind {
                GroupKind::Sshmg => cfg.sshmg.channels(frame.bands()),
                GroupKind::Abundance => endmembers.as_ref().map_or(0, EndmemberSet::count),
            };
            groups.push(FeatureGroup {
                kind,
                channels: at..at + k,
            });
            at += k;
        }
        let weights = vec![1.0 / groups.len() as f64; groups.len()];
        let mut tracker = Self {
            cfg: cfg.clone(),
            geometry,
            frame_shape: (frame.width(), frame.height(), frame.bands()),
            group_boxes: vec![bbox; groups.len()],
            groups,
            endmembers,
            endmember_log,
            fft: Fft2::new(n, n),
            window: cfg.hann_window.then(|| hann_window(n, n)),
            label,
            mask,
            scale_factor: 1.0,
            bbox,
            model: Vec::new(),
            weights,
            filters: Filters {
                g_hat: Vec::new(),
                h: Vec::new(),
                zero_energy: true,
            },
        };
        tracker.model = tracker.extract(frame, bbox.cx, bbox.cy, 1.0)?.x_hat;
        tracker.relearn()?;
        Ok(tracker)
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn groups(&self) -> &[FeatureGroup] {
        &self.groups
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bbox(&self) -> BoundingBox {
        self.bbox
    }

    pub fn filters(&self) -> &Filters {
        &self.filters
    }

    pub fn endmembers(&self) -> Option<&EndmemberSet> {
        self.endmembers.as_ref()
    }

    pub fn label(&self) -> &GaussianLabel {
        &self.label
    }

    /// Overrides the group weights (renormalized) and relearns the filters.
    pub fn set_weights(&mut self, weights: &[f64]) -> Result<()> {
        if weights.len() != self.groups.len() || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidArgument("one nonnegative weight per group".into()));
        }
        let s: f64 = weights.iter().sum();
        if !(s > 0.0) {
            return Err(Error::InvalidArgument("weights sum to zero".into()));
        }
        self.weights = weights.iter().map(|w| w / s).collect();
        self.relearn()
    }

    /// Raw feature maps of the search window centered at `(cx, cy)` with
    /// scale factor `sf`, one per group.
    pub fn feature_maps(
        &self,
        frame: &HyperspectralCube,
        cx: f64,
        cy: f64,
        sf: f64,
    ) -> Result<Vec<FeatureMap>> {
        let g = &self.geometry;
        let side = g.search_side * sf;
        let t = frame.sample(cx, cy, side, side, g.template_px, g.template_px)?;
        self.groups
            .iter()
            .map(|grp| match grp.kind {
                GroupKind::Sshmg => sshmg(&t, &self.cfg.sshmg),
                GroupKind::Abundance => abundance_feature_map(
                    &t,
                    self.endmembers.as_ref().expect("abundance group has endmembers"),
                    self.cfg.sshmg.z,
                ),
            })
            .collect()
    }

    /// Windowed Fourier-domain features of all groups, concatenated.
    pub fn extract(
        &self,
        frame: &HyperspectralCube,
        cx: f64,
        cy: f64,
        sf: f64,
    ) -> Result<WindowFeatures> {
        let maps = self.feature_maps(frame, cx, cy, sf)?;
        let planes: Vec<Vec<f64>> = maps
            .iter()
            .flat_map(|m| (0..m.channels).map(move |c| m.channel_plane(c)))
            .collect();
        let x_hat = planes
            .into_par_iter()
            .map(|mut p| {
                if let Some(w) = &self.window {
                    p.iter_mut().zip(w).for_each(|(v, w)| *v *= w);
                }
                self.fft.forward_real(&p)
            })
            .collect();
        Ok(WindowFeatures { x_hat })
    }

    fn weighted(&self, x_hat: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let mut out = x_hat.to_vec();
        for (g, w) in self.groups.iter().zip(&self.weights) {
            for k in g.channels.clone() {
                out[k].iter_mut().for_each(|v| *v *= *w);
            }
        }
        out
    }

    fn relearn(&mut self) -> Result<()> {
        let x = self.weighted(&self.model);
        self.filters = learn_filters(&x, &self.label, self.mask, &self.fft, &self.cfg.filter_params())?;
        Ok(())
    }

    fn check_frame(&self, frame: &HyperspectralCube) -> Result<()> {
        if (frame.width(), frame.height(), frame.bands()) != self.frame_shape {
            return Err(Error::DimensionMismatch(format!(
                "frame is {}x{}x{}, tracker was initialized on {:?}",
                frame.width(),
                frame.height(),
                frame.bands(),
                self.frame_shape
            )));
        }
        Ok(())
    }

    fn locate(&self, map: &[f64], scale: f64) -> (BoundingBox, f64) {
        let n = self.geometry.cells;
        let (i, peak) = circular_peak(map);
        let (px, py) = (i % n, i / n);
        let (ox, oy) = subgrid_offset(map, n, px, py);
        let dx = signed_shift(px, n) + ox;
        let dy = signed_shift(py, n) + oy;
        let sf = (self.scale_factor * scale).clamp(MIN_SCALE_FACTOR, MAX_SCALE_FACTOR);
        let cell = self.geometry.cell_size(self.scale_factor * scale);
        let (w, h) = self.frame_shape_f();
        let cx = (self.bbox.cx + dx * cell).clamp(0.0, w);
        let cy = (self.bbox.cy + dy * cell).clamp(0.0, h);
        let b = BoundingBox {
            cx,
            cy,
            w: self.geometry.base_w * sf,
            h: self.geometry.base_h * sf,
        };
        (b, peak)
    }

    fn frame_shape_f(&self) -> (f64, f64) {
        (self.frame_shape.0 as f64, self.frame_shape.1 as f64)
    }

    /// Searches `frame` around the current box at every configured scale.
    pub fn detect(&self, frame: &HyperspectralCube) -> Result<Detection> {
        self.check_frame(frame)?;
        let per_scale: Vec<(Vec<f64>, Vec<Vec<f64>>)> = self
            .cfg
            .scales
            .par_iter()
            .map(|&s| {
                let feats = self.extract(frame, self.bbox.cx, self.bbox.cy, self.scale_factor * s)?;
                let mut total = vec![0.0; self.fft.len()];
                let mut per_group = Vec::with_capacity(self.groups.len());
                for (g, w) in self.groups.iter().zip(&self.weights) {
                    let r_hat = self.filters.response_hat(&feats.x_hat, g.channels.clone(), *w);
                    let r = self.fft.inverse_real(&r_hat);
                    total.iter_mut().zip(&r).for_each(|(t, v)| *t += v);
                    per_group.push(r);
                }
                Ok((total, per_group))
            })
            .collect::<Result<_>>()?;

        let best_scale = |maps: &mut dyn Iterator<Item = &Vec<f64>>| -> usize {
            let mut best = (0, f64::NEG_INFINITY);
            for (i, m) in maps.enumerate() {
                let (_, p) = circular_peak(m);
                if p > best.1 {
                    best = (i, p);
                }
            }
            best.0
        };
        let si = best_scale(&mut per_scale.iter().map(|(t, _)| t));
        let scale = self.cfg.scales[si];
        let (bbox, peak) = self.locate(&per_scale[si].0, scale);
        let group_boxes = (0..self.groups.len())
            .map(|g| {
                let gi = best_scale(&mut per_scale.iter().map(|(_, pg)| &pg[g]));
                self.locate(&per_scale[gi].1[g], self.cfg.scales[gi]).0
            })
            .collect();
        Ok(Detection {
            bbox,
            scale,
            peak,
            group_boxes,
            response: per_scale[si].0.clone(),
        })
    }

    /// Detect, update the reliabilities and the appearance model, relearn.
    pub fn update(&mut self, frame: &HyperspectralCube) -> Result<(Detection, Option<Vec<ReliabilityScores>>)> {
        let det = self.detect(frame)?;
        let (current, scores) = if self.cfg.reliability {
            let cell = self.geometry.cell_size(self.scale_factor * det.scale);
            let (w, s) = reliability_update(&det.group_boxes, &det.bbox, &self.group_boxes, cell)?;
            (Some(w), Some(s))
        } else {
            (None, None)
        };
        self.scale_factor = (self.scale_factor * det.scale).clamp(MIN_SCALE_FACTOR, MAX_SCALE_FACTOR);
        self.bbox = det.bbox;
        self.group_boxes = det.group_boxes.clone();

        let eta = self.cfg.eta;
        let fresh = self.extract(frame, self.bbox.cx, self.bbox.cy, self.scale_factor)?;
        for (m, x) in self.model.iter_mut().zip(&fresh.x_hat) {
            for (a, b) in m.iter_mut().zip(x) {
                *a = *a * (1.0 - eta) + b * eta;
            }
        }
        if let Some(w) = current {
            self.weights = blend_weights(&self.weights, &w, eta);
        }
        self.relearn()?;
        Ok((det, scores))
    }

    pub fn endmember_log(&self) -> Option<&EndmemberLog> {
        self.endmember_log.as_ref()
    }
}

/// Group-sparse regression of the target pixels against the library and
/// top-R atom selection.
pub fn select_scene_endmembers(
    frame: &HyperspectralCube,
    bbox: &BoundingBox,
    library: &SpectralLibrary,
    cfg: &TrackerConfig,
) -> Result<(EndmemberSet, EndmemberLog)> {
    if library.bands() != frame.bands() {
        return Err(Error::DimensionMismatch(format!(
            "library has {} bands, frames have {}",
            library.bands(),
            frame.bands()
        )));
    }
    let target = frame.crop(bbox, 1.0)?;
    let x = pixel_matrix(&target);
    let lambda = cfg.unmixing.unmix_lambda.unwrap_or_else(|| default_lambda(&x, library));
    let sol = clsunsal(&x, library, lambda, &cfg.unmixing.admm)?;
    let (r, raw, degenerate) = match cfg.unmixing.r {
        EndmemberCount::Fixed(r) => (r, None, false),
        EndmemberCount::Auto => {
            let est = hysime(&x, &NoiseEstimator::Regression)?;
            (est.r, Some(est.raw), est.degenerate)
        }
    };
    let r = r.min(library.atom_count());
    let e = select_endmembers(&sol.s, library, r)?;
    let log = EndmemberLog {
        atoms: e.source_indices.clone(),
        r,
        hysime_raw: raw,
        hysime_degenerate: degenerate,
        unmix_lambda: lambda,
        admm_iterations: sol.iterations,
        admm_converged: sol.converged,
    };
    Ok((e, log))
}

#[derive(Clone, Debug)]
pub struct TrackOutput {
    pub trajectory: Vec<BoundingBox>,
    pub metadata: RunMetadata,
}

/// One-pass tracking; the first box is the initialization box.
pub fn track(
    seq: &HyperspectralSequence,
    init: BoundingBox,
    library: Option<&SpectralLibrary>,
    cfg: &TrackerConfig,
) -> Result<TrackOutput> {
    let start = Instant::now();
    let mut tracker = Tracker::new(seq.first(), init, library, cfg)?;
    let mut trajectory = vec![init];
    let mut per_frame = vec![FrameLog {
        frame: 0,
        weights: tracker.weights().to_vec(),
        scores: None,
        scale_factor: 1.0,
        peak: f64::NAN,
        millis: start.elapsed().as_secs_f64() * 1e3,
    }];
    for (t, frame) in seq.frames().iter().enumerate().skip(1) {
        let t0 = Instant::now();
        let (det, scores) = tracker.update(frame)?;
        trajectory.push(det.bbox);
        per_frame.push(FrameLog {
            frame: t,
            weights: tracker.weights().to_vec(),
            scores,
            scale_factor: tracker.scale_factor,
            peak: det.peak,
            millis: t0.elapsed().as_secs_f64() * 1e3,
        });
    }
    let metadata = RunMetadata {
        config: cfg.clone(),
        frames: seq.len(),
        geometry: tracker.geometry,
        groups: tracker.groups.clone(),
        endmembers: tracker.endmember_log.clone(),
        per_frame,
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok(TrackOutput {
        trajectory,
        metadata,
    })
}
