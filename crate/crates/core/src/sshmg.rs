//! Spectral-spatial histogram of multidimensional gradients.
//!
//! The descriptor is built in four stages:
//!
//! 1. central differences along x, y and the band axis, converted to a
//!    magnitude plus a spatial angle `theta` in `[0, 2pi)` and a spectral
//!    elevation `phi` in `[-pi/2, pi/2]`;
//! 2. hard quantization of both angles into `n_theta` / `n_phi` bins;
//! 3. per `z x z x z` cube, magnitude-weighted orientation histograms;
//! 4. 2x2 spatial blocks of cube histograms, L2-normalized, clipped at
//!    `alpha` and renormalized, then concatenated over spectral slabs.
//!
//! Borders use edge replication both for the difference filter and for the
//! block neighbourhood of the last row and column of cells.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::cube::HyperspectralCube;
use crate::error::{Error, Result};
use crate::feature_map::FeatureMap;

/// Guard below which a block vector is treated as empty.
pub const NORM_EPS: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SshmgParams {
    /// Cube edge length in samples; also the feature cell size in pixels.
    pub z: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    /// Truncation threshold applied after the first normalization.
    pub alpha: f64,
}

impl Default for SshmgParams {
    fn default() -> Self {
        Self {
            z: 4,
            n_theta: 9,
            n_phi: 4,
            alpha: 0.2,
        }
    }
}

impl SshmgParams {
    pub fn validate(&self) -> Result<()> {
        if self.z < 2 || self.n_theta == 0 || self.n_phi == 0 {
            return Err(Error::InvalidArgument(format!(
                "need z >= 2 and at least one bin per angle, got {self:?}"
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Number of cells covering `n` samples.
    pub fn cells(&self, n: usize) -> usize {
        (n - 1) / self.z + 1
    }

    /// Length of one block vector (one spectral slab).
    pub fn block_len(&self) -> usize {
        4 * (self.n_theta + self.n_phi)
    }

    /// Channel count of the final map for a cube with `bands` bands.
    pub fn channels(&self, bands: usize) -> usize {
        self.block_len() * self.cells(bands)
    }
}

/// Gradient magnitude and orientation per sample, in the cube's
/// band-sequential layout.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientField {
    pub width: usize,
    pub height: usize,
    pub bands: usize,
    pub magnitude: Vec<f64>,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
}

impl GradientField {
    #[inline]
    pub fn index(&self, x: usize, y: usize, k: usize) -> usize {
        (k * self.height + y) * self.width + x
    }
}

/// Converts one gradient vector to `(magnitude, theta, phi)`.
///
/// `theta = atan2(gy, gx)` wrapped to `[0, 2pi)`; `phi = atan2(gk, |g_xy|)`,
/// which is `+-pi/2` for a purely spectral gradient. Both angles are zero
/// when the magnitude is zero.
pub fn spherical(gx: f64, gy: f64, gk: f64) -> (f64, f64, f64) {
    let rho = gx.hypot(gy);
    let m = (gx * gx + gy * gy + gk * gk).sqrt();
    if m == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let mut theta = gy.atan2(gx);
    if theta < 0.0 {
        theta += TAU;
    }
    (m, theta, gk.atan2(rho))
}

pub fn gradients(cube: &HyperspectralCube) -> Result<GradientField> {
    let (w, h, k) = (cube.width(), cube.height(), cube.bands());
    if w < 3 || h < 3 || k < 3 {
        return Err(Error::InvalidArgument(format!(
            "gradient filter needs at least 3 samples per axis, cube is {w}x{h}x{k}"
        )));
    }
    let n = w * h * k;
    let mut magnitude = vec![0.0; n];
    let mut theta = vec![0.0; n];
    let mut phi = vec![0.0; n];
    let data = cube.data();
    let plane = w * h;
    for b in 0..k {
        let bp = if b + 1 < k { b + 1 } else { b };
        let bm = b.saturating_sub(1);
        for y in 0..h {
            let yp = if y + 1 < h { y + 1 } else { y };
            let ym = y.saturating_sub(1);
            for x in 0..w {
                let xp = if x + 1 < w { x + 1 } else { x };
                let xm = x.saturating_sub(1);
                let at = |xx: usize, yy: usize, bb: usize| data[bb * plane + yy * w + xx] as f64;
                let gx = at(xp, y, b) - at(xm, y, b);
                let gy = at(x, yp, b) - at(x, ym, b);
                let gk = at(x, y, bp) - at(x, y, bm);
                let i = b * plane + y * w + x;
                (magnitude[i], theta[i], phi[i]) = spherical(gx, gy, gk);
            }
        }
    }
    Ok(GradientField {
        width: w,
        height: h,
        bands: k,
        magnitude,
        theta,
        phi,
    })
}

/// `round(n * theta / 2pi) mod n`.
pub fn theta_bin(theta: f64, n_theta: usize) -> usize {
    let r = (n_theta as f64 * theta / TAU).round() as i64;
    r.rem_euclid(n_theta as i64) as usize
}

/// `round(n * (phi + pi/2) / pi) mod n`; the shift keeps the argument
/// nonnegative.
pub fn phi_bin(phi: f64, n_phi: usize) -> usize {
    let r = (n_phi as f64 * (phi + FRAC_PI_2) / PI).round() as i64;
    r.rem_euclid(n_phi as i64) as usize
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrientationBins {
    pub theta: Vec<usize>,
    pub phi: Vec<usize>,
}

pub fn quantize_orientations(g: &GradientField, p: &SshmgParams) -> OrientationBins {
    OrientationBins {
        theta: g.theta.iter().map(|&t| theta_bin(t, p.n_theta)).collect(),
        phi: g.phi.iter().map(|&f| phi_bin(f, p.n_phi)).collect(),
    }
}

/// Point-level one-hot histograms: `f_theta[i * n_theta + b]` is the
/// magnitude of point `i` if `b` is its bin, zero otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct PointFeatures {
    pub width: usize,
    pub height: usize,
    pub bands: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub f_theta: Vec<f64>,
    pub f_phi: Vec<f64>,
}

pub fn point_features(g: &GradientField, bins: &OrientationBins, p: &SshmgParams) -> PointFeatures {
    let n = g.magnitude.len();
    let mut f_theta = vec![0.0; n * p.n_theta];
    let mut f_phi = vec![0.0; n * p.n_phi];
    for i in 0..n {
        f_theta[i * p.n_theta + bins.theta[i]] = g.magnitude[i];
        f_phi[i * p.n_phi + bins.phi[i]] = g.magnitude[i];
    }
    PointFeatures {
        width: g.width,
        height: g.height,
        bands: g.bands,
        n_theta: p.n_theta,
        n_phi: p.n_phi,
        f_theta,
        f_phi,
    }
}

/// Cube-level histograms on a `cells_x x cells_y x slabs` grid, indexed
/// `((s * cells_y + j) * cells_x + i) * n + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct CubeFeatures {
    pub cells_x: usize,
    pub cells_y: usize,
    pub slabs: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub c_theta: Vec<f64>,
    pub c_phi: Vec<f64>,
}

impl CubeFeatures {
    fn empty(width: usize, height: usize, bands: usize, p: &SshmgParams) -> Self {
        let (cx, cy, cs) = (p.cells(width), p.cells(height), p.cells(bands));
        Self {
            cells_x: cx,
            cells_y: cy,
            slabs: cs,
            n_theta: p.n_theta,
            n_phi: p.n_phi,
            c_theta: vec![0.0; cx * cy * cs * p.n_theta],
            c_phi: vec![0.0; cx * cy * cs * p.n_phi],
        }
    }

    #[inline]
    pub fn cell_index(&self, i: usize, j: usize, s: usize) -> usize {
        (s * self.cells_y + j) * self.cells_x + i
    }

    pub fn theta_hist(&self, i: usize, j: usize, s: usize) -> &[f64] {
        let c = self.cell_index(i, j, s) * self.n_theta;
        &self.c_theta[c..c + self.n_theta]
    }

    pub fn phi_hist(&self, i: usize, j: usize, s: usize) -> &[f64] {
        let c = self.cell_index(i, j, s) * self.n_phi;
        &self.c_phi[c..c + self.n_phi]
    }
}

/// Sums point-level features over non-overlapping `z^3` cubes. Partial
/// cubes at the far borders keep whatever points they contain.
pub fn aggregate_cubes(f: &PointFeatures, p: &SshmgParams) -> CubeFeatures {
    let mut out = CubeFeatures::empty(f.width, f.height, f.bands, p);
    for k in 0..f.bands {
        for y in 0..f.height {
            for x in 0..f.width {
                let pt = (k * f.height + y) * f.width + x;
                let c = out.cell_index(x / p.z, y / p.z, k / p.z);
                for b in 0..p.n_theta {
                    out.c_theta[c * p.n_theta + b] += f.f_theta[pt * p.n_theta + b];
                }
                for b in 0..p.n_phi {
                    out.c_phi[c * p.n_phi + b] += f.f_phi[pt * p.n_phi + b];
                }
            }
        }
    }
    out
}

/// Same result as `aggregate_cubes(point_features(..))` without
/// materializing the one-hot point vectors.
pub fn aggregate_from_bins(
    g: &GradientField,
    bins: &OrientationBins,
    p: &SshmgParams,
) -> CubeFeatures {
    let mut out = CubeFeatures::empty(g.width, g.height, g.bands, p);
    for k in 0..g.bands {
        for y in 0..g.height {
            for x in 0..g.width {
                let pt = g.index(x, y, k);
                let m = g.magnitude[pt];
                if m == 0.0 {
                    continue;
                }
                let c = out.cell_index(x / p.z, y / p.z, k / p.z);
                out.c_theta[c * p.n_theta + bins.theta[pt]] += m;
                out.c_phi[c * p.n_phi + bins.phi[pt]] += m;
            }
        }
    }
    out
}

/// L2-normalize, clip at `alpha`, renormalize. Vectors whose norm falls
/// below [`NORM_EPS`] at either normalization become zero.
pub fn normalize_block(v: &mut [f64], alpha: f64) {
    fn unit(v: &mut [f64]) -> bool {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n < NORM_EPS {
            v.iter_mut().for_each(|x| *x = 0.0);
            return false;
        }
        v.iter_mut().for_each(|x| *x /= n);
        true
    }
    if !unit(v) {
        return;
    }
    v.iter_mut().for_each(|x| *x = x.min(alpha));
    unit(v);
}

/// Overlapping 2x2 spatial blocks per spectral slab, normalized and
/// concatenated over slabs into one channel vector per cell.
pub fn block_features(c: &CubeFeatures, p: &SshmgParams) -> Result<FeatureMap> {
    if c.cells_x < 2 || c.cells_y < 2 {
        return Err(Error::InvalidArgument(format!(
            "block normalization needs a 2x2 cell grid, got {}x{}",
            c.cells_x, c.cells_y
        )));
    }
    let block_len = p.block_len();
    let mut map = FeatureMap::zeros(c.cells_x, c.cells_y, block_len * c.slabs);
    for j in 0..c.cells_y {
        let j1 = (j + 1).min(c.cells_y - 1);
        for i in 0..c.cells_x {
            let i1 = (i + 1).min(c.cells_x - 1);
            let out = map.cell_mut(i, j);
            for s in 0..c.slabs {
                let v = &mut out[s * block_len..(s + 1) * block_len];
                let mut at = 0;
                for (bi, bj) in [(i, j), (i1, j), (i, j1), (i1, j1)] {
                    for src in [c.theta_hist(bi, bj, s), c.phi_hist(bi, bj, s)] {
                        v[at..at + src.len()].copy_from_slice(src);
                        at += src.len();
                    }
                }
                normalize_block(v, p.alpha);
            }
        }
    }
    Ok(map)
}

/// Full descriptor on a `ceil(W/z) x ceil(H/z)` cell grid.
pub fn sshmg(cube: &HyperspectralCube, p: &SshmgParams) -> Result<FeatureMap> {
    p.validate()?;
    let g = gradients(cube)?;
    let bins = quantize_orientations(&g, p);
    let cubes = aggregate_from_bins(&g, &bins, p);
    block_features(&cubes, p)
}
