//! Background-aware correlation filter learning.
//!
//! With `D` grid cells, `K` channels and `h ⋆ x (τ) = Σ_p h(p) x(p + τ)`,
//! the filter minimizes
//!
//! ```text
//! E(h) = ½ ‖y − Σ_k h_k ⋆ x_k‖² + λ/2 ‖h‖²,   h_k supported on the crop P
//! ```
//!
//! ADMM splits `g = h` with `g` free in the Fourier domain. Using the
//! unnormalized DFT (`F[h ⋆ x] = conj(ĥ)·x̂`) and penalty `ρ = D·μ`:
//!
//! ```text
//! g-step, per frequency:  (ρI + x̂x̂ᴴ) ĝ = x̂·conj(ŷ) − l̂ + ρĥ
//! h-step, spatial:        h = P[(ρg + l) / (ρ + λ)]
//! multiplier:             l̂ ← l̂ + ρ(ĝ − ĥ)
//! ```
//!
//! The g-step is solved with the Sherman–Morrison identity.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft::Fft2;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Desired correlation output with its peak moved to the grid origin.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianLabel {
    pub width: usize,
    pub height: usize,
    pub sigma: f64,
    /// Row-major, peak (value 1) at index 0.
    pub values: Vec<f64>,
}

impl GaussianLabel {
    /// The label before the circular shift, peaked at `center`.
    pub fn centered(&self, center: (usize, usize)) -> Vec<f64> {
        let (w, h) = (self.width, self.height);
        let mut out = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let sx = (x + w - center.0) % w;
                let sy = (y + h - center.1) % h;
                out[y * w + x] = self.values[sy * w + sx];
            }
        }
        out
    }
}

pub fn make_label(
    grid: (usize, usize),
    center: (usize, usize),
    sigma: f64,
) -> Result<GaussianLabel> {
    let (w, h) = grid;
    if w == 0 || h == 0 {
        return Err(Error::InvalidArgument("label grid is empty".into()));
    }
    if center.0 >= w || center.1 >= h {
        return Err(Error::InvalidArgument(format!(
            "label center {center:?} is off the {w}x{h} grid"
        )));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("label sigma must be > 0, got {sigma}")));
    }
    let mut values = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let dx = x as f64 - center.0 as f64;
            let dy = y as f64 - center.1 as f64;
            let v = (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp();
            let sx = (x + w - center.0) % w;
            let sy = (y + h - center.1) % h;
            values[sy * w + sx] = v;
        }
    }
    Ok(GaussianLabel {
        width: w,
        height: h,
        sigma,
        values,
    })
}

/// Separable Hann window over the cell grid.
pub fn hann_window(width: usize, height: usize) -> Vec<f64> {
    let hann = |n: usize| -> Vec<f64> {
        if n == 1 {
            return vec![1.0];
        }
        (0..n)
            .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
            .collect()
    };
    let wx = hann(width);
    let wy = hann(height);
    wy.iter().flat_map(|a| wx.iter().map(move |b| a * b)).collect()
}

/// Rectangular filter support on the cell grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CropMask {
    pub grid_w: usize,
    pub grid_h: usize,
    pub x0: usize,
    pub y0: usize,
    pub w: usize,
    pub h: usize,
}

impl CropMask {
    /// `w x h` support centered on cell `(grid_w/2, grid_h/2)`.
    pub fn centered(grid_w: usize, grid_h: usize, w: usize, h: usize) -> Self {
        let w = w.clamp(1, grid_w);
        let h = h.clamp(1, grid_h);
        let x0 = (grid_w / 2).saturating_sub(w / 2).min(grid_w - w);
        let y0 = (grid_h / 2).saturating_sub(h / 2).min(grid_h - h);
        Self {
            grid_w,
            grid_h,
            x0,
            y0,
            w,
            h,
        }
    }

    pub fn full(grid_w: usize, grid_h: usize) -> Self {
        Self {
            grid_w,
            grid_h,
            x0: 0,
            y0: 0,
            w: grid_w,
            h: grid_h,
        }
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        let (x, y) = (i % self.grid_w, i / self.grid_w);
        x >= self.x0 && x < self.x0 + self.w && y >= self.y0 && y < self.y0 + self.h
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterParams {
    pub lambda: f64,
    pub mu_init: f64,
    pub beta: f64,
    pub mu_max: f64,
    pub iters: usize,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            lambda: 0.01,
            mu_init: 1.0,
            beta: 10.0,
            mu_max: 1e3,
            iters: 2,
        }
    }
}

impl FilterParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument("filter lambda must be >= 0".into()));
        }
        if !(self.mu_init > 0.0 && self.mu_max >= self.mu_init && self.beta >= 1.0) {
            return Err(Error::InvalidArgument(
                "filter penalty schedule needs mu_init > 0, beta >= 1, mu_max >= mu_init".into(),
            ));
        }
        if self.iters == 0 {
            return Err(Error::InvalidArgument("filter ADMM needs at least 1 iteration".into()));
        }
        Ok(())
    }
}

/// Learned filters, one plane per channel.
#[derive(Clone, Debug, PartialEq)]
pub struct Filters {
    /// Fourier-domain filters used for detection.
    pub g_hat: Vec<Vec<Complex64>>,
    /// Spatial filters supported on the crop.
    pub h: Vec<Vec<f64>>,
    /// Set when every feature was zero and the filters are trivially zero.
    pub zero_energy: bool,
}

impl Filters {
    pub fn channels(&self) -> usize {
        self.g_hat.len()
    }

    /// Correlation response `Σ_k conj(ĝ_k)·x̂_k` over `channels`, in the
    /// Fourier domain.
    pub fn response_hat(
        &self,
        x_hat: &[Vec<Complex64>],
        channels: std::ops::Range<usize>,
        scale: f64,
    ) -> Vec<Complex64> {
        let d = x_hat.first().map_or(0, |v| v.len());
        let mut r = vec![ZERO; d];
        for k in channels {
            for ((acc, g), x) in r.iter_mut().zip(&self.g_hat[k]).zip(&x_hat[k]) {
                *acc += g.conj() * x * scale;
            }
        }
        r
    }
}

/// ADMM state for one learning problem; exposed step by step so the
/// augmented Lagrangian can be inspected between block updates.
pub struct FilterAdmm<'a> {
    x_hat: &'a [Vec<Complex64>],
    y_hat: Vec<Complex64>,
    mask: CropMask,
    fft: &'a Fft2,
    pub lambda: f64,
    pub rho: f64,
    pub g_hat: Vec<Vec<Complex64>>,
    pub h_hat: Vec<Vec<Complex64>>,
    pub h: Vec<Vec<f64>>,
    pub l_hat: Vec<Vec<Complex64>>,
}

impl<'a> FilterAdmm<'a> {
    pub fn new(
        x_hat: &'a [Vec<Complex64>],
        label: &GaussianLabel,
        mask: CropMask,
        fft: &'a Fft2,
        lambda: f64,
        rho: f64,
    ) -> Result<Self> {
        let d = fft.len();
        if label.values.len() != d || mask.grid_w * mask.grid_h != d {
            return Err(Error::DimensionMismatch("label, crop and grid disagree".into()));
        }
        if let Some(k) = x_hat.iter().position(|c| c.len() != d) {
            return Err(Error::DimensionMismatch(format!(
                "feature channel {k} is not on the {d}-cell grid"
            )));
        }
        let k = x_hat.len();
        Ok(Self {
            x_hat,
            y_hat: fft.forward_real(&label.values),
            mask,
            fft,
            lambda,
            rho,
            g_hat: vec![vec![ZERO; d]; k],
            h_hat: vec![vec![ZERO; d]; k],
            h: vec![vec![0.0; d]; k],
            l_hat: vec![vec![ZERO; d]; k],
        })
    }

    pub fn g_step(&mut self) {
        let d = self.fft.len();
        let k = self.x_hat.len();
        let rho = self.rho;
        let mut v = vec![ZERO; k];
        for i in 0..d {
            let y = self.y_hat[i].conj();
            let mut xv = ZERO;
            let mut xx = 0.0;
            for c in 0..k {
                let x = self.x_hat[c][i];
                v[c] = x * y - self.l_hat[c][i] + self.h_hat[c][i] * rho;
                xv += x.conj() * v[c];
                xx += x.norm_sqr();
            }
            let s = xv / (rho + xx);
            for c in 0..k {
                self.g_hat[c][i] = (v[c] - self.x_hat[c][i] * s) / rho;
            }
        }
    }

    pub fn h_step(&mut self) {
        let denom = self.rho + self.lambda;
        for c in 0..self.x_hat.len() {
            let g = self.fft.inverse_real(&self.g_hat[c]);
            let l = self.fft.inverse_real(&self.l_hat[c]);
            let h = &mut self.h[c];
            for (i, hv) in h.iter_mut().enumerate() {
                *hv = if self.mask.contains(i) {
                    (self.rho * g[i] + l[i]) / denom
                } else {
                    0.0
                };
            }
            self.h_hat[c] = self.fft.forward_real(h);
        }
    }

    pub fn multiplier_step(&mut self) {
        let rho = self.rho;
        for c in 0..self.x_hat.len() {
            for ((l, g), h) in self.l_hat[c].iter_mut().zip(&self.g_hat[c]).zip(&self.h_hat[c]) {
                *l += (g - h) * rho;
            }
        }
    }

    /// Augmented Lagrangian in spatial-domain units.
    pub fn lagrangian(&self) -> f64 {
        let d = self.fft.len();
        let dn = d as f64;
        let mut fit = 0.0;
        for i in 0..d {
            let mut e = self.y_hat[i];
            for c in 0..self.x_hat.len() {
                e -= self.g_hat[c][i].conj() * self.x_hat[c][i];
            }
            fit += e.norm_sqr();
        }
        let reg: f64 = self.h.iter().flatten().map(|v| v * v).sum();
        let mut lin = 0.0;
        let mut pen = 0.0;
        for c in 0..self.x_hat.len() {
            for i in 0..d {
                let diff = self.g_hat[c][i] - self.h_hat[c][i];
                lin += (self.l_hat[c][i].conj() * diff).re;
                pen += diff.norm_sqr();
            }
        }
        fit / (2.0 * dn) + self.lambda / 2.0 * reg + lin / dn + self.rho / (2.0 * dn) * pen
    }

    /// Primal objective `E(h)` at the current spatial filter.
    pub fn objective(&self) -> f64 {
        let d = self.fft.len();
        let mut fit = 0.0;
        for i in 0..d {
            let mut e = self.y_hat[i];
            for c in 0..self.x_hat.len() {
                e -= self.h_hat[c][i].conj() * self.x_hat[c][i];
            }
            fit += e.norm_sqr();
        }
        let reg: f64 = self.h.iter().flatten().map(|v| v * v).sum();
        fit / (2.0 * d as f64) + self.lambda / 2.0 * reg
    }

    pub fn into_filters(self) -> Filters {
        Filters {
            g_hat: self.g_hat,
            h: self.h,
            zero_energy: false,
        }
    }
}

/// Runs `params.iters` ADMM iterations from a zero start, growing the
/// penalty `μ ← min(β·μ, μ_max)` after each iteration.
pub fn learn_filters(
    x_hat: &[Vec<Complex64>],
    label: &GaussianLabel,
    mask: CropMask,
    fft: &Fft2,
    params: &FilterParams,
) -> Result<Filters> {
    params.validate()?;
    let d = fft.len();
    if x_hat.iter().flatten().all(|v| *v == ZERO) {
        return Ok(Filters {
            g_hat: vec![vec![ZERO; d]; x_hat.len()],
            h: vec![vec![0.0; d]; x_hat.len()],
            zero_energy: true,
        });
    }
    let dn = d as f64;
    let mut mu = params.mu_init;
    let mut admm = FilterAdmm::new(x_hat, label, mask, fft, params.lambda, dn * mu)?;
    for _ in 0..params.iters {
        admm.rho = dn * mu;
        admm.g_step();
        admm.h_step();
        admm.multiplier_step();
        mu = (params.beta * mu).min(params.mu_max);
    }
    Ok(admm.into_filters())
}
