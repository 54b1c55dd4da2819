//! Hyperspectral cubes, bounding boxes and sequences.
//!
//! Cube samples are stored as `f32` in band-sequential order (band-major,
//! then row-major within a band), mirroring the on-disk `.hsb` layout so
//! that reading and writing are bit-exact. Numerical work downstream is done
//! in `f64`.

use crate::error::{Error, Result};

/// A `W x H x K` reflectance cube.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperspectralCube {
    width: usize,
    height: usize,
    bands: usize,
    wavelengths: Vec<f64>,
    data: Vec<f32>,
}

impl HyperspectralCube {
    pub fn new(
        width: usize,
        height: usize,
        bands: usize,
        wavelengths: Vec<f64>,
        data: Vec<f32>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "cube must have a non-empty spatial extent, got {width}x{height}"
            )));
        }
        if bands < 2 {
            return Err(Error::InvalidArgument(format!(
                "cube needs at least 2 bands, got {bands}"
            )));
        }
        if wavelengths.len() != bands {
            return Err(Error::DimensionMismatch(format!(
                "{} wavelengths for {bands} bands",
                wavelengths.len()
            )));
        }
        if wavelengths.windows(2).any(|w| !(w[1] > w[0])) || wavelengths.iter().any(|w| !w.is_finite())
        {
            return Err(Error::InvalidArgument(
                "wavelengths must be finite and strictly increasing".into(),
            ));
        }
        let expected = width * height * bands;
        if data.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "cube data has {} values, expected {expected}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite sample at flat index {pos}"
            )));
        }
        Ok(Self {
            width,
            height,
            bands,
            wavelengths,
            data,
        })
    }

    /// Builds a cube by evaluating `f(x, y, k)` at every sample.
    pub fn from_fn(
        width: usize,
        height: usize,
        wavelengths: Vec<f64>,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        let bands = wavelengths.len();
        let mut data = Vec::with_capacity(width * height * bands);
        for k in 0..bands {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(x, y, k));
                }
            }
        }
        Self::new(width, height, bands, wavelengths, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    /// Raw samples in band-sequential order.
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, k: usize) -> usize {
        (k * self.height + y) * self.width + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, k: usize) -> f32 {
        self.data[self.index(x, y, k)]
    }

    /// Sample with edge replication for out-of-range spatial coordinates.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize, k: usize) -> f32 {
        let xc = x.clamp(0, self.width as isize - 1) as usize;
        let yc = y.clamp(0, self.height as isize - 1) as usize;
        self.get(xc, yc, k)
    }

    /// One band as a row-major `W x H` plane.
    pub fn band(&self, k: usize) -> &[f32] {
        let plane = self.width * self.height;
        &self.data[k * plane..(k + 1) * plane]
    }

    pub fn spectrum(&self, x: usize, y: usize) -> Vec<f64> {
        (0..self.bands).map(|k| self.get(x, y, k) as f64).collect()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.bands == other.bands
            && self.wavelengths == other.wavelengths
    }

    /// Applies `f` to every sample, keeping geometry and wavelengths.
    pub fn map(&self, f: impl Fn(f32) -> f32) -> Result<Self> {
        Self::new(
            self.width,
            self.height,
            self.bands,
            self.wavelengths.clone(),
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn scaled(&self, c: f32) -> Result<Self> {
        self.map(|v| v * c)
    }

    /// Replaces every spectrum by its band mean, replicated over all bands.
    ///
    /// This is the grayscale view of the scene kept in cube form so it can
    /// flow through the same feature pipeline.
    pub fn band_mean_replicated(&self) -> Self {
        let plane = self.width * self.height;
        let mut mean = vec![0.0f64; plane];
        for k in 0..self.bands {
            for (m, &v) in mean.iter_mut().zip(self.band(k)) {
                *m += v as f64;
            }
        }
        let mean: Vec<f32> = mean
            .into_iter()
            .map(|m| (m / self.bands as f64) as f32)
            .collect();
        let mut data = Vec::with_capacity(self.data.len());
        for _ in 0..self.bands {
            data.extend_from_slice(&mean);
        }
        Self {
            data,
            ..self.clone()
        }
    }

    /// Extracts a `w x h` window whose top-left pixel is `(x0, y0)`, using
    /// edge replication for pixels outside the frame.
    pub fn window(&self, x0: isize, y0: isize, w: usize, h: usize) -> Result<Self> {
        if w == 0 || h == 0 {
            return Err(Error::InvalidArgument("empty window".into()));
        }
        let mut data = Vec::with_capacity(w * h * self.bands);
        for k in 0..self.bands {
            for y in 0..h {
                for x in 0..w {
                    data.push(self.get_clamped(x0 + x as isize, y0 + y as isize, k));
                }
            }
        }
        Self::new(w, h, self.bands, self.wavelengths.clone(), data)
    }

    /// Crops the region covered by `bbox` scaled by `pad_factor` about its
    /// center. Output size is `round(pad * w) x round(pad * h)`; pixels
    /// outside the frame are filled by edge replication.
    pub fn crop(&self, bbox: &BoundingBox, pad_factor: f64) -> Result<Self> {
        if !(pad_factor >= 1.0) || !pad_factor.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "pad factor must be >= 1, got {pad_factor}"
            )));
        }
        if bbox.right() <= 0.0
            || bbox.bottom() <= 0.0
            || bbox.left() >= self.width as f64
            || bbox.top() >= self.height as f64
        {
            return Err(Error::InvalidArgument(format!(
                "box {bbox:?} lies entirely outside the {}x{} frame",
                self.width, self.height
            )));
        }
        let out_w = ((pad_factor * bbox.w).round() as usize).max(1);
        let out_h = ((pad_factor * bbox.h).round() as usize).max(1);
        let (x0, y0) = window_origin(bbox.cx, bbox.cy, out_w, out_h);
        self.window(x0, y0, out_w, out_h)
    }

    /// Bilinear spatial resampling to `new_w x new_h` (pixel-center aligned).
    pub fn resize(&self, new_w: usize, new_h: usize) -> Result<Self> {
        if new_w == 0 || new_h == 0 {
            return Err(Error::InvalidArgument("resize target is empty".into()));
        }
        if new_w == self.width && new_h == self.height {
            return Ok(self.clone());
        }
        let xs = resample_taps(self.width, new_w);
        let ys = resample_taps(self.height, new_h);
        let mut data = Vec::with_capacity(new_w * new_h * self.bands);
        for k in 0..self.bands {
            let band = self.band(k);
            for &(y0, y1, ty) in &ys {
                for &(x0, x1, tx) in &xs {
                    let a = band[y0 * self.width + x0] as f64;
                    let b = band[y0 * self.width + x1] as f64;
                    let c = band[y1 * self.width + x0] as f64;
                    let d = band[y1 * self.width + x1] as f64;
                    let top = a + (b - a) * tx;
                    let bottom = c + (d - c) * tx;
                    data.push((top + (bottom - top) * ty) as f32);
                }
            }
        }
        Self::new(new_w, new_h, self.bands, self.wavelengths.clone(), data)
    }

    /// Bilinearly samples the `src_w x src_h` region centered at `(cx, cy)`
    /// onto a `dst_w x dst_h` grid; outside pixels replicate the edge.
    pub fn sample(
        &self,
        cx: f64,
        cy: f64,
        src_w: f64,
        src_h: f64,
        dst_w: usize,
        dst_h: usize,
    ) -> Result<Self> {
        if dst_w == 0 || dst_h == 0 || !(src_w > 0.0) || !(src_h > 0.0) {
            return Err(Error::InvalidArgument("sample region is empty".into()));
        }
        if !(cx.is_finite() && cy.is_finite()) {
            return Err(Error::InvalidArgument("sample center is not finite".into()));
        }
        let taps = |c: f64, src: f64, dst: usize, n: usize| -> Vec<(usize, usize, f64)> {
            let step = src / dst as f64;
            let last = (n - 1) as f64;
            (0..dst)
                .map(|i| {
                    let s = (c - src / 2.0 + (i as f64 + 0.5) * step - 0.5).clamp(0.0, last);
                    let i0 = s.floor() as usize;
                    (i0, (i0 + 1).min(n - 1), s - i0 as f64)
                })
                .collect()
        };
        let xs = taps(cx, src_w, dst_w, self.width);
        let ys = taps(cy, src_h, dst_h, self.height);
        let mut data = Vec::with_capacity(dst_w * dst_h * self.bands);
        for k in 0..self.bands {
            let band = self.band(k);
            for &(y0, y1, ty) in &ys {
                for &(x0, x1, tx) in &xs {
                    let a = band[y0 * self.width + x0] as f64;
                    let b = band[y0 * self.width + x1] as f64;
                    let c = band[y1 * self.width + x0] as f64;
                    let d = band[y1 * self.width + x1] as f64;
                    let top = a + (b - a) * tx;
                    let bottom = c + (d - c) * tx;
                    data.push((top + (bottom - top) * ty) as f32);
                }
            }
        }
        Self::new(dst_w, dst_h, self.bands, self.wavelengths.clone(), data)
    }
}

/// Top-left pixel of a `w x h` window centered at `(cx, cy)`.
pub(crate) fn window_origin(cx: f64, cy: f64, w: usize, h: usize) -> (isize, isize) {
    (
        (cx - w as f64 / 2.0).round() as isize,
        (cy - h as f64 / 2.0).round() as isize,
    )
}

fn resample_taps(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    let ratio = src as f64 / dst as f64;
    (0..dst)
        .map(|i| {
            let s = ((i as f64 + 0.5) * ratio - 0.5).clamp(0.0, (src - 1) as f64);
            let i0 = s.floor() as usize;
            let i1 = (i0 + 1).min(src - 1);
            (i0, i1, s - i0 as f64)
        })
        .collect()
}

/// Evenly spaced band centers over `[start, end]` nanometres.
pub fn linear_wavelengths(bands: usize, start: f64, end: f64) -> Vec<f64> {
    if bands == 1 {
        return vec![start];
    }
    let step = (end - start) / (bands - 1) as f64;
    (0..bands).map(|k| start + step * k as f64).collect()
}

/// Axis-aligned box in center form. Boxes may extend past frame edges.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoundingBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl BoundingBox {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        let b = Self { cx, cy, w, h };
        b.validate()?;
        Ok(b)
    }

    /// From the `x,y,w,h` top-left convention used by annotation files.
    pub fn from_top_left(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        Self::new(x + w / 2.0, y + h / 2.0, w, h)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cx.is_finite() && self.cy.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite box center {self:?}")));
        }
        if !(self.w > 0.0 && self.h > 0.0) || !self.w.is_finite() || !self.h.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "box width and height must be positive, got {}x{}",
                self.w, self.h
            )));
        }
        Ok(())
    }

    pub fn left(&self) -> f64 {
        self.cx - self.w / 2.0
    }

    pub fn top(&self) -> f64 {
        self.cy - self.h / 2.0
    }

    pub fn right(&self) -> f64 {
        self.cx + self.w / 2.0
    }

    pub fn bottom(&self) -> f64 {
        self.cy + self.h / 2.0
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn to_top_left(&self) -> [f64; 4] {
        [self.left(), self.top(), self.w, self.h]
    }

    pub fn center_distance(&self, other: &Self) -> f64 {
        (self.cx - other.cx).hypot(self.cy - other.cy)
    }

    pub fn with_center(&self, cx: f64, cy: f64) -> Self {
        Self { cx, cy, ..*self }
    }
}

/// Ordered frames sharing one geometry and wavelength grid.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperspectralSequence {
    frames: Vec<HyperspectralCube>,
    frame_rate: f64,
}

impl HyperspectralSequence {
    pub fn new(frames: Vec<HyperspectralCube>, frame_rate: f64) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::InvalidArgument("a sequence needs at least one frame".into()))?;
        if let Some(i) = frames.iter().position(|f| !f.same_shape(first)) {
            return Err(Error::DimensionMismatch(format!(
                "frame {i} differs in shape from frame 0"
            )));
        }
        if !(frame_rate > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "frame rate must be positive, got {frame_rate}"
            )));
        }
        Ok(Self { frames, frame_rate })
    }

    pub fn frames(&self) -> &[HyperspectralCube] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn first(&self) -> &HyperspectralCube {
        &self.frames[0]
    }

    /// Applies a per-frame transform, e.g. the band-mean ablation.
    pub fn map_frames(
        &self,
        f: impl Fn(&HyperspectralCube) -> HyperspectralCube,
    ) -> Result<Self> {
        Self::new(self.frames.iter().map(f).collect(), self.frame_rate)
    }
}
