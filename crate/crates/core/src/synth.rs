//! Synthetic hyperspectral scenes with known ground truth.
//!
//! Every pixel takes the spectrum of the region it falls in (background or
//! one of the objects), multiplied by a per-frame illumination scalar, plus
//! i.i.d. Gaussian noise per sample, clamped to `[0, 1]`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::cube::{linear_wavelengths, BoundingBox, HyperspectralCube, HyperspectralSequence};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Rectangle,
    Ellipse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneObject {
    pub spectrum: Vec<f64>,
    pub shape: Shape,
    /// Center `[x, y]` per frame, in pixels.
    pub centers: Vec<[f64; 2]>,
    /// Size `[w, h]` per frame, in pixels.
    pub sizes: Vec<[f64; 2]>,
    /// In-plane rotation per frame, radians. Ground truth ignores it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<Vec<f64>>,
}

impl SceneObject {
    fn contains(&self, t: usize, px: f64, py: f64) -> bool {
        let [cx, cy] = self.centers[t];
        let [w, h] = self.sizes[t];
        let (mut u, mut v) = (px - cx, py - cy);
        if let Some(angles) = &self.angles {
            let (s, c) = angles[t].sin_cos();
            (u, v) = (c * u + s * v, -s * u + c * v);
        }
        match self.shape {
            Shape::Rectangle => u.abs() <= w / 2.0 && v.abs() <= h / 2.0,
            Shape::Ellipse => {
                let (a, b) = (u / (w / 2.0), v / (h / 2.0));
                a * a + b * b <= 1.0
            }
        }
    }

    pub fn bbox(&self, t: usize) -> Result<BoundingBox> {
        let [cx, cy] = self.centers[t];
        let [w, h] = self.sizes[t];
        BoundingBox::new(cx, cy, w, h)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum BackgroundLayout {
    Uniform,
    /// Vertical stripes cycling through the background spectra.
    Stripes { width: usize },
    /// Square tiles cycling through the background spectra.
    Checker { tile: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub wavelengths: Vec<f64>,
    pub background: Vec<Vec<f64>>,
    pub layout: BackgroundLayout,
    /// Painted in order; object 0 is the tracked target.
    pub objects: Vec<SceneObject>,
    pub noise_std: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub illumination: Option<Vec<f64>>,
    pub frame_rate: f64,
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        let k = self.wavelengths.len();
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.frames == 0 || self.width == 0 || self.height == 0 {
            return bad("scene needs frames and a non-empty canvas".into());
        }
        if self.background.is_empty() {
            return bad("at least one background spectrum is required".into());
        }
        let spectra = self
            .background
            .iter()
            .chain(self.objects.iter().map(|o| &o.spectrum));
        for s in spectra {
            if s.len() != k {
                return bad(format!("spectrum has {} bands, expected {k}", s.len()));
            }
            if s.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return bad("spectra must be finite and nonnegative".into());
            }
        }
        if !(self.noise_std >= 0.0) {
            return bad("noise standard deviation must be nonnegative".into());
        }
        if let Some(ill) = &self.illumination {
            if ill.len() != self.frames {
                return bad("illumination needs one scalar per frame".into());
            }
        }
        match self.layout {
            BackgroundLayout::Stripes { width: 0 } | BackgroundLayout::Checker { tile: 0 } => {
                return bad("background tile size must be positive".into())
            }
            _ => {}
        }
        for (i, o) in self.objects.iter().enumerate() {
            if o.centers.len() != self.frames || o.sizes.len() != self.frames {
                return bad(format!("object {i} trajectory length differs from frame count"));
            }
            if let Some(a) = &o.angles {
                if a.len() != self.frames {
                    return bad(format!("object {i} has {} angles", a.len()));
                }
            }
            for t in 0..self.frames {
                let b = o.bbox(t)?;
                if b.right() <= 0.0
                    || b.bottom() <= 0.0
                    || b.left() >= self.width as f64
                    || b.top() >= self.height as f64
                {
                    return bad(format!("object {i} leaves the canvas entirely at frame {t}"));
                }
            }
        }
        Ok(())
    }

    fn background_index(&self, x: usize, y: usize) -> usize {
        let n = self.background.len();
        match self.layout {
            BackgroundLayout::Uniform => 0,
            BackgroundLayout::Stripes { width } => (x / width) % n,
            BackgroundLayout::Checker { tile } => (x / tile + y / tile) % n,
        }
    }
}

/// Renders the scene. Returns the sequence and the target's (object 0)
/// ground-truth boxes; with no objects the ground truth is empty.
pub fn synth_scene(
    cfg: &SceneConfig,
    seed: u64,
) -> Result<(HyperspectralSequence, Vec<BoundingBox>)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, cfg.noise_std)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let (w, h, k) = (cfg.width, cfg.height, cfg.wavelengths.len());

    let mut frames = Vec::with_capacity(cfg.frames);
    let mut region = vec![0usize; w * h];
    for t in 0..cfg.frames {
        // region id: 0..nbg for background, nbg + i for object i
        let nbg = cfg.background.len();
        for y in 0..h {
            for x in 0..w {
                let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
                let mut id = cfg.background_index(x, y);
                for (i, o) in cfg.objects.iter().enumerate() {
                    if o.contains(t, px, py) {
                        id = nbg + i;
                    }
                }
                region[y * w + x] = id;
            }
        }
        let gain = cfg.illumination.as_ref().map_or(1.0, |ill| ill[t]);
        let mut data = Vec::with_capacity(w * h * k);
        for b in 0..k {
            for &id in &region {
                let spectrum = if id < nbg {
                    &cfg.background[id]
                } else {
                    &cfg.objects[id - nbg].spectrum
                };
                let mut v = spectrum[b] * gain;
                if cfg.noise_std > 0.0 {
                    v += noise.sample(&mut rng);
                }
                data.push(v.clamp(0.0, 1.0) as f32);
            }
        }
        frames.push(HyperspectralCube::new(w, h, k, cfg.wavelengths.clone(), data)?);
    }
    let gt = match cfg.objects.first() {
        Some(o) => (0..cfg.frames).map(|t| o.bbox(t)).collect::<Result<_>>()?,
        None => Vec::new(),
    };
    Ok((HyperspectralSequence::new(frames, cfg.frame_rate)?, gt))
}

/// Spectral angle between two spectra, radians.
pub fn spectral_angle(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (dot / (na * nb)).clamp(-1.0, 1.0).acos()
}

/// Band-count and wavelength range of the simulated sensor (16 bands over
/// the visible range).
pub const SENSOR_BANDS: usize = 16;
pub const SENSOR_RANGE_NM: (f64, f64) = (470.0, 620.0);

pub fn sensor_wavelengths() -> Vec<f64> {
    linear_wavelengths(SENSOR_BANDS, SENSOR_RANGE_NM.0, SENSOR_RANGE_NM.1)
}

/// Named reflectance spectra used by the presets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Material {
    Foliage,
    RedPaint,
    BluePlastic,
    Sand,
    /// Same band-mean as `RedPaint` but a different spectral shape.
    GreenPaintMatched,
    Slate,
}

impl Material {
    pub const ALL: [Material; 6] = [
        Material::Foliage,
        Material::RedPaint,
        Material::BluePlastic,
        Material::Sand,
        Material::GreenPaintMatched,
        Material::Slate,
    ];

    pub fn spectrum(self, wavelengths: &[f64]) -> Vec<f64> {
        let bump = |base: f64, amp: f64, center: f64, width: f64| -> Vec<f64> {
            wavelengths
                .iter()
                .map(|l| base + amp * (-(l - center).powi(2) / (2.0 * width * width)).exp())
                .collect()
        };
        match self {
            Material::Foliage => bump(0.12, 0.40, 550.0, 22.0),
            Material::RedPaint => wavelengths
                .iter()
                .map(|l| 0.10 + 0.65 / (1.0 + (-(l - 585.0) / 12.0).exp()))
                .collect(),
            Material::BluePlastic => wavelengths
                .iter()
                .map(|l| 0.15 + 0.55 * (-(l - 470.0) / 60.0).exp())
                .collect(),
            Material::Sand => wavelengths
                .iter()
                .map(|l| 0.35 + 0.25 * (l - 470.0) / 150.0)
                .collect(),
            Material::GreenPaintMatched => {
                let target = Material::RedPaint.spectrum(wavelengths);
                let raw = bump(0.08, 0.7, 515.0, 28.0);
                let gain = mean(&target) / mean(&raw);
                raw.iter().map(|v| v * gain).collect()
            }
            Material::Slate => bump(0.22, 0.06, 600.0, 40.0),
        }
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Preset scenes reproducible from a single command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// Scene A: an ellipse moving on a straight line over a textured
    /// background.
    LinearMotion,
    /// Scene B: target and background share band-mean intensity but differ
    /// in spectral shape.
    SameColorClutter,
    /// Scene C: an elongated bar rotating in plane while drifting.
    InPlaneRotation,
    /// Static panel of pure material patches for library construction.
    MaterialPanel,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::LinearMotion,
        Preset::SameColorClutter,
        Preset::InPlaneRotation,
        Preset::MaterialPanel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::LinearMotion => "linear-motion",
            Preset::SameColorClutter => "same-color-clutter",
            Preset::InPlaneRotation => "in-plane-rotation",
            Preset::MaterialPanel => "material-panel",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|p| p.name()).collect();
                Error::InvalidArgument(format!(
                    "unknown preset {name:?}, expected one of {}",
                    names.join(", ")
                ))
            })
    }

    /// Attribute tags carried by the preset (OTB naming).
    pub fn attributes(self) -> Vec<String> {
        let tags: &[&str] = match self {
            Preset::LinearMotion => &[],
            Preset::SameColorClutter => &["BC"],
            Preset::InPlaneRotation => &["IPR"],
            Preset::MaterialPanel => &[],
        };
        tags.iter().map(|s| s.to_string()).collect()
    }

    pub fn config(self) -> SceneConfig {
        let wl = sensor_wavelengths();
        let spec = |m: Material| m.spectrum(&wl);
        let linear = |n: usize, start: [f64; 2], vel: [f64; 2]| -> Vec<[f64; 2]> {
            (0..n)
                .map(|t| [start[0] + vel[0] * t as f64, start[1] + vel[1] * t as f64])
                .collect()
        };
        let still = |n: usize, c: [f64; 2]| vec![c; n];
        match self {
            Preset::LinearMotion => {
                let n = 30;
                SceneConfig {
                    frames: n,
                    width: 128,
                    height: 96,
                    wavelengths: wl.clone(),
                    background: vec![spec(Material::Foliage), spec(Material::Sand)],
                    layout: BackgroundLayout::Checker { tile: 32 },
                    objects: vec![SceneObject {
                        spectrum: spec(Material::RedPaint),
                        shape: Shape::Ellipse,
                        centers: linear(n, [34.0, 38.0], [1.6, 0.7]),
                        sizes: vec![[22.0, 18.0]; n],
                        angles: None,
                    }],
                    noise_std: 0.01,
                    illumination: None,
                    frame_rate: 25.0,
                }
            }
            Preset::SameColorClutter => {
                let n = 40;
                SceneConfig {
                    frames: n,
                    width: 128,
                    height: 96,
                    wavelengths: wl.clone(),
                    background: vec![spec(Material::GreenPaintMatched)],
                    layout: BackgroundLayout::Uniform,
                    objects: vec![SceneObject {
                        spectrum: spec(Material::RedPaint),
                        shape: Shape::Ellipse,
                        centers: linear(n, [30.0, 44.0], [1.8, 0.35]),
                        sizes: vec![[22.0, 18.0]; n],
                        angles: None,
                    }],
                    noise_std: 0.01,
                    illumination: None,
                    frame_rate: 25.0,
                }
            }
            Preset::InPlaneRotation => {
                let n = 40;
                SceneConfig {
                    frames: n,
                    width: 128,
                    height: 96,
                    wavelengths: wl.clone(),
                    background: vec![spec(Material::Slate)],
                    layout: BackgroundLayout::Uniform,
                    objects: vec![SceneObject {
                        spectrum: spec(Material::BluePlastic),
                        shape: Shape::Rectangle,
                        centers: linear(n, [50.0, 46.0], [0.8, 0.2]),
                        sizes: vec![[30.0, 12.0]; n],
                        angles: Some(
                            (0..n)
                                .map(|t| std::f64::consts::FRAC_PI_2 * t as f64 / (n - 1) as f64)
                                .collect(),
                        ),
                    }],
                    noise_std: 0.01,
                    illumination: None,
                    frame_rate: 25.0,
                }
            }
            Preset::MaterialPanel => {
                let patches: Vec<SceneObject> = Material::ALL
                    .iter()
                    .enumerate()
                    .map(|(i, &m)| SceneObject {
                        spectrum: spec(m),
                        shape: Shape::Rectangle,
                        centers: still(1, [16.0 + 32.0 * (i % 3) as f64, 16.0 + 32.0 * (i / 3) as f64]),
                        sizes: vec![[24.0, 24.0]],
                        angles: None,
                    })
                    .collect();
                SceneConfig {
                    frames: 1,
                    width: 96,
                    height: 64,
                    wavelengths: wl.clone(),
                    background: vec![spec(Material::Slate)],
                    layout: BackgroundLayout::Uniform,
                    objects: patches,
                    noise_std: 0.005,
                    illumination: None,
                    frame_rate: 25.0,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn static_cfg(noise: f64) -> SceneConfig {
        let wl = sensor_wavelengths();
        SceneConfig {
            frames: 4,
            width: 24,
            height: 20,
            wavelengths: wl.clone(),
            background: vec![Material::Foliage.spectrum(&wl)],
            layout: BackgroundLayout::Uniform,
            objects: vec![SceneObject {
                spectrum: Material::RedPaint.spectrum(&wl),
                shape: Shape::Rectangle,
                centers: vec![[12.0, 10.0]; 4],
                sizes: vec![[6.0, 4.0]; 4],
                angles: None,
            }],
            noise_std: noise,
            illumination: None,
            frame_rate: 10.0,
        }
    }

    #[test]
    fn static_noise_free_scene_repeats() {
        let (seq, gt) = synth_scene(&static_cfg(0.0), 3).unwrap();
        for f in seq.frames() {
            assert_eq!(f, seq.first());
        }
        assert!(gt.iter().all(|b| *b == gt[0]));
        assert_eq!(gt[0], BoundingBox::new(12.0, 10.0, 6.0, 4.0).unwrap());
    }

    #[test]
    fn seed_determinism() {
        let cfg = Preset::LinearMotion.config();
        let a = synth_scene(&cfg, 11).unwrap();
        let b = synth_scene(&cfg, 11).unwrap();
        assert_eq!(a, b);
        let c = synth_scene(&cfg, 12).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn matched_materials_hide_in_band_mean() {
        let mut cfg = Preset::SameColorClutter.config();
        cfg.noise_std = 0.0;
        cfg.frames = 1;
        cfg.objects[0].centers.truncate(1);
        cfg.objects[0].sizes.truncate(1);
        let (seq, _) = synth_scene(&cfg, 0).unwrap();
        let gray = seq.first().band_mean_replicated();
        let band0 = gray.band(0);
        let max = band0.iter().cloned().fold(f32::MIN, f32::max);
        let min = band0.iter().cloned().fold(f32::MAX, f32::min);
        assert!(((max - min) as f64) < 1e-6, "contrast {}", max - min);

        let obj = &cfg.objects[0].spectrum;
        assert!(spectral_angle(obj, &cfg.background[0]) > 0.1);
        let [cx, cy] = cfg.objects[0].centers[0];
        let inside = seq.first().spectrum(cx as usize, cy as usize);
        let outside = seq.first().spectrum(2, 2);
        assert!(spectral_angle(&inside, &outside) > 0.1);
    }

    #[test]
    fn object_leaving_canvas_is_rejected() {
        let mut cfg = static_cfg(0.0);
        cfg.objects[0].centers[2] = [200.0, 10.0];
        assert!(synth_scene(&cfg, 0).is_err());
    }

    #[test]
    fn presets_validate() {
        for p in Preset::ALL {
            p.config().validate().unwrap();
            assert_eq!(Preset::from_name(p.name()).unwrap(), p);
        }
        assert!(Preset::from_name("nope").is_err());
    }

    #[test]
    fn illumination_scales_noise_free_pixels() {
        let mut cfg = static_cfg(0.0);
        cfg.illumination = Some(vec![1.0, 0.5, 1.0, 1.0]);
        let (seq, _) = synth_scene(&cfg, 0).unwrap();
        let a = seq.frames()[0].get(1, 1, 3);
        let b = seq.frames()[1].get(1, 1, 3);
        assert!((a * 0.5 - b).abs() < 1e-7);
    }
}
