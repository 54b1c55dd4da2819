//! Radiometric preprocessing and false-color rendering.
//!
//! The bundled colour-matching functions live in
//! `data/cie2006_xyz_10deg.txt`: `#` comment lines, then one row per
//! wavelength with four whitespace-separated columns
//! `wavelength_nm x_bar y_bar z_bar`, wavelengths strictly increasing.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::cube::HyperspectralCube;
use crate::error::{Error, Result};

const BUNDLED_CMFS: &str = include_str!("../data/cie2006_xyz_10deg.txt");

/// Linear sRGB from XYZ, D65 white.
const XYZ_TO_SRGB: [[f64; 3]; 3] = [
    [3.2404542, -1.5371385, -0.4985314],
    [-0.9692660, 1.8760108, 0.0415560],
    [0.0556434, -0.2040259, 1.0572252],
];

/// Tabulated colour-matching functions on their native wavelength grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CmfData {
    pub wavelengths: Vec<f64>,
    pub values: Vec<[f64; 3]>,
}

impl CmfData {
    pub fn parse(text: &str, source: &Path) -> Result<Self> {
        let mut wavelengths = Vec::new();
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse {
                path: source.to_path_buf(),
                line: i + 1,
                msg,
            };
            let nums: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| err(format!("{t:?}: {e}"))))
                .collect::<Result<_>>()?;
            if nums.len() != 4 {
                return Err(err(format!("expected 4 columns, found {}", nums.len())));
            }
            if nums.iter().any(|v| !v.is_finite()) || nums[1..].iter().any(|v| *v < 0.0) {
                return Err(err("values must be finite and weights nonnegative".into()));
            }
            if wavelengths.last().is_some_and(|&w| nums[0] <= w) {
                return Err(err("wavelengths must increase strictly".into()));
            }
            wavelengths.push(nums[0]);
            values.push([nums[1], nums[2], nums[3]]);
        }
        if wavelengths.len() < 2 {
            return Err(Error::Format(format!("{}: CMF table needs at least two rows", source.display())));
        }
        Ok(Self {
            wavelengths,
            values,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// CIE 2006 10-degree observer, 390–830 nm at 1 nm.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_CMFS, Path::new("<bundled cmfs>")).expect("bundled table is valid")
    }
}

/// CMF weights aligned to a cube's bands: row `k` is `A(k, :)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CmfTable {
    wavelengths: Vec<f64>,
    rows: Vec<[f64; 3]>,
}

impl CmfTable {
    pub fn new(wavelengths: Vec<f64>, rows: Vec<[f64; 3]>) -> Result<Self> {
        if wavelengths.len() != rows.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} wavelengths for {} CMF rows",
                wavelengths.len(),
                rows.len()
            )));
        }
        if rows.iter().flatten().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidArgument("CMF weights must be finite and nonnegative".into()));
        }
        Ok(Self { wavelengths, rows })
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    pub fn rows(&self) -> &[[f64; 3]] {
        &self.rows
    }

    fn check(&self, cube: &HyperspectralCube) -> Result<()> {
        let aligned = self.wavelengths.len() == cube.bands()
            && self
                .wavelengths
                .iter()
                .zip(cube.wavelengths())
                .all(|(a, b)| (a - b).abs() <= 1e-9 * b.abs().max(1.0));
        if aligned {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(
                "CMF table is not aligned to the cube wavelengths".into(),
            ))
        }
    }
}

/// Linear interpolation of each CMF at each requested wavelength.
pub fn resample_cmfs(raw: &CmfData, wavelengths: &[f64]) -> Result<CmfTable> {
    let (lo, hi) = (raw.wavelengths[0], *raw.wavelengths.last().unwrap());
    let mut rows = Vec::with_capacity(wavelengths.len());
    for &w in wavelengths {
        if !(w >= lo && w <= hi) {
            return Err(Error::InvalidArgument(format!(
                "wavelength {w} nm is outside the CMF table ({lo}–{hi} nm)"
            )));
        }
        let j = raw.wavelengths.partition_point(|&x| x <= w);
        let row = if j == raw.wavelengths.len() {
            raw.values[j - 1]
        } else if raw.wavelengths[j - 1] == w {
            raw.values[j - 1]
        } else {
            let (w0, w1) = (raw.wavelengths[j - 1], raw.wavelengths[j]);
            let t = (w - w0) / (w1 - w0);
            let (a, b) = (raw.values[j - 1], raw.values[j]);
            [0, 1, 2].map(|c| a[c] + t * (b[c] - a[c]))
        };
        rows.push(row);
    }
    CmfTable::new(wavelengths.to_vec(), rows)
}

/// `max(raw − dark, 0)` clamped to `[0, 1]`.
pub fn dark_calibrate(raw: &HyperspectralCube, dark: &HyperspectralCube) -> Result<HyperspectralCube> {
    if !raw.same_shape(dark) {
        return Err(Error::DimensionMismatch("dark frame and raw cube differ in shape".into()));
    }
    let data = raw
        .data()
        .iter()
        .zip(dark.data())
        .map(|(r, d)| (r - d).clamp(0.0, 1.0))
        .collect();
    HyperspectralCube::new(raw.width(), raw.height(), raw.bands(), raw.wavelengths().to_vec(), data)
}

/// Sensor-specific `K x K` correction applied to every spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrectionMatrix(DMatrix<f64>);

impl CorrectionMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch("correction matrix must be square".into()));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("correction matrix must be finite".into()));
        }
        Ok(Self(m))
    }

    pub fn identity(bands: usize) -> Self {
        Self(DMatrix::identity(bands, bands))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Replaces each spectrum `s` with `C·s`, clamped to `[0, 1]`.
pub fn spectral_correct(cube: &HyperspectralCube, c: &CorrectionMatrix) -> Result<HyperspectralCube> {
    let k = cube.bands();
    if c.0.nrows() != k {
        return Err(Error::DimensionMismatch(format!(
            "correction matrix is {0}x{0}, cube has {k} bands",
            c.0.nrows()
        )));
    }
    let n = cube.width() * cube.height();
    let src = cube.data();
    let mut data = vec![0f32; n * k];
    data.par_chunks_mut(n).enumerate().for_each(|(i, out)| {
        for (p, o) in out.iter_mut().enumerate() {
            let v: f64 = (0..k).map(|j| c.0[(i, j)] * src[j * n + p] as f64).sum();
            *o = v.clamp(0.0, 1.0) as f32;
        }
    });
    HyperspectralCube::new(cube.width(), cube.height(), k, cube.wavelengths().to_vec(), data)
}

/// Row-major `W x H` image of three-channel pixels.
#[derive(Clone, Debug, PartialEq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[f64; 3]>,
}

/// `Σ_k X(:, k)·A(k, :)` divided by `Σ_k ȳ_k`, so a unit flat spectrum has
/// `Y = 1`.
pub fn xyz_stage(cube: &HyperspectralCube, cmfs: &CmfTable) -> Result<RgbImage> {
    cmfs.check(cube)?;
    let ysum: f64 = cmfs.rows.iter().map(|r| r[1]).sum();
    if !(ysum > 0.0) {
        return Err(Error::InvalidArgument("CMF luminance weights sum to zero".into()));
    }
    let n = cube.width() * cube.height();
    let src = cube.data();
    let pixels = (0..n)
        .into_par_iter()
        .map(|p| {
            let mut xyz = [0.0; 3];
            for (k, row) in cmfs.rows.iter().enumerate() {
                let v = src[k * n + p] as f64;
                for c in 0..3 {
                    xyz[c] += v * row[c];
                }
            }
            xyz.map(|v| v / ysum)
        })
        .collect();
    Ok(RgbImage {
        width: cube.width(),
        height: cube.height(),
        pixels,
    })
}

fn srgb_gamma(v: f64) -> f64 {
    if v <= 0.0031308 {
        12.92 * v
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    }
}

pub fn xyz_to_srgb(xyz: [f64; 3]) -> [f64; 3] {
    XYZ_TO_SRGB.map(|row| {
        let lin = row[0] * xyz[0] + row[1] * xyz[1] + row[2] * xyz[2];
        srgb_gamma(lin.clamp(0.0, 1.0)).clamp(0.0, 1.0)
    })
}

pub fn to_false_color(cube: &HyperspectralCube, cmfs: &CmfTable) -> Result<RgbImage> {
    let mut img = xyz_stage(cube, cmfs)?;
    img.pixels.iter_mut().for_each(|p| *p = xyz_to_srgb(*p));
    Ok(img)
}

fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Binary PPM (P6, 8-bit); values are clamped to `[0, 1]`.
pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend(img.pixels.iter().flat_map(|p| p.map(to_byte)));
    out
}

/// Binary PGM (P5, 8-bit) of a row-major plane; values are clamped to `[0, 1]`.
pub fn encode_pgm(width: usize, height: usize, plane: &[f64]) -> Result<Vec<u8>> {
    if plane.len() != width * height {
        return Err(Error::DimensionMismatch(format!(
            "plane has {} values for a {width}x{height} image",
            plane.len()
        )));
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(plane.iter().map(|&v| to_byte(v)));
    Ok(out)
}

pub fn write_ppm(path: &Path, img: &RgbImage) -> Result<()> {
    fs::write(path, encode_ppm(img)).map_err(|e| Error::io(path, e))
}

pub fn write_pgm(path: &Path, width: usize, height: usize, plane: &[f64]) -> Result<()> {
    fs::write(path, encode_pgm(width, height, plane)?).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::linear_wavelengths;

    fn cube_from(w: usize, h: usize, wl: Vec<f64>, f: impl FnMut(usize, usize, usize) -> f32) -> HyperspectralCube {
        HyperspectralCube::from_fn(w, h, wl, f).unwrap()
    }

    #[test]
    fn bundled_table_covers_the_visible_range() {
        let t = CmfData::bundled();
        assert_eq!(t.wavelengths[0], 390.0);
        assert_eq!(*t.wavelengths.last().unwrap(), 830.0);
        assert_eq!(t.wavelengths.len(), 441);
        let peak = t.values.iter().map(|v| v[1]).fold(0.0, f64::max);
        assert!((peak - 1.0).abs() < 1e-3);
    }

    #[test]
    fn resample_knots_and_midpoints() {
        let raw = CmfData {
            wavelengths: vec![500.0, 510.0, 520.0],
            values: vec![[0.0, 1.0, 2.0], [1.0, 3.0, 0.0], [2.0, 2.0, 2.0]],
        };
        let t = resample_cmfs(&raw, &[500.0, 505.0, 520.0, 515.0]).unwrap();
        assert_eq!(t.rows(), &[[0.0, 1.0, 2.0], [0.5, 2.0, 1.0], [2.0, 2.0, 2.0], [1.5, 2.5, 1.0]]);
        assert!(resample_cmfs(&raw, &[499.0]).is_err());
        assert!(resample_cmfs(&raw, &[520.5]).is_err());
    }

    #[test]
    fn parse_rejects_bad_rows() {
        let p = Path::new("t.txt");
        assert!(CmfData::parse("500 1 2\n510 1 2 3\n", p).is_err());
        assert!(CmfData::parse("500 1 2 3\n500 1 2 3\n", p).is_err());
        assert!(CmfData::parse("500 1 -2 3\n510 1 2 3\n", p).is_err());
        assert!(CmfData::parse("# only\n500 1 2 3\n", p).is_err());
    }

    #[test]
    fn dark_calibration() {
        let wl = linear_wavelengths(3, 500.0, 600.0);
        let raw = cube_from(3, 2, wl.clone(), |x, y, k| 0.1 * (x + y + k) as f32);
        let zero = cube_from(3, 2, wl.clone(), |_, _, _| 0.0);
        assert!(dark_calibrate(&raw, &raw).unwrap().data().iter().all(|&v| v == 0.0));
        assert_eq!(dark_calibrate(&raw, &zero).unwrap(), raw);
        let bright = cube_from(3, 2, wl, |_, _, _| 0.3);
        let out = dark_calibrate(&raw, &bright).unwrap();
        assert_eq!(out.get(0, 0, 0), 0.0);
        assert!(out.data().iter().all(|&v| v >= 0.0));
        let other = cube_from(2, 2, linear_wavelengths(3, 500.0, 600.0), |_, _, _| 0.0);
        assert!(dark_calibrate(&raw, &other).is_err());
    }

    #[test]
    fn correction_identity_and_zero() {
        let wl = linear_wavelengths(4, 500.0, 600.0);
        let cube = cube_from(3, 3, wl, |x, y, k| 0.05 * (x * 3 + y + k) as f32);
        assert_eq!(spectral_correct(&cube, &CorrectionMatrix::identity(4)).unwrap(), cube);
        let zero = CorrectionMatrix::new(DMatrix::zeros(4, 4)).unwrap();
        assert!(spectral_correct(&cube, &zero).unwrap().data().iter().all(|&v| v == 0.0));
        assert!(spectral_correct(&cube, &CorrectionMatrix::identity(3)).is_err());
    }

    #[test]
    fn zero_cube_is_black() {
        let wl = linear_wavelengths(4, 480.0, 600.0);
        let cmfs = resample_cmfs(&CmfData::bundled(), &wl).unwrap();
        let img = to_false_color(&cube_from(2, 2, wl, |_, _, _| 0.0), &cmfs).unwrap();
        assert!(img.pixels.iter().all(|p| *p == [0.0; 3]));
        let ppm = encode_ppm(&img);
        assert!(ppm.starts_with(b"P6\n2 2\n255\n"));
        assert_eq!(ppm.len(), 11 + 12);
    }

    #[test]
    fn misaligned_cmfs_are_rejected() {
        let cmfs = resample_cmfs(&CmfData::bundled(), &linear_wavelengths(4, 480.0, 600.0)).unwrap();
        let cube = cube_from(2, 2, linear_wavelengths(4, 470.0, 600.0), |_, _, _| 0.5);
        assert!(to_false_color(&cube, &cmfs).is_err());
    }

    #[test]
    fn pgm_header_and_size_check() {
        let bytes = encode_pgm(2, 1, &[0.0, 1.0]).unwrap();
        assert_eq!(bytes, b"P5\n2 1\n255\n\x00\xff".to_vec());
        assert!(encode_pgm(2, 2, &[0.0]).is_err());
    }
}
