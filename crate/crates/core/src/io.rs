//! Sequence and annotation files.
//!
//! A sequence directory holds `meta.json` plus one `NNNNN.hsb` file per
//! frame. An `.hsb` file is a 16-byte header (magic `HSB1`, then width,
//! height and band count as little-endian `u32`) followed by `W*H*K`
//! little-endian `f32` samples in band-sequential order.
//!
//! Annotation and result files hold one `x,y,w,h` line per frame in the
//! top-left convention; boxes are converted to center form in memory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cube::{BoundingBox, HyperspectralCube, HyperspectralSequence};
use crate::error::{Error, Result};

pub const HSB_MAGIC: &[u8; 4] = b"HSB1";
pub const HSB_HEADER_LEN: usize = 16;
pub const META_FILE: &str = "meta.json";
pub const GROUNDTRUTH_FILE: &str = "groundtruth_rect.txt";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceMeta {
    pub width: usize,
    pub height: usize,
    pub bands: usize,
    pub wavelengths_nm: Vec<f64>,
    pub frame_rate: f64,
    pub frame_count: usize,
}

pub fn frame_file_name(index: usize) -> String {
    format!("{index:05}.hsb")
}

/// Serializes one cube to `.hsb` bytes.
pub fn encode_hsb(cube: &HyperspectralCube) -> Vec<u8> {
    let mut out = Vec::with_capacity(HSB_HEADER_LEN + cube.data().len() * 4);
    out.extend_from_slice(HSB_MAGIC);
    for dim in [cube.width(), cube.height(), cube.bands()] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    for v in cube.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Parses `.hsb` bytes; `wavelengths` comes from the sequence metadata.
pub fn decode_hsb(bytes: &[u8], wavelengths: Vec<f64>) -> Result<HyperspectralCube> {
    if bytes.len() < HSB_HEADER_LEN {
        return Err(Error::Format(format!(
            "file too short for header ({} bytes)",
            bytes.len()
        )));
    }
    if &bytes[..4] != HSB_MAGIC {
        return Err(Error::Format("bad magic, expected HSB1".into()));
    }
    let dim = |i: usize| {
        u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize
    };
    let (w, h, k) = (dim(0), dim(1), dim(2));
    let payload = &bytes[HSB_HEADER_LEN..];
    let expected = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(k))
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::Format("header dimensions overflow".into()))?;
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "payload is {} bytes, header {w}x{h}x{k} needs {expected}",
            payload.len()
        )));
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    HyperspectralCube::new(w, h, k, wavelengths, data)
}

pub fn write_cube(cube: &HyperspectralCube, path: &Path) -> Result<()> {
    fs::write(path, encode_hsb(cube)).map_err(|e| Error::io(path, e))
}

pub fn read_cube(path: &Path, wavelengths: Vec<f64>) -> Result<HyperspectralCube> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_hsb(&bytes, wavelengths)
}

pub fn write_sequence(seq: &HyperspectralSequence, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let first = seq.first();
    let meta = SequenceMeta {
        width: first.width(),
        height: first.height(),
        bands: first.bands(),
        wavelengths_nm: first.wavelengths().to_vec(),
        frame_rate: seq.frame_rate(),
        frame_count: seq.len(),
    };
    write_json(&dir.join(META_FILE), &meta)?;
    for (i, frame) in seq.frames().iter().enumerate() {
        write_cube(frame, &dir.join(frame_file_name(i)))?;
    }
    Ok(())
}

pub fn load_sequence(dir: &Path) -> Result<HyperspectralSequence> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut indices = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if let Some(stem) = name.strip_suffix(".hsb") {
            if let Ok(i) = stem.parse::<usize>() {
                indices.push(i);
            }
        }
    }
    if indices.is_empty() {
        return Err(Error::Format(format!("no frames found in {}", dir.display())));
    }
    indices.sort_unstable();

    let meta_path = dir.join(META_FILE);
    let meta: SequenceMeta = read_json(&meta_path)?;
    if meta.wavelengths_nm.len() != meta.bands {
        return Err(Error::Format(format!(
            "{}: {} wavelengths for {} bands",
            meta_path.display(),
            meta.wavelengths_nm.len(),
            meta.bands
        )));
    }
    if indices.len() != meta.frame_count || indices.iter().enumerate().any(|(i, &n)| i != n) {
        return Err(Error::Format(format!(
            "expected frames 0..{} in {}, found {} frame files",
            meta.frame_count,
            dir.display(),
            indices.len()
        )));
    }

    let mut frames = Vec::with_capacity(meta.frame_count);
    for i in 0..meta.frame_count {
        let path = dir.join(frame_file_name(i));
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let cube = decode_hsb(&bytes, meta.wavelengths_nm.clone())
            .map_err(|e| Error::Format(format!("frame {i} ({}): {e}", path.display())))?;
        if (cube.width(), cube.height(), cube.bands()) != (meta.width, meta.height, meta.bands) {
            return Err(Error::Format(format!(
                "frame {i} is {}x{}x{}, metadata says {}x{}x{}",
                cube.width(),
                cube.height(),
                cube.bands(),
                meta.width,
                meta.height,
                meta.bands
            )));
        }
        frames.push(cube);
    }
    HyperspectralSequence::new(frames, meta.frame_rate)
}

/// Parses `x,y,w,h` lines (comma, tab or whitespace separated). Blank lines
/// are skipped.
pub fn parse_boxes(text: &str, path: &Path) -> Result<Vec<BoundingBox>> {
    let mut boxes = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: n + 1,
            msg,
        };
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if fields.len() != 4 {
            return Err(err(format!("expected 4 fields, found {}", fields.len())));
        }
        let mut v = [0.0f64; 4];
        for (slot, f) in v.iter_mut().zip(&fields) {
            *slot = f
                .parse::<f64>()
                .map_err(|_| err(format!("not a number: {f:?}")))?;
        }
        let b = BoundingBox::from_top_left(v[0], v[1], v[2], v[3]).map_err(|e| err(e.to_string()))?;
        boxes.push(b);
    }
    Ok(boxes)
}

pub fn load_groundtruth(path: &Path) -> Result<Vec<BoundingBox>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_boxes(&text, path)
}

pub fn format_boxes(boxes: &[BoundingBox]) -> String {
    let mut s = String::new();
    for b in boxes {
        let [x, y, w, h] = b.to_top_left();
        s.push_str(&format!("{x},{y},{w},{h}\n"));
    }
    s
}

pub fn write_boxes(path: &Path, boxes: &[BoundingBox]) -> Result<()> {
    fs::write(path, format_boxes(boxes)).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    Ok(dir.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::linear_wavelengths;

    fn cube(w: usize, h: usize, k: usize, seed: u32) -> HyperspectralCube {
        HyperspectralCube::from_fn(w, h, linear_wavelengths(k, 470.0, 620.0), |x, y, b| {
            let v = (x as u32 * 7 + y as u32 * 13 + b as u32 * 31 + seed) % 97;
            v as f32 / 97.0 + 1e-3
        })
        .unwrap()
    }

    #[test]
    fn three_frame_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let seq =
            HyperspectralSequence::new((0..3).map(|i| cube(8, 8, 4, i)).collect(), 25.0).unwrap();
        write_sequence(&seq, dir.path()).unwrap();
        let back = load_sequence(dir.path()).unwrap();
        assert_eq!(back, seq);
        assert_eq!(back.first().wavelengths(), seq.first().wavelengths());
    }

    #[test]
    fn truncated_frame_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let seq =
            HyperspectralSequence::new((0..3).map(|i| cube(8, 8, 4, i)).collect(), 25.0).unwrap();
        write_sequence(&seq, dir.path()).unwrap();
        let p = dir.path().join(frame_file_name(2));
        let mut bytes = fs::read(&p).unwrap();
        bytes.truncate(bytes.len() - 4);
        fs::write(&p, bytes).unwrap();
        let err = load_sequence(dir.path()).unwrap_err().to_string();
        assert!(err.contains("frame 2"), "{err}");
    }

    #[test]
    fn empty_directory() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_sequence(dir.path()).unwrap_err().to_string();
        assert!(err.contains("no frames found"), "{err}");
    }

    #[test]
    fn missing_frame_file() {
        let dir = tempfile::tempdir().unwrap();
        let seq =
            HyperspectralSequence::new((0..3).map(|i| cube(4, 4, 3, i)).collect(), 25.0).unwrap();
        write_sequence(&seq, dir.path()).unwrap();
        fs::remove_file(dir.path().join(frame_file_name(1))).unwrap();
        assert!(load_sequence(dir.path()).is_err());
    }

    #[test]
    fn payload_size_for_sensor_frame() {
        let c = HyperspectralCube::new(
            512,
            256,
            16,
            linear_wavelengths(16, 470.0, 620.0),
            vec![0.5; 512 * 256 * 16],
        )
        .unwrap();
        assert_eq!(encode_hsb(&c).len(), 512 * 256 * 16 * 4 + 16);
    }

    #[test]
    fn groundtruth_parsing() {
        let p = Path::new("gt.txt");
        let b = parse_boxes("10,20,30,40\n", p).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!((b[0].cx, b[0].cy, b[0].w, b[0].h), (25.0, 40.0, 30.0, 40.0));

        match parse_boxes("1,2,3,4\n10,20,0,40\n", p).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
        assert!(parse_boxes("a,2,3,4", p).is_err());

        let many: String = (0..500).map(|i| format!("{i},1,5.5,6\n")).collect();
        assert_eq!(parse_boxes(&many, p).unwrap().len(), 500);
        assert_eq!(parse_boxes("1\t2\t3\t4\n", p).unwrap().len(), 1);
    }

    #[test]
    fn boxes_round_trip_through_text() {
        let boxes = vec![
            BoundingBox::from_top_left(1.5, 2.25, 10.0, 7.0).unwrap(),
            BoundingBox::from_top_left(-3.0, 0.0, 1.0, 2.0).unwrap(),
        ];
        let back = parse_boxes(&format_boxes(&boxes), Path::new("r.txt")).unwrap();
        assert_eq!(back, boxes);
    }
}
