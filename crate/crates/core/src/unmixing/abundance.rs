use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EndmemberSet, SimplexSolver};
use crate::cube::HyperspectralCube;
use crate::error::{Error, Result};
use crate::feature_map::FeatureMap;

/// Per-pixel fractions over a `width x height` grid, `r` values per pixel,
/// pixels row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbundanceMap {
    pub width: usize,
    pub height: usize,
    pub r: usize,
    pub data: Vec<f64>,
}

impl AbundanceMap {
    pub fn new(width: usize, height: usize, r: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height * r {
            return Err(Error::DimensionMismatch(format!(
                "abundance data has {} values, expected {}",
                data.len(),
                width * height * r
            )));
        }
        for (p, a) in data.chunks(r.max(1)).enumerate() {
            let sum: f64 = a.iter().sum();
            if a.iter().any(|&v| v < 0.0 || !v.is_finite()) || (sum - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidArgument(format!(
                    "pixel {p} abundances are not on the simplex"
                )));
            }
        }
        Ok(Self {
            width,
            height,
            r,
            data,
        })
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[f64] {
        let i = (y * self.width + x) * self.r;
        &self.data[i..i + self.r]
    }

    /// One material as a row-major plane.
    pub fn channel(&self, c: usize) -> Vec<f64> {
        self.data.iter().skip(c).step_by(self.r).copied().collect()
    }
}

pub fn abundance_map(cube: &HyperspectralCube, endmembers: &EndmemberSet) -> Result<AbundanceMap> {
    if cube.bands() != endmembers.bands() {
        return Err(Error::DimensionMismatch(format!(
            "cube has {} bands, endmembers have {}",
            cube.bands(),
            endmembers.bands()
        )));
    }
    let solver = SimplexSolver::new(endmembers)?;
    let (w, h) = (cube.width(), cube.height());
    let rows: Vec<Vec<f64>> = (0..w * h)
        .into_par_iter()
        .map(|i| {
            let spectrum: Vec<f64> = (0..cube.bands()).map(|k| cube.band(k)[i] as f64).collect();
            solver.solve(&spectrum)
        })
        .collect::<Result<_>>()?;
    AbundanceMap::new(w, h, endmembers.count(), rows.concat())
}

/// Abundances averaged over `cell x cell` blocks; the grid matches the
/// gradient-histogram grid for the same cell size (partial border cells
/// average the pixels they contain).
pub fn abundance_feature_map(
    cube: &HyperspectralCube,
    endmembers: &EndmemberSet,
    cell: usize,
) -> Result<FeatureMap> {
    if cell == 0 {
        return Err(Error::InvalidArgument("cell size must be >= 1".into()));
    }
    let map = abundance_map(cube, endmembers)?;
    Ok(pool_cells(&map, cell))
}

pub fn pool_cells(map: &AbundanceMap, cell: usize) -> FeatureMap {
    let cx = (map.width - 1) / cell + 1;
    let cy = (map.height - 1) / cell + 1;
    let mut out = FeatureMap::zeros(cx, cy, map.r);
    for j in 0..cy {
        for i in 0..cx {
            let xs = i * cell..((i + 1) * cell).min(map.width);
            let ys = j * cell..((j + 1) * cell).min(map.height);
            let count = (xs.len() * ys.len()) as f64;
            let acc = out.cell_mut(i, j);
            for y in ys {
                for x in xs.clone() {
                    for (a, v) in acc.iter_mut().zip(map.pixel(x, y)) {
                        *a += v;
                    }
                }
            }
            acc.iter_mut().for_each(|a| *a /= count);
        }
    }
    out
}
