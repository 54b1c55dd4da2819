use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Multi-channel feature grid. Values are stored row-major as
/// `(cell_y, cell_x, channel)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMap {
    pub cells_x: usize,
    pub cells_y: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl FeatureMap {
    pub fn zeros(cells_x: usize, cells_y: usize, channels: usize) -> Self {
        Self {
            cells_x,
            cells_y,
            channels,
            data: vec![0.0; cells_x * cells_y * channels],
        }
    }

    pub fn new(cells_x: usize, cells_y: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != cells_x * cells_y * channels {
            return Err(Error::DimensionMismatch(format!(
                "feature data has {} values, grid {cells_x}x{cells_y}x{channels} needs {}",
                data.len(),
                cells_x * cells_y * channels
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite feature value".into()));
        }
        Ok(Self {
            cells_x,
            cells_y,
            channels,
            data,
        })
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, c: usize) -> usize {
        (y * self.cells_x + x) * self.channels + c
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[self.index(x, y, c)]
    }

    pub fn cell(&self, x: usize, y: usize) -> &[f64] {
        let i = self.index(x, y, 0);
        &self.data[i..i + self.channels]
    }

    pub fn cell_mut(&mut self, x: usize, y: usize) -> &mut [f64] {
        let i = self.index(x, y, 0);
        &mut self.data[i..i + self.channels]
    }

    /// One channel as a row-major `cells_y x cells_x` plane.
    pub fn channel_plane(&self, c: usize) -> Vec<f64> {
        self.data
            .iter()
            .skip(c)
            .step_by(self.channels)
            .copied()
            .collect()
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.cells_x == other.cells_x && self.cells_y == other.cells_y
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            data: self.data.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.data.len(), other.data.len());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
