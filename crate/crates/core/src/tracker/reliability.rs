use crate::cube::BoundingBox;
use crate::error::{Error, Result};
use crate::eval::iou;

/// Per-group scores behind one reliability update.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ReliabilityScores {
    pub overlap: f64,
    pub distance: f64,
    pub smoothness: f64,
}

impl ReliabilityScores {
    pub fn total(&self) -> f64 {
        self.overlap + self.distance + self.smoothness
    }
}

/// `exp(−(1 − IoU)²)`.
pub fn overlap_score(group: &BoundingBox, fused: &BoundingBox) -> f64 {
    let o = iou(group, fused);
    (-(1.0 - o) * (1.0 - o)).exp()
}

/// `exp(−‖C_i − C‖²)`, with the distance already expressed in cells.
pub fn distance_score(distance_cells: f64) -> f64 {
    (-distance_cells * distance_cells).exp()
}

/// `exp(−‖C_i^t − C_i^{t−1}‖² / (W + H))` in pixels.
pub fn smoothness_score(group: &BoundingBox, previous: &BoundingBox) -> f64 {
    let d = group.center_distance(previous);
    (-d * d / (group.w + group.h)).exp()
}

/// Group weights proportional to the summed scores. `cell_px` converts
/// pixel distances to cells for the distance score.
pub fn reliability_update(
    group_boxes: &[BoundingBox],
    fused: &BoundingBox,
    previous: &[BoundingBox],
    cell_px: f64,
) -> Result<(Vec<f64>, Vec<ReliabilityScores>)> {
    if group_boxes.is_empty() {
        return Err(Error::InvalidArgument("reliability needs at least one group".into()));
    }
    if group_boxes.len() != previous.len() {
        return Err(Error::DimensionMismatch(
            "one previous box per feature group is required".into(),
        ));
    }
    if !(cell_px > 0.0) {
        return Err(Error::InvalidArgument("cell size must be positive".into()));
    }
    fused.validate()?;
    let mut scores = Vec::with_capacity(group_boxes.len());
    for (b, p) in group_boxes.iter().zip(previous) {
        b.validate()?;
        p.validate()?;
        scores.push(ReliabilityScores {
            overlap: overlap_score(b, fused),
            distance: distance_score(b.center_distance(fused) / cell_px),
            smoothness: smoothness_score(b, p),
        });
    }
    let total: f64 = scores.iter().map(ReliabilityScores::total).sum();
    let weights = scores.iter().map(|s| s.total() / total).collect();
    Ok((weights, scores))
}

/// `(1−η)·w_model + η·w_t`, renormalized to absorb rounding.
pub fn blend_weights(model: &[f64], current: &[f64], eta: f64) -> Vec<f64> {
    let mut w: Vec<f64> = model
        .iter()
        .zip(current)
        .map(|(m, c)| (1.0 - eta) * m + eta * c)
        .collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tl(x: f64, y: f64, w: f64, h: f64) -> BoundingBox {
        BoundingBox::from_top_left(x, y, w, h).unwrap()
    }

    #[test]
    fn identical_boxes_give_uniform_weights() {
        let b = tl(3.0, 4.0, 10.0, 6.0);
        let (w, s) = reliability_update(&[b, b, b], &b, &[b, b, b], 4.0).unwrap();
        for sc in &s {
            assert_eq!((sc.overlap, sc.distance, sc.smoothness), (1.0, 1.0, 1.0));
        }
        assert!(w.iter().all(|&v| v == 1.0 / 3.0));
    }

    #[test]
    fn overlap_examples() {
        let a = tl(0.0, 0.0, 2.0, 2.0);
        assert_eq!(overlap_score(&tl(10.0, 0.0, 2.0, 2.0), &a), (-1.0f64).exp());
        let v = overlap_score(&tl(1.0, 0.0, 2.0, 2.0), &a);
        assert!((v - 0.641180).abs() < 1e-6);
        assert!((v - (-(2.0f64 / 3.0).powi(2)).exp()).abs() < 1e-15);
    }

    #[test]
    fn single_group_weight_is_one() {
        let b = tl(0.0, 0.0, 5.0, 5.0);
        let (w, _) = reliability_update(&[tl(3.0, 1.0, 5.0, 5.0)], &b, &[b], 4.0).unwrap();
        assert_eq!(w, vec![1.0]);
        assert_eq!(blend_weights(&[1.0], &w, 0.3), vec![1.0]);
    }

    #[test]
    fn blend_extremes() {
        assert_eq!(blend_weights(&[0.25, 0.75], &[0.5, 0.5], 0.0), vec![0.25, 0.75]);
        assert_eq!(blend_weights(&[0.25, 0.75], &[0.5, 0.5], 1.0), vec![0.5, 0.5]);
    }
}
