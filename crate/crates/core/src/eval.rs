//! One-pass evaluation: precision and success curves, AUC and per-attribute
//! aggregation.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::{BoundingBox, HyperspectralSequence};
use crate::error::{Error, Result};

pub const PRECISION_THRESHOLDS: usize = 51;
pub const SUCCESS_THRESHOLDS: usize = 21;
pub const PRECISION_AT: usize = 20;

/// Intersection over union; 0 for disjoint boxes.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let iw = (a.right().min(b.right()) - a.left().max(b.left())).max(0.0);
    let ih = (a.bottom().min(b.bottom()) - a.top().max(b.top())).max(0.0);
    let inter = iw * ih;
    if inter == 0.0 {
        return 0.0;
    }
    inter / (a.area() + b.area() - inter)
}

/// Success thresholds `0, 0.05, ..., 1`.
pub fn success_thresholds() -> Vec<f64> {
    (0..SUCCESS_THRESHOLDS).map(|i| i as f64 / 20.0).collect()
}

fn check_lengths(traj: &[BoundingBox], gt: &[BoundingBox]) -> Result<()> {
    if traj.len() != gt.len() {
        return Err(Error::DimensionMismatch(format!(
            "trajectory has {} boxes, ground truth has {}",
            traj.len(),
            gt.len()
        )));
    }
    if traj.is_empty() {
        return Err(Error::InvalidArgument("trajectory is empty".into()));
    }
    Ok(())
}

/// Fraction of frames with center error `≤ t` for `t = 0..=50` pixels,
/// and the value at 20 px.
pub fn precision_curve(traj: &[BoundingBox], gt: &[BoundingBox]) -> Result<(Vec<f64>, f64)> {
    check_lengths(traj, gt)?;
    let d: Vec<f64> = traj.iter().zip(gt).map(|(a, b)| a.center_distance(b)).collect();
    let n = d.len() as f64;
    let curve: Vec<f64> = (0..PRECISION_THRESHOLDS)
        .map(|t| d.iter().filter(|&&v| v <= t as f64).count() as f64 / n)
        .collect();
    let at = curve[PRECISION_AT];
    Ok((curve, at))
}

/// Fraction of frames with IoU strictly above each threshold, and the AUC
/// (mean of the curve).
pub fn success_curve(traj: &[BoundingBox], gt: &[BoundingBox]) -> Result<(Vec<f64>, f64)> {
    check_lengths(traj, gt)?;
    let o: Vec<f64> = traj.iter().zip(gt).map(|(a, b)| iou(a, b)).collect();
    let n = o.len() as f64;
    let curve: Vec<f64> = success_thresholds()
        .iter()
        .map(|&t| o.iter().filter(|&&v| v > t).count() as f64 / n)
        .collect();
    let auc = mean(&curve);
    Ok((curve, auc))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn mean_iou(traj: &[BoundingBox], gt: &[BoundingBox]) -> Result<f64> {
    check_lengths(traj, gt)?;
    Ok(traj.iter().zip(gt).map(|(a, b)| iou(a, b)).sum::<f64>() / traj.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curves {
    pub precision_curve: Vec<f64>,
    pub success_curve: Vec<f64>,
    pub precision_at_20: f64,
    pub auc: f64,
}

impl Curves {
    fn from_curves(precision_curve: Vec<f64>, success_curve: Vec<f64>) -> Self {
        Self {
            precision_at_20: precision_curve[PRECISION_AT],
            auc: mean(&success_curve),
            precision_curve,
            success_curve,
        }
    }

    /// Elementwise mean of several curve sets, summed in the given order.
    fn average<'a>(items: impl Iterator<Item = &'a Curves>) -> Option<Self> {
        let mut p = vec![0.0; PRECISION_THRESHOLDS];
        let mut s = vec![0.0; SUCCESS_THRESHOLDS];
        let mut n = 0usize;
        for c in items {
            p.iter_mut().zip(&c.precision_curve).for_each(|(a, b)| *a += b);
            s.iter_mut().zip(&c.success_curve).for_each(|(a, b)| *a += b);
            n += 1;
        }
        if n == 0 {
            return None;
        }
        p.iter_mut().for_each(|v| *v /= n as f64);
        s.iter_mut().for_each(|v| *v /= n as f64);
        Some(Self::from_curves(p, s))
    }

    pub fn is_monotone(&self) -> bool {
        self.precision_curve.windows(2).all(|w| w[1] >= w[0])
            && self.success_curve.windows(2).all(|w| w[1] <= w[0])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub frames: usize,
    pub attributes: Vec<String>,
    pub mean_iou: f64,
    #[serde(flatten)]
    pub curves: Curves,
}

pub fn evaluate_sequence(
    traj: &[BoundingBox],
    gt: &[BoundingBox],
    attributes: &[String],
) -> Result<SequenceReport> {
    let (p, _) = precision_curve(traj, gt)?;
    let (s, _) = success_curve(traj, gt)?;
    Ok(SequenceReport {
        frames: traj.len(),
        attributes: attributes.to_vec(),
        mean_iou: mean_iou(traj, gt)?,
        curves: Curves::from_curves(p, s),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeReport {
    pub sequences: usize,
    #[serde(flatten)]
    pub curves: Curves,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub sequence: String,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_sequence: BTreeMap<String, SequenceReport>,
    pub overall: Option<Curves>,
    pub per_attribute: BTreeMap<String, AttributeReport>,
    pub failures: Vec<Failure>,
}

impl EvalReport {
    /// Averages per-sequence curves overall and per attribute tag.
    pub fn aggregate(per_sequence: BTreeMap<String, SequenceReport>, mut failures: Vec<Failure>) -> Self {
        let overall = Curves::average(per_sequence.values().map(|r| &r.curves));
        let mut tags: BTreeMap<String, Vec<&SequenceReport>> = BTreeMap::new();
        for r in per_sequence.values() {
            for t in &r.attributes {
                tags.entry(t.clone()).or_default().push(r);
            }
        }
        let per_attribute = tags
            .into_iter()
            .map(|(t, rs)| {
                let curves = Curves::average(rs.iter().map(|r| &r.curves)).unwrap();
                (
                    t,
                    AttributeReport {
                        sequences: rs.len(),
                        curves,
                    },
                )
            })
            .collect();
        failures.sort_by(|a, b| a.sequence.cmp(&b.sequence));
        Self {
            per_sequence,
            overall,
            per_attribute,
            failures,
        }
    }

    pub fn is_monotone(&self) -> bool {
        self.overall.iter().all(Curves::is_monotone)
            && self.per_sequence.values().all(|r| r.curves.is_monotone())
            && self.per_attribute.values().all(|r| r.curves.is_monotone())
    }

    /// Curve samples for plotting: one row per threshold, columns for the
    /// overall curve and each attribute.
    pub fn curves_csv(&self) -> String {
        let attrs: Vec<&String> = self.per_attribute.keys().collect();
        let mut out = String::from("curve,threshold,overall");
        for a in &attrs {
            out.push(',');
            out.push_str(a);
        }
        out.push('\n');
        let col = |c: Option<&Curves>, prec: bool, i: usize| -> String {
            c.map(|c| {
                let v = if prec { c.precision_curve[i] } else { c.success_curve[i] };
                format!("{v}")
            })
            .unwrap_or_default()
        };
        for (prec, n, name) in [
            (true, PRECISION_THRESHOLDS, "precision"),
            (false, SUCCESS_THRESHOLDS, "success"),
        ] {
            for i in 0..n {
                let t = if prec { i as f64 } else { i as f64 / 20.0 };
                out.push_str(&format!("{name},{t},{}", col(self.overall.as_ref(), prec, i)));
                for a in &attrs {
                    out.push(',');
                    out.push_str(&col(Some(&self.per_attribute[*a].curves), prec, i));
                }
                out.push('\n');
            }
        }
        out
    }
}

/// One sequence of an evaluation dataset.
#[derive(Clone, Debug)]
pub struct OpeSequence {
    pub name: String,
    pub frames: HyperspectralSequence,
    pub groundtruth: Vec<BoundingBox>,
    pub attributes: Vec<String>,
}

/// One-pass evaluation: every sequence is tracked from its first
/// ground-truth box. Sequences run in parallel; a failing sequence is
/// listed under `failures`.
pub fn run_ope<F>(dataset: &[OpeSequence], tracker: F) -> EvalReport
where
    F: Fn(&HyperspectralSequence, BoundingBox) -> Result<Vec<BoundingBox>> + Sync,
{
    let outcomes: Vec<(String, Result<SequenceReport>)> = dataset
        .par_iter()
        .map(|s| {
            let result = s
                .groundtruth
                .first()
                .ok_or_else(|| Error::InvalidArgument("empty ground truth".into()))
                .and_then(|init| tracker(&s.frames, *init))
                .and_then(|traj| evaluate_sequence(&traj, &s.groundtruth, &s.attributes));
            (s.name.clone(), result)
        })
        .collect();
    let mut per_sequence = BTreeMap::new();
    let mut failures = Vec::new();
    for (name, r) in outcomes {
        match r {
            Ok(rep) => {
                per_sequence.insert(name, rep);
            }
            Err(e) => failures.push(Failure {
                sequence: name,
                error: e.to_string(),
            }),
        }
    }
    EvalReport::aggregate(per_sequence, failures)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tl(x: f64, y: f64, w: f64, h: f64) -> BoundingBox {
        BoundingBox::from_top_left(x, y, w, h).unwrap()
    }

    #[test]
    fn iou_arithmetic() {
        let a = tl(0.0, 0.0, 2.0, 2.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &tl(1.0, 0.0, 2.0, 2.0)), 1.0 / 3.0);
        assert_eq!(iou(&a, &tl(5.0, 5.0, 2.0, 2.0)), 0.0);
        assert_eq!(iou(&a, &tl(2.0, 0.0, 2.0, 2.0)), 0.0);
    }

    #[test]
    fn perfect_trajectory() {
        let gt: Vec<_> = (0..7).map(|i| tl(i as f64, 3.0, 10.0, 8.0)).collect();
        let (p, p20) = precision_curve(&gt, &gt).unwrap();
        assert!(p.iter().all(|&v| v == 1.0));
        assert_eq!(p20, 1.0);
        let (s, auc) = success_curve(&gt, &gt).unwrap();
        assert_eq!(s[20], 0.0);
        assert!(s[..20].iter().all(|&v| v == 1.0));
        assert_eq!(auc, 20.0 / 21.0);
    }

    #[test]
    fn precision_examples() {
        let gt = vec![tl(0.0, 0.0, 4.0, 4.0), tl(0.0, 0.0, 4.0, 4.0)];
        let tr = vec![tl(0.0, 0.0, 4.0, 4.0), tl(25.0, 0.0, 4.0, 4.0)];
        assert_eq!(precision_curve(&tr, &gt).unwrap().1, 0.5);
        let far: Vec<_> = gt.iter().map(|b| b.with_center(b.cx + 51.0, b.cy)).collect();
        assert!(precision_curve(&far, &gt).unwrap().0.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn success_examples() {
        let gt = vec![tl(0.0, 0.0, 4.0, 4.0); 4];
        let away = tl(50.0, 50.0, 4.0, 4.0);
        assert_eq!(success_curve(&vec![away; 4], &gt).unwrap().1, 0.0);
        let half = vec![gt[0], gt[0], away, away];
        assert!((success_curve(&half, &gt).unwrap().1 - 10.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch_and_empty() {
        let gt = vec![tl(0.0, 0.0, 4.0, 4.0); 2];
        assert!(precision_curve(&gt[..1], &gt).is_err());
        assert!(success_curve(&[], &[]).is_err());
    }

    #[test]
    fn attribute_rows_use_tagged_sequences() {
        let gt = vec![tl(0.0, 0.0, 4.0, 4.0); 3];
        let away = vec![tl(40.0, 0.0, 4.0, 4.0); 3];
        let mut per = BTreeMap::new();
        for i in 0..35 {
            let tags = if i < 17 { vec!["BC".to_string()] } else { vec!["IPR".to_string()] };
            let traj = if i < 17 { &gt } else { &away };
            per.insert(format!("s{i:02}"), evaluate_sequence(traj, &gt, &tags).unwrap());
        }
        let rep = EvalReport::aggregate(per, vec![]);
        assert_eq!(rep.per_attribute["BC"].sequences, 17);
        assert_eq!(rep.per_attribute["BC"].curves.auc, 20.0 / 21.0);
        assert_eq!(rep.per_attribute["IPR"].curves.auc, 0.0);
        assert!(rep.is_monotone());
        let csv = rep.curves_csv();
        assert!(csv.starts_with("curve,threshold,overall,BC,IPR\n"));
        assert_eq!(csv.lines().count(), 1 + 51 + 21);
    }
}
