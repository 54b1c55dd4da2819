//! Vertex component analysis.
//!
//! Data are projected onto an `R`-dimensional signal subspace (a
//! projective projection at high SNR, an affine one plus a constant
//! coordinate at low SNR); endmembers are then picked one at a time as the
//! pixel with the largest projection onto a random direction orthogonal to
//! the endmembers found so far.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::EndmemberSet;
use crate::error::{Error, Result};

/// Leading `p` eigenvectors of a symmetric matrix, descending eigenvalue.
pub(crate) fn leading_eigenvectors(m: DMatrix<f64>, p: usize) -> (DMatrix<f64>, Vec<f64>) {
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    order.truncate(p);
    (eig.eigenvectors.select_columns(&order), values)
}

pub fn vca(x: &DMatrix<f64>, r: usize, seed: u64) -> Result<EndmemberSet> {
    let (l, n) = x.shape();
    if r == 0 || n < r {
        return Err(Error::InvalidArgument(format!(
            "vca needs 1 <= R <= N, got R={r}, N={n}"
        )));
    }
    if r > l {
        return Err(Error::InvalidArgument(format!(
            "cannot extract {r} endmembers from {l} bands"
        )));
    }
    if x.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidArgument("vca input must be finite and nonnegative".into()));
    }
    let nf = n as f64;

    let corr = x * x.transpose() / nf;
    let (_, corr_values) = leading_eigenvectors(corr.clone(), l);
    let top = corr_values[0].max(0.0);
    let rank = corr_values.iter().filter(|&&v| v > 1e-9 * top).count();
    if top == 0.0 || rank < r {
        return Err(Error::InvalidArgument(format!(
            "data rank {rank} is below the requested {r} endmembers; use a smaller R"
        )));
    }

    if r == 1 {
        let (u, _) = leading_eigenvectors(corr, 1);
        let proj = u.transpose() * x;
        let idx = argmax_abs(proj.row(0).iter().copied());
        return EndmemberSet::new(x.select_columns(&[idx]), vec![idx]);
    }

    let mean = DVector::from_fn(l, |i, _| x.row(i).mean());
    let centered = DMatrix::from_fn(l, n, |i, j| x[(i, j)] - mean[i]);
    let (ud, _) = leading_eigenvectors(&centered * centered.transpose() / nf, r);
    let xp = ud.transpose() * &centered;

    let py = x.norm_squared() / nf;
    let px = xp.norm_squared() / nf + mean.norm_squared();
    let snr = if py - px <= 1e-12 * py {
        f64::INFINITY
    } else {
        let ratio = (px - r as f64 / l as f64 * py) / (py - px);
        if ratio > 0.0 {
            10.0 * ratio.log10()
        } else {
            f64::NEG_INFINITY
        }
    };
    let snr_threshold = 15.0 + 10.0 * (r as f64).log10();

    let y = if snr < snr_threshold {
        let d = r - 1;
        let xd = xp.rows(0, d).into_owned();
        let c = (0..n).map(|j| xd.column(j).norm()).fold(0.0, f64::max);
        let mut y = DMatrix::from_element(r, n, c);
        y.rows_mut(0, d).copy_from(&xd);
        y
    } else {
        let (ud, _) = leading_eigenvectors(corr, r);
        let xp = ud.transpose() * x;
        let u = DVector::from_fn(r, |i, _| xp.row(i).mean());
        let mut y = xp.clone();
        for j in 0..n {
            let denom = u.dot(&xp.column(j));
            if denom.abs() > 0.0 {
                y.column_mut(j).scale_mut(1.0 / denom);
            }
        }
        y
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DMatrix::<f64>::zeros(r, r);
    a[(r - 1, 0)] = 1.0;
    let mut indices = Vec::with_capacity(r);
    for i in 0..r {
        let pinv = a
            .clone()
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::Numerical(e.to_string()))?;
        let proj = &a * pinv;
        let mut f = DVector::zeros(r);
        for _attempt in 0..16 {
            let w = DVector::from_fn(r, |_, _| StandardNormal.sample(&mut rng));
            f = &w - &proj * &w;
            let norm = f.norm();
            if norm > 1e-9 * w.norm() {
                f /= norm;
                break;
            }
        }
        if f.norm() == 0.0 {
            return Err(Error::Numerical("vca could not find a new direction".into()));
        }
        let v = f.transpose() * &y;
        let idx = argmax_abs(v.iter().copied());
        a.set_column(i, &y.column(idx));
        indices.push(idx);
    }
    EndmemberSet::new(x.select_columns(&indices), indices)
}

fn argmax_abs(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v.abs() > best.1 {
            best = (i, v.abs());
        }
    }
    best.0
}
