//! Signal subspace identification by minimum error (HySime).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::vca::leading_eigenvectors;
use crate::error::{Error, Result};

/// Upper bound on the returned subspace dimension.
pub const MAX_SUBSPACE: usize = 8;

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseEstimator {
    /// Residual of regressing every band on all the others.
    #[default]
    Regression,
    /// Known per-band noise variances.
    Known { variances: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct HysimeEstimate {
    /// Clamped to `[1, min(L-1, 8)]`.
    pub r: usize,
    /// Count before clamping.
    pub raw: usize,
    /// Set when the signal correlation was degenerate and `r` fell back to 1.
    pub degenerate: bool,
}

/// Per-band regression noise estimate; returns the `L x N` noise matrix.
pub fn estimate_noise(y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (l, n) = y.shape();
    let small = 1e-6;
    let rr = y * y.transpose();
    let rri = (&rr + DMatrix::identity(l, l) * small)
        .try_inverse()
        .ok_or_else(|| Error::Numerical("band correlation is singular".into()))?;
    let mut w = DMatrix::zeros(l, n);
    for i in 0..l {
        let xx = &rri - rri.column(i) * rri.row(i) / rri[(i, i)];
        let mut rra = rr.column(i).into_owned();
        rra[i] = 0.0;
        let mut beta = xx * rra;
        beta[i] = 0.0;
        let fit = beta.transpose() * y;
        w.set_row(i, &(y.row(i) - fit));
    }
    Ok(w)
}

pub fn hysime(y: &DMatrix<f64>, noise: &NoiseEstimator) -> Result<HysimeEstimate> {
    let (l, n) = y.shape();
    if l == 0 || n == 0 {
        return Err(Error::InvalidArgument("hysime needs a non-empty pixel matrix".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("hysime input must be finite".into()));
    }
    let ceiling = (l.saturating_sub(1)).clamp(1, MAX_SUBSPACE);
    let nf = n as f64;

    let (x, rw) = match noise {
        NoiseEstimator::Regression => {
            let w = estimate_noise(y)?;
            let rw = DVector::from_fn(l, |i, _| w.row(i).norm_squared() / nf);
            (y - w, rw)
        }
        NoiseEstimator::Known { variances } => {
            if variances.len() != l {
                return Err(Error::DimensionMismatch(format!(
                    "{} noise variances for {l} bands",
                    variances.len()
                )));
            }
            (y.clone(), DVector::from_column_slice(variances))
        }
    };

    let ry = y * y.transpose() / nf;
    let rx = &x * x.transpose() / nf;
    let trace = rx.trace();
    if !(trace > 0.0 && trace.is_finite()) {
        return Ok(HysimeEstimate {
            r: 1,
            raw: 0,
            degenerate: true,
        });
    }
    let (e, _) = leading_eigenvectors(rx, l);
    let rn = DMatrix::from_diagonal(&rw) + DMatrix::identity(l, l) * (trace / l as f64 / 1e5);
    let py = (e.transpose() * &ry * &e).diagonal();
    let pn = (e.transpose() * &rn * &e).diagonal();
    let raw = (0..l).filter(|&i| -py[i] + 2.0 * pn[i] < 0.0).count();
    Ok(HysimeEstimate {
        r: raw.clamp(1, ceiling),
        raw,
        degenerate: raw == 0,
    })
}
