//! Fully constrained least squares: `min ‖x − Ea‖² s.t. a ≥ 0, Σa = 1`.
//!
//! The unconstrained (sum-to-one only) solution is projected onto the
//! simplex in the metric `G = EᵀE` with a primal active-set method, which
//! terminates at the exact constrained minimizer.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{AbundanceMap, EndmemberSet};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SimplexSolver {
    e: DMatrix<f64>,
    g: DMatrix<f64>,
    /// Inverse of the full sum-to-one KKT matrix.
    kkt_inv: Option<DMatrix<f64>>,
    scale: f64,
}

impl SimplexSolver {
    pub fn new(endmembers: &EndmemberSet) -> Result<Self> {
        let e = endmembers.spectra.clone();
        if e.ncols() == 0 {
            return Err(Error::InvalidArgument("R must be at least 1".into()));
        }
        if endmembers.count() > 1 && endmembers.inverse_condition() < 1e-10 {
            return Err(Error::Numerical("endmembers are linearly dependent".into()));
        }
        let g = e.transpose() * &e;
        let scale = g.diagonal().max().max(f64::MIN_POSITIVE);
        let r = g.nrows();
        let mut kkt = DMatrix::from_element(r + 1, r + 1, 1.0);
        kkt.view_mut((0, 0), (r, r)).copy_from(&g);
        kkt[(r, r)] = 0.0;
        let kkt_inv = kkt.try_inverse();
        Ok(Self {
            e,
            g,
            kkt_inv,
            scale,
        })
    }

    pub fn bands(&self) -> usize {
        self.e.nrows()
    }

    pub fn count(&self) -> usize {
        self.e.ncols()
    }

    /// Minimizer of `½aᵀGa − bᵀa` with `1ᵀa = 1` restricted to the `free`
    /// coordinates (others fixed at 0).
    fn equality_solve(&self, b: &DVector<f64>, free: &[usize]) -> Option<DVector<f64>> {
        let k = free.len();
        let mut kkt = DMatrix::zeros(k + 1, k + 1);
        let mut rhs = DVector::zeros(k + 1);
        for (p, &i) in free.iter().enumerate() {
            for (q, &j) in free.iter().enumerate() {
                kkt[(p, q)] = self.g[(i, j)];
            }
            kkt[(p, k)] = 1.0;
            kkt[(k, p)] = 1.0;
            rhs[p] = b[i];
        }
        rhs[k] = 1.0;
        let sol = kkt.lu().solve(&rhs)?;
        let mut a = DVector::zeros(self.count());
        for (p, &i) in free.iter().enumerate() {
            a[i] = sol[p];
        }
        Some(a)
    }

    pub fn solve(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.bands() {
            return Err(Error::DimensionMismatch(format!(
                "pixel has {} bands, endmembers have {}",
                x.len(),
                self.bands()
            )));
        }
        let r = self.count();
        let b = self.e.tr_mul(&DVector::from_column_slice(x));
        if let Some(inv) = &self.kkt_inv {
            let mut rhs = DVector::from_element(r + 1, 1.0);
            rhs.rows_mut(0, r).copy_from(&b);
            let a = (inv * rhs).rows(0, r).into_owned();
            if a.iter().all(|&v| v >= 0.0) {
                return Ok(finish(a));
            }
        }

        // feasible start at the best vertex
        let start = (0..r)
            .min_by(|&i, &j| {
                let fi = 0.5 * self.g[(i, i)] - b[i];
                let fj = 0.5 * self.g[(j, j)] - b[j];
                fi.total_cmp(&fj)
            })
            .unwrap();
        let mut a = DVector::zeros(r);
        a[start] = 1.0;
        let mut free = vec![start];
        let tol = 1e-13 * self.scale;
        for _ in 0..(50 * r + 50) {
            let p = self
                .equality_solve(&b, &free)
                .ok_or_else(|| Error::Numerical("simplex projection system is singular".into()))?;
            if free.iter().all(|&i| p[i] >= 0.0) {
                a = p;
                let grad = &self.g * &a - &b;
                // ν from any free coordinate: grad_i + ν = 0
                let nu = -free.iter().map(|&i| grad[i]).sum::<f64>() / free.len() as f64;
                let entering = (0..r)
                    .filter(|i| !free.contains(i))
                    .map(|i| (i, grad[i] + nu))
                    .filter(|&(_, lam)| lam < -tol)
                    .min_by(|x, y| x.1.total_cmp(&y.1));
                match entering {
                    Some((i, _)) => {
                        free.push(i);
                        free.sort_unstable();
                    }
                    None => return Ok(finish(a)),
                }
            } else {
                let mut alpha = 1.0;
                let mut blocking = free[0];
                for &i in &free {
                    if p[i] < 0.0 {
                        let t = a[i] / (a[i] - p[i]);
                        if t < alpha {
                            alpha = t;
                            blocking = i;
                        }
                    }
                }
                a = &a + (&p - &a) * alpha;
                a[blocking] = 0.0;
                free.retain(|&i| i != blocking && a[i] > 0.0);
                if free.is_empty() {
                    let i = (0..r).max_by(|&i, &j| a[i].total_cmp(&a[j])).unwrap();
                    free.push(i);
                }
            }
        }
        Err(Error::Numerical("simplex projection did not terminate".into()))
    }
}

fn finish(a: DVector<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = a.iter().map(|&x| x.max(0.0)).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// Abundances for every column of `X`, as a `N x 1` map.
pub fn spu_abundances(x: &DMatrix<f64>, endmembers: &EndmemberSet) -> Result<AbundanceMap> {
    let solver = SimplexSolver::new(endmembers)?;
    if x.nrows() != solver.bands() {
        return Err(Error::DimensionMismatch(format!(
            "pixels have {} bands, endmembers have {}",
            x.nrows(),
            solver.bands()
        )));
    }
    let r = solver.count();
    let rows: Vec<Vec<f64>> = (0..x.ncols())
        .into_par_iter()
        .map(|j| solver.solve(x.column(j).as_slice()))
        .collect::<Result<_>>()?;
    AbundanceMap::new(x.ncols(), 1, r, rows.concat())
}
