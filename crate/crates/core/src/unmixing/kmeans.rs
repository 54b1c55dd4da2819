use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct KMeansResult {
    /// Cluster centers as columns.
    pub centers: DMatrix<f64>,
    pub assignments: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
}

fn sq_dist(points: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>, c: usize) -> f64 {
    points
        .column(i)
        .iter()
        .zip(centers.column(c).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// Lloyd's algorithm with k-means++ seeding over the columns of `points`.
/// Stops when no center moves more than `tol` or after `max_iters`.
pub fn kmeans(
    points: &DMatrix<f64>,
    k: usize,
    max_iters: usize,
    tol: f64,
    seed: u64,
) -> Result<KMeansResult> {
    let (dim, n) = points.shape();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "k-means needs 1 <= k <= {n} points, got k={k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2 = vec![f64::INFINITY; n];
    while chosen.len() < k {
        let last = *chosen.last().unwrap();
        for (i, d) in d2.iter_mut().enumerate() {
            let s: f64 = points
                .column(i)
                .iter()
                .zip(points.column(last).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            *d = d.min(s);
        }
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            if chosen.contains(&pick) {
                (0..n).rev().find(|i| !chosen.contains(i) && d2[*i] > 0.0).unwrap_or(pick)
            } else {
                pick
            }
        } else {
            // all remaining points coincide with a chosen center
            (0..n).find(|i| !chosen.contains(i)).unwrap()
        };
        chosen.push(next);
    }
    let mut centers = points.select_columns(&chosen);

    let mut assignments = vec![0usize; n];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        for (i, a) in assignments.iter_mut().enumerate() {
            let mut best = (0, f64::INFINITY);
            for c in 0..k {
                let d = sq_dist(points, i, &centers, c);
                if d < best.1 {
                    best = (c, d);
                }
            }
            *a = best.0;
        }
        let mut sums = DMatrix::<f64>::zeros(dim, k);
        let mut counts = vec![0usize; k];
        for (i, &a) in assignments.iter().enumerate() {
            sums.column_mut(a).axpy(1.0, &points.column(i), 1.0);
            counts[a] += 1;
        }
        let mut shift = 0.0f64;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let new = sums.column(c) / counts[c] as f64;
            shift = shift.max((&new - centers.column(c)).norm());
            centers.set_column(c, &new);
        }
        if shift <= tol {
            converged = true;
            break;
        }
    }
    Ok(KMeansResult {
        centers,
        assignments,
        iterations,
        converged,
    })
}
