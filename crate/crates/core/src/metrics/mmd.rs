//! Unbiased squared MMD with a Gaussian kernel averaged over bandwidths.
//!
//! For one bandwidth `σ` with `k(x, y) = exp(−‖x − y‖² / (2σ²))`:
//! `1/(n(n−1)) Σ_{i≠j} k(x_i, x_j) − 2/(nm) Σ k(x_i, y_j) + 1/(m(m−1)) Σ_{i≠j} k(y_i, y_j)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{sq_dist, Matrix};

pub const DEFAULT_SIGMAS: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];

/// Squared distances of all pairs `(a_i, b_j)`, skipping `i == j` when
/// `off_diagonal` is set.
fn pair_sq_dists(a: &Matrix, b: &Matrix, off_diagonal: bool) -> Vec<f64> {
    (0..a.rows())
        .into_par_iter()
        .flat_map_iter(|i| {
            (0..b.rows())
                .filter(move |&j| !(off_diagonal && i == j))
                .map(move |j| sq_dist(a.row(i), b.row(j)))
        })
        .collect()
}

fn kernel_mean(sq: &[f64], sigma: f64) -> f64 {
    let scale = 2.0 * sigma * sigma;
    sq.iter().map(|d| (-d / scale).exp()).sum::<f64>() / sq.len() as f64
}

pub fn mmd(x: &Matrix, y: &Matrix, sigmas: &[f64]) -> Result<f64> {
    if x.rows() < 2 || y.rows() < 2 {
        return Err(Error::invalid("MMD needs at least two samples per set"));
    }
    if x.cols() != y.cols() {
        return Err(Error::invalid("MMD sample sets have different dimensions"));
    }
    if sigmas.is_empty() || sigmas.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::invalid("MMD bandwidths must be positive"));
    }
    let xx = pair_sq_dists(x, x, true);
    let yy = pair_sq_dists(y, y, true);
    let xy = pair_sq_dists(x, y, false);
    let total: f64 = sigmas
        .iter()
        .map(|&s| kernel_mean(&xx, s) - 2.0 * kernel_mean(&xy, s) + kernel_mean(&yy, s))
        .sum();
    Ok(total / sigmas.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_points_give_zero() {
        let x = Matrix::from_rows(&vec![vec![1.5, -2.0]; 5]).unwrap();
        assert_eq!(mmd(&x, &x.clone(), &DEFAULT_SIGMAS).unwrap(), 0.0);
    }

    #[test]
    fn rejects_small_samples() {
        let x = Matrix::from_rows(&[vec![0.0]]).unwrap();
        let y = Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        assert!(mmd(&x, &y, &DEFAULT_SIGMAS).is_err());
        assert!(mmd(&y, &y, &[]).is_err());
    }
}
