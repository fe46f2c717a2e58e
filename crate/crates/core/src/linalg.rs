//! Small dense least-squares helpers used by the greedy solvers.

use nalgebra::{DMatrix, DVector};

/// Ridge added to the normal equations, relative to the mean Gram diagonal.
pub(crate) const RELATIVE_RIDGE: f64 = 1e-10;

/// Solves `min ||A x - y||` through the ridge-regularized normal equations.
///
/// `columns` are the dense columns of `A`. Returns `None` when the Cholesky
/// factorization fails or produces non-finite values.
pub(crate) fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> Option<Vec<f64>> {
    let k = columns.len();
    if k == 0 {
        return Some(Vec::new());
    }
    let m = y.len();
    let a = DMatrix::from_fn(m, k, |i, j| columns[j][i]);
    let yv = DVector::from_column_slice(y);
    let mut gram = a.tr_mul(&a);
    let mean_diag = gram.diagonal().sum() / k as f64;
    let ridge = if mean_diag > 0.0 {
        RELATIVE_RIDGE * mean_diag
    } else {
        RELATIVE_RIDGE
    };
    for i in 0..k {
        gram[(i, i)] += ridge;
    }
    let rhs = a.tr_mul(&yv);
    let chol = gram.cholesky()?;
    let x = chol.solve(&rhs);
    if x.iter().all(|v| v.is_finite()) {
        Some(x.iter().copied().collect())
    } else {
        None
    }
}

/// Indices of the `k` largest scores, ties broken toward the lowest index.
pub(crate) fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_solution_of_consistent_system() {
        let cols = vec![vec![1.0, 0.0, 1.0], vec![0.0, 2.0, 1.0]];
        let y = vec![3.0, -4.0, 1.0];
        let x = least_squares(&cols, &y).unwrap();
        assert!((x[0] - 3.0).abs() < 1e-8 && (x[1] + 2.0).abs() < 1e-8, "{x:?}");
    }

    #[test]
    fn top_k_breaks_ties_low() {
        assert_eq!(top_k(&[1.0, 3.0, 3.0, 2.0], 2), vec![1, 2]);
        assert_eq!(top_k(&[0.0, 0.0, 0.0], 2), vec![0, 1]);
    }

    #[test]
    fn empty_support() {
        assert_eq!(least_squares(&[], &[1.0]).unwrap(), Vec::<f64>::new());
    }
}
