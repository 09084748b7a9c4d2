//! Reference implementations used only by tests. They share no code path
//! with the crate's solvers or split search.

#![allow(dead_code)]

use mulberry_core::Matrix;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Least squares with intercept via the SVD pseudo-inverse of `[1 X]`.
pub fn pinv_fit(x: &Matrix, y: &[f64]) -> (f64, Vec<f64>) {
    let (n, d) = (x.rows(), x.cols());
    let a = DMatrix::from_fn(n, d + 1, |i, j| if j == 0 { 1.0 } else { x[(i, j - 1)] });
    let pinv = a.pseudo_inverse(1e-13).expect("svd");
    let beta = pinv * DVector::from_column_slice(y);
    (beta[0], beta.iter().skip(1).copied().collect())
}

/// Ridge with unpenalized intercept via the closed form on centered data,
/// solved with nalgebra's LU.
pub fn ridge_closed_form(x: &Matrix, y: &[f64], lambda: f64) -> (f64, Vec<f64>) {
    let (n, d) = (x.rows(), x.cols());
    let xm = DMatrix::from_fn(n, d, |i, j| x[(i, j)]);
    let means = xm.row_mean();
    let ym = y.iter().sum::<f64>() / n as f64;
    let xc = DMatrix::from_fn(n, d, |i, j| xm[(i, j)] - means[j]);
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - ym));
    let lhs = xc.transpose() * &xc + DMatrix::identity(d, d) * lambda;
    let beta = lhs.lu().solve(&(xc.transpose() * yc)).expect("nonsingular");
    let intercept = ym - (0..d).map(|j| beta[j] * means[j]).sum::<f64>();
    (intercept, beta.iter().copied().collect())
}

fn variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Exhaustive split search: every candidate feature, every midpoint between
/// consecutive distinct values, explicit partition and two-pass variances.
pub fn brute_force_split(
    rows: &[usize],
    x: &Matrix,
    y: &[f64],
    features: &[usize],
    min_leaf: usize,
) -> Option<(usize, f64, f64)> {
    let parent: Vec<f64> = rows.iter().map(|&r| y[r]).collect();
    if parent.iter().all(|&v| v == parent[0]) {
        return None;
    }
    let total_var = variance(&parent);
    let n = rows.len() as f64;
    let mut feats = features.to_vec();
    feats.sort_unstable();
    feats.dedup();
    let mut best: Option<(usize, f64, f64)> = None;
    for &f in &feats {
        let mut vals: Vec<f64> = rows.iter().map(|&r| x[(r, f)]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let mut t = (w[0] + w[1]) / 2.0;
            if t >= w[1] {
                t = w[0];
            }
            let left: Vec<f64> = rows
                .iter()
                .filter(|&&r| x[(r, f)] <= t)
                .map(|&r| y[r])
                .collect();
            let right: Vec<f64> = rows
                .iter()
                .filter(|&&r| x[(r, f)] > t)
                .map(|&r| y[r])
                .collect();
            if left.len() < min_leaf || right.len() < min_leaf {
                continue;
            }
            let gain = total_var
                - left.len() as f64 / n * variance(&left)
                - right.len() as f64 / n * variance(&right);
            if best.is_none_or(|b| gain > b.2) {
                best = Some((f, t, gain));
            }
        }
    }
    best.filter(|b| b.2 > 0.0)
}

pub fn random_matrix<R: Rng>(rng: &mut R, n: usize, d: usize) -> Matrix {
    Matrix::from_vec(
        n,
        d,
        (0..n * d).map(|_| rng.random_range(-3.0..3.0)).collect(),
    )
    .unwrap()
}
