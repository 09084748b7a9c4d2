mod support;

use mulberry_core::linear::{fit_mlr, fit_ridge, predict_linear};
use mulberry_core::rng;
use mulberry_core::Matrix;
use rand::Rng;
use support::oracles::{pinv_fit, random_matrix, ridge_closed_form};

fn noisy_instance(seed: u64) -> (Matrix, Vec<f64>) {
    let mut r = rng::seeded(seed);
    let d = r.random_range(1..=10);
    let n = r.random_range(d + 2..=50);
    let x = random_matrix(&mut r, n, d);
    let beta: Vec<f64> = (0..d).map(|_| r.random_range(-5.0..5.0)).collect();
    let y = x
        .iter_rows()
        .map(|row| {
            2.0 + row.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + r.random_range(-0.5..0.5)
        })
        .collect();
    (x, y)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}

#[test]
fn mlr_matches_pseudo_inverse_on_random_instances() {
    for seed in 0..100 {
        let (x, y) = noisy_instance(seed);
        let fit = fit_mlr(&x, &y).unwrap();
        let (b0, beta) = pinv_fit(&x, &y);
        assert!(max_abs_diff(&fit.coefficients, &beta) < 1e-8, "seed {seed}");
        assert!((fit.intercept - b0).abs() < 1e-8, "seed {seed}");
    }
}

#[test]
fn exact_plane_agrees_with_oracle() {
    let x = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.0, 0.0]]).unwrap();
    let y = [3.0, 5.0, 7.0, 1.0];
    let (b0, beta) = pinv_fit(&x, &y);
    assert!(
        (b0 - 1.0).abs() < 1e-12 && (beta[0] - 2.0).abs() < 1e-12 && (beta[1] - 4.0).abs() < 1e-12
    );
    let fit = fit_mlr(&x, &y).unwrap();
    assert!(max_abs_diff(&fit.coefficients, &beta) < 1e-12);
}

#[test]
fn residuals_are_orthogonal_to_centered_design() {
    for seed in 200..230 {
        let (x, y) = noisy_instance(seed);
        let fit = fit_mlr(&x, &y).unwrap();
        let pred = predict_linear(&fit, &x).unwrap();
        let resid: Vec<f64> = y.iter().zip(&pred).map(|(a, b)| a - b).collect();
        let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        for j in 0..x.cols() {
            let col = x.column(j);
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let dotp: f64 = col.iter().zip(&resid).map(|(c, r)| (c - mean) * r).sum();
            assert!(dotp.abs() < 1e-8 * ynorm, "seed {seed} column {j}: {dotp}");
        }
    }
}

#[test]
fn ridge_matches_closed_form_oracle() {
    for seed in 300..340 {
        let (x, y) = noisy_instance(seed);
        for lambda in [0.1, 1.0, 10.0, 1e3] {
            let fit = fit_ridge(&x, &y, lambda).unwrap();
            let (b0, beta) = ridge_closed_form(&x, &y, lambda);
            assert!(
                max_abs_diff(&fit.coefficients, &beta) < 1e-8,
                "seed {seed} λ {lambda}"
            );
            assert!((fit.intercept - b0).abs() < 1e-8);
        }
    }
}

#[test]
fn ridge_at_zero_equals_mlr() {
    for seed in 400..420 {
        let (x, y) = noisy_instance(seed);
        let (a, b) = (fit_mlr(&x, &y).unwrap(), fit_ridge(&x, &y, 0.0).unwrap());
        assert!(max_abs_diff(&a.coefficients, &b.coefficients) < 1e-8);
        assert!((a.intercept - b.intercept).abs() < 1e-8);
    }
}

#[test]
fn ridge_shrinks_monotonically() {
    for seed in 500..520 {
        let (x, y) = noisy_instance(seed);
        let norms: Vec<f64> = [0.0, 0.1, 1.0, 10.0, 1e3]
            .iter()
            .map(|&l| {
                fit_ridge(&x, &y, l)
                    .unwrap()
                    .coefficients
                    .iter()
                    .map(|c| c * c)
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        assert!(
            norms.windows(2).all(|w| w[0] >= w[1] - 1e-12),
            "seed {seed}: {norms:?}"
        );
    }
}

#[test]
fn mean_prediction_equals_mean_target() {
    for seed in 600..620 {
        let (x, y) = noisy_instance(seed);
        let ybar = y.iter().sum::<f64>() / y.len() as f64;
        for fit in [fit_mlr(&x, &y).unwrap(), fit_ridge(&x, &y, 2.0).unwrap()] {
            let pred = predict_linear(&fit, &x).unwrap();
            let pbar = pred.iter().sum::<f64>() / pred.len() as f64;
            assert!((pbar - ybar).abs() < 1e-10, "seed {seed}");
        }
    }
}

#[test]
fn mlr_is_scale_equivariant() {
    for seed in 700..720 {
        let (x, y) = noisy_instance(seed);
        let j = (seed as usize) % x.cols();
        let c = 7.5;
        let mut scaled = x.clone();
        for i in 0..x.rows() {
            scaled[(i, j)] *= c;
        }
        let (a, b) = (fit_mlr(&x, &y).unwrap(), fit_mlr(&scaled, &y).unwrap());
        assert!((b.coefficients[j] - a.coefficients[j] / c).abs() < 1e-8);
        let (pa, pb) = (
            predict_linear(&a, &x).unwrap(),
            predict_linear(&b, &scaled).unwrap(),
        );
        assert!(max_abs_diff(&pa, &pb) < 1e-8);
    }
}

#[test]
fn large_lambda_leaves_only_the_mean() {
    for seed in 800..810 {
        let (x, y) = noisy_instance(seed);
        let fit = fit_ridge(&x, &y, 1e12).unwrap();
        let ybar = y.iter().sum::<f64>() / y.len() as f64;
        assert!(fit.coefficients.iter().all(|c| c.abs() < 1e-6));
        assert!((fit.intercept - ybar).abs() < 1e-6);
    }
}
