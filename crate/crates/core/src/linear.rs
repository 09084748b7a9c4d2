//! Multiple linear regression and ridge regression by direct solves.
//!
//! Both models are fitted on centered data, so the intercept is never
//! penalized: `β = (XᶜᵀXᶜ + λI)⁻¹ Xᶜᵀyᶜ`, `β₀ = ȳ − β·x̄`. Plain least squares
//! (`λ = 0`) goes through an equilibrated Cholesky solve of the normal
//! equations when the system is well conditioned and through pivoted QR on
//! the centered design otherwise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::metrics;

/// Gram matrices with a larger condition estimate skip the Cholesky path.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Cholesky,
    PivotedQr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// Condition estimate of the (equilibrated) system matrix; `None` when
    /// it is singular.
    pub condition_estimate: Option<f64>,
    pub method: SolveMethod,
    /// `None` when the training target is constant.
    pub training_r2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub feature_names: Vec<String>,
    pub regularization_lambda: f64,
    pub diagnostics: FitDiagnostics,
}

impl LinearModel {
    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.coefficients.len() {
            return Err(Error::DimensionMismatch {
                expected: self.coefficients.len(),
                got: names.len(),
            });
        }
        self.feature_names = names;
        Ok(self)
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let mut acc = self.intercept;
        for (c, v) in self.coefficients.iter().zip(x) {
            acc += c * v;
        }
        acc
    }
}

fn default_names(d: usize) -> Vec<String> {
    (0..d).map(|j| format!("x{j}")).collect()
}

fn check_inputs(x: &Matrix, y: &[f64]) -> Result<()> {
    if y.len() != x.rows() {
        return Err(Error::LengthMismatch {
            left: x.rows(),
            right: y.len(),
        });
    }
    if x.rows() == 0 {
        return Err(Error::TooFewRows { needed: 1, got: 0 });
    }
    if !x.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

struct Centered {
    x: Matrix,
    y: Vec<f64>,
    x_mean: Vec<f64>,
    y_mean: f64,
}

fn center(x: &Matrix, y: &[f64]) -> Centered {
    let n = x.rows() as f64;
    let d = x.cols();
    let x_mean: Vec<f64> = (0..d)
        .map(|j| x.column(j).iter().sum::<f64>() / n)
        .collect();
    let y_mean = y.iter().sum::<f64>() / n;
    let mut xc = x.clone();
    for i in 0..x.rows() {
        for (v, m) in xc.row_mut(i).iter_mut().zip(&x_mean) {
            *v -= m;
        }
    }
    Centered {
        x: xc,
        y: y.iter().map(|v| v - y_mean).collect(),
        x_mean,
        y_mean,
    }
}

fn finite_condition(c: f64) -> Option<f64> {
    c.is_finite().then_some(c)
}

/// Least squares on centered data.
fn solve_least_squares(c: &Centered) -> Result<(Vec<f64>, Option<f64>, SolveMethod)> {
    let d = c.x.cols();
    let (g, b) = linalg::gram(&c.x, &c.y);
    let scale: Vec<f64> = (0..d).map(|j| g[(j, j)].sqrt()).collect();

    if scale.iter().all(|&s| s > 0.0) {
        let mut ge = g.clone();
        for j in 0..d {
            for k in 0..d {
                ge[(j, k)] = g[(j, k)] / (scale[j] * scale[k]);
            }
        }
        let cond = linalg::spd_condition(&ge);
        if cond <= CONDITION_LIMIT {
            if let Some(l) = linalg::cholesky(&ge) {
                let be: Vec<f64> = b.iter().zip(&scale).map(|(v, s)| v / s).collect();
                let u = linalg::cholesky_solve(&l, &be);
                let beta = u.iter().zip(&scale).map(|(v, s)| v / s).collect();
                return Ok((beta, Some(cond), SolveMethod::Cholesky));
            }
        }
        let (rank, beta) = linalg::pivoted_qr_solve(&c.x, &c.y);
        return beta
            .map(|beta| (beta, finite_condition(cond), SolveMethod::PivotedQr))
            .ok_or(Error::SingularSystem { rank, features: d });
    }
    let (rank, beta) = linalg::pivoted_qr_solve(&c.x, &c.y);
    beta.map(|beta| (beta, None, SolveMethod::PivotedQr))
        .ok_or(Error::SingularSystem { rank, features: d })
}

/// Penalized solve on centered data, `λ > 0`.
fn solve_ridge(c: &Centered, lambda: f64) -> Result<(Vec<f64>, Option<f64>, SolveMethod)> {
    let d = c.x.cols();
    let (mut g, b) = linalg::gram(&c.x, &c.y);
    for j in 0..d {
        g[(j, j)] += lambda;
    }
    let cond = linalg::spd_condition(&g);
    if cond <= CONDITION_LIMIT {
        if let Some(l) = linalg::cholesky(&g) {
            return Ok((
                linalg::cholesky_solve(&l, &b),
                Some(cond),
                SolveMethod::Cholesky,
            ));
        }
    }
    // augmented least squares [Xᶜ; √λ I] β ≈ [yᶜ; 0]
    let n = c.x.rows();
    let mut aug = Matrix::zeros(n + d, d);
    for i in 0..n {
        aug.row_mut(i).copy_from_slice(c.x.row(i));
    }
    for j in 0..d {
        aug[(n + j, j)] = lambda.sqrt();
    }
    let mut rhs = c.y.clone();
    rhs.resize(n + d, 0.0);
    let (rank, beta) = linalg::pivoted_qr_solve(&aug, &rhs);
    beta.map(|beta| (beta, finite_condition(cond), SolveMethod::PivotedQr))
        .ok_or(Error::SingularSystem { rank, features: d })
}

fn assemble(
    x: &Matrix,
    y: &[f64],
    c: &Centered,
    lambda: f64,
    (beta, cond, method): (Vec<f64>, Option<f64>, SolveMethod),
) -> LinearModel {
    let intercept = c.y_mean - linalg::dot(&beta, &c.x_mean);
    let mut m = LinearModel {
        intercept,
        coefficients: beta,
        feature_names: default_names(x.cols()),
        regularization_lambda: lambda,
        diagnostics: FitDiagnostics {
            condition_estimate: cond,
            method,
            training_r2: None,
        },
    };
    let fitted: Vec<f64> = x.iter_rows().map(|r| m.predict_row(r)).collect();
    m.diagnostics.training_r2 = metrics::r2_score(y, &fitted).ok();
    m
}

/// Ordinary least squares with an intercept. Needs more rows than features.
pub fn fit_mlr(x: &Matrix, y: &[f64]) -> Result<LinearModel> {
    check_inputs(x, y)?;
    if x.rows() <= x.cols() {
        return Err(Error::Underdetermined {
            rows: x.rows(),
            features: x.cols(),
        });
    }
    let c = center(x, y);
    let solved = solve_least_squares(&c)?;
    Ok(assemble(x, y, &c, 0.0, solved))
}

/// Ridge regression with an unpenalized intercept. `λ = 0` reduces to
/// [`fit_mlr`]'s solver.
pub fn fit_ridge(x: &Matrix, y: &[f64], lambda: f64) -> Result<LinearModel> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::NegativeLambda(lambda));
    }
    check_inputs(x, y)?;
    let c = center(x, y);
    let solved = if lambda == 0.0 {
        solve_least_squares(&c)?
    } else {
        solve_ridge(&c, lambda)?
    };
    Ok(assemble(x, y, &c, lambda, solved))
}

pub fn predict_linear(m: &LinearModel, x: &Matrix) -> Result<Vec<f64>> {
    if x.cols() != m.coefficients.len() {
        return Err(Error::DimensionMismatch {
            expected: m.coefficients.len(),
            got: x.cols(),
        });
    }
    Ok(x.iter_rows().map(|r| m.predict_row(r)).collect())
}
