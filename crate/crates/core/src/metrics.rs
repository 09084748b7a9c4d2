//! Regression metrics. R² is `1 − RSS/TSS` and may be negative.

use crate::error::{Error, Result};

fn check_lengths(y_true: &[f64], y_pred: &[f64]) -> Result<()> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    Ok(())
}

/// Residual sum of squares.
pub fn rss(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_lengths(y_true, y_pred)?;
    Ok(y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| (t - p) * (t - p))
        .sum())
}

/// Total sum of squares about the mean.
pub fn tss(y_true: &[f64]) -> f64 {
    if y_true.is_empty() {
        return 0.0;
    }
    let mean = y_true.iter().sum::<f64>() / y_true.len() as f64;
    y_true.iter().map(|t| (t - mean) * (t - mean)).sum()
}

pub fn r2_score(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_lengths(y_true, y_pred)?;
    if y_true.len() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            got: y_true.len(),
        });
    }
    if y_true.iter().all(|&v| v == y_true[0]) {
        return Err(Error::ZeroVariance(y_true[0]));
    }
    Ok(1.0 - rss(y_true, y_pred)? / tss(y_true))
}

pub fn rmse(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.is_empty() {
        return Err(Error::TooFewRows { needed: 1, got: 0 });
    }
    Ok((rss(y_true, y_pred)? / y_true.len() as f64).sqrt())
}

pub fn mae(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_lengths(y_true, y_pred)?;
    if y_true.is_empty() {
        return Err(Error::TooFewRows { needed: 1, got: 0 });
    }
    Ok(y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| (t - p).abs())
        .sum::<f64>()
        / y_true.len() as f64)
}
