//! Min-max scaling and attribute correlation.

mod correlation;
mod heatmap;

pub use correlation::{pearson, pearson_correlation, CorrelationMatrix};
pub use heatmap::{heatmap_svg, render_heatmap};

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnRange {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

impl ColumnRange {
    fn scale(&self, x: f64) -> (f64, bool) {
        let span = self.max - self.min;
        if span == 0.0 {
            return (0.0, x != self.min);
        }
        let z = (x - self.min) / span;
        if z < 0.0 {
            (0.0, true)
        } else if z > 1.0 {
            (1.0, true)
        } else {
            (z, false)
        }
    }

    fn unscale(&self, z: f64) -> f64 {
        self.min + z * (self.max - self.min)
    }
}

/// Per-column training ranges, in schema order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub columns: Vec<ColumnRange>,
}

impl NormalizationParams {
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&ColumnRange> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Params restricted to `names`, in that order.
    pub fn subset(&self, names: &[String]) -> Result<NormalizationParams> {
        let columns = names
            .iter()
            .map(|n| {
                self.get(n)
                    .cloned()
                    .ok_or_else(|| Error::InvalidSchema(format!("no range for `{n}`")))
            })
            .collect::<Result<_>>()?;
        Ok(NormalizationParams { columns })
    }

    /// Fits ranges over the selected rows of a numeric matrix.
    pub fn fit_matrix(x: &Matrix, names: &[String], rows: &[usize]) -> Result<NormalizationParams> {
        if names.len() != x.cols() {
            return Err(Error::DimensionMismatch {
                expected: x.cols(),
                got: names.len(),
            });
        }
        if rows.is_empty() {
            return Err(Error::EmptySelection);
        }
        let columns = names
            .iter()
            .enumerate()
            .map(|(j, name)| {
                let (min, max) = rows
                    .iter()
                    .map(|&i| x[(i, j)])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                        (lo.min(v), hi.max(v))
                    });
                ColumnRange {
                    name: name.clone(),
                    min,
                    max,
                }
            })
            .collect();
        Ok(NormalizationParams { columns })
    }

    /// Scales every row of `x`; returns the scaled matrix and the number of
    /// clamped cells.
    pub fn apply_matrix(&self, x: &Matrix) -> Result<(Matrix, usize)> {
        let mut out = Matrix::zeros(x.rows(), x.cols());
        let mut clamped = 0;
        for i in 0..x.rows() {
            let (row, c) = apply_minmax_counting(self, x.row(i))?;
            out.row_mut(i).copy_from_slice(&row);
            clamped += c;
        }
        Ok((out, clamped))
    }
}

/// Fits min/max over the training rows for every feature and target column.
pub fn fit_minmax(d: &Dataset, rows: &[usize]) -> Result<NormalizationParams> {
    let cols = d.active_columns();
    let x = d.select_rows(rows).numeric_matrix(&cols)?;
    let all: Vec<usize> = (0..rows.len()).collect();
    NormalizationParams::fit_matrix(&x, &d.names(&cols), &all)
}

pub fn apply_minmax(params: &NormalizationParams, x: &[f64]) -> Result<Vec<f64>> {
    apply_minmax_counting(params, x).map(|(v, _)| v)
}

/// Scales `x` into `[0, 1]`, clamping values outside the training range.
/// Constant columns map to 0. The second value counts clamp events.
pub fn apply_minmax_counting(params: &NormalizationParams, x: &[f64]) -> Result<(Vec<f64>, usize)> {
    if x.len() != params.len() {
        return Err(Error::DimensionMismatch {
            expected: params.len(),
            got: x.len(),
        });
    }
    let mut clamped = 0;
    let mut out = Vec::with_capacity(x.len());
    for (range, &v) in params.columns.iter().zip(x) {
        if v.is_nan() {
            return Err(Error::NonFinite);
        }
        let (z, c) = range.scale(v);
        clamped += c as usize;
        out.push(z);
    }
    Ok((out, clamped))
}

/// Maps scaled values back to original units. Values outside `[0, 1]` are
/// extrapolated linearly rather than rejected.
pub fn invert_minmax(params: &NormalizationParams, z: &[f64]) -> Result<Vec<f64>> {
    if z.len() != params.len() {
        return Err(Error::DimensionMismatch {
            expected: params.len(),
            got: z.len(),
        });
    }
    Ok(params
        .columns
        .iter()
        .zip(z)
        .map(|(r, &v)| r.unscale(v))
        .collect())
}
