use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::{format_number, Dataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(std::iter::once("").chain(self.labels.iter().map(String::as_str)))?;
        for (label, row) in self.labels.iter().zip(&self.values) {
            w.write_record(
                std::iter::once(label.clone()).chain(row.iter().map(|&v| format_number(v))),
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

fn is_constant(x: &[f64]) -> bool {
    x.iter().all(|&v| v == x[0])
}

/// Pearson coefficient of two equal-length samples. A constant input gives 0.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    if x.is_empty() || is_constant(x) || is_constant(y) {
        return 0.0;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
}

/// Pairwise Pearson coefficients over every feature and target column.
pub fn pearson_correlation(d: &Dataset) -> Result<CorrelationMatrix> {
    if d.n_rows() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            got: d.n_rows(),
        });
    }
    let cols = d.active_columns();
    let m = d.numeric_matrix(&cols)?;
    let columns: Vec<Vec<f64>> = (0..cols.len()).map(|j| m.column(j)).collect();
    let k = columns.len();
    let mut values = vec![vec![0.0; k]; k];
    for i in 0..k {
        values[i][i] = 1.0;
        for j in i + 1..k {
            let r = pearson(&columns[i], &columns[j]);
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix {
        labels: d.names(&cols),
        values,
    })
}
