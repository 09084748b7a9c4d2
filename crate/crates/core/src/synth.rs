//! Synthetic soil table with a known nonlinear yield response.
//!
//! Each row draws the twelve measured soil columns uniformly from the ranges
//! in [`FEATURE_RANGES`] (in column order, rounded to the listed decimals),
//! then computes
//!
//! ```text
//! yield = 36
//!       + 9 · exp(−((pH − 6.5) / 0.9)²)        optimum near neutral pH
//!       + 5 · [OC > 0.65]                       organic-carbon threshold
//!       + 5 · [P > 11 and K > 45]               joint P/K sufficiency
//!       + 4 · (1 − exp(−3 · (Zn − 1.5)))        saturating zinc response
//!       − 4 · [EC > 0.20]                       salinity penalty
//!       + ε,  ε ~ Normal(0, 0.8)
//! ```
//!
//! rounded to two decimals. Ca, Mg, S, Fe, Mn and Cu carry no signal. The
//! pH optimum sits in the middle of its range, so a linear fit cannot
//! recover it, while the threshold terms are easy for trees.

use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use crate::dataset::{soil_schema, Cell, ColumnSchema, Dataset};
use crate::error::{Error, Result};
use crate::rng;

/// (column, low, high, decimals)
pub const FEATURE_RANGES: [(&str, f64, f64, i32); 12] = [
    ("pH", 4.0, 9.0, 2),
    ("EC", 0.05, 0.30, 3),
    ("OC", 0.40, 0.90, 2),
    ("P", 5.0, 20.0, 1),
    ("K", 25.0, 70.0, 1),
    ("Ca", 1.5, 3.5, 2),
    ("Mg", 0.8, 1.6, 2),
    ("S", 8.0, 25.0, 2),
    ("Zn", 1.5, 3.0, 3),
    ("Fe", 10.0, 20.0, 3),
    ("Mn", 8.0, 45.0, 2),
    ("Cu", 0.5, 1.2, 3),
];

pub const NOISE_SD: f64 = 0.8;
pub const MIN_ROWS: usize = 10;

fn round_to(v: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (v * scale).round() / scale
}

/// Noise-free yield for one row in [`FEATURE_RANGES`] order.
pub fn yield_response(f: &[f64]) -> f64 {
    let (ph, ec, oc, p, k, zn) = (f[0], f[1], f[2], f[3], f[4], f[8]);
    let ph_term = 9.0 * (-((ph - 6.5) / 0.9).powi(2)).exp();
    let oc_term = if oc > 0.65 { 5.0 } else { 0.0 };
    let pk_term = if p > 11.0 && k > 45.0 { 5.0 } else { 0.0 };
    let zn_term = 4.0 * (1.0 - (-3.0 * (zn - 1.5)).exp());
    let ec_term = if ec > 0.20 { -4.0 } else { 0.0 };
    36.0 + ph_term + oc_term + pk_term + zn_term + ec_term
}

/// Schema of the generated table: the twelve measured columns and `yield`.
pub fn synthetic_schema() -> Vec<ColumnSchema> {
    soil_schema(true)
        .into_iter()
        .filter(|c| !c.optional)
        .collect()
}

pub fn generate(n: usize, seed: u64) -> Result<Dataset> {
    if n < MIN_ROWS {
        return Err(Error::TooFewRows {
            needed: MIN_ROWS,
            got: n,
        });
    }
    let mut rng = rng::seeded(seed);
    let noise = Normal::new(0.0, NOISE_SD).expect("positive standard deviation");
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let features: Vec<f64> = FEATURE_RANGES
            .iter()
            .map(|&(_, lo, hi, dec)| round_to(rng.random_range(lo..hi), dec))
            .collect();
        let y = round_to(yield_response(&features) + noise.sample(&mut rng), 2).max(0.0);
        let mut row: Vec<Cell> = features.into_iter().map(Cell::Number).collect();
        row.push(Cell::Number(y));
        rows.push(row);
    }
    Dataset::new(synthetic_schema(), rows)
}
