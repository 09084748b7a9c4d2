//! Random-forest regression over CART variance-reduction trees.
//!
//! Tree `t` draws its bootstrap sample and its per-node feature subsets from
//! [`rng::child`]`(seed, t)`, so the fitted forest is the same for any
//! worker count.

mod split;
mod tree;

pub use split::{best_split, midpoint, Split};
pub use tree::{fit_tree, TreeNode};

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::metrics;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` grows until the other stopping rules apply.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Features sampled per split; `None` means ⌈d/3⌉.
    pub max_features: Option<usize>,
    pub seed: u64,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: None,
            seed: 0,
            bootstrap: true,
        }
    }
}

impl ForestParams {
    /// Copy with `max_features` resolved for `d` features, after validation.
    pub fn resolved(&self, d: usize) -> Result<ForestParams> {
        if self.n_trees == 0 {
            return Err(Error::InvalidParams("n_trees must be at least 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(Error::InvalidParams(
                "min_samples_split must be at least 2".into(),
            ));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::InvalidParams(
                "min_samples_leaf must be at least 1".into(),
            ));
        }
        let k = self.max_features.unwrap_or(d.div_ceil(3));
        if k == 0 || k > d {
            return Err(Error::InvalidParams(format!(
                "max_features must lie in [1, {d}], got {k}"
            )));
        }
        Ok(ForestParams {
            max_features: Some(k),
            ..self.clone()
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub trees: Vec<TreeNode>,
    pub params: ForestParams,
    pub feature_names: Vec<String>,
    pub oob_r2: Option<f64>,
}

impl ForestModel {
    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.feature_names.len() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_names.len(),
                got: names.len(),
            });
        }
        self.feature_names = names;
        Ok(self)
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        tree::bounded_mean(self.trees.iter().map(|t| t.predict(x)))
    }
}

struct FittedTree {
    root: TreeNode,
    in_bag: Vec<bool>,
}

fn fit_one(x: &Matrix, y: &[f64], params: &ForestParams, t: usize) -> FittedTree {
    let n = x.rows();
    let mut rng = rng::child(params.seed, t as u64);
    let rows: Vec<usize> = if params.bootstrap {
        (0..n).map(|_| rng.random_range(0..n)).collect()
    } else {
        (0..n).collect()
    };
    let mut in_bag = vec![false; n];
    for &r in &rows {
        in_bag[r] = true;
    }
    FittedTree {
        root: fit_tree(x, y, &rows, params, &mut rng),
        in_bag,
    }
}

/// Fits a forest on the current rayon pool.
pub fn fit_forest(x: &Matrix, y: &[f64], params: &ForestParams) -> Result<ForestModel> {
    let n = x.rows();
    if y.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: y.len(),
        });
    }
    if n < 2 {
        return Err(Error::TooFewRows { needed: 2, got: n });
    }
    if !x.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let params = params.resolved(x.cols())?;
    let fitted: Vec<FittedTree> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| fit_one(x, y, &params, t))
        .collect();

    let oob_r2 = if params.bootstrap {
        out_of_bag_r2(x, y, &fitted)
    } else {
        None
    };
    Ok(ForestModel {
        trees: fitted.into_iter().map(|f| f.root).collect(),
        feature_names: (0..x.cols()).map(|j| format!("x{j}")).collect(),
        params,
        oob_r2,
    })
}

/// Fits a forest on a dedicated pool of `workers` threads.
pub fn fit_forest_with_workers(
    x: &Matrix,
    y: &[f64],
    params: &ForestParams,
    workers: usize,
) -> Result<ForestModel> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
    pool.install(|| fit_forest(x, y, params))
}

fn out_of_bag_r2(x: &Matrix, y: &[f64], fitted: &[FittedTree]) -> Option<f64> {
    let mut truth = Vec::new();
    let mut pred = Vec::new();
    for (i, &yi) in y.iter().enumerate() {
        let votes: Vec<f64> = fitted
            .iter()
            .filter(|f| !f.in_bag[i])
            .map(|f| f.root.predict(x.row(i)))
            .collect();
        if !votes.is_empty() {
            truth.push(yi);
            pred.push(tree::bounded_mean(votes));
        }
    }
    metrics::r2_score(&truth, &pred).ok()
}

pub fn predict_forest(m: &ForestModel, x: &Matrix) -> Result<Vec<f64>> {
    if x.cols() != m.n_features() {
        return Err(Error::DimensionMismatch {
            expected: m.n_features(),
            got: x.cols(),
        });
    }
    Ok(x.iter_rows().map(|r| m.predict_row(r)).collect())
}
