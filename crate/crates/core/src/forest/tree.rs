use rand::seq::index;

use super::split::{best_split, is_constant};
use super::ForestParams;
use crate::linalg::Matrix;
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Internal {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        value: f64,
        count: usize,
    },
}

impl TreeNode {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value, .. } => return *value,
                TreeNode::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }
}

/// Mean of the values, clamped into their own range.
pub(crate) fn bounded_mean<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let (mut sum, mut lo, mut hi, mut n) = (0.0, f64::INFINITY, f64::NEG_INFINITY, 0usize);
    for v in values {
        sum += v;
        lo = lo.min(v);
        hi = hi.max(v);
        n += 1;
    }
    (sum / n as f64).clamp(lo, hi)
}

fn leaf(rows: &[usize], y: &[f64]) -> TreeNode {
    TreeNode::Leaf {
        value: bounded_mean(rows.iter().map(|&r| y[r])),
        count: rows.len(),
    }
}

/// Grows one regression tree over `rows` (which may repeat indices).
///
/// `params.max_features` must already be resolved. Candidate features are
/// drawn from `rng` at each node that is large enough to split, in preorder.
pub fn fit_tree(
    x: &Matrix,
    y: &[f64],
    rows: &[usize],
    params: &ForestParams,
    rng: &mut Rng,
) -> TreeNode {
    let d = x.cols();
    let k = params.max_features.unwrap_or(d).clamp(1, d.max(1));
    grow(x, y, rows, params, k, 0, rng)
}

fn grow(
    x: &Matrix,
    y: &[f64],
    rows: &[usize],
    params: &ForestParams,
    k: usize,
    depth: usize,
    rng: &mut Rng,
) -> TreeNode {
    let depth_reached = params.max_depth.is_some_and(|m| depth >= m);
    if rows.len() < params.min_samples_split
        || depth_reached
        || is_constant(rows, y)
        || x.cols() == 0
    {
        return leaf(rows, y);
    }
    let candidates = index::sample(rng, x.cols(), k).into_vec();
    let Some(split) = best_split(rows, x, y, &candidates, params.min_samples_leaf) else {
        return leaf(rows, y);
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&r| x[(r, split.feature)] <= split.threshold);
    let left = grow(x, y, &left_rows, params, k, depth + 1, rng);
    let right = grow(x, y, &right_rows, params, k, depth + 1, rng);
    TreeNode::Internal {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}
