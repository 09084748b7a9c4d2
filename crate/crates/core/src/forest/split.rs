use crate::linalg::Matrix;

/// A chosen split: rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub impurity_decrease: f64,
}

/// Midpoint of two consecutive distinct values, kept strictly below `hi`.
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo / 2.0 + hi / 2.0;
    if mid >= hi || mid < lo {
        lo
    } else {
        mid
    }
}

pub(crate) fn is_constant(rows: &[usize], y: &[f64]) -> bool {
    rows.iter().all(|&r| y[r] == y[rows[0]])
}

/// Best variance-reduction split over `candidate_features`.
///
/// The decrease is `Var(parent) − (n_L/n)·Var(left) − (n_R/n)·Var(right)`,
/// evaluated through prefix sums of the centered targets. Candidate
/// thresholds are midpoints between consecutive distinct values; both
/// children must hold at least `min_samples_leaf` rows and the decrease must
/// be strictly positive. Ties go to the lowest feature index, then the
/// lowest threshold.
///
/// Rows are processed in (value, target) order and the parent mean is
/// summed in sorted order, so the result does not depend on the order of
/// `rows`.
pub fn best_split(
    rows: &[usize],
    x: &Matrix,
    y: &[f64],
    candidate_features: &[usize],
    min_samples_leaf: usize,
) -> Option<Split> {
    let n = rows.len();
    if n < 2 || is_constant(rows, y) {
        return None;
    }
    let min_leaf = min_samples_leaf.max(1);
    let mut sorted_y: Vec<f64> = rows.iter().map(|&r| y[r]).collect();
    sorted_y.sort_by(f64::total_cmp);
    let mean = sorted_y.iter().sum::<f64>() / n as f64;
    let total: f64 = sorted_y.iter().map(|v| v - mean).sum();
    let parent_term = total * total / n as f64;

    let mut features = candidate_features.to_vec();
    features.sort_unstable();
    features.dedup();

    let mut best: Option<Split> = None;
    let mut order = rows.to_vec();
    for &f in &features {
        order.sort_by(|&a, &b| x[(a, f)].total_cmp(&x[(b, f)]).then(y[a].total_cmp(&y[b])));
        let mut left_sum = 0.0;
        for i in 0..n - 1 {
            left_sum += y[order[i]] - mean;
            let (lo, hi) = (x[(order[i], f)], x[(order[i + 1], f)]);
            if lo == hi {
                continue;
            }
            let n_left = i + 1;
            let n_right = n - n_left;
            if n_left < min_leaf || n_right < min_leaf {
                continue;
            }
            let right_sum = total - left_sum;
            let gain = (left_sum * left_sum / n_left as f64
                + right_sum * right_sum / n_right as f64
                - parent_term)
                / n as f64;
            if best.is_none_or(|b| gain > b.impurity_decrease) {
                best = Some(Split {
                    feature: f,
                    threshold: midpoint(lo, hi),
                    impurity_decrease: gain,
                });
            }
        }
    }
    best.filter(|b| b.impurity_decrease > 0.0)
}
