//! Hard-margin (maximum-margin) separating hyperplane via SMO on the dual.
//!
//! Used to pick a canonical minimizer when a hinge-only objective can be
//! driven to zero: every direction with margins at least `1/sqrt(C)` is then
//! optimal and the maximum-margin one is returned.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::{dot, LabeledDataset};

/// The maximum-margin hyperplane of a separable dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxMargin {
    /// Unit-norm normal vector.
    pub direction: Vec<f64>,
    /// Intercept halfway between the closest projections of the two classes.
    pub intercept: f64,
    /// Geometric margin: smallest functional margin at `(direction, intercept)`.
    pub margin: f64,
}

/// Largest dataset for which the dual Gram matrix is formed.
pub const MAX_MARGIN_MAX_N: usize = 3000;

/// Solves `min 1/2 ||w||^2  s.t.  y_i (x_i'w + b) >= 1` by sequential minimal
/// optimization with second-order working-set selection.
///
/// Returns `None` when the data are not separable (the dual diverges), one
/// class is missing, or `n` exceeds [`MAX_MARGIN_MAX_N`].
pub fn max_margin(data: &LabeledDataset) -> Option<MaxMargin> {
    let n = data.len();
    if !data.has_both_classes() || n > MAX_MARGIN_MAX_N {
        return None;
    }
    let y: Vec<f64> = data.labels().iter().map(|l| l.sign()).collect();
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let k = dot(data.row(i), data.row(j));
            gram[i * n + j] = k;
            gram[j * n + i] = k;
        }
    }
    let scale = (0..n).map(|i| gram[i * n + i]).fold(0.0, f64::max).max(1e-300);
    let tau = 1e-12 * scale;
    let eps = 1e-10;
    let max_iter = 200 * n + 100_000;

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut converged = false;
    for _ in 0..max_iter {
        // i: maximal violator in I_up
        let mut i = usize::MAX;
        let mut gmax = f64::NEG_INFINITY;
        for t in 0..n {
            let in_up = y[t] > 0.0 || alpha[t] > 0.0;
            if in_up && -y[t] * grad[t] > gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        let mut j = usize::MAX;
        let mut gmin = f64::INFINITY;
        let mut best = f64::INFINITY;
        for t in 0..n {
            let in_low = y[t] < 0.0 || alpha[t] > 0.0;
            if !in_low {
                continue;
            }
            let v = -y[t] * grad[t];
            if v < gmin {
                gmin = v;
            }
            let b = gmax - v;
            if b > 0.0 {
                let a = (gram[i * n + i] + gram[t * n + t] - 2.0 * gram[i * n + t]).max(tau);
                let score = -b * b / a;
                if score < best {
                    best = score;
                    j = t;
                }
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < eps {
            converged = true;
            break;
        }
        let a = (gram[i * n + i] + gram[j * n + j] - 2.0 * gram[i * n + j]).max(tau);
        let b = gmax + y[j] * grad[j];
        let mut delta = b / a;
        // alpha_i += y_i delta, alpha_j -= y_j delta, both kept nonnegative
        if y[i] < 0.0 {
            delta = delta.min(alpha[i]);
        }
        if y[j] > 0.0 {
            delta = delta.min(alpha[j]);
        }
        alpha[i] += y[i] * delta;
        alpha[j] -= y[j] * delta;
        if y[i] < 0.0 && alpha[i] < 1e-300 {
            alpha[i] = 0.0;
        }
        if y[j] > 0.0 && alpha[j] < 1e-300 {
            alpha[j] = 0.0;
        }
        for t in 0..n {
            grad[t] += y[t] * delta * (gram[t * n + i] - gram[t * n + j]);
        }
        if !alpha[i].is_finite() || alpha[i] > 1e15 {
            return None;
        }
    }
    if !converged {
        return None;
    }
    let mut w = vec![0.0; data.dim()];
    for t in 0..n {
        if alpha[t] > 0.0 {
            let s = alpha[t] * y[t];
            for (wj, xj) in w.iter_mut().zip(data.row(t)) {
                *wj += s * xj;
            }
        }
    }
    let nrm = libm::sqrt(dot(&w, &w));
    if !(nrm > 0.0 && nrm.is_finite()) {
        return None;
    }
    w.iter_mut().for_each(|v| *v /= nrm);
    let (mut min_pos, mut max_neg) = (f64::INFINITY, f64::NEG_INFINITY);
    for (row, &yi) in data.rows().zip(&y) {
        let p = dot(row, &w);
        if yi > 0.0 {
            min_pos = min_pos.min(p);
        } else {
            max_neg = max_neg.max(p);
        }
    }
    let margin = 0.5 * (min_pos - max_neg);
    if margin <= 0.0 {
        return None;
    }
    Some(MaxMargin {
        direction: w,
        intercept: -0.5 * (min_pos + max_neg),
        margin,
    })
}
