//! Exact and one-dimensional intercept minimization for a fixed direction.

use alloc::vec::Vec;

use crate::data::Label;
use crate::error::{check_dim, invalid, Result};
use crate::loss::LossKind;

/// One term of a 1-d intercept problem: `weight * loss_c(y (p + b))`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Projected {
    pub p: f64,
    pub y: f64,
    pub weight: f64,
    pub c: f64,
    pub kind: LossKind,
}

/// Exact minimizer of `b -> sum_i H_c(y_i (p_i + b))`.
///
/// The objective is piecewise linear with breakpoints `y_i / sqrt(c) - p_i`.
/// When the minimizing set is an interval the midpoint is returned; when it
/// is unbounded (one class absent) the finite end is returned, clamped to
/// `+-(max |p_i| + 1/sqrt(c))`.
pub fn solve_intercept_1d(projections: &[f64], labels: &[Label], c: f64) -> Result<f64> {
    if projections.is_empty() {
        return Err(invalid("intercept problem needs at least one observation"));
    }
    check_dim(projections.len(), labels.len())?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid("C must be positive and finite"));
    }
    if projections.iter().any(|p| !p.is_finite()) {
        return Err(invalid("projections must be finite"));
    }
    let items: Vec<Projected> = projections
        .iter()
        .zip(labels)
        .map(|(&p, &y)| Projected {
            p,
            y: y.sign(),
            weight: 1.0,
            c,
            kind: LossKind::Hinge,
        })
        .collect();
    Ok(hinge_intercept(&items))
}

/// Weighted version of [`solve_intercept_1d`]; every item must be a hinge term.
pub(crate) fn hinge_intercept(items: &[Projected]) -> f64 {
    let cap = items
        .iter()
        .map(|it| libm::fabs(it.p) + 1.0 / libm::sqrt(it.c))
        .fold(0.0, f64::max);
    // (breakpoint, slope increment)
    let mut breaks: Vec<(f64, f64)> = items
        .iter()
        .filter(|it| it.weight > 0.0)
        .map(|it| (it.y / libm::sqrt(it.c) - it.p, it.weight * it.c))
        .collect();
    if breaks.is_empty() {
        return 0.0;
    }
    breaks.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = breaks.iter().map(|b| b.1).sum();
    let left_slope: f64 = -items
        .iter()
        .filter(|it| it.y > 0.0)
        .map(|it| it.weight * it.c)
        .sum::<f64>();
    let eps = 1e-12 * total;
    let clamp = |b: f64| b.clamp(-cap, cap);

    if left_slope >= -eps {
        // No positive terms: flat on (-inf, first breakpoint].
        return clamp(breaks[0].0);
    }
    let mut slope = left_slope;
    let mut k = 0;
    while k < breaks.len() {
        let at = breaks[k].0;
        while k < breaks.len() && breaks[k].0 == at {
            slope += breaks[k].1;
            k += 1;
        }
        if slope > eps {
            return clamp(at);
        }
        if slope >= -eps {
            return match breaks.get(k) {
                Some(&(next, _)) => clamp(0.5 * (at + next)),
                None => clamp(at),
            };
        }
    }
    clamp(breaks[breaks.len() - 1].0)
}

/// Exact sweep for hinge-only items, bisection otherwise.
pub(crate) fn slot_intercept(items: &[Projected]) -> f64 {
    if items.iter().all(|it| it.kind == LossKind::Hinge) {
        hinge_intercept(items)
    } else {
        convex_intercept(items)
    }
}

/// `sum weight * loss(y (p + b))`.
pub(crate) fn slot_value(items: &[Projected], b: f64) -> f64 {
    items
        .iter()
        .map(|it| it.weight * it.kind.value(it.y * (it.p + b), it.c))
        .sum()
}

/// Minimizer of a convex 1-d sum of terms by bisection on the derivative.
pub(crate) fn convex_intercept(items: &[Projected]) -> f64 {
    let derivative = |b: f64| -> f64 {
        items
            .iter()
            .map(|it| it.weight * it.y * it.kind.derivative(it.y * (it.p + b), it.c))
            .sum()
    };
    let scale = items
        .iter()
        .map(|it| libm::fabs(it.p) + 1.0 / libm::sqrt(it.c))
        .fold(1.0, f64::max);
    let limit = scale * 1e8;
    let mut lo = -scale;
    while derivative(lo) > 0.0 && lo > -limit {
        lo *= 2.0;
    }
    let mut hi = scale;
    while derivative(hi) < 0.0 && hi < limit {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if derivative(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn objective(p: &[f64], y: &[Label], c: f64, b: f64) -> f64 {
        p.iter()
            .zip(y)
            .map(|(&p, &y)| LossKind::Hinge.value(y.sign() * (p + b), c))
            .sum()
    }

    #[test]
    fn symmetric_pair() {
        let b = solve_intercept_1d(&[-1.0, 1.0], &[Label::Neg, Label::Pos], 1.0).unwrap();
        assert!(b.abs() < 1e-15);
    }

    #[test]
    fn one_sided_returns_boundary() {
        let p = [0.3, -0.2, 1.5];
        let b = solve_intercept_1d(&p, &[Label::Pos; 3], 1.0).unwrap();
        assert!((b - (1.0 + 0.2)).abs() < 1e-15);
        assert_eq!(objective(&p, &[Label::Pos; 3], 1.0, b), 0.0);
        let b = solve_intercept_1d(&p, &[Label::Neg; 3], 1.0).unwrap();
        assert!((b - (-1.0 - 1.5)).abs() < 1e-15);
    }

    #[test]
    fn empty_and_bad_input() {
        assert!(solve_intercept_1d(&[], &[], 1.0).is_err());
        assert!(solve_intercept_1d(&[1.0], &[Label::Pos], 0.0).is_err());
        assert!(solve_intercept_1d(&[1.0, 2.0], &[Label::Pos], 1.0).is_err());
    }

    #[test]
    fn random_instance_matches_fine_grid() {
        // Frozen n = 7 instance; the brute-force grid uses step 1e-4 on [-6, 6].
        let p = [0.81, -1.27, 0.05, 2.3, -0.66, 1.12, -2.05];
        let y = [
            Label::Pos,
            Label::Neg,
            Label::Neg,
            Label::Pos,
            Label::Pos,
            Label::Neg,
            Label::Neg,
        ];
        for c in [0.25, 1.0, 4.0] {
            let b = solve_intercept_1d(&p, &y, c).unwrap();
            let grid: Vec<(f64, f64)> = (0..=120_000)
                .map(|k| {
                    let g = -6.0 + k as f64 * 1e-4;
                    (g, objective(&p, &y, c, g))
                })
                .collect();
            let best_v = grid.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);
            let argmin: Vec<f64> = grid.iter().filter(|g| g.1 <= best_v + 1e-9).map(|g| g.0).collect();
            let (lo, hi) = (argmin[0], argmin[argmin.len() - 1]);
            assert!(objective(&p, &y, c, b) <= best_v + 1e-12, "c={c}");
            assert!(b >= lo - 1e-4 && b <= hi + 1e-4, "c={c}: {b} not in [{lo}, {hi}]");
        }
    }

    #[test]
    fn flat_interval_midpoint() {
        // separable with room: zero-loss interval is [1 - 1, -1 - (-3)] = [0, 2]
        let b = solve_intercept_1d(&[1.0, -3.0], &[Label::Pos, Label::Neg], 1.0).unwrap();
        assert!((b - 1.0).abs() < 1e-15);
    }

    #[test]
    fn convex_intercept_matches_golden_section() {
        let items = vec![
            Projected { p: 0.5, y: 1.0, weight: 1.0, c: 1.0, kind: LossKind::Dwd },
            Projected { p: 1.5, y: 1.0, weight: 1.0, c: 1.0, kind: LossKind::Dwd },
            Projected { p: -0.4, y: -1.0, weight: 1.0, c: 1.0, kind: LossKind::Dwd },
        ];
        let f = |b: f64| -> f64 {
            items.iter().map(|it| it.weight * it.kind.value(it.y * (it.p + b), it.c)).sum()
        };
        let b = convex_intercept(&items);
        let (g, _) = crate::numeric::golden_section(f, -10.0, 10.0, 1e-12);
        assert!((b - g).abs() < 1e-6, "{b} vs {g}");
    }
}
