//! Central-cut ellipsoid method for objectives with two or three features.
//!
//! The intercepts are minimized exactly for every direction, leaving a convex
//! function `G(w)` on the feasible ball. A valid subgradient of `G` needs loss
//! subgradients whose intercept component vanishes; hinge terms sitting
//! exactly at their kink get the multiplier that achieves this. Each cut
//! also gives the lower bound `G(c) - sqrt(g' P g)` on the minimum, so the
//! method stops with a certified gap.

use alloc::vec;
use alloc::vec::Vec;

use super::intercept::{slot_intercept, slot_value, Projected};
use super::spec::{Constraint, InterceptSlot, ObjectiveSpec, Point};
use crate::data::dot;
use crate::loss::LossKind;

/// Largest feature dimension handled.
pub(crate) const ELLIPSOID_MAX_DIM: usize = 3;

pub(crate) struct EllipsoidOutcome {
    pub point: Point,
    pub converged: bool,
    pub iterations: usize,
    pub trace: Vec<f64>,
}

/// `G(w)`, a subgradient, and the minimizing intercepts.
fn profile(spec: &ObjectiveSpec<'_>, omega: &[f64], grad: &mut [f64]) -> (f64, [f64; 2]) {
    let data = spec.data();
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut b = [0.0; 2];
    let mut total = 0.0;
    for (k, slot) in [InterceptSlot::Main, InterceptSlot::Axillary].into_iter().enumerate() {
        let terms: Vec<_> = spec
            .terms()
            .iter()
            .filter(|t| t.weight > 0.0 && spec.slot(t) == slot)
            .collect();
        if terms.is_empty() {
            continue;
        }
        let items: Vec<Projected> = terms
            .iter()
            .map(|t| Projected {
                p: dot(data.row(t.index), omega),
                y: data.label(t.index).sign(),
                weight: t.weight,
                c: t.c,
                kind: t.kind,
            })
            .collect();
        b[k] = slot_intercept(&items);
        total += slot_value(&items, b[k]);

        // Loss derivatives; hinge kinks are resolved below.
        let mut s = vec![0.0; items.len()];
        let mut kink = vec![false; items.len()];
        let mut fixed = 0.0;
        let (mut pos_room, mut neg_room) = (0.0, 0.0);
        for (m, it) in items.iter().enumerate() {
            let u = it.y * (it.p + b[k]);
            let edge = 1.0 / libm::sqrt(it.c);
            let at_kink = it.kind == LossKind::Hinge
                && libm::fabs(u - edge) <= 1e-11 * (edge + libm::fabs(it.p) + libm::fabs(b[k]));
            if at_kink {
                kink[m] = true;
                if it.y > 0.0 {
                    pos_room += it.weight * it.c;
                } else {
                    neg_room += it.weight * it.c;
                }
            } else {
                s[m] = it.kind.derivative(u, it.c);
                fixed += it.weight * it.y * s[m];
            }
        }
        // Kink multipliers s in [-c, 0] with sum w y s = -fixed.
        let (theta_pos, theta_neg) = if fixed >= 0.0 {
            (if pos_room > 0.0 { (fixed / pos_room).min(1.0) } else { 0.0 }, 0.0)
        } else {
            (0.0, if neg_room > 0.0 { (-fixed / neg_room).min(1.0) } else { 0.0 })
        };
        for (m, it) in items.iter().enumerate() {
            if kink[m] {
                s[m] = -it.c * if it.y > 0.0 { theta_pos } else { theta_neg };
            }
            let coef = it.weight * it.y * s[m];
            if coef != 0.0 {
                for (g, x) in grad.iter_mut().zip(data.row(terms[m].index)) {
                    *g += coef * x;
                }
            }
        }
    }
    if let Constraint::Penalty(lambda) = spec.constraint() {
        total += 0.5 * lambda * dot(omega, omega);
        for (g, w) in grad.iter_mut().zip(omega) {
            *g += lambda * w;
        }
    }
    (total, b)
}

/// Requires `2 <= spec.dim() <= 3`.
pub(crate) fn solve_ellipsoid(spec: &ObjectiveSpec<'_>, tol: f64, max_iters: usize, record: bool) -> EllipsoidOutcome {
    let m = spec.dim();
    let mf = m as f64;
    let mut grad = vec![0.0; m];
    let origin = vec![0.0; m];
    let radius = match spec.constraint() {
        Constraint::UnitBall => 1.0,
        Constraint::Penalty(lambda) => libm::sqrt(2.0 * profile(spec, &origin, &mut grad).0 / lambda).max(1e-12),
    };
    // Ellipsoid {center + B u : ||u|| <= 1}, kept in factored form for stability.
    let mut center = origin;
    let mut basis = vec![0.0; m * m];
    for i in 0..m {
        basis[i * m + i] = radius;
    }
    let mut best = (f64::INFINITY, center.clone(), [0.0; 2]);
    let mut lower = f64::NEG_INFINITY;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut bg = vec![0.0; m];
    let mut bp = vec![0.0; m];
    while iterations < max_iters {
        iterations += 1;
        let cn = libm::sqrt(dot(&center, &center));
        let feasible = cn <= radius;
        // Cut g'(w - center) <= -depth.
        let (depth, value) = if feasible {
            let (v, b) = profile(spec, &center, &mut grad);
            if v < best.0 {
                best = (v, center.clone(), b);
            }
            (v - best.0, v)
        } else {
            grad.iter_mut().zip(&center).for_each(|(g, c)| *g = c / cn);
            (cn - radius, f64::INFINITY)
        };
        // B'g
        for j in 0..m {
            bg[j] = (0..m).map(|i| basis[i * m + j] * grad[i]).sum();
        }
        let norm = libm::sqrt(dot(&bg, &bg));
        if !(norm > 0.0 && norm.is_finite()) {
            // Zero subgradient at a feasible point: optimal.
            converged = feasible;
            if record {
                trace.push(best.0);
            }
            break;
        }
        if feasible {
            lower = lower.max(value - norm);
        }
        if record {
            trace.push(best.0);
        }
        if best.0 - lower <= tol * best.0.abs().max(1.0) {
            converged = true;
            break;
        }
        let alpha = (depth / norm).clamp(0.0, 0.999);
        bg.iter_mut().for_each(|v| *v /= norm);
        for i in 0..m {
            bp[i] = dot(&basis[i * m..(i + 1) * m], &bg);
        }
        let shift = (1.0 + mf * alpha) / (mf + 1.0);
        for i in 0..m {
            center[i] -= shift * bp[i];
        }
        let sigma = 2.0 * (1.0 + mf * alpha) / ((mf + 1.0) * (1.0 + alpha));
        let scale = libm::sqrt(mf * mf * (1.0 - alpha * alpha) / (mf * mf - 1.0));
        let kappa = 1.0 - libm::sqrt((1.0 - sigma).max(0.0));
        // B <- scale * B (I - kappa p p'), with B p = bp.
        for i in 0..m {
            for j in 0..m {
                basis[i * m + j] = scale * (basis[i * m + j] - kappa * bp[i] * bg[j]);
            }
        }
    }
    let (_, omega, b) = best;
    EllipsoidOutcome {
        point: Point::new(omega, b[0], spec.has_axillary().then_some(b[1])),
        converged,
        iterations,
        trace,
    }
}
