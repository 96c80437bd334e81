//! Exact solver for one-dimensional features.
//!
//! With the intercepts minimized exactly, the objective is a convex function
//! of the scalar direction and golden-section search finds its minimum.

use alloc::vec::Vec;

use super::intercept::{slot_intercept, slot_value, Projected};
use super::spec::{Constraint, InterceptSlot, ObjectiveSpec, Point};
use crate::numeric::golden_section;

pub(crate) struct ProfileOutcome {
    pub point: Point,
    pub evaluations: usize,
}

fn profile(spec: &ObjectiveSpec<'_>, omega: f64) -> (f64, f64, f64) {
    let data = spec.data();
    let mut b = [0.0; 2];
    let mut total = 0.0;
    for (k, slot) in [InterceptSlot::Main, InterceptSlot::Axillary].into_iter().enumerate() {
        let items: Vec<Projected> = spec
            .terms()
            .iter()
            .filter(|t| t.weight > 0.0 && spec.slot(t) == slot)
            .map(|t| Projected {
                p: data.row(t.index)[0] * omega,
                y: data.label(t.index).sign(),
                weight: t.weight,
                c: t.c,
                kind: t.kind,
            })
            .collect();
        if !items.is_empty() {
            b[k] = slot_intercept(&items);
            total += slot_value(&items, b[k]);
        }
    }
    if let Constraint::Penalty(lambda) = spec.constraint() {
        total += 0.5 * lambda * omega * omega;
    }
    (total, b[0], b[1])
}

/// Requires `spec.dim() == 1`.
pub(crate) fn solve_profile(spec: &ObjectiveSpec<'_>) -> ProfileOutcome {
    let mut evaluations = 0;
    let radius = match spec.constraint() {
        Constraint::UnitBall => 1.0,
        Constraint::Penalty(lambda) => {
            evaluations += 1;
            libm::sqrt(2.0 * profile(spec, 0.0).0 / lambda).max(1e-12)
        }
    };
    let (omega, _) = golden_section(
        |w| {
            evaluations += 1;
            profile(spec, w).0
        },
        -radius,
        radius,
        1e-13 * radius,
    );
    let (_, beta, beta0) = profile(spec, omega);
    ProfileOutcome {
        point: Point::new(alloc::vec![omega], beta, spec.has_axillary().then_some(beta0)),
        evaluations: evaluations + 1,
    }
}
