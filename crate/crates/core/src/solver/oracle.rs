//! Brute-force reference minimizer for tiny objectives (test oracle).
//!
//! For a fixed direction the objective separates into one convex problem per
//! intercept, each minimized by golden-section search on `[-B, B]` with
//! `B = max ||x_i|| + (2 + sqrt(n)) / sqrt(C_min) + 1` (doubled if the
//! minimizer lands on the boundary). The remaining function of the direction
//! is convex; it is searched on a coarse grid over the feasible set (unit
//! disk, or the box `[-R, R]^d` with `R = sqrt(2 G(0) / lambda)` in penalized
//! mode) and refined by nested golden-section search.

use alloc::vec;
use alloc::vec::Vec;

use super::spec::{Constraint, InterceptSlot, ObjectiveSpec, Point};
use super::{evaluate_objective, SolveResult};
use crate::error::{Error, Result};
use crate::numeric::golden_section;

const GRID: usize = 21;

struct Oracle<'s, 'a> {
    spec: &'s ObjectiveSpec<'a>,
    bound: f64,
    x_tol: f64,
    evals: usize,
}

impl Oracle<'_, '_> {
    fn value(&mut self, omega: &[f64], beta: f64, beta0: f64) -> f64 {
        self.evals += 1;
        let point = Point::new(omega.to_vec(), beta, Some(beta0));
        let mut total = 0.0;
        for term in self.spec.terms() {
            let u = self.spec.margin(term, &point);
            total += term.weight * term.kind.value(u, term.c);
        }
        if let Constraint::Penalty(lambda) = self.spec.constraint() {
            total += 0.5 * lambda * omega.iter().map(|w| w * w).sum::<f64>();
        }
        total
    }

    /// Partial objective restricted to one intercept slot.
    fn slot_value(&mut self, omega: &[f64], slot: InterceptSlot, b: f64) -> f64 {
        self.evals += 1;
        let point = Point::new(omega.to_vec(), b, Some(b));
        self.spec
            .terms()
            .iter()
            .filter(|t| self.spec.slot(t) == slot)
            .map(|t| t.weight * t.kind.value(self.spec.margin(t, &point), t.c))
            .sum()
    }

    fn best_intercept(&mut self, omega: &[f64], slot: InterceptSlot) -> f64 {
        let mut bound = self.bound;
        let x_tol = self.x_tol;
        for _ in 0..6 {
            let (b, _) = golden_section(|b| self.slot_value(omega, slot, b), -bound, bound, x_tol * bound);
            if libm::fabs(b) < bound * (1.0 - 1e-6) {
                return b;
            }
            bound *= 2.0;
        }
        golden_section(|b| self.slot_value(omega, slot, b), -bound, bound, x_tol * bound).0
    }

    /// `G(w)`: objective minimized over the intercepts. Returns `(value, beta, beta0)`.
    fn profile(&mut self, omega: &[f64]) -> (f64, f64, f64) {
        let beta = self.best_intercept(omega, InterceptSlot::Main);
        let beta0 = if self.spec.has_axillary() {
            self.best_intercept(omega, InterceptSlot::Axillary)
        } else {
            beta
        };
        (self.value(omega, beta, beta0), beta, beta0)
    }
}

/// Minimizes a tiny objective (`d <= 2`, at most four variables) by exhaustive
/// search. `grid_resolution` is the relative x-tolerance of the golden-section
/// refinements (e.g. `1e-10`).
pub fn oracle_solve_small(spec: &ObjectiveSpec<'_>, grid_resolution: f64) -> Result<SolveResult> {
    let d = spec.dim();
    if d > 2 || spec.variable_count() > 4 {
        return Err(Error::Unsupported(alloc::format!(
            "oracle handles at most two directions and four variables, got d = {d}"
        )));
    }
    let data = spec.data();
    let c_min = spec.terms().iter().map(|t| t.c).fold(f64::INFINITY, f64::min);
    let c_min = if c_min.is_finite() { c_min } else { 1.0 };
    let max_norm = data
        .rows()
        .map(|r| libm::sqrt(r.iter().map(|v| v * v).sum::<f64>()))
        .fold(0.0, f64::max);
    let bound = max_norm + (2.0 + libm::sqrt(data.len() as f64)) / libm::sqrt(c_min) + 1.0;
    let mut oracle = Oracle {
        spec,
        bound,
        x_tol: grid_resolution.max(1e-15),
        evals: 0,
    };

    let (radius, disk) = match spec.constraint() {
        Constraint::UnitBall => (1.0, true),
        Constraint::Penalty(lambda) => {
            if lambda <= 0.0 {
                return Err(Error::Unsupported("oracle needs lambda > 0 in penalized mode".into()));
            }
            let g0 = oracle.profile(&vec![0.0; d]).0;
            (libm::sqrt(2.0 * g0 / lambda).max(1e-12), false)
        }
    };
    let tol = oracle.x_tol * radius;

    // Coarse grid.
    let mut best = (f64::INFINITY, vec![0.0; d], 0.0, 0.0);
    let consider = |oracle: &mut Oracle, omega: Vec<f64>, best: &mut (f64, Vec<f64>, f64, f64)| {
        let (v, b, b0) = oracle.profile(&omega);
        if v < best.0 {
            *best = (v, omega, b, b0);
        }
    };
    let step = 2.0 * radius / (GRID - 1) as f64;
    if d == 1 {
        for k in 0..GRID {
            consider(&mut oracle, vec![-radius + k as f64 * step], &mut best);
        }
    } else {
        for k in 0..GRID {
            for l in 0..GRID {
                let w = vec![-radius + k as f64 * step, -radius + l as f64 * step];
                if !disk || w[0] * w[0] + w[1] * w[1] <= 1.0 {
                    consider(&mut oracle, w, &mut best);
                }
            }
        }
    }

    // Nested golden-section refinement of the convex profile.
    let refined: Vec<f64> = if d == 1 {
        let (w, _) = golden_section(|w| oracle.profile(&[w]).0, -radius, radius, tol);
        vec![w]
    } else {
        let inner_range = |w1: f64| -> f64 {
            if disk {
                libm::sqrt((1.0 - w1 * w1).max(0.0))
            } else {
                radius
            }
        };
        let inner = |oracle: &mut Oracle, w1: f64| -> (f64, f64) {
            let r = inner_range(w1);
            if r == 0.0 {
                return (0.0, oracle.profile(&[w1, 0.0]).0);
            }
            golden_section(|w2| oracle.profile(&[w1, w2]).0, -r, r, tol)
        };
        let (w1, _) = golden_section(|w1| inner(&mut oracle, w1).1, -radius, radius, tol);
        let (w2, _) = inner(&mut oracle, w1);
        vec![w1, w2]
    };
    consider(&mut oracle, refined, &mut best);

    let (_, omega, beta, beta0) = best;
    let point = Point::new(omega, beta, spec.has_axillary().then_some(beta0));
    let objective = evaluate_objective(spec, &point)?;
    Ok(SolveResult {
        omega: point.omega,
        beta: point.beta,
        beta0: point.beta0,
        objective,
        converged: true,
        iterations: oracle.evals,
        trace: Vec::new(),
    })
}
