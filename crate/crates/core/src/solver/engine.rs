//! Accelerated projected-gradient engine with hinge smoothing and a
//! subgradient polish on the exact objective.
//!
//! Hinge terms are replaced by a Huber-smoothed version whose width shrinks
//! geometrically from stage to stage; the DWD loss is already C^1 with a
//! bounded second derivative and is used as is. Every iterate is projected
//! onto the unit ball (constrained mode). The best iterate under the exact
//! objective is tracked throughout, so the reported value never increases.

use alloc::borrow::Cow;
use alloc::vec;
use alloc::vec::Vec;

use super::intercept::{slot_intercept, slot_value, Projected};
use super::spec::{Constraint, InterceptSlot, ObjectiveSpec, Point};
use super::SolverConfig;
use crate::data::{dot, LabeledDataset};
use crate::loss::{smoothed_hinge, LossKind};

/// Relative smoothing widths, in units of each term's `1/sqrt(C)`.
const SMOOTHING_SCHEDULE: [f64; 8] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];
const WINDOW: usize = 20;
const POLISH_ITERS: usize = 200;

#[derive(Debug, Clone, Copy)]
struct CTerm {
    obs: usize,
    y: f64,
    weight: f64,
    c: f64,
    inv_sqrt_c: f64,
    kind: LossKind,
    slot: usize,
}

/// An objective compiled into flat arrays, possibly expressed in an
/// orthonormal basis of the row space when `d > n`.
pub(crate) struct Compiled<'a> {
    rows: Cow<'a, [f64]>,
    n: usize,
    dim: usize,
    /// Orthonormal basis vectors (each of the original dimension), if reduced.
    basis: Option<Vec<Vec<f64>>>,
    terms: Vec<CTerm>,
    axillary: bool,
    penalty: Option<f64>,
    ball: bool,
    proj: Vec<f64>,
    coef: Vec<f64>,
}

pub(crate) struct Outcome {
    pub point: Point,
    pub converged: bool,
    pub iterations: usize,
    pub trace: Vec<f64>,
}

impl<'a> Compiled<'a> {
    pub fn new(spec: &ObjectiveSpec<'a>) -> Self {
        let data = spec.data();
        let (rows, dim, basis) = if data.dim() > data.len() {
            let (reduced, basis) = row_space(data);
            let r = basis.len();
            (Cow::Owned(reduced), r, Some(basis))
        } else {
            (Cow::Borrowed(data.features()), data.dim(), None)
        };
        let terms = spec
            .terms()
            .iter()
            .filter(|t| t.weight > 0.0)
            .map(|t| CTerm {
                obs: t.index,
                y: data.label(t.index).sign(),
                weight: t.weight,
                c: t.c,
                inv_sqrt_c: 1.0 / libm::sqrt(t.c),
                kind: t.kind,
                slot: match spec.slot(t) {
                    InterceptSlot::Main => 0,
                    InterceptSlot::Axillary => 1,
                },
            })
            .collect();
        let (penalty, ball) = match spec.constraint() {
            Constraint::UnitBall => (None, true),
            Constraint::Penalty(lambda) => (Some(lambda), false),
        };
        Self {
            rows,
            n: data.len(),
            dim,
            basis,
            terms,
            axillary: spec.has_axillary(),
            penalty,
            ball,
            proj: vec![0.0; data.len()],
            coef: vec![0.0; data.len()],
        }
    }

    fn nvars(&self) -> usize {
        self.dim + 1 + usize::from(self.axillary)
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    /// Packs an original-space point into solver coordinates.
    fn pack(&self, point: &Point) -> Vec<f64> {
        let mut x = match &self.basis {
            Some(basis) => basis.iter().map(|q| dot(q, &point.omega)).collect(),
            None => point.omega.clone(),
        };
        x.push(point.beta);
        if self.axillary {
            x.push(point.beta0.unwrap_or(point.beta));
        }
        x
    }

    fn unpack(&self, x: &[f64], orig_dim: usize) -> Point {
        let omega = match &self.basis {
            Some(basis) => {
                let mut w = vec![0.0; orig_dim];
                for (q, &v) in basis.iter().zip(&x[..self.dim]) {
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi += v * qi;
                    }
                }
                w
            }
            None => x[..self.dim].to_vec(),
        };
        let beta0 = self.axillary.then(|| x[self.dim + 1]);
        Point::new(omega, x[self.dim], beta0)
    }

    fn project(&self, x: &mut [f64]) {
        if self.ball {
            let w = &mut x[..self.dim];
            let nrm = libm::sqrt(dot(w, w));
            if nrm > 1.0 {
                let s = 1.0 / nrm;
                w.iter_mut().for_each(|v| *v *= s);
            }
        }
    }

    /// Returns `(smoothed value, exact value)` and optionally the gradient of
    /// the smoothed objective. `mu = 0` disables smoothing.
    fn eval(&mut self, x: &[f64], mu: f64, grad: Option<&mut [f64]>) -> (f64, f64) {
        let dim = self.dim;
        for i in 0..self.n {
            let p = dot(&self.rows[i * dim..(i + 1) * dim], &x[..dim]);
            self.proj[i] = p;
        }
        if grad.is_some() {
            self.coef.iter_mut().for_each(|c| *c = 0.0);
        }
        let mut g_icpt = [0.0f64; 2];
        let (mut fs, mut ft) = (0.0, 0.0);
        for t in &self.terms {
            let u = t.y * (self.proj[t.obs] + x[dim + t.slot]);
            let exact = t.kind.value(u, t.c);
            let (sv, sd) = match t.kind {
                LossKind::Hinge if mu > 0.0 => smoothed_hinge(u, t.c, mu * t.inv_sqrt_c),
                _ => (exact, if grad.is_some() { t.kind.derivative(u, t.c) } else { 0.0 }),
            };
            fs += t.weight * sv;
            ft += t.weight * exact;
            if grad.is_some() {
                let g = t.weight * sd * t.y;
                self.coef[t.obs] += g;
                g_icpt[t.slot] += g;
            }
        }
        if let Some(lambda) = self.penalty {
            let pen = 0.5 * lambda * dot(&x[..dim], &x[..dim]);
            fs += pen;
            ft += pen;
        }
        if let Some(g) = grad {
            g.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..self.n {
                let a = self.coef[i];
                if a != 0.0 {
                    for (gj, xj) in g[..dim].iter_mut().zip(&self.rows[i * dim..(i + 1) * dim]) {
                        *gj += a * xj;
                    }
                }
            }
            if let Some(lambda) = self.penalty {
                for (gj, xj) in g[..dim].iter_mut().zip(&x[..dim]) {
                    *gj += lambda * xj;
                }
            }
            g[dim] = g_icpt[0];
            if self.axillary {
                g[dim + 1] = g_icpt[1];
            }
        }
        (fs, ft)
    }

    fn has_hinge(&self) -> bool {
        self.terms.iter().any(|t| t.kind == LossKind::Hinge)
    }

    /// Exact minimization over each intercept with the direction held fixed.
    fn exact_intercepts(&mut self, x: &mut [f64]) {
        let dim = self.dim;
        for i in 0..self.n {
            self.proj[i] = dot(self.row(i), &x[..dim]);
        }
        for slot in 0..1 + usize::from(self.axillary) {
            let items: Vec<Projected> = self
                .terms
                .iter()
                .filter(|t| t.slot == slot)
                .map(|t| Projected {
                    p: self.proj[t.obs],
                    y: t.y,
                    weight: t.weight,
                    c: t.c,
                    kind: t.kind,
                })
                .collect();
            if items.is_empty() {
                continue;
            }
            let before = x[dim + slot];
            let candidate = slot_intercept(&items);
            if slot_value(&items, candidate) <= slot_value(&items, before) {
                x[dim + slot] = candidate;
            }
        }
    }

    pub fn solve(&mut self, spec: &ObjectiveSpec<'_>, config: &SolverConfig, init: &Point) -> Outcome {
        let orig_dim = spec.dim();
        let nv = self.nvars();
        let mut x = self.pack(init);
        self.project(&mut x);

        let mut tracker = Tracker {
            best_value: self.eval(&x, 0.0, None).1,
            best_x: x.clone(),
            iterations: 0,
            trace: Vec::new(),
            record: config.record_trace,
        };
        tracker.push();

        let stages: &[f64] = if self.has_hinge() {
            &SMOOTHING_SCHEDULE
        } else {
            &[0.0]
        };
        let mut lipschitz = 1.0;
        let mut converged = false;
        let mut grad = vec![0.0; nv];
        for (k, &mu) in stages.iter().enumerate() {
            let tol = if k + 1 == stages.len() {
                config.tol
            } else {
                config.tol.max(1e-2 * mu)
            };
            converged = self.fista(&mut x, mu, tol, config.max_iters, &mut lipschitz, &mut grad, &mut tracker);
            if tracker.iterations >= config.max_iters {
                break;
            }
        }

        // Polish on the exact objective.
        let mut xb = tracker.best_x.clone();
        self.exact_intercepts(&mut xb);
        let vb = self.eval(&xb, 0.0, None).1;
        tracker.offer(vb, &xb);
        if self.has_hinge() {
            let gap = self
                .terms
                .iter()
                .filter(|t| t.kind == LossKind::Hinge)
                .map(|t| 0.5 * t.weight * t.c * SMOOTHING_SCHEDULE[SMOOTHING_SCHEDULE.len() - 1] * t.inv_sqrt_c)
                .sum::<f64>();
            self.subgradient_polish(gap, config.max_iters, &mut grad, &mut tracker);
            let mut xb = tracker.best_x.clone();
            self.exact_intercepts(&mut xb);
            let vb = self.eval(&xb, 0.0, None).1;
            tracker.offer(vb, &xb);
        }

        Outcome {
            point: self.unpack(&tracker.best_x, orig_dim),
            converged,
            iterations: tracker.iterations,
            trace: tracker.trace,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn fista(
        &mut self,
        x: &mut Vec<f64>,
        mu: f64,
        tol: f64,
        max_iters: usize,
        lipschitz: &mut f64,
        grad: &mut [f64],
        tracker: &mut Tracker,
    ) -> bool {
        let nv = x.len();
        let mut xk = x.clone();
        let mut y = x.clone();
        let mut xn = vec![0.0; nv];
        let mut t = 1.0f64;
        let mut f_prev = self.eval(&xk, mu, None).0;
        let mut best_stage = f_prev;
        let mut best_stage_x = xk.clone();
        let mut history: Vec<f64> = Vec::new();
        let mut converged = false;

        while tracker.iterations < max_iters {
            let (fy, _) = self.eval(&y, mu, Some(grad));
            let (f_new, f_exact) = loop {
                for j in 0..nv {
                    xn[j] = y[j] - grad[j] / *lipschitz;
                }
                self.project(&mut xn);
                let vals = self.eval(&xn, mu, None);
                let mut lin = 0.0;
                let mut sq = 0.0;
                for j in 0..nv {
                    let d = xn[j] - y[j];
                    lin += grad[j] * d;
                    sq += d * d;
                }
                let bound = fy + lin + 0.5 * *lipschitz * sq;
                if vals.0 <= bound + 1e-15 * libm::fabs(fy) || *lipschitz > 1e300 {
                    break vals;
                }
                *lipschitz *= 2.0;
            };
            tracker.iterations += 1;
            tracker.offer(f_exact, &xn);
            tracker.push();

            if f_new > f_prev {
                t = 1.0;
                y.copy_from_slice(&xn);
            } else {
                let t_next = 0.5 * (1.0 + libm::sqrt(1.0 + 4.0 * t * t));
                let beta = (t - 1.0) / t_next;
                for j in 0..nv {
                    y[j] = xn[j] + beta * (xn[j] - xk[j]);
                }
                t = t_next;
            }
            core::mem::swap(&mut xk, &mut xn);
            f_prev = f_new;
            if f_new < best_stage {
                best_stage = f_new;
                best_stage_x.copy_from_slice(&xk);
            }
            history.push(best_stage);
            let h = history.len();
            if h > WINDOW {
                let change = history[h - 1 - WINDOW] - best_stage;
                if change <= tol * libm::fabs(best_stage).max(1.0) {
                    converged = true;
                    break;
                }
            }
            *lipschitz = (*lipschitz * 0.95).max(1e-12);
        }
        *x = best_stage_x;
        converged
    }

    /// Projected subgradient steps with a Polyak-type step towards
    /// `best - gap`, keeping the best exact iterate.
    fn subgradient_polish(&mut self, gap: f64, max_iters: usize, grad: &mut [f64], tracker: &mut Tracker) {
        let nv = self.nvars();
        let mut x = tracker.best_x.clone();
        let mut target_gap = gap.max(1e-300);
        for _ in 0..POLISH_ITERS {
            if tracker.iterations >= max_iters {
                break;
            }
            let (_, fx) = self.eval(&x, 0.0, Some(grad));
            let gn2: f64 = grad.iter().map(|g| g * g).sum();
            if gn2 == 0.0 {
                break;
            }
            let step = (fx - tracker.best_value + target_gap) / gn2;
            for j in 0..nv {
                x[j] -= step * grad[j];
            }
            self.project(&mut x);
            let fnew = self.eval(&x, 0.0, None).1;
            tracker.iterations += 1;
            if !tracker.offer(fnew, &x) {
                target_gap *= 0.7;
            }
            tracker.push();
        }
    }
}

struct Tracker {
    best_value: f64,
    best_x: Vec<f64>,
    iterations: usize,
    trace: Vec<f64>,
    record: bool,
}

impl Tracker {
    fn offer(&mut self, value: f64, x: &[f64]) -> bool {
        if value < self.best_value {
            self.best_value = value;
            self.best_x.copy_from_slice(x);
            true
        } else {
            false
        }
    }

    fn push(&mut self) {
        if self.record {
            self.trace.push(self.best_value);
        }
    }
}

/// Orthonormal basis of the span of the rows (modified Gram-Schmidt with one
/// reorthogonalization pass) and the rows expressed in that basis.
fn row_space(data: &LabeledDataset) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for row in data.rows() {
        let scale = libm::sqrt(dot(row, row));
        if scale == 0.0 {
            continue;
        }
        let mut v = row.to_vec();
        for _ in 0..2 {
            for q in &basis {
                let a = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= a * qi;
                }
            }
        }
        let nv = libm::sqrt(dot(&v, &v));
        if nv > 1e-10 * scale {
            v.iter_mut().for_each(|x| *x /= nv);
            basis.push(v);
        }
    }
    if basis.is_empty() {
        let mut e = vec![0.0; data.dim()];
        e[0] = 1.0;
        basis.push(e);
    }
    let r = basis.len();
    let mut reduced = Vec::with_capacity(data.len() * r);
    for row in data.rows() {
        reduced.extend(basis.iter().map(|q| dot(q, row)));
    }
    (reduced, basis)
}
