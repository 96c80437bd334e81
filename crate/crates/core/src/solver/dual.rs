//! Pairwise coordinate ascent on the dual of a loss-sum objective.
//!
//! Each term is written as `w L(u) = max_{0 <= a <= C} w (g(a) - a u)` with
//! `g(a) = a / sqrt(C)` for the hinge loss and `g(a) = 2 sqrt(a)` for the DWD
//! loss. Eliminating the direction and the intercepts gives the concave dual
//!
//! ```text
//! max  sum_t w_t g_t(a_t) - h(v),   v = sum_t w_t a_t y_t x_t,
//! s.t. sum_{t in slot} w_t a_t y_t = 0 for every intercept slot,
//! ```
//!
//! with `h(v) = ||v||` under the unit-ball constraint (primal `w = v / ||v||`)
//! and `h(v) = ||v||^2 / (2 lambda)` under the penalty (primal `w = v / lambda`).
//! Pairs of dual variables in the same slot are updated by an exact line
//! search, chosen with second-order working-set selection. Every few sweeps
//! the primal point is rebuilt with exact intercepts; any dual point gives a
//! lower bound, so the gap certifies convergence.
//!
//! The ball-constrained dual is nonsmooth at `v = 0` and cannot recover the
//! direction when the constraint is inactive. If it stalls, the penalized
//! dual is solved for a sequence of `lambda` chosen by a safeguarded secant
//! search on `log ||w(lambda)|| = 0`; when `||w(lambda)||` stays below one as
//! `lambda` shrinks the constraint is inactive and the small-`lambda`
//! solution is used. Each penalized solution, scaled into the ball, is a
//! feasible candidate, and the best candidate is returned.

use alloc::vec;
use alloc::vec::Vec;

use super::intercept::{slot_intercept, slot_value, Projected};
use super::spec::{Constraint, InterceptSlot, ObjectiveSpec, Point};
use super::SolverConfig;
use crate::data::dot;
use crate::loss::LossKind;

/// Largest `n` for which the Gram matrix is formed.
pub(crate) const DUAL_MAX_N: usize = 3000;

#[derive(Debug, Clone, Copy)]
struct DTerm {
    obs: usize,
    y: f64,
    w: f64,
    c: f64,
    inv_sqrt_c: f64,
    kind: LossKind,
    slot: usize,
}

impl DTerm {
    fn g(&self, a: f64) -> f64 {
        match self.kind {
            LossKind::Hinge => a * self.inv_sqrt_c,
            LossKind::Dwd => 2.0 * libm::sqrt(a),
        }
    }

    fn g1(&self, a: f64) -> f64 {
        match self.kind {
            LossKind::Hinge => self.inv_sqrt_c,
            LossKind::Dwd if a > 0.0 => 1.0 / libm::sqrt(a),
            LossKind::Dwd => f64::INFINITY,
        }
    }

    fn g2(&self, a: f64) -> f64 {
        match self.kind {
            LossKind::Hinge => 0.0,
            LossKind::Dwd => -0.5 / (a * libm::sqrt(a)),
        }
    }

    /// Whether `a` may move in direction `+y`.
    fn can_up(&self, a: f64) -> bool {
        if self.y > 0.0 {
            a < self.c
        } else {
            a > 0.0
        }
    }

    /// Whether `a` may move in direction `-y`.
    fn can_down(&self, a: f64) -> bool {
        if self.y > 0.0 {
            a > 0.0
        } else {
            a < self.c
        }
    }
}

pub(crate) struct DualOutcome {
    pub point: Point,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
    pub trace: Vec<f64>,
}

/// A feasible primal point `w = sum_i zeta_i x_i / divisor` with intercepts.
struct Candidate {
    zeta: Vec<f64>,
    divisor: f64,
    b: [f64; 2],
    value: f64,
}

enum Stop {
    /// Inner gap closed (or no ascent pair left).
    Solved,
    /// The global certificate closed.
    Certified,
    Budget,
    Stalled,
}

pub(crate) struct Dual<'s, 'a> {
    spec: &'s ObjectiveSpec<'a>,
    terms: Vec<DTerm>,
    n: usize,
    slots: usize,
    gram: Vec<f64>,
    /// Penalty of the objective being solved (`None`: unit ball).
    target: Option<f64>,
    /// Penalty of the dual currently being ascended.
    mode: Option<f64>,
    a: Vec<f64>,
    zeta: Vec<f64>,
    q: Vec<f64>,
    vv: f64,
    best: Candidate,
    lower: f64,
    start: Vec<f64>,
    iterations: usize,
    trace: Vec<f64>,
    record: bool,
}

impl<'s, 'a> Dual<'s, 'a> {
    /// Returns `None` when the dual is not applicable: too many observations,
    /// or a slot whose terms all carry the same label (the intercept then has
    /// no finite minimizer).
    pub fn new(spec: &'s ObjectiveSpec<'a>) -> Option<Self> {
        let data = spec.data();
        let n = data.len();
        if n > DUAL_MAX_N {
            return None;
        }
        let slots = 1 + usize::from(spec.has_axillary());
        let terms: Vec<DTerm> = spec
            .terms()
            .iter()
            .filter(|t| t.weight > 0.0)
            .map(|t| DTerm {
                obs: t.index,
                y: data.label(t.index).sign(),
                w: t.weight,
                c: t.c,
                inv_sqrt_c: 1.0 / libm::sqrt(t.c),
                kind: t.kind,
                slot: match spec.slot(t) {
                    InterceptSlot::Main => 0,
                    InterceptSlot::Axillary => 1,
                },
            })
            .collect();
        if terms.is_empty() {
            return None;
        }

        // Interior start with equal class totals in each slot; the implied
        // direction is the mean difference.
        let mut count = vec![[0usize; 2]; slots];
        for t in &terms {
            count[t.slot][usize::from(t.y > 0.0)] += 1;
        }
        let mut sigma = vec![f64::INFINITY; slots];
        for t in &terms {
            let k = count[t.slot][usize::from(t.y > 0.0)] as f64;
            sigma[t.slot] = sigma[t.slot].min(0.5 * t.w * t.c * k);
        }
        for (s, c) in count.iter().enumerate() {
            let used = c[0] + c[1] > 0;
            if used && (c[0] == 0 || c[1] == 0) {
                return None;
            }
            if !used {
                sigma[s] = 0.0;
            }
        }
        let a: Vec<f64> = terms
            .iter()
            .map(|t| sigma[t.slot] / (t.w * count[t.slot][usize::from(t.y > 0.0)] as f64))
            .collect();

        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let k = dot(data.row(i), data.row(j));
                gram[i * n + j] = k;
                gram[j * n + i] = k;
            }
        }
        let target = match spec.constraint() {
            Constraint::UnitBall => None,
            Constraint::Penalty(lambda) => Some(lambda),
        };
        let mut dual = Self {
            spec,
            terms,
            n,
            slots,
            gram,
            target,
            mode: target,
            a,
            zeta: vec![0.0; n],
            q: vec![0.0; n],
            vv: 0.0,
            best: Candidate {
                zeta: vec![0.0; n],
                divisor: 0.0,
                b: [0.0; 2],
                value: f64::INFINITY,
            },
            lower: f64::NEG_INFINITY,
            start: Vec::new(),
            iterations: 0,
            trace: Vec::new(),
            record: false,
        };
        dual.start = dual.a.clone();
        dual.refresh();
        Some(dual)
    }

    /// Recomputes `zeta`, `q = K zeta` and `||v||^2` from `a`.
    fn refresh(&mut self) {
        self.zeta.iter_mut().for_each(|z| *z = 0.0);
        for (t, &a) in self.terms.iter().zip(&self.a) {
            self.zeta[t.obs] += t.w * t.y * a;
        }
        let n = self.n;
        for i in 0..n {
            self.q[i] = dot(&self.gram[i * n..(i + 1) * n], &self.zeta);
        }
        self.vv = dot(&self.zeta, &self.q).max(0.0);
    }

    /// Denominator turning `v` into the primal direction of the current mode.
    fn scale(&self) -> f64 {
        match self.mode {
            Some(lambda) => lambda,
            None => libm::sqrt(self.vv),
        }
    }

    fn gsum(&self) -> f64 {
        self.terms.iter().zip(&self.a).map(|(t, &a)| t.w * t.g(a)).sum()
    }

    fn dual_value(&self, penalty: Option<f64>) -> f64 {
        match penalty {
            Some(lambda) => self.gsum() - 0.5 * self.vv / lambda,
            None => self.gsum() - libm::sqrt(self.vv),
        }
    }

    /// Objective at `w = v / divisor` with exact intercepts, plus
    /// `penalty / 2 ||w||^2` if given.
    fn evaluate(&self, divisor: f64, penalty: Option<f64>) -> (f64, [f64; 2]) {
        let inv = if divisor > 0.0 { 1.0 / divisor } else { 0.0 };
        let mut b = [0.0; 2];
        let mut total = 0.0;
        for (slot, bs) in b.iter_mut().enumerate().take(self.slots) {
            let items: Vec<Projected> = self
                .terms
                .iter()
                .filter(|t| t.slot == slot)
                .map(|t| Projected {
                    p: self.q[t.obs] * inv,
                    y: t.y,
                    weight: t.w,
                    c: t.c,
                    kind: t.kind,
                })
                .collect();
            if items.is_empty() {
                continue;
            }
            *bs = slot_intercept(&items);
            total += slot_value(&items, *bs);
        }
        if let Some(lambda) = penalty {
            total += 0.5 * lambda * self.vv * inv * inv;
        }
        (total, b)
    }

    /// Refreshes the state, records a candidate and the lower bound, and
    /// returns the relative gap of the dual currently being ascended.
    fn check(&mut self) -> f64 {
        self.refresh();
        self.lower = self.lower.max(self.dual_value(self.target));
        let div = self.scale();
        let (inner, b) = self.evaluate(div, self.mode);
        let (value, b, div) = match (self.target, self.mode) {
            (None, Some(lambda)) => {
                let div = lambda * (libm::sqrt(self.vv) / lambda).max(1.0);
                let (v, b) = self.evaluate(div, None);
                (v, b, div)
            }
            _ => (inner, b, div),
        };
        if value < self.best.value {
            self.best = Candidate {
                zeta: self.zeta.clone(),
                divisor: div,
                b,
                value,
            };
        }
        if self.record {
            self.trace.push(self.best.value);
        }
        (inner - self.dual_value(self.mode)) / inner.abs().max(1.0)
    }

    fn certified(&self, tol: f64) -> bool {
        self.best.value - self.lower <= tol * self.best.value.abs().max(1.0)
    }

    /// `F_t = y_t g'(a_t) - p_t`; optimality means `max_up F <= min_low F` per slot.
    fn score(&self, k: usize, inv: f64) -> f64 {
        let t = &self.terms[k];
        t.y * t.g1(self.a[k]) - self.q[t.obs] * inv
    }

    /// Second-order working-set selection. Returns the pair and the largest
    /// first-order violation over all slots.
    fn select(&self, inv: f64) -> (Option<(usize, usize)>, f64) {
        let n = self.n;
        let s = self.scale();
        let mut best: Option<(usize, usize)> = None;
        let mut best_gain = 0.0;
        let mut violation: f64 = 0.0;
        for slot in 0..self.slots {
            let mut i = usize::MAX;
            let mut fmax = f64::NEG_INFINITY;
            for (k, t) in self.terms.iter().enumerate() {
                if t.slot == slot && t.can_up(self.a[k]) {
                    let f = self.score(k, inv);
                    if f > fmax {
                        fmax = f;
                        i = k;
                    }
                }
            }
            if i == usize::MAX {
                continue;
            }
            let ti = self.terms[i];
            let oi = ti.obs;
            let ci = -ti.g2(self.a[i]) / ti.w;
            let mut fmin = f64::INFINITY;
            for (k, t) in self.terms.iter().enumerate() {
                if t.slot != slot || !t.can_down(self.a[k]) {
                    continue;
                }
                let f = self.score(k, inv);
                fmin = fmin.min(f);
                let b = fmax - f;
                if b <= 0.0 {
                    continue;
                }
                let oj = t.obs;
                let kappa = (self.gram[oi * n + oi] + self.gram[oj * n + oj] - 2.0 * self.gram[oi * n + oj]).max(0.0);
                let h2 = match self.mode {
                    Some(lambda) => kappa / lambda,
                    None if s > 0.0 => {
                        let qd = self.q[oi] - self.q[oj];
                        ((kappa - qd * qd / self.vv) / s).max(0.0)
                    }
                    None => 0.0,
                };
                let curv = (h2 + ci - t.g2(self.a[k]) / t.w).max(1e-12 * (1.0 + kappa));
                let gain = (b * b / curv).min(f64::MAX);
                if best.is_none() || gain > best_gain {
                    best_gain = gain;
                    best = Some((i, k));
                }
            }
            if fmin.is_finite() {
                violation = violation.max(fmax - fmin);
            }
        }
        (best, violation)
    }

    /// Step bound for the pair direction `a_i += y_i d / w_i`, `a_j -= y_j d / w_j`.
    fn max_step(&self, i: usize, j: usize) -> f64 {
        let (ti, tj) = (self.terms[i], self.terms[j]);
        let (ai, aj) = (self.a[i], self.a[j]);
        let di = if ti.y > 0.0 { ti.w * (ti.c - ai) } else { ti.w * ai };
        let dj = if tj.y > 0.0 { tj.w * aj } else { tj.w * (tj.c - aj) };
        di.min(dj).max(0.0)
    }

    /// Exact maximization of the dual along the pair direction, `d >= 0`.
    fn line_search(&self, i: usize, j: usize, dmax: f64) -> f64 {
        let n = self.n;
        let (ti, tj) = (self.terms[i], self.terms[j]);
        let (ai, aj) = (self.a[i], self.a[j]);
        let (oi, oj) = (ti.obs, tj.obs);
        let kappa = (self.gram[oi * n + oi] + self.gram[oj * n + oj] - 2.0 * self.gram[oi * n + oj]).max(0.0);
        let qd = self.q[oi] - self.q[oj];
        let vv = self.vv;
        let mode = self.mode;
        if dmax == 0.0 {
            return 0.0;
        }
        // (phi', phi'')
        let deriv = |d: f64| -> (f64, f64) {
            let a_i = (ai + ti.y * d / ti.w).clamp(0.0, ti.c);
            let a_j = (aj - tj.y * d / tj.w).clamp(0.0, tj.c);
            let lin = qd + d * kappa;
            let (h1, h2) = match mode {
                Some(lambda) => (lin / lambda, kappa / lambda),
                None => {
                    let sq = (vv + 2.0 * d * qd + d * d * kappa).max(0.0);
                    if sq > 1e-300 {
                        let r = libm::sqrt(sq);
                        (lin / r, ((kappa * sq - lin * lin) / (sq * r)).max(0.0))
                    } else {
                        (libm::sqrt(kappa), 0.0)
                    }
                }
            };
            let up = ti.y * ti.g1(a_i);
            let down = tj.y * tj.g1(a_j);
            let d1 = if up == f64::NEG_INFINITY || down == f64::INFINITY {
                f64::NEG_INFINITY
            } else {
                up - down - h1
            };
            (d1, ti.g2(a_i) / ti.w + tj.g2(a_j) / tj.w - h2)
        };
        if deriv(dmax).0 >= 0.0 {
            return dmax;
        }
        let (mut lo, mut hi) = (0.0, dmax);
        let mut d = 0.0;
        for _ in 0..100 {
            let (f1, f2) = deriv(d);
            if f1 > 0.0 {
                lo = d;
            } else {
                hi = d;
            }
            if f1 == 0.0 || hi - lo <= 1e-15 * hi {
                break;
            }
            let newton = if f2 < 0.0 { d - f1 / f2 } else { f64::NAN };
            let next = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if next == d {
                break;
            }
            d = next;
        }
        d.clamp(0.0, dmax)
    }

    fn apply(&mut self, i: usize, j: usize, d: f64, dmax: f64) {
        let n = self.n;
        let (ti, tj) = (self.terms[i], self.terms[j]);
        let mut ai = self.a[i] + ti.y * d / ti.w;
        let mut aj = self.a[j] - tj.y * d / tj.w;
        if d >= dmax {
            // Snap whichever bound was reached.
            let ri = if ti.y > 0.0 { ti.w * (ti.c - self.a[i]) } else { ti.w * self.a[i] };
            if ri <= dmax {
                ai = if ti.y > 0.0 { ti.c } else { 0.0 };
            } else {
                aj = if tj.y > 0.0 { 0.0 } else { tj.c };
            }
        }
        self.a[i] = ai.clamp(0.0, ti.c);
        self.a[j] = aj.clamp(0.0, tj.c);
        let (oi, oj) = (ti.obs, tj.obs);
        if oi == oj {
            return;
        }
        let kappa = self.gram[oi * n + oi] + self.gram[oj * n + oj] - 2.0 * self.gram[oi * n + oj];
        self.vv = (self.vv + 2.0 * d * (self.q[oi] - self.q[oj]) + d * d * kappa).max(0.0);
        self.zeta[oi] += d;
        self.zeta[oj] -= d;
        for k in 0..n {
            self.q[k] += d * (self.gram[k * n + oi] - self.gram[k * n + oj]);
        }
    }

    /// Pair updates on the current dual until its gap falls below `inner_tol`,
    /// the global certificate closes, progress stalls or the budget runs out.
    fn ascend(&mut self, inner_tol: f64, tol: f64, budget: usize, stall_checks: Option<usize>) -> Stop {
        let check_every = (2 * self.terms.len()).clamp(20, 2000);
        let mut since = 0;
        let mut best_gap = f64::INFINITY;
        let mut stale = 0;
        loop {
            if since % check_every == 0 {
                let gap = self.check();
                if self.certified(tol) {
                    return Stop::Certified;
                }
                if gap <= inner_tol {
                    return Stop::Solved;
                }
                if gap < 0.5 * best_gap {
                    best_gap = gap;
                    stale = 0;
                } else {
                    stale += 1;
                    if stall_checks.is_some_and(|k| stale >= k) {
                        return Stop::Stalled;
                    }
                }
            }
            if self.iterations >= budget {
                self.check();
                return if self.certified(tol) { Stop::Certified } else { Stop::Budget };
            }
            let s = self.scale();
            let inv = if s > 0.0 { 1.0 / s } else { 0.0 };
            let (pair, violation) = self.select(inv);
            let step = pair.map(|(i, j)| {
                let dmax = self.max_step(i, j);
                (i, j, self.line_search(i, j, dmax), dmax)
            });
            match step {
                Some((i, j, d, dmax)) if violation >= 1e-14 && d > 0.0 => {
                    self.apply(i, j, d, dmax);
                    self.iterations += 1;
                    since += 1;
                }
                _ => {
                    self.check();
                    return if self.certified(tol) {
                        Stop::Certified
                    } else if violation < 1e-10 {
                        Stop::Solved
                    } else {
                        Stop::Stalled
                    };
                }
            }
        }
    }

    /// Solves the penalized dual at `lambda` (warm) and returns `||w(lambda)||`.
    fn norm_at(&mut self, lambda: f64, tol: f64, budget: usize) -> (f64, Stop) {
        self.mode = Some(lambda);
        let stop = self.ascend(0.1 * tol, tol, budget, Some(50));
        (libm::sqrt(self.vv) / lambda, stop)
    }

    fn lambda_search(&mut self, tol: f64, budget: usize) {
        // Restart from the interior point: the stalled ball-dual iterate
        // typically sits near v = 0, which says nothing about lambda.
        self.a.clone_from(&self.start);
        self.refresh();
        let lambda0 = if self.vv > 0.0 { libm::sqrt(self.vv) } else { 1.0 };
        let floor = lambda0 * 1e-14;
        let (r0, stop) = self.norm_at(lambda0, tol, budget);
        if matches!(stop, Stop::Certified | Stop::Budget) {
            return;
        }
        // Bracket: r(lo) > 1 >= r(hi).
        let (mut lo, mut rlo, mut hi, mut rhi);
        if r0 > 1.0 {
            lo = lambda0;
            rlo = r0;
            hi = lambda0;
            rhi = r0;
            while rhi > 1.0 {
                hi *= 4.0;
                let (r, stop) = self.norm_at(hi, tol, budget);
                if matches!(stop, Stop::Certified | Stop::Budget) || hi > lambda0 * 1e14 {
                    return;
                }
                rhi = r;
                if rhi > 1.0 {
                    lo = hi;
                    rlo = rhi;
                }
            }
        } else {
            hi = lambda0;
            rhi = r0;
            lo = lambda0;
            rlo = r0;
            while rlo <= 1.0 {
                lo *= 0.25;
                if lo < floor {
                    return;
                }
                let (r, stop) = self.norm_at(lo, tol, budget);
                if matches!(stop, Stop::Certified | Stop::Budget) {
                    return;
                }
                rlo = r;
                if rlo <= 1.0 {
                    hi = lo;
                    rhi = rlo;
                }
            }
        }
        // Illinois iteration on log r against log lambda.
        let (mut xl, mut fl) = (libm::log(lo), libm::log(rlo));
        let (mut xh, mut fh) = (libm::log(hi), libm::log(rhi.max(1e-300)));
        let mut side = 0i8;
        for _ in 0..100 {
            if xh - xl <= 1e-13 {
                return;
            }
            let mut x = xh - fh * (xh - xl) / (fh - fl);
            if !(x > xl && x < xh) {
                x = 0.5 * (xl + xh);
            }
            let (r, stop) = self.norm_at(libm::exp(x), tol, budget);
            if matches!(stop, Stop::Certified | Stop::Budget) {
                return;
            }
            let f = libm::log(r.max(1e-300));
            if libm::fabs(f) <= 1e-13 {
                return;
            }
            if f > 0.0 {
                xl = x;
                fl = f;
                if side == -1 {
                    fh *= 0.5;
                }
                side = -1;
            } else {
                xh = x;
                fh = f;
                if side == 1 {
                    fl *= 0.5;
                }
                side = 1;
            }
        }
    }

    pub fn solve(mut self, config: &SolverConfig) -> DualOutcome {
        self.record = config.record_trace;
        let tol = config.tol;
        let stop = match self.target {
            Some(_) => self.ascend(tol, tol, config.max_iters, None),
            None => self.ascend(tol, tol, config.max_iters, Some(10)),
        };
        if self.target.is_none() && matches!(stop, Stop::Solved | Stop::Stalled) && !self.certified(tol) {
            self.lambda_search(tol, self.iterations + config.max_iters);
        }
        let converged = self.certified(tol) || (self.target.is_some() && matches!(stop, Stop::Solved));

        let best = &self.best;
        let data = self.spec.data();
        let mut omega = vec![0.0; data.dim()];
        if best.divisor > 0.0 {
            for (i, &z) in best.zeta.iter().enumerate() {
                if z != 0.0 {
                    for (w, x) in omega.iter_mut().zip(data.row(i)) {
                        *w += z * x;
                    }
                }
            }
            omega.iter_mut().for_each(|w| *w /= best.divisor);
        }
        if self.target.is_none() {
            let nrm = libm::sqrt(dot(&omega, &omega));
            if nrm > 1.0 {
                omega.iter_mut().for_each(|w| *w /= nrm);
            }
        }
        let point = Point::new(omega, best.b[0], (self.slots == 2).then_some(best.b[1]));
        DualOutcome {
            point,
            objective: best.value,
            converged,
            iterations: self.iterations,
            trace: self.trace,
        }
    }
}
