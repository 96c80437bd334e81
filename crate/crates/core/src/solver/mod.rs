//! Minimization of weighted hinge/DWD loss sums over `(b0, b, w)`.
//!
//! Two forms are supported: the constrained form `||w||^2 <= 1`
//! ([`solve_constrained`]) and the penalized form `+ lambda/2 ||w||^2`
//! ([`solve_penalized`]).
//!
//! Several algorithms are available (see [`Algorithm`]). The default picks
//! golden-section search for one feature, the ellipsoid method for two or
//! three, and pairwise dual coordinate ascent with a duality-gap certificate
//! otherwise, falling back to the accelerated primal method when the dual
//! does not certify convergence.

mod dual;
mod ellipsoid;
mod engine;
mod intercept;
mod maxmargin;
mod oracle;
mod profile;
mod spec;

use alloc::vec::Vec;

pub use intercept::solve_intercept_1d;
pub use maxmargin::{max_margin, MaxMargin, MAX_MARGIN_MAX_N};
pub use oracle::oracle_solve_small;
pub use spec::{Constraint, InterceptSlot, ObjectiveSpec, Point, Term};

use crate::data::{dot, norm};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Algorithm {
    #[default]
    Auto,
    /// Pairwise coordinate ascent on the dual (at most 3000 observations,
    /// both labels present in every intercept slot).
    Dual,
    /// Accelerated projected gradient on a smoothed hinge, then a
    /// subgradient polish on the exact objective. Starts from `init`.
    Accelerated,
    /// Golden-section search over the direction (one feature only).
    Profile,
    /// Deep-cut ellipsoid method over the direction (two or three features).
    Ellipsoid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Iteration budget shared by all smoothing stages and the polish.
    pub max_iters: usize,
    /// Relative duality gap (dual algorithm) or relative change of the best
    /// objective over a 20-iteration window (accelerated algorithm) below
    /// which the solve stops.
    pub tol: f64,
    /// Keep the best-so-far objective after every iteration in [`SolveResult::trace`].
    pub record_trace: bool,
    pub algorithm: Algorithm,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 50_000,
            tol: 1e-8,
            record_trace: false,
            algorithm: Algorithm::Auto,
        }
    }
}

impl SolverConfig {
    /// Looser tolerance used for simulation studies.
    pub fn experiment() -> Self {
        Self {
            tol: 1e-6,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be at least 1"));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(invalid("tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub omega: Vec<f64>,
    pub beta: f64,
    /// Present iff the objective has an axillary intercept.
    pub beta0: Option<f64>,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Best-so-far objective per iteration (empty unless requested).
    pub trace: Vec<f64>,
}

impl SolveResult {
    pub fn point(&self) -> Point {
        Point::new(self.omega.clone(), self.beta, self.beta0)
    }
}

/// `sum weight * loss_c(margin)` over the terms, plus the penalty if configured.
pub fn evaluate_objective(spec: &ObjectiveSpec<'_>, point: &Point) -> Result<f64> {
    spec.check_point(point)?;
    let mut total = 0.0;
    for term in spec.terms() {
        total += term.weight * term.kind.value(spec.margin(term, point), term.c);
    }
    if let Constraint::Penalty(lambda) = spec.constraint() {
        total += 0.5 * lambda * dot(&point.omega, &point.omega);
    }
    Ok(total)
}

/// The normalized mean-difference direction with the intercept placing the
/// hyperplane halfway between the class means.
pub fn mean_difference_start(spec: &ObjectiveSpec<'_>) -> Point {
    let (plus, minus) = spec.data().class_means();
    let mut omega: Vec<f64> = plus.iter().zip(&minus).map(|(p, m)| p - m).collect();
    let nrm = norm(&omega);
    if nrm > 0.0 {
        omega.iter_mut().for_each(|w| *w /= nrm);
    }
    let mid: Vec<f64> = plus.iter().zip(&minus).map(|(p, m)| 0.5 * (p + m)).collect();
    let beta = -dot(&omega, &mid);
    Point::new(omega, beta, spec.has_axillary().then_some(beta))
}

fn solve(spec: &ObjectiveSpec<'_>, config: &SolverConfig, init: Option<&Point>) -> Result<SolveResult> {
    config.validate()?;
    if let Some(p) = init {
        spec.check_dim_only(p)?;
    }
    let algorithm = match config.algorithm {
        Algorithm::Auto if spec.dim() == 1 => Algorithm::Profile,
        Algorithm::Auto if spec.dim() <= ellipsoid::ELLIPSOID_MAX_DIM => Algorithm::Ellipsoid,
        Algorithm::Auto => Algorithm::Dual,
        other => other,
    };
    match algorithm {
        Algorithm::Profile => {
            if spec.dim() != 1 {
                return Err(Error::Unsupported("profile search needs one feature".into()));
            }
            let out = profile::solve_profile(spec);
            let objective = evaluate_objective(spec, &out.point)?;
            Ok(finish(out.point, objective, true, out.evaluations, config.record_trace.then(|| alloc::vec![objective])))
        }
        Algorithm::Ellipsoid => {
            if !(2..=ellipsoid::ELLIPSOID_MAX_DIM).contains(&spec.dim()) {
                return Err(Error::Unsupported("ellipsoid method needs two or three features".into()));
            }
            let out = ellipsoid::solve_ellipsoid(spec, config.tol, config.max_iters, config.record_trace);
            let objective = evaluate_objective(spec, &out.point)?;
            Ok(finish(out.point, objective, out.converged, out.iterations, Some(out.trace)))
        }
        Algorithm::Dual => match dual::Dual::new(spec) {
            Some(d) => {
                let out = d.solve(config);
                if out.converged || config.algorithm == Algorithm::Dual {
                    let objective = evaluate_objective(spec, &out.point)?;
                    return Ok(finish(out.point, objective, out.converged, out.iterations, Some(out.trace)));
                }
                let mut primal = accelerated(spec, config, Some(&out.point))?;
                primal.iterations += out.iterations;
                if out.objective <= primal.objective {
                    let objective = evaluate_objective(spec, &out.point)?;
                    let mut trace = out.trace;
                    trace.extend(primal.trace.iter().map(|&v| v.min(objective)));
                    return Ok(finish(out.point, objective, false, primal.iterations, Some(trace)));
                }
                let mut trace = out.trace;
                let last = trace.last().copied().unwrap_or(f64::INFINITY);
                trace.extend(primal.trace.iter().map(|&v| v.min(last)));
                primal.trace = if config.record_trace { trace } else { Vec::new() };
                Ok(primal)
            }
            None if config.algorithm == Algorithm::Dual => {
                Err(Error::Unsupported("dual algorithm needs n <= 3000 and both labels in every slot".into()))
            }
            None => accelerated(spec, config, init),
        },
        Algorithm::Accelerated | Algorithm::Auto => accelerated(spec, config, init),
    }
}

fn finish(point: Point, objective: f64, converged: bool, iterations: usize, trace: Option<Vec<f64>>) -> SolveResult {
    SolveResult {
        omega: point.omega,
        beta: point.beta,
        beta0: point.beta0,
        objective,
        converged,
        iterations,
        trace: trace.unwrap_or_default(),
    }
}

fn accelerated(spec: &ObjectiveSpec<'_>, config: &SolverConfig, init: Option<&Point>) -> Result<SolveResult> {
    let start = match init {
        Some(p) => Point::new(
            p.omega.clone(),
            p.beta,
            spec.has_axillary().then(|| p.beta0.unwrap_or(p.beta)),
        ),
        None => mean_difference_start(spec),
    };
    let mut compiled = engine::Compiled::new(spec);
    let outcome = compiled.solve(spec, config, &start);
    let objective = evaluate_objective(spec, &outcome.point)?;
    Ok(finish(outcome.point, objective, outcome.converged, outcome.iterations, Some(outcome.trace)))
}

/// Minimizes the objective subject to `||w|| <= 1`.
///
/// Non-convergence within `max_iters` is reported through
/// [`SolveResult::converged`] together with the best iterate found.
pub fn solve_constrained(
    spec: &ObjectiveSpec<'_>,
    config: &SolverConfig,
    init: Option<&Point>,
) -> Result<SolveResult> {
    if spec.constraint() != Constraint::UnitBall {
        return Err(invalid("solve_constrained needs a unit-ball objective"));
    }
    solve(spec, config, init)
}

/// Minimizes the penalized objective with `w` unconstrained. The caller may
/// rescale `(b0, b, w)` by `1/||w||` afterwards.
pub fn solve_penalized(
    spec: &ObjectiveSpec<'_>,
    config: &SolverConfig,
    init: Option<&Point>,
) -> Result<SolveResult> {
    match spec.constraint() {
        Constraint::Penalty(lambda) if lambda > 0.0 => solve(spec, config, init),
        _ => Err(invalid("solve_penalized needs a penalty lambda > 0")),
    }
}
