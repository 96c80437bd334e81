//! Pointwise minimization of the DWSVM conditional risk.
//!
//! For `q = P(Y = +1 | X = x)` the conditional risk
//!
//! `R(f, f0) = alpha [q V(f0) + (1 - q) V(-f0)] + (1 - alpha) [q H(f) + (1 - q) H(-f)]`
//!
//! separates into a DWD part in `f0` and a hinge part in `f`, each convex in
//! one variable. Fisher consistency says `sign(f*) = sign(q - 1/2)`.

use crate::error::{invalid, Result};
use crate::loss::LossKind;
use crate::numeric::golden_section;

/// Minimizer of the conditional risk at one `(q, alpha, c_svm, c_dwd)` cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskPoint {
    pub q: f64,
    pub alpha: f64,
    pub c_svm: f64,
    pub c_dwd: f64,
    /// `f*`, the main-hyperplane decision value.
    pub f: f64,
    /// `f0*`, the axillary decision value.
    pub f0: f64,
    /// `R(f*, f0*)`.
    pub risk: f64,
    /// `q H(f*) + (1 - q) H(-f*)`, unweighted by `1 - alpha`.
    pub hinge_risk: f64,
    /// `q V(f0*) + (1 - q) V(-f0*)`, unweighted by `alpha`.
    pub dwd_risk: f64,
    /// A minimizer stayed on the search boundary after widening once.
    pub at_boundary: bool,
}

impl RiskPoint {
    /// `sign(f*) = sign(q - 1/2)`, with `f* = 0` counting as a failure.
    pub fn is_consistent(&self) -> bool {
        self.f != 0.0 && (self.f > 0.0) == (self.q > 0.5)
    }
}

/// `q L(t) + (1 - q) L(-t)`.
pub fn pointwise_risk(kind: LossKind, q: f64, c: f64, t: f64) -> f64 {
    q * kind.value(t, c) + (1.0 - q) * kind.value(-t, c)
}

/// Minimizes `pointwise_risk` over `[-bound, bound]`, widening tenfold once
/// when the minimizer lands on the boundary.
fn minimize(kind: LossKind, q: f64, c: f64, bound: f64) -> (f64, f64, bool) {
    let mut b = bound;
    for attempt in 0..2 {
        let (t, v) = golden_section(|t| pointwise_risk(kind, q, c, t), -b, b, 1e-13 * b);
        let edge = b - t.abs() <= 1e-9 * b;
        if !edge || attempt == 1 {
            return (t, v, edge);
        }
        b *= 10.0;
    }
    unreachable!()
}

/// Minimizes the conditional risk on `[-B, B]` with `B = 10 max(1/sqrt(c_svm), 1/sqrt(c_dwd))`.
pub fn fisher_point(q: f64, alpha: f64, c_svm: f64, c_dwd: f64) -> Result<RiskPoint> {
    if !(q > 0.0 && q < 1.0) || q == 0.5 {
        return Err(invalid("q must lie in (0, 1) and differ from 1/2"));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(invalid("alpha must lie in [0, 1)"));
    }
    if !(c_svm > 0.0 && c_svm.is_finite() && c_dwd > 0.0 && c_dwd.is_finite()) {
        return Err(invalid("C values must be positive and finite"));
    }
    let bound = 10.0 * (1.0 / libm::sqrt(c_svm)).max(1.0 / libm::sqrt(c_dwd));
    let (f, hinge_risk, edge_f) = minimize(LossKind::Hinge, q, c_svm, bound);
    let (f0, dwd_risk, edge_f0) = minimize(LossKind::Dwd, q, c_dwd, bound);
    Ok(RiskPoint {
        q,
        alpha,
        c_svm,
        c_dwd,
        f,
        f0,
        risk: alpha * dwd_risk + (1.0 - alpha) * hinge_risk,
        hinge_risk,
        dwd_risk,
        at_boundary: edge_f || edge_f0,
    })
}
