//! The modified hinge loss `H_C` and the DWD loss `V_C`.
//!
//! Both are written in terms of the functional margin `u` and share the
//! kink location `1/sqrt(C)`:
//!
//! ```text
//! H_C(u) = sqrt(C) - C u    (u <= 1/sqrt(C)),   0    otherwise
//! V_C(u) = 2 sqrt(C) - C u  (u <= 1/sqrt(C)),   1/u  otherwise
//! ```
//!
//! `V_C` is continuously differentiable; `H_C` has a kink at `1/sqrt(C)`
//! where [`loss_subgradient`] returns the steepest element `-C`.

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    Hinge,
    Dwd,
}

impl LossKind {
    /// Loss value without argument checks.
    #[inline]
    pub fn value(self, u: f64, c: f64) -> f64 {
        let sc = libm::sqrt(c);
        if u <= 1.0 / sc {
            match self {
                LossKind::Hinge => sc - c * u,
                LossKind::Dwd => 2.0 * sc - c * u,
            }
        } else {
            match self {
                LossKind::Hinge => 0.0,
                LossKind::Dwd => 1.0 / u,
            }
        }
    }

    /// Derivative (or the chosen subgradient at the hinge kink) without checks.
    #[inline]
    pub fn derivative(self, u: f64, c: f64) -> f64 {
        if u <= 1.0 / libm::sqrt(c) {
            -c
        } else {
            match self {
                LossKind::Hinge => 0.0,
                LossKind::Dwd => -1.0 / (u * u),
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LossKind::Hinge => "hinge",
            LossKind::Dwd => "dwd",
        }
    }
}

fn check_args(u: f64, c: f64) -> Result<()> {
    if !u.is_finite() {
        return Err(invalid("margin must be finite"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid("loss parameter C must be positive and finite"));
    }
    Ok(())
}

/// `H_C(u)`.
pub fn hinge_loss(u: f64, c: f64) -> Result<f64> {
    check_args(u, c)?;
    Ok(LossKind::Hinge.value(u, c))
}

/// `V_C(u)`.
pub fn dwd_loss(u: f64, c: f64) -> Result<f64> {
    check_args(u, c)?;
    Ok(LossKind::Dwd.value(u, c))
}

pub fn loss_subgradient(kind: LossKind, u: f64, c: f64) -> Result<f64> {
    check_args(u, c)?;
    Ok(kind.derivative(u, c))
}

/// Huber-smoothed hinge: agrees with `H_C` except on `(1/sqrt(C) - mu, 1/sqrt(C))`,
/// where it is quadratic. `H_C - C mu / 2 <= smooth <= H_C`.
#[inline]
pub(crate) fn smoothed_hinge(u: f64, c: f64, mu: f64) -> (f64, f64) {
    let z = 1.0 / libm::sqrt(c) - u;
    if z <= 0.0 {
        (0.0, 0.0)
    } else if z < mu {
        (c * z * z / (2.0 * mu), -c * z / mu)
    } else {
        (c * (z - 0.5 * mu), -c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hinge_examples() {
        assert_eq!(hinge_loss(0.0, 1.0), Ok(1.0));
        for c in [0.25, 1.0, 4.0, 100.0] {
            assert!(hinge_loss(1.0 / libm::sqrt(c), c).unwrap().abs() < 1e-12);
        }
        assert_eq!(hinge_loss(0.5, 4.0), Ok(0.0));
    }

    #[test]
    fn dwd_examples() {
        let c = 1.0;
        let kink = 1.0 / libm::sqrt(c);
        assert_eq!(dwd_loss(kink, c), Ok(1.0));
        assert_eq!(2.0 * libm::sqrt(c) - c * kink, 1.0 / kink);
        assert_eq!(dwd_loss(2.0, 1.0), Ok(0.5));
        assert_eq!(dwd_loss(-1.0, 4.0), Ok(8.0));
    }

    #[test]
    fn subgradient_examples() {
        assert_eq!(loss_subgradient(LossKind::Dwd, 2.0, 1.0), Ok(-0.25));
        assert_eq!(loss_subgradient(LossKind::Hinge, 10.0, 1.0), Ok(0.0));
        assert_eq!(loss_subgradient(LossKind::Hinge, 1.0, 1.0), Ok(-1.0));
        // one-sided finite differences of V_9 at the kink u = 1/3
        let (c, kink, h) = (9.0, 1.0 / 3.0, 1e-7);
        let left = (LossKind::Dwd.value(kink, c) - LossKind::Dwd.value(kink - h, c)) / h;
        let right = (LossKind::Dwd.value(kink + h, c) - LossKind::Dwd.value(kink, c)) / h;
        assert!((left + 9.0).abs() < 1e-5, "left {left}");
        assert!((right + 9.0).abs() < 1e-4, "right {right}");
        assert_eq!(loss_subgradient(LossKind::Dwd, kink, c), Ok(-9.0));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(hinge_loss(f64::NAN, 1.0).is_err());
        assert!(dwd_loss(f64::INFINITY, 1.0).is_err());
        assert!(dwd_loss(0.0, 0.0).is_err());
        assert!(loss_subgradient(LossKind::Hinge, 0.0, -1.0).is_err());
    }

    #[test]
    fn smoothed_hinge_brackets_hinge() {
        let (c, mu) = (4.0, 0.1);
        for k in 0..200 {
            let u = -1.0 + k as f64 * 0.01;
            let h = LossKind::Hinge.value(u, c);
            let (s, _) = smoothed_hinge(u, c, mu);
            assert!(s <= h + 1e-15 && h - s <= c * mu / 2.0 + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn losses_are_convex(u1 in -20.0..20.0f64, u2 in -20.0..20.0f64, t in 0.0..1.0f64,
                             c in 0.01..100.0f64) {
            for kind in [LossKind::Hinge, LossKind::Dwd] {
                let mid = kind.value(t * u1 + (1.0 - t) * u2, c);
                let chord = t * kind.value(u1, c) + (1.0 - t) * kind.value(u2, c);
                prop_assert!(mid <= chord + 1e-10 * (1.0 + chord.abs()));
            }
        }

        #[test]
        fn hinge_is_nonincreasing(u in -20.0..20.0f64, du in 0.0..5.0f64, c in 0.01..100.0f64) {
            prop_assert!(LossKind::Hinge.value(u + du, c) <= LossKind::Hinge.value(u, c));
            prop_assert!(LossKind::Hinge.value(u, c) >= 0.0);
        }

        #[test]
        fn linear_pieces_differ_by_sqrt_c(c in 0.01..100.0f64, s in 0.0..10.0f64) {
            let u = 1.0 / libm::sqrt(c) - s;
            let gap = LossKind::Dwd.value(u, c) - LossKind::Hinge.value(u, c);
            prop_assert!((gap - libm::sqrt(c)).abs() <= 1e-12 * (1.0 + c.abs()));
        }
    }
}
