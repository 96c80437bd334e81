//! Small scalar routines shared by the oracle and the risk minimizer.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
///
/// Stops when the bracket is narrower than `x_tol` (absolute) or after 400
/// iterations. Returns the best point seen and its value.
pub(crate) fn golden_section(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, x_tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for _ in 0..400 {
        if b - a <= x_tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
            if f1 < best.1 {
                best = (x1, f1);
            }
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
            if f2 < best.1 {
                best = (x2, f2);
            }
        }
    }
    for x in [lo, hi, 0.5 * (a + b)] {
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_kink_minimum() {
        let (x, fx) = golden_section(|x| (x - 0.3).abs() + 2.0, -5.0, 5.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-10);
        assert!((fx - 2.0).abs() < 1e-10);
    }

    #[test]
    fn boundary_minimum() {
        let (x, _) = golden_section(|x| x, -1.0, 1.0, 1e-12);
        assert_eq!(x, -1.0);
    }
}
