//! Bisection inversion of monotone scalar maps.
//!
//! Used wherever a design quantity is defined implicitly: the correlation
//! argument that hits a given Bessel value, the rate whose outage equals the
//! target, the amplitude grid edges for lookup tables. Bisection is chosen
//! over faster local methods because every objective here is cheap, the
//! bracket is known, and the guarantee of staying inside it matters more
//! than iteration count.

use super::NumericsError;
use crate::scalar::{cst, Real};

/// Hard cap on bisection steps; 200 halvings exhaust any f64 bracket.
const MAX_BISECTIONS: usize = 200;

/// Finds `x` in `[lo, hi]` with `f(x) = target` for nondecreasing `f`.
///
/// Requires `f(lo) <= target <= f(hi)`; otherwise returns
/// [`NumericsError::BracketMiss`] carrying the endpoint values. Iterates
/// until the bracket width is at most `tol` and returns the midpoint. A NaN
/// objective value surfaces as [`NumericsError::NonFiniteObjective`].
///
/// For a nonincreasing map, pass `|x| -f(x)` and `-target`.
///
/// # Panics
///
/// Panics if `lo >= hi`, if either endpoint is non-finite, or if `tol <= 0`.
pub fn invert_monotone<R: Real>(
    mut f: impl FnMut(R) -> R,
    target: R,
    lo: R,
    hi: R,
    tol: R,
) -> Result<R, NumericsError> {
    assert!(
        lo < hi && lo.is_finite() && hi.is_finite(),
        "invert_monotone: bracket must be finite with lo < hi"
    );
    assert!(
        tol > R::zero(),
        "invert_monotone: tolerance must be positive"
    );

    let mut eval = |x: R| -> Result<R, NumericsError> {
        let y = f(x);
        if y.is_nan() {
            return Err(NumericsError::NonFiniteObjective {
                x: x.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(y)
    };

    let f_lo = eval(lo)?;
    let f_hi = eval(hi)?;
    if !(f_lo <= target && target <= f_hi) {
        return Err(NumericsError::BracketMiss {
            target: target.to_f64().unwrap_or(f64::NAN),
            f_lo: f_lo.to_f64().unwrap_or(f64::NAN),
            f_hi: f_hi.to_f64().unwrap_or(f64::NAN),
        });
    }

    let mut lo = lo;
    let mut hi = hi;
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= tol {
            break;
        }
        let mid = (lo + hi) / cst(2.0);
        if eval(mid)? <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / cst(2.0))
}

// ---- tests ----

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_a_square_root() {
        let x = invert_monotone(|x: f64| x * x, 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((x - 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn handles_a_decreasing_map_through_negation() {
        // Solve exp(-x) = 0.5 by negating both the map and the target.
        let x = invert_monotone(|x: f64| -(-x).exp(), -0.5, 0.0, 5.0, 1e-12).unwrap();
        assert!((x - 2.0f64.ln()).abs() < 1e-11);
    }

    #[test]
    fn reports_a_missed_bracket() {
        let err = invert_monotone(|x: f64| x, 3.0, 0.0, 1.0, 1e-9).unwrap_err();
        match err {
            NumericsError::BracketMiss { target, f_lo, f_hi } => {
                assert_eq!(target, 3.0);
                assert_eq!(f_lo, 0.0);
                assert_eq!(f_hi, 1.0);
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn reports_a_nan_objective() {
        let err = invert_monotone(|x: f64| (x - 0.5).sqrt(), 0.4, 0.0, 1.0, 1e-9).unwrap_err();
        assert!(matches!(err, NumericsError::NonFiniteObjective { .. }));
    }

    #[test]
    fn endpoint_targets_are_honoured() {
        let x = invert_monotone(|x: f64| x, 0.0, 0.0, 1.0, 1e-9).unwrap();
        assert!(x.abs() <= 1e-9);
        let x = invert_monotone(|x: f64| x, 1.0, 0.0, 1.0, 1e-9).unwrap();
        assert!((x - 1.0).abs() <= 1e-9);
    }
}
