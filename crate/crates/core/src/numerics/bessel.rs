//! Modified Bessel functions of the first kind, integer order.
//!
//! `I_m(x)` is evaluated by its ascending series
//!
//! ```text
//! I_m(x) = Σ_{l≥0} (x/2)^{2l+m} / (l! · Γ(l+m+1))
//! ```
//!
//! which is accurate over the whole range where the sum is representable in
//! the working precision (up to x ≈ 713 in `f64`). Past that point the
//! logarithm of `I_m` is nearly linear in `x`, so a two-point fit
//! `ln I_m(x) ≈ a_m·x + b_m` anchored just below the overflow edge extends
//! evaluation to arbitrarily large arguments. [`bessel_i_stable`] stitches
//! the two regimes together and always reports the *logarithm*, which is the
//! form every caller in this crate wants.

use std::sync::OnceLock;

use super::{NumericsError, SeriesConfig};
use crate::scalar::{cst, Real};

/// Hard cap on ascending-series terms; the series needs roughly `x/2 + 10√x`
/// terms, so this is generous for every argument below the overflow edge.
const SERIES_TERM_CAP: usize = 20_000;

/// Default lower abscissa of the log-linear tail fit.
pub const DEFAULT_TAIL_X1: f64 = 650.0;

/// Default upper abscissa (and switch point) of the log-linear tail fit.
///
/// Chosen just below the largest argument where the `f64` series is still
/// representable (`I_0` overflows near x ≈ 713), so the direct series covers
/// as much of the axis as possible before the fitted tail takes over.
pub const DEFAULT_TAIL_X2: f64 = 705.0;

/// Highest order kept in the precomputed default tail-fit table.
pub const MAX_TAIL_ORDER: u32 = 384;

/// Log-linear tail extrapolation for one Bessel order.
///
/// For `x > cutoff` the fit approximates `ln I_order(x) ≈ slope·x +
/// intercept`. The two-point construction in [`fit_tail`] makes the fit exact
/// at both abscissae, so the piecewise evaluation is continuous at the switch
/// point by construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailFit<R = f64> {
    /// Bessel order the fit belongs to.
    pub order: u32,
    /// Switch point `X_m`; the direct series is used at or below it.
    pub cutoff: R,
    /// Slope `a_m` of the fitted log-linear tail.
    pub slope: R,
    /// Intercept `b_m` of the fitted log-linear tail.
    pub intercept: R,
}

/// Natural log of the gamma function (Lanczos, g = 7, 9 terms).
///
/// Only called with positive arguments here; relative error is below 1e-13
/// over that range, far inside the series tolerances.
pub(crate) fn ln_gamma<R: Real>(z: R) -> R {
    const LANCZOS: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    debug_assert!(z > R::zero());
    let z = z - R::one();
    let mut acc: R = cst(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + cst::<R>(c) / (z + cst(i as f64));
    }
    let t = z + cst(7.5);
    // 0.5·ln(2π)
    cst::<R>(0.918_938_533_204_672_7) + (z + cst(0.5)) * t.ln() - t + acc.ln()
}

/// Modified Bessel function `I_m(x)` by its ascending series.
///
/// The leading term is formed in the log domain so large orders do not
/// overflow prematurely; successive terms follow from the recurrence
/// `t_{l+1} = t_l · (x/2)² / ((l+1)(l+m+1))`. Terms are positive, so the sum
/// is monotone and the relative-increment stop `t ≤ tol·Σ` is safe.
///
/// # Errors
///
/// * [`NumericsError::Overflow`] once a partial sum leaves the representable
///   range (use [`bessel_i_stable`] beyond that point);
/// * [`NumericsError::NoConvergence`] if the stopping tolerance is not met
///   within the term cap.
///
/// # Panics
///
/// Panics if `x` is negative or non-finite.
pub fn bessel_i<R: Real>(order: u32, x: R, cfg: &SeriesConfig<R>) -> Result<R, NumericsError> {
    assert!(
        x >= R::zero() && x.is_finite(),
        "bessel_i: argument must be finite and nonnegative"
    );
    if x == R::zero() {
        return Ok(if order == 0 { R::one() } else { R::zero() });
    }
    let half = x / cst(2.0);
    let m: R = cst(order as f64);
    let ln_lead = m * half.ln() - ln_gamma(m + R::one());
    let mut term = ln_lead.exp();
    let mut sum = term;
    let q = half * half;
    for l in 0..SERIES_TERM_CAP {
        let lr: R = cst((l + 1) as f64);
        term = term * q / (lr * (lr + m));
        sum = sum + term;
        if !sum.is_finite() {
            return Err(NumericsError::Overflow {
                order,
                x: x.to_f64().unwrap_or(f64::NAN),
            });
        }
        if term <= cfg.tol * sum {
            return Ok(sum);
        }
    }
    Err(NumericsError::NoConvergence {
        order,
        x: x.to_f64().unwrap_or(f64::NAN),
        terms: SERIES_TERM_CAP,
    })
}

/// Fits the log-linear tail `ln I_m(x) ≈ a_m·x + b_m` through two abscissae.
///
/// The series is evaluated at `x1` and `x2` and the secant of `ln I_m` taken;
/// the fit reproduces both anchor points exactly and extrapolates above
/// `x2`, which becomes the [`TailFit::cutoff`]. Anchors close to the series
/// overflow edge (the defaults) keep the extrapolation error smallest.
///
/// # Errors
///
/// [`NumericsError::BadFitWindow`] unless `0 < x1 < x2` and the series is
/// positive (not underflowed) at both points; series failures at the anchor
/// evaluations propagate.
pub fn fit_tail<R: Real>(
    order: u32,
    x1: R,
    x2: R,
    cfg: &SeriesConfig<R>,
) -> Result<TailFit<R>, NumericsError> {
    let window = NumericsError::BadFitWindow {
        x1: x1.to_f64().unwrap_or(f64::NAN),
        x2: x2.to_f64().unwrap_or(f64::NAN),
    };
    if !(x1 > R::zero() && x2 > x1 && x2.is_finite()) {
        return Err(window);
    }
    let j1 = bessel_i(order, x1, cfg)?;
    let j2 = bessel_i(order, x2, cfg)?;
    if j1 <= R::zero() || j2 <= R::zero() {
        return Err(window);
    }
    let (l1, l2) = (j1.ln(), j2.ln());
    let slope = (l2 - l1) / (x2 - x1);
    Ok(TailFit {
        order,
        cutoff: x2,
        slope,
        intercept: l1 - slope * x1,
    })
}

/// `ln I_m(x)`, using the direct series below the fit cutoff and the fitted
/// log-linear tail above it.
///
/// Returns the *logarithm*; an underflowed series value maps to `-∞`, which
/// downstream exponentiation turns back into a clean zero.
///
/// # Panics
///
/// Panics if `fit` was built for a different order.
pub fn bessel_i_stable<R: Real>(
    order: u32,
    x: R,
    fit: &TailFit<R>,
    cfg: &SeriesConfig<R>,
) -> Result<R, NumericsError> {
    assert_eq!(
        fit.order, order,
        "bessel_i_stable: tail fit belongs to order {}, not {}",
        fit.order, order
    );
    if x <= fit.cutoff {
        Ok(bessel_i(order, x, cfg)?.ln())
    } else {
        Ok(fit.slope * x + fit.intercept)
    }
}

/// Default tail fits for orders `0..=MAX_TAIL_ORDER`, anchored at
/// [`DEFAULT_TAIL_X1`] / [`DEFAULT_TAIL_X2`].
///
/// The table is computed once per process in `f64` and converted to the
/// requested precision on access, so generic callers share one set of fit
/// constants.
///
/// # Panics
///
/// Panics if `order` exceeds [`MAX_TAIL_ORDER`].
pub fn default_tail_fit<R: Real>(order: u32) -> TailFit<R> {
    static TABLE: OnceLock<Vec<TailFit<f64>>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let cfg = SeriesConfig::<f64> {
            max_order: 150,
            tol: 1e-14,
        };
        (0..=MAX_TAIL_ORDER)
            .map(|m| {
                fit_tail(m, DEFAULT_TAIL_X1, DEFAULT_TAIL_X2, &cfg)
                    .expect("default tail window is evaluable for every table order")
            })
            .collect()
    });
    assert!(
        order <= MAX_TAIL_ORDER,
        "default_tail_fit: order {order} exceeds the table cap {MAX_TAIL_ORDER}"
    );
    let f = &table[order as usize];
    TailFit {
        order,
        cutoff: cst(f.cutoff),
        slope: cst(f.slope),
        intercept: cst(f.intercept),
    }
}

/// Successive-order ratios `v_m = I_m(x) / I_{m-1}(x)` for `m = 1..=max_order`.
///
/// Computed by the backward recurrence `v_m = 1 / (2m/x + v_{m+1})`, which is
/// stable for `I` and works entirely in ratio space where every value lies in
/// `(0, 1)` — no overflow at any argument. Seeding far enough above both
/// `max_order` and `x` lets the seed error contract to well below the series
/// tolerance before the returned range is reached.
///
/// Index 0 of the returned vector is unused (kept as zero).
pub(crate) fn bessel_i_ratios<R: Real>(x: R, max_order: usize) -> Vec<R> {
    debug_assert!(x > R::zero());
    let xf = x.to_f64().unwrap_or(f64::NAN);
    let start = (max_order + 25).max((1.1 * xf).ceil() as usize + 25);
    let mut ratios = vec![R::zero(); max_order + 1];
    // Asymptotic seed v_{start+1} ≈ x / 2(start+1); its error contracts by
    // roughly v² per backward step.
    let mut v_next = x / cst(2.0 * (start + 1) as f64);
    let two = cst::<R>(2.0);
    for k in (1..=start).rev() {
        let v = R::one() / (two * cst::<R>(k as f64) / x + v_next);
        if k <= max_order {
            ratios[k] = v;
        }
        v_next = v;
    }
    ratios
}

// ---- tests ----
