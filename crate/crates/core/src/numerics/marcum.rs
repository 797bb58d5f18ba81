//! First-order Marcum Q function and the conditional Rician amplitude law.
//!
//! With a channel estimate of amplitude `ĝ` and residual error variance `ε`,
//! the true amplitude `g` is Rician:
//!
//! ```text
//! f(g | ĝ) = (2g/ε) · exp(-(g² + ĝ²)/ε) · I_0(2gĝ/ε)
//! F(b | ĝ) = 1 − Q_1(√(2ĝ²/ε), √(2b²/ε))
//! ```
//!
//! `Q_1` is evaluated through its Bessel series
//! `Q_1(α, β) = exp(-(α²+β²)/2) · Σ_m (α/β)^m I_m(αβ)`, where every term is
//! assembled in the log domain: the prefactor exponent, `m` times the log
//! amplitude ratio, and `ln I_m` from either the backward-ratio recurrence
//! (below the tail cutoff) or the fitted log-linear tail (above it). That
//! keeps each term finite even when `αβ` is far beyond the range where
//! `I_m` itself is representable.
//!
//! The series is only summed with the amplitude ratio at or below one. With
//! the ratio above one its terms peak near order `(α² − β²)/2`, which
//! overtakes any fixed order cap as `β` shrinks — a truncated sum can then
//! lose essentially all of the mass. For `β < α` the complementary form
//! `Q_1(α, β) = 1 − exp(-(α²+β²)/2) · Σ_{m≥1} (β/α)^m I_m(αβ)` is used
//! instead: its terms decay from the first order, and the subtraction keeps
//! relative precision exactly where `Q_1` approaches one.

use super::bessel::{bessel_i_ratios, default_tail_fit};
use super::{bessel_i, SeriesConfig, DEFAULT_TAIL_X2, MAX_TAIL_ORDER};
use crate::scalar::{cst, Real};

#[inline]
fn clamp_unit<R: Real>(p: R) -> R {
    p.max(R::zero()).min(R::one())
}

/// First-order Marcum Q function `Q_1(α, β)`.
///
/// Closed forms handle the axes: `Q_1(α, 0) = 1` and `Q_1(0, β) =
/// exp(-β²/2)`. For `β ≥ α` the series above is summed directly; for
/// `β < α` the complementary series is summed and subtracted from one. Both
/// truncate at `cfg.max_order` with an additional relative-increment stop,
/// and the result is clamped to `[0, 1]`. With the default order cap the
/// absolute truncation error stays below ~1e-9 for `αβ ≤ 600` and grows
/// slowly past it (~1e-7 near `αβ ≈ 900`).
///
/// # Panics
///
/// Panics if either argument is negative or non-finite, or if `cfg.max_order`
/// exceeds the precomputed tail table when the tail regime is reached.
pub fn marcum_q1<R: Real>(alpha: R, beta: R, cfg: &SeriesConfig<R>) -> R {
    assert!(
        alpha >= R::zero() && beta >= R::zero() && alpha.is_finite() && beta.is_finite(),
        "marcum_q1: arguments must be finite and nonnegative"
    );
    if beta == R::zero() {
        return R::one();
    }
    if alpha == R::zero() {
        return clamp_unit((-(beta * beta) / cst(2.0)).exp());
    }
    if beta >= alpha {
        clamp_unit(series_sum(alpha, beta, 0, cfg))
    } else {
        clamp_unit(R::one() - series_sum(beta, alpha, 1, cfg))
    }
}

/// `exp(-(lo²+hi²)/2) · Σ_{m=first}^{max_order} (lo/hi)^m I_m(lo·hi)` with
/// `lo ≤ hi`, every term assembled in the log domain.
fn series_sum<R: Real>(lo: R, hi: R, first: usize, cfg: &SeriesConfig<R>) -> R {
    let x = lo * hi;
    let base = -(lo * lo + hi * hi) / cst(2.0);
    let ln_ratio = lo.ln() - hi.ln();
    let in_tail = x > cst(DEFAULT_TAIL_X2);
    if in_tail {
        assert!(
            cfg.max_order <= MAX_TAIL_ORDER as usize,
            "marcum_q1: max_order {} exceeds the tail table cap {MAX_TAIL_ORDER}",
            cfg.max_order
        );
    }

    // ln I_0(lo·hi): series below the cutoff (cannot overflow there), fitted
    // tail above. The per-order series ratios then extend the log value
    // upward through the orders without leaving ratio space.
    let ratios = if in_tail {
        Vec::new()
    } else {
        bessel_i_ratios(x, cfg.max_order)
    };
    let mut ln_i = if in_tail {
        let fit = default_tail_fit::<R>(0);
        fit.slope * x + fit.intercept
    } else {
        bessel_i(0, x, cfg)
            .expect("order-0 series is representable below the tail cutoff")
            .ln()
    };

    // Compensated summation keeps the truncation comparison (150 vs 300
    // orders) meaningful down to 1e-9 absolute and below.
    let mut sum = R::zero();
    let mut comp = R::zero();
    let mut prev = R::infinity();
    // `m` drives the ratio index, the skip logic, and the term exponent at
    // once (and `ratios` is empty on the tail path), so the index loop
    // stays.
    #[allow(clippy::needless_range_loop)]
    for m in 0..=cfg.max_order {
        if m > 0 {
            ln_i = if in_tail {
                let fit = default_tail_fit::<R>(m as u32);
                fit.slope * x + fit.intercept
            } else {
                ln_i + ratios[m].ln()
            };
        }
        if m < first {
            continue;
        }
        let term = (base + cst::<R>(m as f64) * ln_ratio + ln_i).exp();
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        // With the ratio at or below one the terms decay from the start in
        // exact arithmetic; the descent guard only hedges against rounding.
        if m > first && term < prev && term <= cfg.tol * sum {
            break;
        }
        prev = term;
    }
    sum
}

/// Conditional Rician amplitude density `f(g | ĝ)` with error variance `ε`.
///
/// Assembled in the log domain with the stabilized order-0 Bessel evaluation,
/// so it stays finite for any argument combination; `g = 0` returns the exact
/// limit 0. With `ĝ = 0` the density reduces to Rayleigh.
///
/// # Panics
///
/// Panics if `eps <= 0` or either amplitude is negative.
pub fn rician_pdf<R: Real>(g: R, g_hat: R, eps: R) -> R {
    assert!(
        eps > R::zero(),
        "rician_pdf: error variance must be positive"
    );
    assert!(
        g >= R::zero() && g_hat >= R::zero(),
        "rician_pdf: amplitudes must be nonnegative"
    );
    if g == R::zero() {
        return R::zero();
    }
    let cfg = SeriesConfig::<R>::default();
    let fit = default_tail_fit::<R>(0);
    let x = cst::<R>(2.0) * g * g_hat / eps;
    let ln_i0 = super::bessel_i_stable(0, x, &fit, &cfg)
        .expect("order-0 series is representable below the tail cutoff");
    let ln_f = (cst::<R>(2.0) * g / eps).ln() - (g * g + g_hat * g_hat) / eps + ln_i0;
    ln_f.exp()
}

/// Conditional Rician amplitude CDF `F(b | ĝ) = 1 − Q_1(√(2ĝ²/ε), √(2b²/ε))`.
///
/// Clamped to `[0, 1]`; `b = 0` returns exactly 0.
///
/// # Panics
///
/// Panics if `eps <= 0` or either amplitude is negative.
pub fn rician_cdf<R: Real>(b: R, g_hat: R, eps: R, cfg: &SeriesConfig<R>) -> R {
    assert!(
        eps > R::zero(),
        "rician_cdf: error variance must be positive"
    );
    assert!(
        b >= R::zero() && g_hat >= R::zero(),
        "rician_cdf: amplitudes must be nonnegative"
    );
    if b == R::zero() {
        return R::zero();
    }
    let scale = (cst::<R>(2.0) / eps).sqrt();
    clamp_unit(R::one() - marcum_q1(g_hat * scale, b * scale, cfg))
}

// ---- tests ----

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SeriesConfig<f64> {
        SeriesConfig::default()
    }

    #[test]
    fn marcum_axes_match_closed_forms() {
        assert_eq!(marcum_q1(2.0, 0.0, &cfg()), 1.0);
        let q = marcum_q1(0.0, 1.5, &cfg());
        assert!((q - (-1.125f64).exp()).abs() < 1e-15);
        assert_eq!(marcum_q1(0.0, 0.0, &cfg()), 1.0);
    }

    #[test]
    fn marcum_equal_arguments_match_the_bessel_identity() {
        // Q_1(a, a) = (1 + exp(-a²)·I_0(a²)) / 2.
        for &a2 in &[0.5, 2.0, 10.0, 50.0] {
            let a = a2f(a2);
            let q = marcum_q1(a, a, &cfg());
            let i0 = bessel_i(0, a2, &cfg()).unwrap();
            let expect = 0.5 * (1.0 + (-a2).exp() * i0);
            assert!((q - expect).abs() < 1e-12, "a² = {a2}: {q} vs {expect}");
        }
    }

    fn a2f(a2: f64) -> f64 {
        a2.sqrt()
    }

    #[test]
    fn marcum_is_bounded_and_monotone_on_a_grid() {
        let grid: Vec<f64> = (0..=20).map(|i| 0.3 * i as f64).collect();
        for &a in &grid {
            let mut prev = 1.0f64;
            for &b in &grid {
                let q = marcum_q1(a, b, &cfg());
                assert!((0.0..=1.0).contains(&q));
                assert!(q <= prev + 1e-12, "Q must be nonincreasing in beta");
                prev = q;
            }
        }
        for &b in &grid[1..] {
            let mut prev = 0.0f64;
            for &a in &grid {
                let q = marcum_q1(a, b, &cfg());
                assert!(q >= prev - 1e-12, "Q must be nondecreasing in alpha");
                prev = q;
            }
        }
    }

    #[test]
    fn marcum_complement_keeps_the_deep_upper_tail_exact() {
        // With α ≫ β the direct series needs orders past (α² − β²)/2 — far
        // beyond the default cap — while the complementary form subtracts a
        // correction of size exp(-(α-β)²/2) computed at full precision.
        assert_eq!(marcum_q1(18.974, 0.002, &cfg()), 1.0);
        assert!((marcum_q1(18.974, 3.556, &cfg()) - 1.0).abs() < 1e-15);
        assert!((marcum_q1(22.96, 14.887, &cfg()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn marcum_is_continuous_across_the_branch_seam() {
        for &a in &[0.7f64, 3.0, 12.0, 24.0] {
            let below = marcum_q1(a, a * (1.0 - 1e-9), &cfg());
            let above = marcum_q1(a, a * (1.0 + 1e-9), &cfg());
            assert!(
                (below - above).abs() < 1e-7,
                "seam jump at α = {a}: {below} vs {above}"
            );
        }
    }

    #[test]
    fn marcum_stays_monotone_on_a_wide_grid() {
        // Coarser but wider than the grid above: covers the whole span the
        // series path can see (αβ up to ~580) at the truncation accuracy.
        let grid: Vec<f64> = (0..=20).map(|i| 1.2 * i as f64).collect();
        for &a in &grid {
            let mut prev = 1.0f64;
            for &b in &grid {
                let q = marcum_q1(a, b, &cfg());
                assert!((0.0..=1.0).contains(&q));
                assert!(q <= prev + 1e-9, "Q must be nonincreasing in beta");
                prev = q;
            }
        }
    }

    #[test]
    fn marcum_survives_the_tail_regime() {
        // αβ far past the series range: still finite, bounded, monotone in β.
        let q_lo = marcum_q1(40.0, 38.0, &cfg());
        let q_hi = marcum_q1(40.0, 42.0, &cfg());
        assert!((0.0..=1.0).contains(&q_lo) && (0.0..=1.0).contains(&q_hi));
        assert!(q_lo >= q_hi);
    }

    #[test]
    fn pdf_edges() {
        assert_eq!(rician_pdf(0.0, 1.0, 0.2), 0.0);
        // ĝ = 0 reduces to the Rayleigh density (2g/ε)·exp(-g²/ε).
        let g = 0.7f64;
        let eps = 0.3f64;
        let rayleigh = (2.0 * g / eps) * (-g * g / eps).exp();
        assert!((rician_pdf(g, 0.0, eps) - rayleigh).abs() < 1e-14);
    }

    #[test]
    fn cdf_edges() {
        assert_eq!(rician_cdf(0.0, 1.0, 0.2, &cfg()), 0.0);
        // Far above the mean the mass is exhausted.
        let p = rician_cdf(50.0, 1.0, 0.2, &cfg());
        assert!((p - 1.0).abs() < 1e-12);
        // ĝ = 0: Rayleigh CDF 1 − exp(-b²/ε).
        let p0 = rician_cdf(0.5, 0.0, 0.25, &cfg());
        assert!((p0 - (1.0 - (-1.0f64).exp())).abs() < 1e-13);
    }
}
