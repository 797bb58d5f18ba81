//! Shared oracle helpers for the integration tests.
//!
//! The adaptive Simpson integrator below is independent of the library under
//! test: expected values for the Bessel, Marcum, and Rician checks are
//! computed by quadrature over elementary functions only, so agreement is
//! evidence rather than tautology.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol`, with Richardson correction on the accepted panels.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    refine(f, a, b, fa, fm, fb, whole, tol, 50)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

// ---- special-function oracles ----

/// Exponentially scaled modified Bessel function `I_m(x)·e^{−x}` from the
/// integral representation `(1/π) ∫₀^π e^{x(cos θ − 1)} cos(mθ) dθ`.
pub fn bessel_i_scaled_oracle(m: u32, x: f64) -> f64 {
    integrate(
        &|t: f64| ((t.cos() - 1.0) * x).exp() * (m as f64 * t).cos(),
        0.0,
        PI,
        1e-14,
    ) / PI
}

/// Rician amplitude density built from the scaled-Bessel oracle:
/// `f(g) = (2g/ε)·e^{−(g−ĝ)²/ε}·[I₀(2gĝ/ε)e^{−2gĝ/ε}]`.
pub fn rician_pdf_oracle(g: f64, g_hat: f64, eps: f64) -> f64 {
    if g <= 0.0 {
        return 0.0;
    }
    let z = 2.0 * g * g_hat / eps;
    (2.0 * g / eps) * (-(g - g_hat) * (g - g_hat) / eps).exp() * bessel_i_scaled_oracle(0, z)
}

/// Rician amplitude CDF by quadrature over [`rician_pdf_oracle`].
pub fn rician_cdf_oracle(b: f64, g_hat: f64, eps: f64) -> f64 {
    if b <= 0.0 {
        return 0.0;
    }
    integrate(&|g| rician_pdf_oracle(g, g_hat, eps), 0.0, b, 1e-12)
}

/// Bessel function of the first kind, order zero, from
/// `(1/π) ∫₀^π cos(x sin θ) dθ`.
pub fn bessel_j0_oracle(x: f64) -> f64 {
    integrate(&|t: f64| (x * t.sin()).cos(), 0.0, PI, 1e-13) / PI
}
