//! Special functions and root finding for outage-constrained rate adaptation.
//!
//! The conditional channel amplitude behind a noisy estimate is Rician, so
//! outage probabilities reduce to the first-order Marcum Q function, which in
//! turn is a series over modified Bessel functions of the first kind. The
//! routines here evaluate that chain in the log domain so that the huge
//! dynamic range of `I_m` (order `e^x`) never leaves the representable range:
//!
//! * [`bessel_i`] — ascending power series for `I_m(x)`,
//! * [`fit_tail`] / [`bessel_i_stable`] — piecewise evaluation with a fitted
//!   log-linear tail `ln I_m(x) ≈ a_m·x + b_m` past the series' usable range,
//! * [`marcum_q1`] — `Q_1(α, β)` summed term-by-term in the log domain,
//! * [`rician_pdf`] / [`rician_cdf`] — the conditional amplitude law,
//! * [`invert_monotone`] — bisection on a nondecreasing objective, used to
//!   turn an outage target back into a rate.

mod bessel;
mod invert;
mod marcum;

pub use bessel::{
    bessel_i, bessel_i_stable, default_tail_fit, fit_tail, TailFit, DEFAULT_TAIL_X1,
    DEFAULT_TAIL_X2, MAX_TAIL_ORDER,
};
pub use invert::invert_monotone;
pub use marcum::{marcum_q1, rician_cdf, rician_pdf};

use crate::scalar::{cst, Real};
use std::fmt;

/// Truncation and stopping controls shared by the series evaluations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesConfig<R = f64> {
    /// Highest Bessel order kept in the Marcum Q series (inclusive).
    pub max_order: usize,
    /// Relative-increment stopping tolerance for all series.
    pub tol: R,
}

impl<R: Real> Default for SeriesConfig<R> {
    fn default() -> Self {
        Self {
            max_order: 150,
            tol: cst(1e-12),
        }
    }
}

/// Failure modes of the series and root-finding routines.
///
/// Scalars are reported as `f64` regardless of the working precision.
#[derive(Clone, Debug, PartialEq)]
pub enum NumericsError {
    /// The partial sums of a Bessel series left the representable range.
    Overflow { order: u32, x: f64 },
    /// A series failed to meet its stopping tolerance within the term cap.
    NoConvergence { order: u32, x: f64, terms: usize },
    /// A tail-fit window was rejected: needs `0 < x1 < x2` and a series
    /// value that is positive (not underflowed) at both abscissae.
    BadFitWindow { x1: f64, x2: f64 },
    /// The inversion target lies outside `[f(lo), f(hi)]`.
    BracketMiss { target: f64, f_lo: f64, f_hi: f64 },
    /// The objective returned a non-finite value during bisection.
    NonFiniteObjective { x: f64 },
}

impl fmt::Display for NumericsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Overflow { order, x } => {
                write!(f, "modified Bessel series I_{order}({x}) overflowed")
            }
            Self::NoConvergence { order, x, terms } => {
                write!(f, "I_{order}({x}) did not converge within {terms} terms")
            }
            Self::BadFitWindow { x1, x2 } => {
                write!(f, "invalid tail-fit window [{x1}, {x2}]")
            }
            Self::BracketMiss { target, f_lo, f_hi } => {
                write!(f, "target {target} outside bracket values [{f_lo}, {f_hi}]")
            }
            Self::NonFiniteObjective { x } => {
                write!(f, "objective became non-finite at x = {x}")
            }
        }
    }
}

impl std::error::Error for NumericsError {}
