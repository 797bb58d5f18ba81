//! Pathloss, temporal correlation, and Rayleigh fading trace generation.
//!
//! A user's channel is a zero-mean circularly-symmetric complex Gaussian
//! process `h[n]` with power `λ` (from distance-based pathloss) and slot
//! autocorrelation
//!
//! ```text
//! c[Δ] = J₀(q·Δ/T_c),   q the smallest positive root of J₀(q) = 1/2,
//! ```
//!
//! so `T_c` is the 50% coherence time in slots. Traces are sampled exactly:
//! the Toeplitz slot-correlation matrix is Cholesky-factorized once and
//! multiplied onto i.i.d. complex Gaussian draws, which makes the
//! autocorrelation correct by construction rather than approximated by a
//! sum of sinusoids.

use std::sync::OnceLock;

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{cholesky_lower, solve_with_factor};
use crate::numerics::invert_monotone;
use crate::scalar::{cst, Real};

// ---- link parameters ----

/// Static parameters of one user's link.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkParams<R = f64> {
    /// Mean channel power gain `λ` (linear; pathloss and shadowing folded in).
    pub mean_gain: R,
    /// 50% coherence time `T_c` in slots.
    pub coherence_slots: R,
    /// Transmit power `ρ`, normalized to unit noise power.
    pub tx_power: R,
}

impl<R: Real> LinkParams<R> {
    /// # Panics
    ///
    /// Panics unless all three parameters are positive and finite.
    pub fn new(mean_gain: R, coherence_slots: R, tx_power: R) -> Self {
        assert!(
            mean_gain > R::zero() && mean_gain.is_finite(),
            "LinkParams: mean gain must be positive and finite"
        );
        assert!(
            coherence_slots > R::zero() && coherence_slots.is_finite(),
            "LinkParams: coherence time must be positive and finite"
        );
        assert!(
            tx_power > R::zero() && tx_power.is_finite(),
            "LinkParams: transmit power must be positive and finite"
        );
        Self {
            mean_gain,
            coherence_slots,
            tx_power,
        }
    }

    /// Mean received SNR `γ = ρ·λ`.
    pub fn mean_snr(&self) -> R {
        self.tx_power * self.mean_gain
    }
}

/// Distance-based mean gain `λ = β·d^{−α}`.
///
/// # Panics
///
/// Panics unless `d > 0`.
pub fn pathloss<R: Real>(d: R, alpha: R, beta: R) -> R {
    assert!(d > R::zero(), "pathloss: distance must be positive");
    beta * d.powf(-alpha)
}

// ---- zeroth-order Bessel J and the correlation model ----

/// Crossover between the ascending series and the asymptotic form of `J₀`.
/// At the seam both sides agree to a few units in 1e-9; the series loses
/// digits to cancellation above it, the asymptotic form below it.
const J0_SERIES_LIMIT: f64 = 18.0;

/// Zeroth-order Bessel function of the first kind.
///
/// Ascending series `Σ (−x²/4)^k/(k!)²` up to the crossover, Hankel
/// asymptotic expansion `√(2/πx)·[P(x)cos(x−π/4) − Q(x)sin(x−π/4)]` beyond.
/// Absolute error is ~1e-10 on the series side and below 3e-8 on the
/// asymptotic side (worst at the seam, shrinking as x grows) — far below
/// the Monte-Carlo noise of anything built on top, and the correlation
/// model only ever evaluates it well inside the series range.
pub fn bessel_j0<R: Real>(x: R) -> R {
    let x = x.abs();
    if x <= cst(J0_SERIES_LIMIT) {
        let q = -(x * x) / cst(4.0);
        let mut term = R::one();
        let mut sum = R::one();
        for k in 1..200u32 {
            let kf: R = cst(k as f64);
            term = term * q / (kf * kf);
            sum = sum + term;
            if term.abs() <= cst::<R>(1e-17) * sum.abs().max(R::one()) {
                break;
            }
        }
        sum
    } else {
        let inv2 = (x * x).recip();
        let p = R::one() - cst::<R>(9.0 / 128.0) * inv2 + cst::<R>(3675.0 / 32768.0) * inv2 * inv2;
        let q = (-cst::<R>(1.0 / 8.0) + cst::<R>(75.0 / 1024.0) * inv2) / x;
        let phase = x - cst::<R>(std::f64::consts::FRAC_PI_4);
        (cst::<R>(std::f64::consts::FRAC_2_PI) / x).sqrt() * (p * phase.cos() - q * phase.sin())
    }
}

/// Smallest positive solution of `J₀(q) = 1/2`, found once by bisection on
/// `[0, 2.404]` (J₀ is strictly decreasing there, 2.404 sits just before its
/// first zero) and cached.
pub fn half_correlation_arg<R: Real>() -> R {
    static ROOT: OnceLock<f64> = OnceLock::new();
    let q = *ROOT.get_or_init(|| {
        invert_monotone(|x: f64| -bessel_j0(x), -0.5, 0.0, 2.404, 1e-13)
            .expect("J0 passes through 1/2 before its first zero")
    });
    cst(q)
}

/// Slot autocorrelation `c[Δ] = J₀(q·Δ/T_c)` of the fading process.
///
/// `delta` may be fractional; `delta = T_c` gives 1/2 by construction.
///
/// # Panics
///
/// Panics unless `T_c > 0` and `delta ≥ 0`.
pub fn correlation<R: Real>(delta: R, coherence_slots: R) -> R {
    assert!(
        coherence_slots > R::zero(),
        "correlation: coherence time must be positive"
    );
    assert!(delta >= R::zero(), "correlation: lag must be nonnegative");
    bessel_j0(half_correlation_arg::<R>() * delta / coherence_slots)
}

// ---- fading traces ----

/// One realization of the fading process over consecutive slots.
#[derive(Clone, Debug)]
pub struct FadingTrace<R = f64> {
    params: LinkParams<R>,
    samples: Vec<Complex<R>>,
}

impl<R: Real> FadingTrace<R> {
    /// Link parameters the trace was drawn under.
    pub fn params(&self) -> &LinkParams<R> {
        &self.params
    }

    /// Per-slot coefficients, slot 0 first.
    pub fn samples(&self) -> &[Complex<R>] {
        &self.samples
    }

    /// Number of slots.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false in practice — generation requires at least one slot.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Instantaneous capacity `log₂(1 + ρ|h[n]|²)` at a slot.
    pub fn capacity(&self, slot: usize) -> R {
        let g2 = self.samples[slot].norm_sqr();
        (R::one() + self.params.tx_power * g2).log2()
    }
}

/// Reusable trace generator for one `(T_c, N_slots)` pair.
///
/// Holds the lower Cholesky factor of the N×N Toeplitz matrix of slot
/// correlations (unit diagonal, so it is gain-free and shareable across
/// users at different distances). The matrix is positive semidefinite in
/// exact arithmetic but numerically rank-deficient whenever the trace is
/// much longer than the coherence time (a bandlimited process has an
/// effective rank of a few times `n_slots / coherence_slots`), so a failed
/// factorization retries with diagonal jitter — starting at
/// [`CORRELATION_JITTER`] and escalating a hundredfold per retry — and sets
/// [`TraceSampler::jitter_applied`].
pub struct TraceSampler<R = f64> {
    coherence_slots: R,
    n_slots: usize,
    factor: Vec<R>,
    /// True when the correlation matrix needed diagonal jitter to factorize.
    pub jitter_applied: bool,
}

/// Initial diagonal jitter applied when the slot-correlation matrix is
/// numerically semidefinite, relative to its unit diagonal. Escalated
/// hundredfold per retry up to [`CORRELATION_JITTER_CAP`]; per-slot sample
/// power is inflated by at most the applied value, which stays negligible
/// against the unit diagonal.
pub const CORRELATION_JITTER: f64 = 1e-10;

/// Largest diagonal jitter attempted before giving up on the factorization.
pub const CORRELATION_JITTER_CAP: f64 = 1e-4;

impl<R: Real> TraceSampler<R> {
    /// Builds the factorized slot-correlation matrix.
    ///
    /// # Panics
    ///
    /// Panics if `n_slots = 0`, if the coherence time is nonpositive, or if
    /// the matrix stays indefinite past the jitter cap (not reachable for a
    /// genuine correlation sequence).
    pub fn new(coherence_slots: R, n_slots: usize) -> Self {
        assert!(n_slots >= 1, "TraceSampler: need at least one slot");
        assert!(
            coherence_slots > R::zero(),
            "TraceSampler: coherence time must be positive"
        );
        let mut corr = vec![R::zero(); n_slots * n_slots];
        for i in 0..n_slots {
            for j in 0..n_slots {
                let lag: R = cst((i as f64 - j as f64).abs());
                corr[i * n_slots + j] = correlation(lag, coherence_slots);
            }
        }
        let mut factor = cholesky_lower(&corr, n_slots);
        let mut jitter_applied = false;
        let mut jitter = CORRELATION_JITTER;
        while factor.is_none() && jitter <= CORRELATION_JITTER_CAP {
            // Escalate from the previous level: add the increment over what
            // the diagonal already carries.
            let step: R = cst(if jitter_applied {
                jitter - jitter / 100.0
            } else {
                jitter
            });
            for i in 0..n_slots {
                corr[i * n_slots + i] = corr[i * n_slots + i] + step;
            }
            jitter_applied = true;
            factor = cholesky_lower(&corr, n_slots);
            jitter *= 100.0;
        }
        let factor = factor.expect("slot-correlation matrix must factorize within the jitter cap");
        Self {
            coherence_slots,
            n_slots,
            factor,
            jitter_applied,
        }
    }

    /// Number of slots per generated trace.
    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    /// Draws one trace for a link.
    ///
    /// The white complex Gaussian input has unit power per slot
    /// (variance 1/2 per real dimension); coloring by the correlation factor
    /// and scaling by `√λ` gives `h ∼ CN(0, λ·Toeplitz(c))`.
    ///
    /// # Panics
    ///
    /// Panics if the link's coherence time differs from the sampler's.
    pub fn sample(&self, params: &LinkParams<R>, rng: &mut impl Rng) -> FadingTrace<R> {
        assert!(
            params.coherence_slots == self.coherence_slots,
            "TraceSampler: link coherence time does not match the sampler"
        );
        let n = self.n_slots;
        let half: R = cst(0.5);
        let white: Vec<Complex<R>> = (0..n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(cst::<R>(re) * half.sqrt(), cst::<R>(im) * half.sqrt())
            })
            .collect();
        let scale = params.mean_gain.sqrt();
        let samples = (0..n)
            .map(|i| {
                let mut acc = Complex::new(R::zero(), R::zero());
                let row = &self.factor[i * n..i * n + i + 1];
                for (w, &f) in white.iter().zip(row) {
                    acc = acc + w.scale(f);
                }
                acc.scale(scale)
            })
            .collect();
        FadingTrace {
            params: *params,
            samples,
        }
    }
}

/// One-shot convenience over [`TraceSampler`]: factorizes, samples once.
/// Callers generating many traces of the same shape should hold a sampler.
pub fn gen_trace<R: Real>(
    params: &LinkParams<R>,
    n_slots: usize,
    rng: &mut impl Rng,
) -> FadingTrace<R> {
    TraceSampler::new(params.coherence_slots, n_slots).sample(params, rng)
}

/// Solves the diagonally loaded correlation system `(C + σI)·x = c` that
/// the estimation-error variance needs; kept here so the Toeplitz assembly
/// and the factorization stay in one place.
pub(crate) fn solve_loaded_toeplitz<R: Real>(first_row: &[R], loading: R, rhs: &[R]) -> Vec<R> {
    let w = first_row.len();
    assert_eq!(rhs.len(), w, "solve_loaded_toeplitz: shape mismatch");
    let mut a = vec![R::zero(); w * w];
    for i in 0..w {
        for j in 0..w {
            let lag = i.abs_diff(j);
            a[i * w + j] = first_row[lag];
        }
        a[i * w + i] = a[i * w + i] + loading;
    }
    let l =
        cholesky_lower(&a, w).expect("diagonally loaded correlation matrix is positive definite");
    solve_with_factor(&l, w, rhs)
}

// ---- tests ----
