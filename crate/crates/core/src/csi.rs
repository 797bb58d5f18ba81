//! Transmitter-side channel knowledge: estimation-error variance and
//! synthesis of estimates consistent with a given true channel.
//!
//! The transmitter sees an estimate `ĥ` of the true coefficient `h` that is
//! stale by `Δ` slots, predicted from `W` past pilot blocks of `N_P` pilots
//! each, and fed back with `Q` bits per complex coefficient. All of that is
//! summarized by one number, the error variance `ε = E{|h − ĥ|²}`, under
//! the joint-Gaussian model `h = ĥ + e`, `e ∼ CN(0, ε)` independent of `ĥ`.
//!
//! `ε` comes from the MMSE predictor identity: with observation
//! correlations `c = [c[Δ], …, c[Δ+W−1]]`, observation covariance `C`
//! (Toeplitz in `c[0..W−1]`) and per-observation noise `1/(γN_P)` on the
//! normalized channel, the explained fraction of channel power is
//! `cᵀ(C + (γN_P)^{−1}I)^{−1}c`, degraded by the quantization factor
//! `(1 − 2^{−Q})`, and
//!
//! ```text
//! ε = λ·[1 − (1 − 2^{−Q})·cᵀ(C + (γN_P)^{−1}I)^{−1}c],   γ = ρλ.
//! ```
//!
//! A literal variant of the published formula (the quadratic form itself as
//! the error, with `ρN_P` added to the diagonal) is kept behind
//! [`EpsilonFormula::Literal`] for side-by-side comparison; it moves the
//! wrong way with delay and is not used by the simulators.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{correlation, solve_loaded_toeplitz, FadingTrace, LinkParams};
use crate::scalar::{cst, Real};

// ---- configuration ----

/// Which reading of the error-variance formula to evaluate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EpsilonFormula {
    /// MMSE complement with noise loading `(γN_P)^{−1}`, scaled by `λ` and
    /// clamped to `[0, λ]`. Uncertainty grows with delay and shrinks with
    /// SNR, pilots, and feedback bits.
    #[default]
    Mmse,
    /// The quadratic form itself, `(1 − 2^{−Q})·cᵀ(C + ρN_P·I)^{−1}c`,
    /// exactly as printed. Kept for comparison; decreasing in delay.
    Literal,
}

/// CSI acquisition parameters for one link.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CsiConfig<R = f64> {
    /// Feedback/backhaul delay `Δ` in slots.
    pub delay: u32,
    /// Prediction window `W ≥ 1`: number of past pilot blocks used.
    pub window: u32,
    /// Pilot symbols per block, `N_P ≥ 1`.
    pub pilots: u32,
    /// Feedback bits per complex coefficient; `None` means unquantized.
    pub feedback_bits: Option<u32>,
    /// The link the estimate describes.
    pub link: LinkParams<R>,
    /// Formula variant; [`EpsilonFormula::Mmse`] unless comparing.
    pub formula: EpsilonFormula,
}

impl<R: Real> CsiConfig<R> {
    /// # Panics
    ///
    /// Panics unless `window ≥ 1` and `pilots ≥ 1`.
    pub fn new(
        delay: u32,
        window: u32,
        pilots: u32,
        feedback_bits: Option<u32>,
        link: LinkParams<R>,
    ) -> Self {
        assert!(
            window >= 1,
            "CsiConfig: prediction window must be at least 1"
        );
        assert!(pilots >= 1, "CsiConfig: need at least one pilot per block");
        Self {
            delay,
            window,
            pilots,
            feedback_bits,
            link,
            formula: EpsilonFormula::Mmse,
        }
    }

    /// Same configuration with the formula variant replaced.
    pub fn with_formula(mut self, formula: EpsilonFormula) -> Self {
        self.formula = formula;
        self
    }

    /// Quantization retention factor `1 − 2^{−Q}` (1 when unquantized).
    fn quantization_factor(&self) -> R {
        match self.feedback_bits {
            None => R::one(),
            Some(q) => R::one() - cst::<R>(2.0).powi(-(q as i32)),
        }
    }
}

// ---- error variance ----

/// Correlations between the current slot and the `W` observed pilot slots:
/// `[c[Δ], c[Δ+1], …, c[Δ+W−1]]`.
pub fn cov_vector<R: Real>(cfg: &CsiConfig<R>) -> Vec<R> {
    let t_c = cfg.link.coherence_slots;
    (0..cfg.window)
        .map(|i| correlation(cst::<R>((cfg.delay + i) as f64), t_c))
        .collect()
}

/// Observation correlation matrix: W×W symmetric Toeplitz with first row
/// `[c[0], c[1], …, c[W−1]]` (row-major).
pub fn cov_matrix<R: Real>(cfg: &CsiConfig<R>) -> Vec<R> {
    let w = cfg.window as usize;
    let t_c = cfg.link.coherence_slots;
    let first: Vec<R> = (0..w)
        .map(|k| correlation(cst::<R>(k as f64), t_c))
        .collect();
    let mut m = vec![R::zero(); w * w];
    for i in 0..w {
        for j in 0..w {
            let lag = i.abs_diff(j);
            m[i * w + j] = first[lag];
        }
    }
    m
}

/// Estimation-error variance `ε` for a CSI configuration.
///
/// Under the default [`EpsilonFormula::Mmse`] the result lies in `[0, λ]`
/// and is the variance of the conditional law `h | ĥ ∼ CN(ĥ, ε)` consumed
/// by rate adaptation. Under [`EpsilonFormula::Literal`] the printed
/// quadratic form is returned with only a nonnegativity clamp; it is not a
/// conditional variance on the same scale (see module docs).
pub fn error_variance<R: Real>(cfg: &CsiConfig<R>) -> R {
    let w = cfg.window as usize;
    let t_c = cfg.link.coherence_slots;
    let lambda = cfg.link.mean_gain;
    let first: Vec<R> = (0..w)
        .map(|k| correlation(cst::<R>(k as f64), t_c))
        .collect();
    let c = cov_vector(cfg);
    let quant = cfg.quantization_factor();
    let pilots: R = cst(cfg.pilots as f64);
    match cfg.formula {
        EpsilonFormula::Mmse => {
            let loading = (cfg.link.mean_snr() * pilots).recip();
            let x = solve_loaded_toeplitz(&first, loading, &c);
            let explained: R = c
                .iter()
                .zip(&x)
                .fold(R::zero(), |acc, (a, b)| acc + *a * *b);
            (lambda * (R::one() - quant * explained))
                .max(R::zero())
                .min(lambda)
        }
        EpsilonFormula::Literal => {
            let loading = cfg.link.tx_power * pilots;
            let x = solve_loaded_toeplitz(&first, loading, &c);
            let quad: R = c
                .iter()
                .zip(&x)
                .fold(R::zero(), |acc, (a, b)| acc + *a * *b);
            (quant * quad).max(R::zero())
        }
    }
}

// ---- estimate synthesis ----

/// Transmitter-side view of one slot: the estimate and its error variance.
#[derive(Clone, Copy, Debug)]
pub struct CsiView<R = f64> {
    /// Channel estimate `ĥ`.
    pub estimate: Complex<R>,
    /// Error variance `ε = E{|h − ĥ|²}`.
    pub error_variance: R,
    /// Slot index the view describes.
    pub slot: usize,
}

impl<R: Real> CsiView<R> {
    /// Estimated amplitude `ĝ = |ĥ|`.
    pub fn amplitude(&self) -> R {
        self.estimate.norm()
    }
}

/// Builds a view around a known true coefficient `h` so that the pair
/// `(h, ĥ)` has exactly the model's joint law.
///
/// With `s = (λ−ε)/λ` and `v ∼ CN(0, ελ/(λ−ε))`, the estimate
/// `ĥ = s·(h + v)` satisfies `E{|ĥ|²} = λ−ε`, `E{|h−ĥ|²} = ε`,
/// `E{(h−ĥ)ĥ*} = 0`, and — because everything is jointly Gaussian —
/// `h | ĥ ∼ CN(ĥ, ε)` exactly. The edge cases are exact too: `ε = 0`
/// returns `ĥ = h`, `ε = λ` returns `ĥ = 0` (the estimate carries no
/// information).
///
/// # Panics
///
/// Panics unless `0 ≤ ε ≤ λ`.
pub fn view_from_channel<R: Real>(
    h: Complex<R>,
    params: &LinkParams<R>,
    eps: R,
    slot: usize,
    rng: &mut impl Rng,
) -> CsiView<R> {
    let lambda = params.mean_gain;
    assert!(
        eps >= R::zero() && eps <= lambda,
        "view_from_channel: error variance must lie in [0, mean gain]"
    );
    let estimate = if eps == R::zero() {
        h
    } else if eps == lambda {
        Complex::new(R::zero(), R::zero())
    } else {
        let scale = (lambda - eps) / lambda;
        let v_var = eps * lambda / (lambda - eps);
        let sd = (v_var / cst(2.0)).sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let v = Complex::new(cst::<R>(re) * sd, cst::<R>(im) * sd);
        (h + v).scale(scale)
    };
    CsiView {
        estimate,
        error_variance: eps,
        slot,
    }
}

/// Synthesizes the transmitter's view of one slot of a trace under a CSI
/// configuration: computes `ε = error_variance(cfg)` and wraps
/// [`view_from_channel`]. Simulation loops that reuse one `ε` for many
/// slots should compute it once and call [`view_from_channel`] directly.
pub fn synthesize_view<R: Real>(
    trace: &FadingTrace<R>,
    slot: usize,
    cfg: &CsiConfig<R>,
    rng: &mut impl Rng,
) -> CsiView<R> {
    let eps = error_variance(cfg);
    view_from_channel(trace.samples()[slot], trace.params(), eps, slot, rng)
}

// ---- tests ----

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn link() -> LinkParams<f64> {
        LinkParams::new(1.0, 10.0, 10.0)
    }

    #[test]
    fn cov_vector_edges() {
        let cfg = CsiConfig::new(0, 1, 8, None, link());
        assert_eq!(cov_vector(&cfg), vec![1.0]);
        let cfg = CsiConfig::new(10, 1, 8, None, link());
        assert!((cov_vector(&cfg)[0] - 0.5).abs() < 1e-12);
        let cfg = CsiConfig::new(0, 3, 8, None, link());
        let v = cov_vector(&cfg);
        for (i, entry) in v.iter().enumerate() {
            assert!((entry - correlation(i as f64, 10.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn cov_matrix_is_unit_diagonal_toeplitz() {
        let cfg = CsiConfig::new(3, 4, 8, None, link());
        let m = cov_matrix(&cfg);
        for i in 0..4 {
            assert_eq!(m[i * 4 + i], 1.0);
            for j in 0..4 {
                assert_eq!(m[i * 4 + j], m[j * 4 + i]);
                let lag = (i as f64 - j as f64).abs();
                assert!((m[i * 4 + j] - correlation(lag, 10.0)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn perfect_observation_limit_has_no_error() {
        // Unquantized, immediate, effectively noiseless observation.
        let params = LinkParams::new(1.0, 10.0, 1e12);
        let cfg = CsiConfig::new(0, 1, 1_000_000, None, params);
        assert!(error_variance(&cfg) < 1e-9);
    }

    #[test]
    fn uninformative_observation_saturates_at_the_mean_gain() {
        // Delay far beyond the coherence time: correlation ~ 0.
        let params = LinkParams::new(2.0, 1.0, 10.0);
        let cfg = CsiConfig::new(200, 1, 8, None, params);
        let eps = error_variance(&cfg);
        assert!(eps > 1.9 && eps <= 2.0, "eps = {eps}");
    }

    #[test]
    fn error_variance_moves_the_right_way() {
        let base = CsiConfig::new(5, 1, 8, Some(6), link());
        let eps = error_variance(&base);
        // More pilots, more bits, more SNR: less uncertainty.
        let more_pilots = CsiConfig::new(5, 1, 64, Some(6), link());
        assert!(error_variance(&more_pilots) < eps);
        let more_bits = CsiConfig::new(5, 1, 8, Some(12), link());
        assert!(error_variance(&more_bits) < eps);
        let more_snr = CsiConfig::new(5, 1, 8, Some(6), LinkParams::new(1.0, 10.0, 100.0));
        assert!(error_variance(&more_snr) < eps);
        // More delay (within the first coherence span): more uncertainty.
        for d in 0..10 {
            let lo = CsiConfig::new(d, 1, 8, Some(6), link());
            let hi = CsiConfig::new(d + 1, 1, 8, Some(6), link());
            assert!(error_variance(&hi) >= error_variance(&lo) - 1e-12);
        }
        // A second observation helps.
        let wider = CsiConfig::new(5, 2, 8, Some(6), link());
        assert!(error_variance(&wider) <= eps + 1e-12);
    }

    #[test]
    fn literal_variant_decreases_with_delay() {
        let near = CsiConfig::new(0, 1, 8, None, link()).with_formula(EpsilonFormula::Literal);
        let far = CsiConfig::new(8, 1, 8, None, link()).with_formula(EpsilonFormula::Literal);
        let (e_near, e_far) = (error_variance(&near), error_variance(&far));
        assert!(e_near >= 0.0 && e_far >= 0.0);
        assert!(
            e_far < e_near,
            "literal form shrinks as the correlation dies"
        );
    }

    #[test]
    fn view_edge_cases_are_exact() {
        let params = link();
        let h = Complex::new(0.6, -0.8);
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let v = view_from_channel(h, &params, 0.0, 3, &mut rng);
        assert_eq!(v.estimate, h);
        assert_eq!(v.slot, 3);
        let v = view_from_channel(h, &params, 1.0, 4, &mut rng);
        assert_eq!(v.estimate, Complex::new(0.0, 0.0));
        assert_eq!(v.amplitude(), 0.0);
    }

    #[test]
    fn view_moments_match_the_model() {
        let params = link();
        let eps = 0.3;
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let draws = 100_000;
        let (mut est_pow, mut err_pow, mut cross) = (0.0, 0.0, Complex::new(0.0, 0.0));
        for _ in 0..draws {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let h = Complex::new(re * 0.5f64.sqrt(), im * 0.5f64.sqrt());
            let v = view_from_channel(h, &params, eps, 0, &mut rng);
            est_pow += v.estimate.norm_sqr();
            err_pow += (h - v.estimate).norm_sqr();
            cross += (h - v.estimate) * v.estimate.conj();
        }
        let n = draws as f64;
        assert!(
            (est_pow / n - 0.7).abs() < 0.01,
            "estimate power {}",
            est_pow / n
        );
        assert!(
            (err_pow / n - 0.3).abs() < 0.01,
            "error power {}",
            err_pow / n
        );
        assert!(
            (cross / n).norm() < 0.01,
            "orthogonality {}",
            (cross / n).norm()
        );
    }
}
