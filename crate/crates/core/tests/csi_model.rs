//! Statistical checks on the estimation-error model: closed-form agreement
//! for the single-tap predictor, shape of the error curve, and a two-sample
//! KS test that synthesized views reproduce the conditional channel law.

mod common;

use fairlink_core::channel::{correlation, LinkParams};
use fairlink_core::csi::{cov_vector, error_variance, view_from_channel, CsiConfig};
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

fn link(snr_db: f64) -> LinkParams<f64> {
    // Unit mean gain: the transmit power carries the whole SNR.
    LinkParams::new(1.0, 10.0, 10.0f64.powf(snr_db / 10.0))
}

// ---- error-variance formula ----

#[test]
fn single_tap_error_variance_matches_the_closed_form() {
    // With one observation the MMSE solve collapses to a scalar:
    // ε = λ·(1 − q·c²/(1 + 1/(γ·N_P))).
    for &delay in &[0u32, 3, 10] {
        for &bits in &[None, Some(4u32)] {
            let cfg = CsiConfig::new(delay, 1, 8, bits, link(10.0));
            let lambda = cfg.link.mean_gain;
            let gamma = cfg.link.mean_snr();
            let c = correlation(delay as f64, cfg.link.coherence_slots);
            let q = match bits {
                None => 1.0,
                Some(b) => 1.0 - 2.0f64.powi(-(b as i32)),
            };
            let manual = lambda * (1.0 - q * c * c / (1.0 + 1.0 / (gamma * 8.0)));
            let eps = error_variance(&cfg);
            assert!(
                (eps - manual).abs() < 1e-12,
                "delay {delay}, bits {bits:?}: {eps} vs {manual}"
            );
        }
    }
}

#[test]
fn error_curve_grows_with_delay_and_shrinks_with_snr() {
    let eps_at =
        |snr_db: f64, delay: u32| error_variance(&CsiConfig::new(delay, 1, 8, None, link(snr_db)));
    // Nondecreasing in delay while the correlation is still decaying
    // (out to one coherence time), at both operating SNRs.
    for &snr in &[5.0f64, 10.0] {
        let mut prev = eps_at(snr, 0);
        for delay in 1..=10u32 {
            let eps = eps_at(snr, delay);
            assert!(eps >= prev - 1e-12, "ε dipped at Δ={delay}, {snr} dB");
            prev = eps;
        }
    }
    // More SNR cannot hurt, and the ratio to the mean gain stays in [0, 1].
    for delay in 0..=20u32 {
        let lo = eps_at(5.0, delay);
        let hi = eps_at(10.0, delay);
        assert!(
            hi <= lo + 1e-12,
            "Δ={delay}: 10 dB ε {hi} above 5 dB ε {lo}"
        );
        assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
    }
}

#[test]
fn wider_observation_windows_only_help() {
    for delay in 0..=10u32 {
        let w1 = error_variance(&CsiConfig::new(delay, 1, 8, None, link(10.0)));
        let w2 = error_variance(&CsiConfig::new(delay, 2, 8, None, link(10.0)));
        let w4 = error_variance(&CsiConfig::new(delay, 4, 8, None, link(10.0)));
        assert!(w2 <= w1 + 1e-12, "Δ={delay}: W=2 worse than W=1");
        assert!(w4 <= w2 + 1e-12, "Δ={delay}: W=4 worse than W=2");
    }
}

#[test]
fn covariance_vector_reflects_the_fading_correlation() {
    let cfg = CsiConfig::new(3, 4, 8, None, link(10.0));
    let v = cov_vector(&cfg);
    assert_eq!(v.len(), 4);
    for (k, &c) in v.iter().enumerate() {
        let expect = correlation(3.0 + k as f64, cfg.link.coherence_slots);
        assert!((c - expect).abs() < 1e-15);
    }
}

// ---- conditional law of synthesized views ----

/// Two-sample Kolmogorov–Smirnov statistic (consumes and sorts both samples).
fn ks_statistic(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        let fa = i as f64 / a.len() as f64;
        let fb = j as f64 / b.len() as f64;
        d = d.max((fa - fb).abs());
    }
    d
}

#[test]
fn synthesized_views_match_the_conditional_channel_law() {
    // Joint draws (h, ĥ) stratified by estimate amplitude: within each
    // stratum the true amplitudes must be indistinguishable from fresh
    // draws of |ĥ + CN(0, ε)| — the law the rate adapter assumes.
    let lambda = 1.0f64;
    let eps = 0.3f64;
    let params = LinkParams::new(lambda, 10.0, 1.0);
    let mut rng = ChaCha12Rng::seed_from_u64(0x5eed_0010);
    let n = 40_000usize;

    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n); // (ĝ, g)
    let mut synth = ChaCha12Rng::seed_from_u64(0x5eed_0011);
    let mut resampled: Vec<(f64, f64)> = Vec::with_capacity(n); // (ĝ, g′)
    for slot in 0..n {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        let h = Complex::new(re * (lambda / 2.0).sqrt(), im * (lambda / 2.0).sqrt());
        let view = view_from_channel(h, &params, eps, slot, &mut rng);
        pairs.push((view.amplitude(), h.norm()));

        let vre: f64 = StandardNormal.sample(&mut synth);
        let vim: f64 = StandardNormal.sample(&mut synth);
        let g_prime = (view.estimate
            + Complex::new(vre * (eps / 2.0).sqrt(), vim * (eps / 2.0).sqrt()))
        .norm();
        resampled.push((view.amplitude(), g_prime));
    }

    // Quartile strata on ĝ keep the mixtures identical on both sides.
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    resampled.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let quarter = n / 4;
    for s in 0..4 {
        let lo = s * quarter;
        let hi = lo + quarter;
        let mut a: Vec<f64> = pairs[lo..hi].iter().map(|p| p.1).collect();
        let mut b: Vec<f64> = resampled[lo..hi].iter().map(|p| p.1).collect();
        let d = ks_statistic(&mut a, &mut b);
        // Two-sample threshold at significance 1e-3.
        let bound = 1.9495 * ((2.0 * quarter as f64) / (quarter as f64 * quarter as f64)).sqrt();
        assert!(
            d <= bound,
            "stratum {s}: KS statistic {d:.5} over bound {bound:.5}"
        );
    }
}
