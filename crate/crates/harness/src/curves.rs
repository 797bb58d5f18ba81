//! Single-link sweeps behind the plotting-oriented CLI subcommands.
//!
//! All four curves describe a cell-edge link (mean gain `λ` at the cell
//! radius, transmit power calibrated to the requested edge SNR):
//!
//! - [`rate_curve`]: assigned rate versus estimated amplitude for each
//!   configured rate rule,
//! - [`outage_curve`]: the same grid with the empirical outage of each
//!   assignment, measured by conditional Monte-Carlo draws — the robust
//!   rule shows a flat line at the target, the baselines do not,
//! - [`throughput_vs_target`]: expected decoded throughput of the robust
//!   rule as the outage target sweeps, averaged over the estimate
//!   distribution — low targets waste rate on caution, high targets waste
//!   transmissions on failures,
//! - [`uncertainty_curve`]: estimation-error variance versus delay for
//!   each configured SNR.
//!
//! Each sweep has a `write_*_csv` companion emitting a fixed header and
//! one row per grid point.

use std::io::{self, Write};

use fairlink_core::channel::pathloss;
use fairlink_core::csi::error_variance;
use fairlink_core::rate_adapt::{log_grid, nonrobust_rate, robust_rate};
use fairlink_core::{CsiConfig64, LinkParams64, RateDecision64};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::{Scheme, SimConfig};
use crate::seeding::{substream, PURPOSE_AUX};

// ---- shared link setup ----

/// The cell-edge link implied by a configuration and an SNR point.
struct EdgeLink {
    lambda: f64,
    rho: f64,
    eps: f64,
}

fn edge_link(cfg: &SimConfig, snr_db: f64, delay: u32) -> EdgeLink {
    let lambda = pathloss(cfg.radius_m, cfg.pathloss_exponent, cfg.pathloss_intercept);
    let rho = crate::experiment::calibrate_power(cfg, snr_db);
    let params = LinkParams64::new(lambda, cfg.coherence_slots, rho);
    let csi = CsiConfig64::new(delay, cfg.window, cfg.pilots, cfg.feedback_bits, params);
    EdgeLink {
        lambda,
        rho,
        eps: error_variance(&csi),
    }
}

/// Rate rules to sweep: the scheduling side of a scheme is irrelevant
/// here, so the two robust variants collapse into one `robust` rule.
fn rate_rules(schemes: &[Scheme]) -> Vec<(String, Scheme)> {
    let mut rules: Vec<(String, Scheme)> = Vec::new();
    for &s in schemes {
        let (label, canonical) = match s {
            Scheme::PerfectCsi => ("perfect-csi".to_string(), s),
            Scheme::Nonrobust(_) => (s.to_string(), s),
            Scheme::RobustImmediate | Scheme::RobustDelayed => {
                ("robust".to_string(), Scheme::RobustImmediate)
            }
        };
        if !rules.iter().any(|(l, _)| *l == label) {
            rules.push((label, canonical));
        }
    }
    rules
}

/// One decision of a rate rule at a given estimated amplitude.
fn decide(rule: Scheme, g_hat: f64, link: &EdgeLink, cfg: &SimConfig) -> RateDecision64 {
    match rule {
        // On this curve the abscissa is the true amplitude when CSI is
        // perfect: the assignment is capacity and never fails.
        Scheme::PerfectCsi => RateDecision64 {
            rate: (1.0 + link.rho * g_hat * g_hat).log2(),
            outage_prob: 0.0,
        },
        Scheme::Nonrobust(a) => nonrobust_rate(g_hat, link.eps, link.rho, a),
        Scheme::RobustImmediate | Scheme::RobustDelayed => {
            robust_rate(g_hat, link.eps, link.rho, cfg.p_target, cfg.rate_tol)
                .expect("edge-link amplitudes keep the robust rate inside its bracket")
        }
    }
}

// ---- rate and outage versus amplitude ----

/// One point of the rate-versus-amplitude sweep.
#[derive(Clone, Debug)]
pub struct RatePoint {
    /// Rate-rule label.
    pub rule: String,
    /// Estimated amplitude `ĝ`.
    pub g_hat: f64,
    /// Assigned rate in bits/s/Hz.
    pub rate: f64,
    /// Outage probability the model predicts for the assignment.
    pub outage_model: f64,
}

/// Amplitude grid shared by [`rate_curve`] and [`outage_curve`]: linear
/// from zero to three standard amplitudes `√λ`.
fn amplitude_grid(lambda: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2, "amplitude grid needs at least two points");
    let hi = 3.0 * lambda.sqrt();
    (0..points)
        .map(|i| hi * i as f64 / (points - 1) as f64)
        .collect()
}

/// Assigned rate versus estimated amplitude for every configured rule.
pub fn rate_curve(cfg: &SimConfig, snr_db: f64, delay: u32, points: usize) -> Vec<RatePoint> {
    let link = edge_link(cfg, snr_db, delay);
    let mut out = Vec::new();
    for (label, rule) in rate_rules(&cfg.schemes) {
        for &g_hat in &amplitude_grid(link.lambda, points) {
            let d = decide(rule, g_hat, &link, cfg);
            out.push(RatePoint {
                rule: label.clone(),
                g_hat,
                rate: d.rate,
                outage_model: d.outage_prob,
            });
        }
    }
    out
}

/// Column header of the rate-curve CSV.
pub const RATE_HEADER: &str = "rule,g_hat,rate,outage_model";

/// Writes the rate-curve CSV.
pub fn write_rate_csv(points: &[RatePoint], mut out: impl Write) -> io::Result<()> {
    writeln!(out, "{RATE_HEADER}")?;
    for p in points {
        writeln!(out, "{},{},{},{}", p.rule, p.g_hat, p.rate, p.outage_model)?;
    }
    Ok(())
}

/// One point of the outage-versus-amplitude sweep.
#[derive(Clone, Debug)]
pub struct OutagePoint {
    /// Rate-rule label.
    pub rule: String,
    /// Estimated amplitude `ĝ`.
    pub g_hat: f64,
    /// Assigned rate in bits/s/Hz.
    pub rate: f64,
    /// Outage probability the model predicts.
    pub outage_model: f64,
    /// Empirical outage over the conditional draws.
    pub outage_emp: f64,
    /// Conditional draws behind the empirical rate.
    pub draws: u64,
}

/// Empirical outage of each rule's assignments along the amplitude grid.
///
/// For every grid point the true channel is drawn from its conditional law
/// `h | ĥ ∼ CN(ĝ, ε)` and the assignment is checked against the realized
/// capacity. Perfect CSI conditions on the true amplitude instead, so its
/// draws are degenerate and its empirical outage is exactly zero.
pub fn outage_curve(
    cfg: &SimConfig,
    snr_db: f64,
    delay: u32,
    points: usize,
    draws: u64,
) -> Vec<OutagePoint> {
    let link = edge_link(cfg, snr_db, delay);
    let sd = (link.eps / 2.0).sqrt();
    let mut out = Vec::new();
    for (rule_idx, (label, rule)) in rate_rules(&cfg.schemes).into_iter().enumerate() {
        for (i, &g_hat) in amplitude_grid(link.lambda, points).iter().enumerate() {
            let d = decide(rule, g_hat, &link, cfg);
            let mut rng = substream(cfg.seed, i as u64, PURPOSE_AUX, rule_idx as u64);
            let mut outages = 0u64;
            for _ in 0..draws {
                let g_sq = if rule == Scheme::PerfectCsi {
                    g_hat * g_hat
                } else {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    let x = g_hat + sd * re;
                    let y = sd * im;
                    x * x + y * y
                };
                // Success iff R̄ ≤ log₂(1 + ρg²), non-strict — the same
                // convention the scheduling ledger applies, so a capacity
                // assignment under perfect CSI never counts as failed.
                if d.rate > (1.0 + link.rho * g_sq).log2() {
                    outages += 1;
                }
            }
            out.push(OutagePoint {
                rule: label.clone(),
                g_hat,
                rate: d.rate,
                outage_model: d.outage_prob,
                outage_emp: outages as f64 / draws as f64,
                draws,
            });
        }
    }
    out
}

/// Column header of the outage-curve CSV.
pub const OUTAGE_HEADER: &str = "rule,g_hat,rate,outage_model,outage_emp,draws";

/// Writes the outage-curve CSV.
pub fn write_outage_csv(points: &[OutagePoint], mut out: impl Write) -> io::Result<()> {
    writeln!(out, "{OUTAGE_HEADER}")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            p.rule, p.g_hat, p.rate, p.outage_model, p.outage_emp, p.draws
        )?;
    }
    Ok(())
}

// ---- throughput versus outage target ----

/// One point of the throughput-versus-target sweep.
#[derive(Clone, Debug)]
pub struct TargetPoint {
    /// Outage target `p̄` of this point.
    pub p_target: f64,
    /// Mean assigned rate over the estimate distribution.
    pub mean_rate: f64,
    /// Mean expected decoded throughput `(1 − p̄)·R̄`.
    pub expected_throughput: f64,
}

/// Expected decoded throughput of the robust rule as the target sweeps.
///
/// Estimates are drawn from their marginal law `ĥ ∼ CN(0, λ − ε)`; each
/// draw's robust rate is weighted by its success probability. One estimate
/// sample is shared across all targets, pairing the curve's points.
pub fn throughput_vs_target(
    cfg: &SimConfig,
    snr_db: f64,
    delay: u32,
    points: usize,
    draws: u64,
) -> Vec<TargetPoint> {
    assert!(points >= 2, "target grid needs at least two points");
    let link = edge_link(cfg, snr_db, delay);
    let sd = ((link.lambda - link.eps) / 2.0).sqrt();
    let mut rng = substream(cfg.seed, 0, PURPOSE_AUX, u64::MAX);
    let g_hats: Vec<f64> = (0..draws)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            (sd * sd * (re * re + im * im)).sqrt()
        })
        .collect();
    log_grid(1e-4, 0.9, points)
        .into_iter()
        .map(|p_target| {
            let mut rate_sum = 0.0;
            let mut decoded_sum = 0.0;
            for &g_hat in &g_hats {
                let d = robust_rate(g_hat, link.eps, link.rho, p_target, cfg.rate_tol)
                    .expect("edge-link amplitudes keep the robust rate inside its bracket");
                rate_sum += d.rate;
                decoded_sum += d.expected_rate();
            }
            TargetPoint {
                p_target,
                mean_rate: rate_sum / draws as f64,
                expected_throughput: decoded_sum / draws as f64,
            }
        })
        .collect()
}

/// Column header of the throughput-versus-target CSV.
pub const TARGET_HEADER: &str = "p_target,mean_rate,expected_throughput";

/// Writes the throughput-versus-target CSV.
pub fn write_target_csv(points: &[TargetPoint], mut out: impl Write) -> io::Result<()> {
    writeln!(out, "{TARGET_HEADER}")?;
    for p in points {
        writeln!(
            out,
            "{},{},{}",
            p.p_target, p.mean_rate, p.expected_throughput
        )?;
    }
    Ok(())
}

// ---- error variance versus delay ----

/// One point of the uncertainty sweep.
#[derive(Clone, Debug)]
pub struct UncertaintyPoint {
    /// Cell-edge SNR in dB.
    pub snr_db: f64,
    /// CSI delay in slots.
    pub delay: u32,
    /// Estimation-error variance `ε`.
    pub eps: f64,
    /// Normalized variance `ε/λ` (1 means the estimate carries nothing).
    pub eps_over_lambda: f64,
}

/// Estimation-error variance versus delay for every configured SNR.
pub fn uncertainty_curve(cfg: &SimConfig, max_delay: u32) -> Vec<UncertaintyPoint> {
    let mut out = Vec::new();
    for &snr_db in &cfg.snr_db {
        for delay in 0..=max_delay {
            let link = edge_link(cfg, snr_db, delay);
            out.push(UncertaintyPoint {
                snr_db,
                delay,
                eps: link.eps,
                eps_over_lambda: link.eps / link.lambda,
            });
        }
    }
    out
}

/// Column header of the uncertainty CSV.
pub const UNCERTAINTY_HEADER: &str = "snr_db,delay,eps,eps_over_lambda";

/// Writes the uncertainty CSV.
pub fn write_uncertainty_csv(points: &[UncertaintyPoint], mut out: impl Write) -> io::Result<()> {
    writeln!(out, "{UNCERTAINTY_HEADER}")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{}",
            p.snr_db, p.delay, p.eps, p.eps_over_lambda
        )?;
    }
    Ok(())
}

// ---- tests ----
