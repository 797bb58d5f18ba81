//! The drop loop and its aggregation into per-(scheme, delay, SNR) metrics.
//!
//! One **drop** places `K` users uniformly on the cell disk, draws each a
//! correlated fading trace, and then runs the slot loop: every slot each
//! user's transmitter-side channel view is synthesized from the true
//! channel and the delay-dependent error variance, a rate rule turns the
//! view into a rate decision, a selection metric ranks the users, the
//! winner transmits against its true capacity, and acknowledgements settle
//! once they are older than the delay. Throughput, outage tallies, and the
//! proportional-fair utility fall out at the end.
//!
//! Scheme comparisons are paired: placement, fading, and estimation-noise
//! substreams are keyed by `(master seed, drop, user)` only (see
//! [`crate::seeding`]), so two schemes — or two delays, or two SNRs — see
//! exactly the same channels and differ only in their decisions.
//!
//! Drops run in parallel under a fixed-size rayon pool; results are
//! collected in drop order and reduced sequentially, so the emitted CSV is
//! byte-identical for any worker count.

use std::io::{self, Write};

use fairlink_core::channel::pathloss;
use fairlink_core::csi::{error_variance, view_from_channel};
use fairlink_core::rate_adapt::{nonrobust_rate, robust_rate};
use fairlink_core::scheduler::{
    metric_delayed, metric_immediate, resolve_and_advance, select_user, utility,
};
use fairlink_core::{CsiConfig64, LinkParams64, RateDecision64, TraceSampler64, UserLedger64};
use rand::Rng;
use rayon::prelude::*;

use crate::config::{Scheme, SimConfig};
use crate::seeding::{substream, PURPOSE_CSI, PURPOSE_PLACEMENT, PURPOSE_TRACE};

// ---- outage-fulfilment bookkeeping ----

/// Minimum transmissions before a user's empirical outage rate is assessed
/// against the target; below this the estimate is meaningless.
pub const MIN_TX_FOR_OUTAGE: u32 = 20;

/// Relative half-width of the fulfilment band around the target.
pub const OUTAGE_BAND_RELATIVE: f64 = 0.1;

/// Two-sided 99% normal quantile: the fulfilment band is widened by the
/// sampling noise of the empirical rate at this confidence, so a scheme
/// whose true per-transmission outage sits exactly on the target is
/// counted as fulfilled ~99% of the time at any transmission count.
pub const OUTAGE_BAND_CONFIDENCE_Z: f64 = 2.5758293035489004;

/// Standard-error inflation of a per-user outage estimate over the i.i.d.
/// binomial value. One user's outage outcomes within a drop are positively
/// correlated — successive transmissions ride the same slowly fading
/// channel — so the variance of the per-drop rate exceeds `p(1−p)/n`.
/// Measured across the delay sweep at `T_c = 10` the standard-deviation
/// ratio peaks near 2.0; the constant covers that worst case.
pub const OUTAGE_BAND_CORRELATION_INFLATION: f64 = 2.0;

/// Whether one user's empirical outage rate fulfils the target, or `None`
/// below the transmission threshold.
///
/// The band is `|p̂ − p̄| ≤ 0.1·p̄ + z·κ·√(p̄(1−p̄)/n)`: a 10% engineering
/// margin on the target plus the 99% sampling noise of an `n`-transmission
/// estimate, inflated by `κ` for the within-drop correlation of outcomes.
/// Without the noise term a user at the target with `n = 50` would need
/// exactly 5 failures to qualify — the band would measure luck, not the
/// rate rule. The noise term shrinks as `1/√n`, so at large sample sizes
/// the ±10% engineering margin is what remains.
pub fn fulfilled(failures: u32, transmissions: u32, p_target: f64) -> Option<bool> {
    if transmissions < MIN_TX_FOR_OUTAGE {
        return None;
    }
    let n = transmissions as f64;
    let p_emp = failures as f64 / n;
    let band = OUTAGE_BAND_RELATIVE * p_target
        + OUTAGE_BAND_CONFIDENCE_Z
            * OUTAGE_BAND_CORRELATION_INFLATION
            * (p_target * (1.0 - p_target) / n).sqrt();
    Some((p_emp - p_target).abs() <= band)
}

// ---- single-drop simulation ----

/// Everything one drop produces.
#[derive(Clone, Debug)]
pub struct DropResult {
    /// Per-user mean throughput over the block (floored, so positive).
    pub throughputs: Vec<f64>,
    /// Proportional-fair utility `Σ_k ln T_k` of this drop.
    pub utility: f64,
    /// Per-user scheduled-transmission counts.
    pub transmissions: Vec<u32>,
    /// Per-user failed-transmission counts.
    pub failures: Vec<u32>,
    /// Scheduled user per slot.
    pub selections: Vec<u16>,
}

/// Transmit power `ρ` such that a user at the cell edge sees the given
/// mean SNR: `ρ·λ(radius) = 10^{SNR/10}`.
pub fn calibrate_power(cfg: &SimConfig, snr_db: f64) -> f64 {
    let edge_gain = pathloss(cfg.radius_m, cfg.pathloss_exponent, cfg.pathloss_intercept);
    10f64.powf(snr_db / 10.0) / edge_gain
}

/// Mean channel gains of one drop's users: distances are drawn uniformly
/// on the disk (`r = radius·√u`, floored at the minimum distance) and
/// mapped through the pathloss law. Angles carry no information here, so
/// only radii are drawn.
pub fn place_users(cfg: &SimConfig, drop: u64) -> Vec<f64> {
    let mut rng = substream(cfg.seed, drop, PURPOSE_PLACEMENT, 0);
    (0..cfg.users)
        .map(|_| {
            let u: f64 = rng.gen();
            let r = (cfg.radius_m * u.sqrt()).max(cfg.min_distance_m);
            pathloss(r, cfg.pathloss_exponent, cfg.pathloss_intercept)
        })
        .collect()
}

/// Runs one drop of one (scheme, delay, SNR) cell.
///
/// The sampler must have been built for `cfg.slots` slots and
/// `cfg.coherence_slots`; it is passed in because its factorization is
/// identical across all drops and worth computing once.
pub fn run_drop(
    cfg: &SimConfig,
    sampler: &TraceSampler64,
    scheme: Scheme,
    delay: u32,
    snr_db: f64,
    drop: u64,
) -> DropResult {
    assert_eq!(
        sampler.n_slots(),
        cfg.slots,
        "sampler built for a different block length"
    );
    let rho = calibrate_power(cfg, snr_db);
    let gains = place_users(cfg, drop);
    let k_users = cfg.users;

    let mut traces = Vec::with_capacity(k_users);
    let mut epsilons = Vec::with_capacity(k_users);
    let mut csi_rngs = Vec::with_capacity(k_users);
    let mut ledgers = Vec::with_capacity(k_users);
    for (k, &gain) in gains.iter().enumerate() {
        let params = LinkParams64::new(gain, cfg.coherence_slots, rho);
        let mut trace_rng = substream(cfg.seed, drop, PURPOSE_TRACE, k as u64);
        traces.push(sampler.sample(&params, &mut trace_rng));
        let eps = if scheme.imperfect_csi() {
            let csi = CsiConfig64::new(delay, cfg.window, cfg.pilots, cfg.feedback_bits, params);
            error_variance(&csi)
        } else {
            0.0
        };
        epsilons.push(eps);
        csi_rngs.push(substream(cfg.seed, drop, PURPOSE_CSI, k as u64));
        ledgers.push(UserLedger64::new(delay as usize));
    }

    let mut transmissions = vec![0u32; k_users];
    let mut failures = vec![0u32; k_users];
    let mut selections = Vec::with_capacity(cfg.slots);
    let mut decisions: Vec<RateDecision64> = Vec::with_capacity(k_users);
    let mut metrics: Vec<f64> = Vec::with_capacity(k_users);

    for slot in 0..cfg.slots {
        decisions.clear();
        metrics.clear();
        for k in 0..k_users {
            ledgers[k].advance_to(slot);
            let view = view_from_channel(
                traces[k].samples()[slot],
                traces[k].params(),
                epsilons[k],
                slot,
                &mut csi_rngs[k],
            );
            let g_hat = view.amplitude();
            let decision = match scheme {
                // Perfect knowledge: transmit at capacity, never in outage.
                Scheme::PerfectCsi => RateDecision64 {
                    rate: traces[k].capacity(slot),
                    outage_prob: 0.0,
                },
                Scheme::Nonrobust(a) => nonrobust_rate(g_hat, epsilons[k], rho, a),
                Scheme::RobustImmediate | Scheme::RobustDelayed => {
                    robust_rate(g_hat, epsilons[k], rho, cfg.p_target, cfg.rate_tol)
                        .expect("calibrated links keep the robust rate inside its bracket")
                }
            };
            // The non-robust baseline ranks by its assigned rate (classic
            // rate-over-throughput selection); the robust schemes rank by
            // the expected rate, which is what they can actually deliver.
            let metric = match scheme {
                Scheme::Nonrobust(_) => {
                    metric_immediate(decision.rate, ledgers[k].known_throughput())
                }
                Scheme::RobustImmediate => {
                    metric_immediate(decision.expected_rate(), ledgers[k].known_throughput())
                }
                Scheme::PerfectCsi | Scheme::RobustDelayed => {
                    metric_delayed(decision.expected_rate(), &ledgers[k], slot)
                        .expect("pending count is bounded by the validated delay")
                }
            };
            decisions.push(decision);
            metrics.push(metric);
        }
        let winner = select_user(&metrics);
        selections.push(winner as u16);
        for k in 0..k_users {
            let chosen = (k == winner).then_some(&decisions[k]);
            if let Some(success) =
                resolve_and_advance(&mut ledgers[k], slot, traces[k].capacity(slot), chosen)
            {
                transmissions[k] += 1;
                if !success {
                    failures[k] += 1;
                }
            }
        }
    }

    let throughputs: Vec<f64> = ledgers.iter_mut().map(|l| l.finalize(cfg.slots)).collect();
    let u = utility(&throughputs).expect("the throughput floor keeps every log finite");
    DropResult {
        throughputs,
        utility: u,
        transmissions,
        failures,
        selections,
    }
}

// ---- sweep and aggregation ----

/// All drops of one (scheme, delay, SNR) cell.
#[derive(Clone, Debug)]
pub struct ComboResult {
    /// Scheme of this cell.
    pub scheme: Scheme,
    /// Acknowledgement/CSI delay in slots.
    pub delay: u32,
    /// Cell-edge SNR in dB.
    pub snr_db: f64,
    /// One entry per drop, in drop order.
    pub drops: Vec<DropResult>,
}

/// One CSV row: a (scheme, delay, SNR) cell reduced over its drops.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    /// Scheme token.
    pub scheme: Scheme,
    /// Acknowledgement/CSI delay in slots.
    pub delay: u32,
    /// Cell-edge SNR in dB.
    pub snr_db: f64,
    /// Proportional-fair utility `Σ_k ln T_k`, averaged over drops.
    pub pf_utility: f64,
    /// Mean per-user throughput over drops and users.
    pub mean_throughput: f64,
    /// Pooled empirical outage rate: total failures over total transmissions.
    pub outage_rate: f64,
    /// Fraction of assessable (drop, user) pairs inside the fulfilment band.
    pub fulfilled_fraction: f64,
    /// Drops behind the row.
    pub drops: usize,
    /// Master seed behind the row.
    pub seed: u64,
}

/// Runs the full sweep, returning every cell with its per-drop detail.
///
/// Cells are ordered scheme-major, then delay, then SNR — the CSV row
/// order. All (cell, drop) jobs run under one fixed-size rayon pool and
/// are collected in job order, making the result independent of scheduling.
pub fn run_combos(cfg: &SimConfig) -> Result<Vec<ComboResult>, crate::config::ConfigError> {
    cfg.validate()?;
    let sampler = TraceSampler64::new(cfg.coherence_slots, cfg.slots);
    let mut combos = Vec::new();
    for &scheme in &cfg.schemes {
        for &delay in &cfg.delays {
            for &snr_db in &cfg.snr_db {
                combos.push((scheme, delay, snr_db));
            }
        }
    }
    let jobs: Vec<(usize, u64)> = (0..combos.len())
        .flat_map(|ci| (0..cfg.drops as u64).map(move |d| (ci, d)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .expect("worker pool construction cannot fail for a positive thread count");
    let results: Vec<DropResult> = pool.install(|| {
        jobs.par_iter()
            .map(|&(ci, drop)| {
                let (scheme, delay, snr_db) = combos[ci];
                run_drop(cfg, &sampler, scheme, delay, snr_db, drop)
            })
            .collect()
    });
    let mut out = Vec::with_capacity(combos.len());
    let mut results = results.into_iter();
    for (scheme, delay, snr_db) in combos {
        let drops: Vec<DropResult> = results.by_ref().take(cfg.drops).collect();
        out.push(ComboResult {
            scheme,
            delay,
            snr_db,
            drops,
        });
    }
    Ok(out)
}

/// Reduces one cell to its CSV row.
pub fn summarize(combo: &ComboResult, seed: u64, p_target: f64) -> MetricsRow {
    let n_drops = combo.drops.len();
    let mut utility_sum = 0.0;
    let mut throughput_sum = 0.0;
    let mut throughput_count = 0usize;
    let mut tx_total = 0u64;
    let mut fail_total = 0u64;
    let mut assessed = 0usize;
    let mut inside = 0usize;
    for d in &combo.drops {
        utility_sum += d.utility;
        for &t in &d.throughputs {
            throughput_sum += t;
            throughput_count += 1;
        }
        for (&f, &n) in d.failures.iter().zip(&d.transmissions) {
            tx_total += u64::from(n);
            fail_total += u64::from(f);
            if let Some(ok) = fulfilled(f, n, p_target) {
                assessed += 1;
                if ok {
                    inside += 1;
                }
            }
        }
    }
    MetricsRow {
        scheme: combo.scheme,
        delay: combo.delay,
        snr_db: combo.snr_db,
        pf_utility: utility_sum / n_drops as f64,
        mean_throughput: throughput_sum / throughput_count as f64,
        outage_rate: if tx_total == 0 {
            0.0
        } else {
            fail_total as f64 / tx_total as f64
        },
        fulfilled_fraction: if assessed == 0 {
            0.0
        } else {
            inside as f64 / assessed as f64
        },
        drops: n_drops,
        seed,
    }
}

/// Runs the sweep and reduces every cell to its row.
pub fn run_experiment(cfg: &SimConfig) -> Result<Vec<MetricsRow>, crate::config::ConfigError> {
    let combos = run_combos(cfg)?;
    Ok(combos
        .iter()
        .map(|c| summarize(c, cfg.seed, cfg.p_target))
        .collect())
}

/// Column header of the sweep CSV.
pub const METRICS_HEADER: &str =
    "scheme,delay,snr_db,pf_utility,mean_throughput,outage_rate,fulfilled_fraction,drops,seed";

/// Writes the sweep CSV: the fixed header, then one row per cell in sweep
/// order. Floats use the shortest round-trip form, so files are
/// byte-stable across runs.
pub fn write_metrics_csv(rows: &[MetricsRow], mut out: impl Write) -> io::Result<()> {
    writeln!(out, "{METRICS_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.scheme,
            r.delay,
            r.snr_db,
            r.pf_utility,
            r.mean_throughput,
            r.outage_rate,
            r.fulfilled_fraction,
            r.drops,
            r.seed
        )?;
    }
    Ok(())
}

// ---- tests ----
