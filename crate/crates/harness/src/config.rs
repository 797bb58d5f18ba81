//! Scenario configuration: a single JSON document plus CLI overrides.
//!
//! [`SimConfig`] captures everything a scheduling experiment needs — cell
//! geometry, pathloss law, pilot and feedback budget, the delay/SNR/scheme
//! sweep, and Monte-Carlo scale. Every field has a default matching the
//! reference scenario (two users on a 250 m disk, coherence time 10 slots,
//! 8 pilots, unquantized feedback, outage target 0.1), so an empty document
//! `{}` is a valid configuration.

use std::fmt;
use std::fs;
use std::io;
use std::path::Path;
use std::str::FromStr;

use fairlink_core::scheduler::MAX_EXACT_PENDING;
use serde::{Deserialize, Serialize};

// ---- schemes ----

/// A rate-adaptation rule paired with the scheduling metric it drives.
///
/// The two robust variants share the same rate rule (invert the conditional
/// outage law at the target) and differ only in how the selection metric
/// treats transmissions whose acknowledgements are still in flight:
/// `RobustImmediate` divides by the throughput known so far, while
/// `RobustDelayed` takes the exact expectation over the pending-outcome
/// lattice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Scheme {
    /// Error-free CSI: transmit at capacity, outage never occurs.
    PerfectCsi,
    /// Scaled capacity `a·log₂(1 + ρĝ²)` with back-off factor `a ∈ (0, 1]`.
    Nonrobust(f64),
    /// Outage-constrained rate, stale-throughput selection metric.
    RobustImmediate,
    /// Outage-constrained rate, delay-aware expectation metric.
    RobustDelayed,
}

impl Scheme {
    /// True for every scheme that sees a noisy channel estimate.
    pub fn imperfect_csi(&self) -> bool {
        !matches!(self, Scheme::PerfectCsi)
    }

    /// True for the outage-constrained rate rules.
    pub fn robust(&self) -> bool {
        matches!(self, Scheme::RobustImmediate | Scheme::RobustDelayed)
    }
}

/// `Display` is the canonical CSV/CLI token; `FromStr` accepts it back
/// (plus `nonrobust:a` as a shell-friendly alternative to parentheses).
impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::PerfectCsi => write!(f, "perfect-csi"),
            Scheme::Nonrobust(a) => write!(f, "nonrobust({a})"),
            Scheme::RobustImmediate => write!(f, "robust-immediate"),
            Scheme::RobustDelayed => write!(f, "robust-delayed"),
        }
    }
}

impl FromStr for Scheme {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let s = s.trim();
        match s {
            "perfect-csi" => return Ok(Scheme::PerfectCsi),
            "robust-immediate" => return Ok(Scheme::RobustImmediate),
            "robust-delayed" => return Ok(Scheme::RobustDelayed),
            _ => {}
        }
        let backoff = s
            .strip_prefix("nonrobust(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| s.strip_prefix("nonrobust:"))
            .ok_or_else(|| ConfigError::BadScheme(s.to_string()))?;
        let a: f64 = backoff
            .trim()
            .parse()
            .map_err(|_| ConfigError::BadScheme(s.to_string()))?;
        if !(a > 0.0 && a <= 1.0) {
            return Err(ConfigError::BadScheme(s.to_string()));
        }
        Ok(Scheme::Nonrobust(a))
    }
}

impl TryFrom<String> for Scheme {
    type Error = ConfigError;

    fn try_from(s: String) -> Result<Self, ConfigError> {
        s.parse()
    }
}

impl From<Scheme> for String {
    fn from(s: Scheme) -> String {
        s.to_string()
    }
}

// ---- configuration ----

/// One experiment scenario; deserializes from JSON with per-field defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Users per drop, `K ≥ 1`.
    pub users: usize,
    /// Cell radius in meters; users land uniformly on the disk.
    pub radius_m: f64,
    /// Users closer than this are pushed out to it, keeping the pathloss
    /// (and with it every rate) finite.
    pub min_distance_m: f64,
    /// Pathloss exponent `α` in `λ = β·d^{−α}`.
    pub pathloss_exponent: f64,
    /// Pathloss intercept `β` at 1 m.
    pub pathloss_intercept: f64,
    /// Cell-edge mean SNR grid in dB; transmit power is calibrated so a
    /// user at the cell radius sees each value.
    pub snr_db: Vec<f64>,
    /// Channel coherence time in slots (autocorrelation 0.5 at this lag).
    pub coherence_slots: f64,
    /// Pilot symbols per estimation block, `N_P ≥ 1`.
    pub pilots: u32,
    /// Past pilot blocks used by the channel predictor, `W ≥ 1`. The
    /// default spans eight blocks — most of a coherence time — which keeps
    /// the error variance growing monotonically with delay; a single-block
    /// predictor would go blind near the first autocorrelation null
    /// (`Δ ≈ 1.58·T_c`) and recover past it, an artifact of the window
    /// rather than of the channel.
    pub window: u32,
    /// Feedback bits per complex coefficient; `None` means unquantized.
    pub feedback_bits: Option<u32>,
    /// Acknowledgement/CSI delay grid in slots.
    pub delays: Vec<u32>,
    /// Target outage probability for the robust rate rules.
    pub p_target: f64,
    /// Bisection tolerance (bits/s/Hz) for the robust rate.
    pub rate_tol: f64,
    /// Independent user placements per (scheme, delay, SNR) cell.
    pub drops: usize,
    /// Scheduled slots per drop.
    pub slots: usize,
    /// Master seed; every random substream derives from it.
    pub seed: u64,
    /// Schemes to sweep.
    pub schemes: Vec<Scheme>,
    /// Rayon worker threads for the drop loop.
    pub workers: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            users: 2,
            radius_m: 250.0,
            min_distance_m: 1.0,
            pathloss_exponent: 3.5,
            pathloss_intercept: 10f64.powf(-14.45),
            snr_db: vec![5.0, 10.0],
            coherence_slots: 10.0,
            pilots: 8,
            window: 8,
            feedback_bits: None,
            delays: (0..=20).step_by(2).collect(),
            p_target: 0.1,
            rate_tol: 1e-6,
            drops: 500,
            slots: 100,
            seed: 1,
            schemes: vec![
                Scheme::PerfectCsi,
                Scheme::Nonrobust(1.0),
                Scheme::Nonrobust(0.95),
                Scheme::RobustImmediate,
                Scheme::RobustDelayed,
            ],
            workers: 1,
        }
    }
}

impl SimConfig {
    /// Reads a JSON configuration file; missing fields take defaults.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)?;
        let cfg: SimConfig = serde_json::from_str(&text)?;
        Ok(cfg)
    }

    /// Checks the cross-field invariants the experiment loop relies on.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |what: &str| Err(ConfigError::Invalid(what.to_string()));
        if self.users == 0 {
            return bad("users must be at least 1");
        }
        if !(self.radius_m > 0.0) {
            return bad("radius_m must be positive");
        }
        if !(self.min_distance_m > 0.0 && self.min_distance_m <= self.radius_m) {
            return bad("min_distance_m must lie in (0, radius_m]");
        }
        if !(self.pathloss_exponent > 0.0) {
            return bad("pathloss_exponent must be positive");
        }
        if !(self.pathloss_intercept > 0.0) {
            return bad("pathloss_intercept must be positive");
        }
        if self.snr_db.is_empty() {
            return bad("snr_db must list at least one value");
        }
        if !(self.coherence_slots > 0.0) {
            return bad("coherence_slots must be positive");
        }
        if self.pilots == 0 {
            return bad("pilots must be at least 1");
        }
        if self.window == 0 {
            return bad("window must be at least 1");
        }
        if self.delays.is_empty() {
            return bad("delays must list at least one value");
        }
        // The delay-aware metric enumerates the 2^ν pending outcomes
        // exactly; ν is bounded by the delay, so the delay is bounded by
        // the enumeration cap.
        if let Some(d) = self
            .delays
            .iter()
            .find(|d| **d as usize > MAX_EXACT_PENDING)
        {
            return Err(ConfigError::Invalid(format!(
                "delay {d} exceeds the exact pending-outcome cap ({MAX_EXACT_PENDING})"
            )));
        }
        if !(self.p_target > 0.0 && self.p_target < 1.0) {
            return bad("p_target must lie strictly inside (0, 1)");
        }
        if !(self.rate_tol > 0.0) {
            return bad("rate_tol must be positive");
        }
        if self.drops == 0 {
            return bad("drops must be at least 1");
        }
        if self.slots == 0 {
            return bad("slots must be at least 1");
        }
        if self.schemes.is_empty() {
            return bad("schemes must list at least one entry");
        }
        if self.workers == 0 {
            return bad("workers must be at least 1");
        }
        Ok(())
    }
}

// ---- errors ----

/// Configuration failures: unreadable file, malformed JSON, bad values.
#[derive(Debug)]
pub enum ConfigError {
    /// The file could not be read.
    Io(io::Error),
    /// The document is not valid JSON for [`SimConfig`].
    Parse(serde_json::Error),
    /// A scheme token was not recognized.
    BadScheme(String),
    /// A field value violates an invariant.
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Io(e) => write!(f, "cannot read configuration: {e}"),
            Self::Parse(e) => write!(f, "cannot parse configuration: {e}"),
            Self::BadScheme(s) => write!(
                f,
                "unknown scheme {s:?} (expected perfect-csi, nonrobust(a), \
                 robust-immediate, or robust-delayed)"
            ),
            Self::Invalid(what) => write!(f, "invalid configuration: {what}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl From<io::Error> for ConfigError {
    fn from(e: io::Error) -> Self {
        Self::Io(e)
    }
}

impl From<serde_json::Error> for ConfigError {
    fn from(e: serde_json::Error) -> Self {
        Self::Parse(e)
    }
}

// ---- tests ----
