//! Monte-Carlo experiment harness for outage-constrained rate adaptation and
//! proportional-fair scheduling with noisy, delayed channel knowledge.
//!
//! The [`fairlink_core`] crate supplies the per-link models (fading traces,
//! estimation-error variance, rate rules, scheduling metrics); this crate
//! turns them into reproducible experiments:
//!
//! - [`config`]: the scenario description (cell geometry, pilot budget,
//!   delays, schemes) read from JSON with CLI overrides,
//! - [`seeding`]: deterministic per-(drop, purpose, user) random substreams,
//!   so results are independent of worker count and schemes share common
//!   random numbers,
//! - [`experiment`]: the drop loop — place users, draw fading, adapt rates,
//!   schedule, settle acknowledgements — and its aggregation into per-
//!   (scheme, delay, SNR) metric rows,
//! - [`curves`]: single-link sweeps (rate and outage versus estimated
//!   amplitude, throughput versus outage target, error variance versus
//!   delay) behind the plotting-oriented CLI subcommands.
//!
//! Output is CSV with a fixed header per subcommand; identical
//! configuration and seed produce byte-identical files regardless of how
//! many worker threads are used.

pub mod config;
pub mod curves;
pub mod experiment;
pub mod seeding;

pub use config::{Scheme, SimConfig};
pub use experiment::{run_combos, run_experiment, write_metrics_csv, MetricsRow};
