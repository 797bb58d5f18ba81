//! Link-level models and numerics for outage-constrained rate adaptation and
//! proportional-fair scheduling when the transmitter's channel knowledge is
//! delayed, noisy, and quantized.
//!
//! The crate is organized bottom-up:
//!
//! - [`numerics`]: modified Bessel functions with a log-linear tail, the
//!   first-order Marcum Q function, the conditional Rician amplitude law,
//!   and monotone inversion. Everything downstream reduces to these.
//! - [`channel`]: distance-based pathloss, the zeroth-order Bessel
//!   autocorrelation of time-selective Rayleigh fading, and generation of
//!   correlated fading traces.
//! - [`csi`]: the estimation-error variance of a pilot-based, delayed,
//!   quantized channel estimate, and synthesis of estimates jointly
//!   consistent with a given true channel.
//! - [`rate_adapt`]: conditional outage probability, the robust rate that
//!   meets a target outage, the scaled-capacity baseline, and a lookup-table
//!   form of the robust rule.
//! - [`scheduler`]: proportional-fair user selection with stale
//!   acknowledgements, both ignoring and enumerating the unresolved
//!   transmissions.
//!
//! All numeric routines are generic over [`scalar::Real`] (any IEEE float
//! with the needed conversions); the `*64` aliases at the crate root pin the
//! common `f64` instantiations.

pub mod channel;
pub mod csi;
mod linalg;
pub mod numerics;
pub mod rate_adapt;
pub mod scalar;
pub mod scheduler;

pub use scalar::Real;

/// Series evaluation controls instantiated at `f64`.
pub type SeriesConfig64 = numerics::SeriesConfig<f64>;
/// Log-linear Bessel tail fit instantiated at `f64`.
pub type TailFit64 = numerics::TailFit<f64>;
/// Link parameters instantiated at `f64`.
pub type LinkParams64 = channel::LinkParams<f64>;
/// Fading trace instantiated at `f64`.
pub type FadingTrace64 = channel::FadingTrace<f64>;
/// Trace sampler instantiated at `f64`.
pub type TraceSampler64 = channel::TraceSampler<f64>;
/// CSI configuration instantiated at `f64`.
pub type CsiConfig64 = csi::CsiConfig<f64>;
/// Transmitter-side channel view instantiated at `f64`.
pub type CsiView64 = csi::CsiView<f64>;
/// Rate decision instantiated at `f64`.
pub type RateDecision64 = rate_adapt::RateDecision<f64>;
/// Robust-rate lookup table instantiated at `f64`.
pub type RateLut64 = rate_adapt::RateLut<f64>;
/// Pending transmission instantiated at `f64`.
pub type PendingTx64 = scheduler::PendingTx<f64>;
/// User throughput ledger instantiated at `f64`.
pub type UserLedger64 = scheduler::UserLedger<f64>;
