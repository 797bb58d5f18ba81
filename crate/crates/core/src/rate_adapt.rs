//! Rate selection under uncertain channel knowledge.
//!
//! Given an estimated amplitude `ĝ` with error variance `ε`, the outage
//! probability of transmitting at rate `R̄` over power `ρ` is the
//! conditional Rician CDF at the decoding threshold `b = √((2^R̄ − 1)/ρ)`.
//! The robust rule inverts that map: it assigns the largest rate whose
//! predicted outage stays at the target. The non-robust baseline scales the
//! estimated capacity by a fixed back-off factor and ignores the target.
//! A lookup table trades the per-decision inversion for a precomputed,
//! monotonicity-enforced grid.

use std::io::{self, BufRead, Write};

use crate::numerics::{invert_monotone, rician_cdf, NumericsError, SeriesConfig};
use crate::scalar::{cst, Real};

// ---- decisions ----

/// A rate assignment together with its model outage probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateDecision<R = f64> {
    /// Assigned rate `R̄` in bits/s/Hz.
    pub rate: R,
    /// Outage probability the model predicts for this assignment.
    pub outage_prob: R,
}

impl<R: Real> RateDecision<R> {
    /// Expected rate `R̂ = (1 − p_out)·R̄`.
    pub fn expected_rate(&self) -> R {
        (R::one() - self.outage_prob) * self.rate
    }
}

// ---- outage probability ----

/// Above this value of `2ĝ²/ε` the Rician amplitude law is evaluated in its
/// Gaussian limit instead of through the Marcum series. The crossover error
/// is below ~3e-4 in probability and shrinks as the ratio grows; the series
/// itself would need ever more orders there for no accuracy gain.
pub const GAUSSIAN_REGIME_RATIO: f64 = 600.0;

/// Standard normal CDF via the Abramowitz–Stegun rational erf
/// approximation; absolute error ≤ 1.5e-7, far below the Gaussian-limit
/// model error at the regimes where it is used.
fn normal_cdf<R: Real>(z: R) -> R {
    let x = z / cst::<R>(std::f64::consts::SQRT_2);
    let ax = x.abs();
    let t = (R::one() + cst::<R>(0.327_591_1) * ax).recip();
    let poly = ((((cst::<R>(1.061_405_429) * t - cst::<R>(1.453_152_027)) * t
        + cst::<R>(1.421_413_741))
        * t
        - cst::<R>(0.284_496_736))
        * t
        + cst::<R>(0.254_829_592))
        * t;
    let erf_abs = R::one() - poly * (-ax * ax).exp();
    let erf = if x < R::zero() { -erf_abs } else { erf_abs };
    (R::one() + erf) / cst(2.0)
}

/// Outage probability of rate `rate` given estimate amplitude `g_hat`,
/// error variance `eps`, and power `rho`.
///
/// Three regimes:
/// - `eps = 0` (perfect CSI): exact step — 0 if the rate is at most the
///   estimated capacity `log₂(1 + ρĝ²)`, else 1.
/// - moderate `2ĝ²/ε`: the conditional Rician CDF at the threshold
///   amplitude, via the Marcum Q series.
/// - `2ĝ²/ε >` [`GAUSSIAN_REGIME_RATIO`]: the Gaussian limit
///   `Φ((b − ĝ − ε/(4ĝ))·√(2/ε))`, where the Marcum series would need
///   orders beyond any fixed cap.
///
/// Nondecreasing in `rate`; zero at `rate = 0`.
///
/// # Panics
///
/// Panics if `rate < 0`, `g_hat < 0`, `eps < 0`, or `rho <= 0`.
pub fn outage_prob<R: Real>(rate: R, g_hat: R, eps: R, rho: R) -> R {
    assert!(rate >= R::zero(), "outage_prob: rate must be nonnegative");
    assert!(
        g_hat >= R::zero(),
        "outage_prob: amplitude must be nonnegative"
    );
    assert!(
        eps >= R::zero(),
        "outage_prob: error variance must be nonnegative"
    );
    assert!(rho > R::zero(), "outage_prob: power must be positive");
    if rate == R::zero() {
        return R::zero();
    }
    if eps == R::zero() {
        let capacity = (R::one() + rho * g_hat * g_hat).log2();
        return if rate <= capacity {
            R::zero()
        } else {
            R::one()
        };
    }
    // b² = (2^R − 1)/ρ, stable for small rates.
    let b2 = (rate * cst::<R>(std::f64::consts::LN_2)).exp_m1() / rho;
    let b = b2.sqrt();
    let ratio = cst::<R>(2.0) * g_hat * g_hat / eps;
    if ratio <= cst(GAUSSIAN_REGIME_RATIO) {
        rician_cdf(b, g_hat, eps, &SeriesConfig::default())
    } else {
        let mean = g_hat + eps / (cst::<R>(4.0) * g_hat);
        normal_cdf((b - mean) * (cst::<R>(2.0) / eps).sqrt())
    }
}

// ---- robust and non-robust rules ----

/// Upper bound on the adaptive rate bracket; reaching it means the
/// requested outage target is not attainable below this rate, which no
/// physically calibrated link produces.
pub const RATE_BRACKET_CAP: f64 = 64.0;

/// Default bisection tolerance on the rate, in bits/s/Hz.
pub const DEFAULT_RATE_TOL: f64 = 1e-4;

/// Errors from rate selection and table handling.
#[derive(Debug)]
pub enum RateAdaptError {
    /// The outage target was still unmet at [`RATE_BRACKET_CAP`] bits/s/Hz.
    BracketExceeded { g_hat: f64, p_target: f64 },
    /// A numerics primitive failed underneath.
    Numerics(NumericsError),
    /// Reading or writing a serialized table failed.
    Io(io::Error),
    /// A serialized table did not parse.
    Malformed { line: usize, reason: String },
}

impl std::fmt::Display for RateAdaptError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::BracketExceeded { g_hat, p_target } => write!(
                f,
                "no rate below {RATE_BRACKET_CAP} bits/s/Hz reaches outage {p_target} at amplitude {g_hat}"
            ),
            Self::Numerics(e) => write!(f, "numerics failure: {e}"),
            Self::Io(e) => write!(f, "table i/o failure: {e}"),
            Self::Malformed { line, reason } => {
                write!(f, "malformed table at line {line}: {reason}")
            }
        }
    }
}

impl std::error::Error for RateAdaptError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Self::Numerics(e) => Some(e),
            Self::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<NumericsError> for RateAdaptError {
    fn from(e: NumericsError) -> Self {
        Self::Numerics(e)
    }
}

impl From<io::Error> for RateAdaptError {
    fn from(e: io::Error) -> Self {
        Self::Io(e)
    }
}

/// Largest rate whose predicted outage equals the target, by bisection.
///
/// The upper bracket starts at 1 bit/s/Hz and doubles until the outage
/// there reaches the target (erroring past [`RATE_BRACKET_CAP`]); the root
/// is then bisected to within `tol` and re-evaluated so the returned
/// decision carries its actual model outage.
///
/// # Panics
///
/// Panics unless `g_hat ≥ 0`, `eps > 0`, `rho > 0`, `0 < p_target < 1`,
/// and `tol > 0`.
pub fn robust_rate<R: Real>(
    g_hat: R,
    eps: R,
    rho: R,
    p_target: R,
    tol: R,
) -> Result<RateDecision<R>, RateAdaptError> {
    assert!(
        eps > R::zero(),
        "robust_rate: error variance must be positive"
    );
    assert!(
        p_target > R::zero() && p_target < R::one(),
        "robust_rate: outage target must lie strictly inside (0, 1)"
    );
    assert!(tol > R::zero(), "robust_rate: tolerance must be positive");
    let outage = |r: R| outage_prob(r, g_hat, eps, rho);
    let mut hi = R::one();
    while outage(hi) < p_target {
        hi = hi * cst(2.0);
        if hi > cst(RATE_BRACKET_CAP) {
            return Err(RateAdaptError::BracketExceeded {
                g_hat: g_hat.to_f64().unwrap_or(f64::NAN),
                p_target: p_target.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    let rate = invert_monotone(outage, p_target, R::zero(), hi, tol)?;
    Ok(RateDecision {
        rate,
        outage_prob: outage(rate),
    })
}

/// Scaled-capacity baseline `R̄ = a·log₂(1 + ρĝ²)` with back-off `a`.
///
/// The outage field is bookkeeping only — the rule itself ignores any
/// target. Works for `eps = 0` (perfect CSI), where `a = 1` gives the
/// capacity itself with zero outage.
///
/// # Panics
///
/// Panics unless `0 < a ≤ 1`, `g_hat ≥ 0`, `eps ≥ 0`, `rho > 0`.
pub fn nonrobust_rate<R: Real>(g_hat: R, eps: R, rho: R, backoff: R) -> RateDecision<R> {
    assert!(
        backoff > R::zero() && backoff <= R::one(),
        "nonrobust_rate: back-off must lie in (0, 1]"
    );
    let rate = backoff * (R::one() + rho * g_hat * g_hat).log2();
    RateDecision {
        rate,
        outage_prob: outage_prob(rate, g_hat, eps, rho),
    }
}

// ---- lookup table ----

/// Number of grid points in the default table.
pub const DEFAULT_LUT_POINTS: usize = 512;
/// Default grid span, as multiples of `√λ`: `[1e-3·√λ, 6·√λ]`.
pub const DEFAULT_LUT_SPAN: (f64, f64) = (1e-3, 6.0);

/// Precomputed robust-rate table over an amplitude grid, with rates forced
/// nondecreasing by a right-to-left running minimum (a rate never exceeds
/// one assigned at a larger amplitude), which also removes inversion
/// artifacts that would overshoot the outage target.
#[derive(Clone, Debug, PartialEq)]
pub struct RateLut<R = f64> {
    amplitudes: Vec<R>,
    rates: Vec<R>,
    /// Power the table was built for.
    pub rho: R,
    /// Error variance the table was built for.
    pub eps: R,
    /// Outage target the table was built for.
    pub p_target: R,
}

impl<R: Real> RateLut<R> {
    /// Amplitude grid points, strictly increasing.
    pub fn amplitudes(&self) -> &[R] {
        &self.amplitudes
    }

    /// Rates per grid point, nondecreasing.
    pub fn rates(&self) -> &[R] {
        &self.rates
    }
}

/// Logarithmically spaced grid from `lo` to `hi` inclusive.
///
/// # Panics
///
/// Panics unless `0 < lo < hi` and `points ≥ 2`.
pub fn log_grid<R: Real>(lo: R, hi: R, points: usize) -> Vec<R> {
    assert!(points >= 2, "log_grid: need at least two points");
    assert!(
        R::zero() < lo && lo < hi,
        "log_grid: bounds must be positive and ordered"
    );
    let (llo, lhi) = (lo.ln(), hi.ln());
    let step = (lhi - llo) / cst((points - 1) as f64);
    (0..points)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == points - 1 {
                hi
            } else {
                (llo + step * cst(i as f64)).exp()
            }
        })
        .collect()
}

/// Default amplitude grid for a link with mean gain `λ`:
/// [`DEFAULT_LUT_POINTS`] log-spaced points over [`DEFAULT_LUT_SPAN`]·`√λ`.
pub fn default_lut_grid<R: Real>(mean_gain: R) -> Vec<R> {
    let s = mean_gain.sqrt();
    log_grid(
        cst::<R>(DEFAULT_LUT_SPAN.0) * s,
        cst::<R>(DEFAULT_LUT_SPAN.1) * s,
        DEFAULT_LUT_POINTS,
    )
}

/// Right-to-left running minimum: caps every rate by all later ones.
fn enforce_monotone<R: Real>(rates: &mut [R]) {
    for i in (0..rates.len().saturating_sub(1)).rev() {
        rates[i] = rates[i].min(rates[i + 1]);
    }
}

/// Builds a robust-rate table over a strictly increasing amplitude grid.
///
/// # Panics
///
/// Panics if the grid is empty, has nonpositive or non-increasing entries,
/// or if any precondition of [`robust_rate`] is violated.
pub fn build_lut<R: Real>(
    amplitudes: Vec<R>,
    eps: R,
    rho: R,
    p_target: R,
    tol: R,
) -> Result<RateLut<R>, RateAdaptError> {
    assert!(!amplitudes.is_empty(), "build_lut: empty grid");
    for pair in amplitudes.windows(2) {
        assert!(
            pair[0] < pair[1],
            "build_lut: grid must be strictly increasing"
        );
    }
    assert!(
        amplitudes[0] >= R::zero(),
        "build_lut: amplitudes must be nonnegative"
    );
    let mut rates = Vec::with_capacity(amplitudes.len());
    for &g in &amplitudes {
        rates.push(robust_rate(g, eps, rho, p_target, tol)?.rate);
    }
    enforce_monotone(&mut rates);
    Ok(RateLut {
        amplitudes,
        rates,
        rho,
        eps,
        p_target,
    })
}

/// Table lookup with the conservative floor rule: the rate of the largest
/// grid point not exceeding `g_hat`; zero below the grid; the last rate
/// above it. The outage field is re-evaluated at the actual `g_hat`.
pub fn lut_rate<R: Real>(lut: &RateLut<R>, g_hat: R) -> RateDecision<R> {
    let idx = lut.amplitudes.partition_point(|a| *a <= g_hat);
    let rate = if idx == 0 {
        R::zero()
    } else {
        lut.rates[idx - 1]
    };
    RateDecision {
        rate,
        outage_prob: outage_prob(rate, g_hat, lut.eps, lut.rho),
    }
}

// ---- table serialization ----

impl<R: Real> RateLut<R> {
    /// Writes the table as CSV: a `#`-prefixed parameter header, a column
    /// header, then one `amplitude,rate` row per grid point.
    pub fn write_csv(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(
            out,
            "# rho={},eps={},p_target={}",
            self.rho, self.eps, self.p_target
        )?;
        writeln!(out, "g_hat,rate")?;
        for (g, r) in self.amplitudes.iter().zip(&self.rates) {
            writeln!(out, "{g},{r}")?;
        }
        Ok(())
    }

    /// Reads a table written by [`RateLut::write_csv`], revalidating the
    /// grid ordering and rate monotonicity.
    pub fn read_csv(input: impl BufRead) -> Result<Self, RateAdaptError> {
        let malformed = |line: usize, reason: &str| RateAdaptError::Malformed {
            line,
            reason: reason.to_string(),
        };
        let parse = |tok: &str, line: usize| -> Result<R, RateAdaptError> {
            let v: f64 = tok
                .trim()
                .parse()
                .map_err(|_| malformed(line, "expected a number"))?;
            Ok(cst(v))
        };
        let mut lines = input.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| malformed(1, "missing parameter header"))?;
        let header = header?;
        let header = header
            .strip_prefix("# ")
            .ok_or_else(|| malformed(1, "parameter header must start with '# '"))?;
        let mut rho = None;
        let mut eps = None;
        let mut p_target = None;
        for field in header.split(',') {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| malformed(1, "expected key=value fields"))?;
            match key.trim() {
                "rho" => rho = Some(parse(value, 1)?),
                "eps" => eps = Some(parse(value, 1)?),
                "p_target" => p_target = Some(parse(value, 1)?),
                other => {
                    return Err(malformed(1, &format!("unknown parameter '{other}'")));
                }
            }
        }
        let (rho, eps, p_target) = match (rho, eps, p_target) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => return Err(malformed(1, "header must set rho, eps, p_target")),
        };
        match lines.next() {
            Some((_, Ok(l))) if l.trim() == "g_hat,rate" => {}
            Some((_, Ok(_))) => return Err(malformed(2, "expected column header 'g_hat,rate'")),
            Some((_, Err(e))) => return Err(e.into()),
            None => return Err(malformed(2, "missing column header")),
        }
        let mut amplitudes = Vec::new();
        let mut rates = Vec::new();
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (g, r) = line
                .split_once(',')
                .ok_or_else(|| malformed(i + 1, "expected 'amplitude,rate'"))?;
            amplitudes.push(parse(g, i + 1)?);
            rates.push(parse(r, i + 1)?);
        }
        if amplitudes.is_empty() {
            return Err(malformed(3, "table has no rows"));
        }
        for pair in amplitudes.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(malformed(0, "amplitude grid is not strictly increasing"));
            }
        }
        for pair in rates.windows(2) {
            if !(pair[0] <= pair[1]) {
                return Err(malformed(0, "rates are not nondecreasing"));
            }
        }
        Ok(Self {
            amplitudes,
            rates,
            rho,
            eps,
            p_target,
        })
    }
}

// ---- tests ----

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_never_fails() {
        assert_eq!(outage_prob(0.0, 1.0, 0.2, 1.0), 0.0);
        assert_eq!(outage_prob(0.0, 0.0, 0.0, 1.0), 0.0);
    }

    #[test]
    fn perfect_csi_is_a_step() {
        let cap = (1.0 + 4.0f64).log2();
        assert_eq!(outage_prob(cap, 2.0, 0.0, 1.0), 0.0);
        assert_eq!(outage_prob(cap + 1e-9, 2.0, 0.0, 1.0), 1.0);
    }

    #[test]
    fn outage_is_monotone_in_rate() {
        let mut prev = 0.0;
        for i in 0..60 {
            let r = 0.1 * i as f64;
            let p = outage_prob(r, 1.0, 0.2, 1.0);
            assert!((0.0..=1.0).contains(&p));
            assert!(p >= prev - 1e-12);
            prev = p;
        }
    }

    #[test]
    fn robust_rate_hits_its_target() {
        for &(g, eps, rho, pt) in &[
            (1.0f64, 0.2, 1.0, 0.1),
            (0.5, 0.05, 10.0, 0.01),
            (2.0, 0.3, 4.0, 0.1),
            (0.0, 0.5, 1.0, 0.1),
        ] {
            let d = robust_rate(g, eps, rho, pt, 1e-7).unwrap();
            assert!(
                (d.outage_prob - pt).abs() < 1e-4,
                "({g},{eps},{rho},{pt}): outage {}",
                d.outage_prob
            );
            assert!(d.expected_rate() <= d.rate);
        }
    }

    #[test]
    fn tighter_targets_give_smaller_rates() {
        let loose = robust_rate(1.0, 0.1, 1.0, 0.1, 1e-6).unwrap();
        let tight = robust_rate(1.0, 0.1, 1.0, 0.01, 1e-6).unwrap();
        assert!(tight.rate < loose.rate);
    }

    #[test]
    fn gaussian_regime_agrees_with_the_series_near_the_switch() {
        // Pick (ĝ, ε) pairs on both sides of the regime boundary and check
        // the two evaluations of the same physical setup stay close.
        let rho = 1.0;
        let g = 2.0;
        let eps_series = 2.0 * g * g / (GAUSSIAN_REGIME_RATIO - 1.0);
        let eps_gauss = 2.0 * g * g / (GAUSSIAN_REGIME_RATIO + 1.0);
        for &frac in &[0.9, 0.95, 1.0] {
            let r = frac * (1.0 + rho * g * g).log2();
            let a = outage_prob(r, g, eps_series, rho);
            let b = outage_prob(r, g, eps_gauss, rho);
            assert!((a - b).abs() < 1e-3, "rate {r}: {a} vs {b}");
        }
    }

    #[test]
    fn nonrobust_examples() {
        let d = nonrobust_rate(1.0f64, 0.1, 1.0, 1.0);
        assert!((d.rate - 1.0).abs() < 1e-12);
        let d95 = nonrobust_rate(1.0f64, 0.1, 1.0, 0.95);
        assert!((d95.rate - 0.95).abs() < 1e-12);
        let z = nonrobust_rate(0.0, 0.1, 1.0, 0.95);
        assert_eq!(z.rate, 0.0);
        assert_eq!(z.outage_prob, 0.0);
    }

    #[test]
    fn monotone_clamp_matches_the_reference_sequence() {
        let mut rates = vec![1.0f64, 1.2, 1.1, 1.3];
        enforce_monotone(&mut rates);
        assert_eq!(rates, vec![1.0, 1.1, 1.1, 1.3]);
        let mut flat = vec![0.7, 0.7, 0.7];
        enforce_monotone(&mut flat);
        assert_eq!(flat, vec![0.7, 0.7, 0.7]);
    }

    #[test]
    fn lut_floor_rule() {
        let grid = log_grid(0.1, 4.0, 64);
        let lut = build_lut(grid.clone(), 0.2, 1.0, 0.1, 1e-6).unwrap();
        // On a grid point: that rate exactly.
        let on = lut_rate(&lut, grid[10]);
        assert_eq!(on.rate, lut.rates()[10]);
        // Between points: the lower one.
        let mid = 0.5 * (grid[10] + grid[11]);
        assert_eq!(lut_rate(&lut, mid).rate, lut.rates()[10]);
        // Below the grid: zero; above: the last rate.
        assert_eq!(lut_rate(&lut, 0.05).rate, 0.0);
        assert_eq!(lut_rate(&lut, 10.0).rate, *lut.rates().last().unwrap());
        // Rates are nondecreasing after the clamp.
        for pair in lut.rates().windows(2) {
            assert!(pair[0] <= pair[1]);
        }
    }

    #[test]
    fn log_grid_shape() {
        let g = log_grid(0.001f64, 6.0, 512);
        assert_eq!(g.len(), 512);
        assert_eq!(g[0], 0.001);
        assert_eq!(g[511], 6.0);
        let r0 = g[1] / g[0];
        let r_mid = g[256] / g[255];
        assert!((r0 - r_mid).abs() < 1e-9, "log spacing must be uniform");
    }

    #[test]
    fn csv_round_trip() {
        let lut = build_lut(log_grid(0.05, 3.0, 16), 0.25, 2.0, 0.1, 1e-6).unwrap();
        let mut buf = Vec::new();
        lut.write_csv(&mut buf).unwrap();
        let back = RateLut::<f64>::read_csv(io::BufReader::new(buf.as_slice())).unwrap();
        assert_eq!(lut, back);
    }

    #[test]
    fn csv_rejects_garbage() {
        let text = "# rho=1,eps=0.2\ng_hat,rate\n0.1,0.2\n";
        let err = RateLut::<f64>::read_csv(io::BufReader::new(text.as_bytes())).unwrap_err();
        assert!(matches!(err, RateAdaptError::Malformed { .. }));
    }
}
