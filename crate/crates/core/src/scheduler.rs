//! Proportional-fair user selection with delayed acknowledgements.
//!
//! The scheduler picks, each slot, the user maximizing a ratio of expected
//! instantaneous rate to achieved throughput. With immediate feedback the
//! throughput is simply the running average of acknowledged rate
//! (`metric_immediate`). When acknowledgements arrive `Δ` slots late, each
//! user's recent transmissions are unresolved, so the achieved throughput
//! is itself uncertain: with `ν` pending transmissions there are `2^ν`
//! success patterns, each with a probability given by the per-transmission
//! success estimates. The delayed metric averages the reciprocal throughput
//! over that distribution exactly (`metric_delayed`), falling back to
//! Monte-Carlo sampling past an enumeration cap.
//!
//! A [`UserLedger`] tracks one user's acknowledged prefix and pending
//! window so both metrics can be computed incrementally during a
//! simulation.

use std::collections::VecDeque;

use rand::Rng;

use crate::rate_adapt::RateDecision;
use crate::scalar::{cst, Real};

// ---- errors ----

/// Errors from scheduling computations.
#[derive(Debug)]
pub enum SchedulerError {
    /// More unresolved transmissions than the exact enumerator accepts.
    TooManyPending { pending: usize, cap: usize },
    /// The log utility is undefined at a nonpositive throughput.
    NonpositiveThroughput { value: f64 },
}

impl std::fmt::Display for SchedulerError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::TooManyPending { pending, cap } => write!(
                f,
                "{pending} unresolved transmissions exceed the exact enumeration cap of {cap}"
            ),
            Self::NonpositiveThroughput { value } => {
                write!(f, "log utility undefined for throughput {value}")
            }
        }
    }
}

impl std::error::Error for SchedulerError {}

// ---- ledger ----

/// Throughput floor (bits/s/Hz) standing in for zero in ratios and logs:
/// ledgers start here, so cold-start metrics and utilities stay finite.
pub const THROUGHPUT_FLOOR: f64 = 1e-6;

/// Largest pending count enumerated exactly (`2^22 ≈ 4.2M` outcomes);
/// beyond it callers switch to [`metric_delayed_sampled`].
pub const MAX_EXACT_PENDING: usize = 22;

/// One scheduled transmission awaiting acknowledgement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PendingTx<R = f64> {
    /// Slot it was sent in.
    pub slot: usize,
    /// Assigned rate `R̄`.
    pub rate: R,
    /// Model success probability `1 − p_out` at assignment time.
    pub success_prob: R,
    /// Actual outcome, fixed at transmission but revealed to the scheduler
    /// only once the entry leaves the pending window.
    pub succeeded: bool,
}

/// One user's throughput bookkeeping under acknowledgement delay `Δ`.
///
/// At decision slot `n` the acknowledged prefix covers slots
/// `0 ‥ n−Δ−1` (every slot counts toward the average, unscheduled ones with
/// zero rate) and the pending window holds the scheduled slots among
/// `n−Δ ‥ n−1`. Call [`UserLedger::advance_to`] with the decision slot to
/// fold newly acknowledged entries before reading metrics.
#[derive(Clone, Debug)]
pub struct UserLedger<R = f64> {
    delay: usize,
    floor: R,
    acked_sum: R,
    acked_slots: usize,
    pending: VecDeque<PendingTx<R>>,
    synced_to: usize,
    scheduled_count: usize,
    success_count: usize,
}

impl<R: Real> UserLedger<R> {
    /// Fresh ledger for acknowledgement delay `delay`, with the default
    /// [`THROUGHPUT_FLOOR`].
    pub fn new(delay: usize) -> Self {
        Self::with_floor(delay, cst(THROUGHPUT_FLOOR))
    }

    /// Fresh ledger with an explicit throughput floor.
    ///
    /// # Panics
    ///
    /// Panics unless `floor > 0`.
    pub fn with_floor(delay: usize, floor: R) -> Self {
        assert!(floor > R::zero(), "UserLedger: floor must be positive");
        Self {
            delay,
            floor,
            acked_sum: R::zero(),
            acked_slots: 0,
            pending: VecDeque::new(),
            synced_to: 0,
            scheduled_count: 0,
            success_count: 0,
        }
    }

    /// Acknowledgement delay `Δ` in slots.
    pub fn delay(&self) -> usize {
        self.delay
    }

    /// Decision slot the ledger is synchronized to.
    pub fn synced_to(&self) -> usize {
        self.synced_to
    }

    /// Number of unresolved transmissions `ν`.
    pub fn pending_count(&self) -> usize {
        self.pending.len()
    }

    /// Unresolved transmissions, oldest first.
    pub fn pending(&self) -> impl Iterator<Item = &PendingTx<R>> {
        self.pending.iter()
    }

    /// Slots scheduled so far (resolved or not).
    pub fn scheduled_count(&self) -> usize {
        self.scheduled_count
    }

    /// Scheduled slots that actually decoded (resolved or not — outcomes
    /// are fixed at transmission time).
    pub fn success_count(&self) -> usize {
        self.success_count
    }

    /// Folds every acknowledgement available at decision slot `slot` into
    /// the prefix and re-synchronizes the prefix length.
    ///
    /// # Panics
    ///
    /// Panics if `slot` moves backwards.
    pub fn advance_to(&mut self, slot: usize) {
        assert!(
            slot >= self.synced_to,
            "UserLedger: cannot advance backwards (synced to {}, got {slot})",
            self.synced_to
        );
        while let Some(front) = self.pending.front() {
            if front.slot + self.delay < slot {
                let tx = self.pending.pop_front().expect("front exists");
                if tx.succeeded {
                    self.acked_sum = self.acked_sum + tx.rate;
                }
            } else {
                break;
            }
        }
        self.acked_slots = slot.saturating_sub(self.delay);
        self.synced_to = slot;
    }

    /// Records this slot's scheduled transmission. Call after
    /// [`UserLedger::advance_to`] for the same slot; skip for slots where
    /// the user was not selected.
    ///
    /// # Panics
    ///
    /// Panics if the slot does not match the synchronized decision slot or
    /// the success probability leaves `[0, 1]`.
    pub fn record(&mut self, tx: PendingTx<R>) {
        assert!(
            tx.slot == self.synced_to,
            "UserLedger: recording slot {} while synced to {}",
            tx.slot,
            self.synced_to
        );
        assert!(
            tx.success_prob >= R::zero() && tx.success_prob <= R::one(),
            "UserLedger: success probability out of range"
        );
        assert!(tx.rate >= R::zero(), "UserLedger: negative rate");
        self.scheduled_count += 1;
        if tx.succeeded {
            self.success_count += 1;
        }
        self.pending.push_back(tx);
    }

    /// Average acknowledged rate over the prefix, floored: the throughput
    /// the scheduler knows for sure.
    pub fn known_throughput(&self) -> R {
        if self.acked_slots == 0 {
            self.floor
        } else {
            (self.acked_sum / cst(self.acked_slots as f64)).max(self.floor)
        }
    }

    /// The acknowledged-prefix rate mass `w₀N`: prefix length times the
    /// floored prefix average (the floor stands in when the prefix is
    /// empty). This is the quantity the delayed metric adds pending-outcome
    /// rate sums onto.
    pub fn w0n(&self) -> R {
        if self.acked_slots == 0 {
            self.floor
        } else {
            cst::<R>(self.acked_slots as f64) * self.known_throughput()
        }
    }

    /// Folds everything (the run is over), then returns the final
    /// throughput: total decoded rate averaged over all `n_slots` slots,
    /// floored.
    ///
    /// # Panics
    ///
    /// Panics unless `n_slots ≥ 1` and no recorded slot is `≥ n_slots`.
    pub fn finalize(&mut self, n_slots: usize) -> R {
        assert!(n_slots >= 1, "UserLedger: need at least one slot");
        if let Some(last) = self.pending.back() {
            assert!(
                last.slot < n_slots,
                "UserLedger: transmission beyond the run"
            );
        }
        let target = (n_slots + self.delay).max(self.synced_to);
        self.advance_to(target);
        self.acked_slots = n_slots;
        (self.acked_sum / cst(n_slots as f64)).max(self.floor)
    }
}

// ---- metrics ----

/// Immediate-feedback metric `R̂ / T_prev`.
///
/// # Panics
///
/// Panics unless `T_prev > 0`.
pub fn metric_immediate<R: Real>(r_hat: R, t_prev: R) -> R {
    assert!(
        t_prev > R::zero(),
        "metric_immediate: throughput must be positive"
    );
    r_hat / t_prev
}

/// All `2^ν` pending-outcome combinations as `(rate sum, probability)`
/// pairs, ordered by the success bitmask (oldest pending entry = least
/// significant bit, mask ascending, so mask 0 — everything failed — comes
/// first).
///
/// Probabilities multiply per-entry success estimates and sum to 1 up to
/// floating-point rounding.
pub fn enumerate_outcomes<R: Real>(ledger: &UserLedger<R>) -> Result<Vec<(R, R)>, SchedulerError> {
    let nu = ledger.pending_count();
    if nu > MAX_EXACT_PENDING {
        return Err(SchedulerError::TooManyPending {
            pending: nu,
            cap: MAX_EXACT_PENDING,
        });
    }
    let items: Vec<(R, R)> = ledger.pending().map(|t| (t.rate, t.success_prob)).collect();
    let mut out = Vec::with_capacity(1usize << nu);
    for mask in 0u64..(1u64 << nu) {
        let mut d = R::zero();
        let mut p = R::one();
        for (j, (rate, s)) in items.iter().enumerate() {
            if mask & (1 << j) != 0 {
                d = d + *rate;
                p = p * *s;
            } else {
                p = p * (R::one() - *s);
            }
        }
        out.push((d, p));
    }
    Ok(out)
}

/// Depth-first fold of `Σ P·f(d)` over pending outcomes without
/// materializing them; prunes zero-probability branches, so degenerate
/// success estimates (0 or 1) cost nothing.
fn fold_outcomes<R: Real>(items: &[(R, R)], prob: R, d_sum: R, leaf: &mut impl FnMut(R, R)) {
    if prob == R::zero() {
        return;
    }
    match items.split_first() {
        None => leaf(d_sum, prob),
        Some((&(rate, s), rest)) => {
            fold_outcomes(rest, prob * (R::one() - s), d_sum, &mut *leaf);
            fold_outcomes(rest, prob * s, d_sum + rate, leaf);
        }
    }
}

/// Delay-aware metric `R̂ · Σ_m P_m / (w₀N + d_m)` over the exact
/// pending-outcome distribution, compensated summation throughout.
///
/// `slot` must be the decision slot the ledger was advanced to — the
/// mismatch assert catches stale ledgers.
///
/// # Panics
///
/// Panics if the ledger is not synchronized to `slot`.
pub fn metric_delayed<R: Real>(
    r_hat: R,
    ledger: &UserLedger<R>,
    slot: usize,
) -> Result<R, SchedulerError> {
    assert!(
        ledger.synced_to() == slot,
        "metric_delayed: ledger synced to {}, deciding slot {slot}",
        ledger.synced_to()
    );
    let nu = ledger.pending_count();
    if nu > MAX_EXACT_PENDING {
        return Err(SchedulerError::TooManyPending {
            pending: nu,
            cap: MAX_EXACT_PENDING,
        });
    }
    let items: Vec<(R, R)> = ledger.pending().map(|t| (t.rate, t.success_prob)).collect();
    let w0n = ledger.w0n();
    let mut sum = R::zero();
    let mut comp = R::zero();
    fold_outcomes(&items, R::one(), R::zero(), &mut |d, p| {
        let term = p / (w0n + d);
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    });
    Ok(r_hat * sum)
}

/// Monte-Carlo estimate of the delayed metric for pending counts past the
/// enumeration cap: samples `draws` success patterns from the per-entry
/// probabilities and averages `1/(w₀N + D)`.
///
/// # Panics
///
/// Panics if the ledger is not synchronized to `slot` or `draws = 0`.
pub fn metric_delayed_sampled<R: Real>(
    r_hat: R,
    ledger: &UserLedger<R>,
    slot: usize,
    draws: usize,
    rng: &mut impl Rng,
) -> R {
    assert!(
        ledger.synced_to() == slot,
        "metric_delayed_sampled: ledger synced to {}, deciding slot {slot}",
        ledger.synced_to()
    );
    assert!(draws >= 1, "metric_delayed_sampled: need at least one draw");
    let items: Vec<(R, R)> = ledger.pending().map(|t| (t.rate, t.success_prob)).collect();
    let w0n = ledger.w0n();
    let mut sum = R::zero();
    let mut comp = R::zero();
    for _ in 0..draws {
        let mut d = R::zero();
        for &(rate, s) in &items {
            let u: f64 = rng.gen();
            if cst::<R>(u) < s {
                d = d + rate;
            }
        }
        let term = (w0n + d).recip();
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    r_hat * sum / cst(draws as f64)
}

/// Index of the largest metric; ties go to the lowest index.
///
/// # Panics
///
/// Panics on an empty slice or a NaN metric.
pub fn select_user<R: Real>(metrics: &[R]) -> usize {
    assert!(!metrics.is_empty(), "select_user: no users");
    let mut best = 0;
    for (i, m) in metrics.iter().enumerate() {
        assert!(!m.is_nan(), "select_user: metric {i} is NaN");
        if *m > metrics[best] {
            best = i;
        }
    }
    best
}

/// Per-slot ledger update: folds due acknowledgements, and if the user was
/// scheduled this slot, fixes the outcome against the true-channel capacity
/// (success iff `R̄ ≤ C`, non-strict) and records the pending entry.
///
/// Returns the outcome for a scheduled user, `None` otherwise.
pub fn resolve_and_advance<R: Real>(
    ledger: &mut UserLedger<R>,
    slot: usize,
    capacity: R,
    decision: Option<&RateDecision<R>>,
) -> Option<bool> {
    ledger.advance_to(slot);
    decision.map(|d| {
        let succeeded = d.rate <= capacity;
        ledger.record(PendingTx {
            slot,
            rate: d.rate,
            success_prob: R::one() - d.outage_prob,
            succeeded,
        });
        succeeded
    })
}

/// Proportional-fair utility `Σ_k ln T_k` (natural log).
pub fn utility<R: Real>(throughputs: &[R]) -> Result<R, SchedulerError> {
    let mut sum = R::zero();
    for t in throughputs {
        if !(*t > R::zero()) {
            return Err(SchedulerError::NonpositiveThroughput {
                value: t.to_f64().unwrap_or(f64::NAN),
            });
        }
        sum = sum + t.ln();
    }
    Ok(sum)
}

// ---- tests ----
