//! Rules for ending a contention period.
//!
//! The base station observes the number of decoded users `N_R` and elapsed
//! slots `M`. From these it forms the resolved fraction `F_R = N_R / N_est`
//! and the instantaneous throughput `T_I = N_R / (M + L - 1)`, where `L` is
//! the number of slots the terminating beacon occupies (`L = 1` makes the
//! beacon free).

use crate::error::{Error, Result};

/// Default horizon, as a multiple of `N`, for genie-aided evaluation.
pub const DEFAULT_HORIZON_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TerminationPolicy {
    /// Stop once `T_I >= s` or `F_R >= v`.
    DualThreshold { s: f64, v: f64 },
    /// Stop once `F_R >= v`; `T_I` is ignored.
    FractionOnly { v: f64 },
    /// Non-causal benchmark: stop where `T_I` is largest over
    /// `horizon_factor * N` slots. Never fires through [`evaluate`].
    GenieAided { horizon_factor: f64 },
    /// Stop after exactly `slots` slots.
    FixedLength { slots: u64 },
}

impl TerminationPolicy {
    pub fn dual(s: f64, v: f64) -> Result<Self> {
        check_threshold("threshold_s", s)?;
        check_threshold("threshold_v", v)?;
        Ok(TerminationPolicy::DualThreshold { s, v })
    }

    pub fn fraction_only(v: f64) -> Result<Self> {
        check_threshold("threshold_v", v)?;
        Ok(TerminationPolicy::FractionOnly { v })
    }

    pub fn genie() -> Self {
        TerminationPolicy::GenieAided {
            horizon_factor: DEFAULT_HORIZON_FACTOR,
        }
    }

    /// Fraction threshold, if the policy has one.
    pub fn fraction_threshold(&self) -> Option<f64> {
        match *self {
            TerminationPolicy::DualThreshold { v, .. } | TerminationPolicy::FractionOnly { v } => Some(v),
            _ => None,
        }
    }

    pub fn is_genie(&self) -> bool {
        matches!(self, TerminationPolicy::GenieAided { .. })
    }

    /// Replaces `V` by the threshold actually realized under a relative
    /// error `alpha` in the user count, `min(1, V / (1 + alpha))`.
    pub fn apply_estimation_error(self, alpha: f64) -> Result<Self> {
        if !(alpha > -1.0) {
            return Err(Error::param("alpha", format!("must be > -1, got {alpha}")));
        }
        let act = |v: f64| (v / (1.0 + alpha)).min(1.0);
        Ok(match self {
            TerminationPolicy::DualThreshold { s, v } => TerminationPolicy::DualThreshold { s, v: act(v) },
            TerminationPolicy::FractionOnly { v } => TerminationPolicy::FractionOnly { v: act(v) },
            other => other,
        })
    }

    /// Decides whether to stop after `slots` slots with `resolved` users decoded.
    pub fn evaluate(&self, resolved: u64, n_users_est: u64, slots: u64, beacon_len: u32) -> TerminationDecision {
        debug_assert!(slots >= 1);
        let fraction = resolved as f64 / n_users_est as f64;
        let throughput = instantaneous_throughput(resolved, slots, beacon_len);
        match *self {
            TerminationPolicy::DualThreshold { s, v } => {
                if throughput >= s {
                    TerminationDecision::stop(StopReason::ThroughputHit)
                } else if fraction >= v {
                    TerminationDecision::stop(StopReason::FractionHit)
                } else {
                    TerminationDecision::CONTINUE
                }
            }
            TerminationPolicy::FractionOnly { v } => {
                if fraction >= v {
                    TerminationDecision::stop(StopReason::FractionHit)
                } else {
                    TerminationDecision::CONTINUE
                }
            }
            TerminationPolicy::GenieAided { .. } => TerminationDecision::CONTINUE,
            TerminationPolicy::FixedLength { slots: len } => {
                if slots >= len {
                    TerminationDecision::stop(StopReason::HorizonExhausted)
                } else {
                    TerminationDecision::CONTINUE
                }
            }
        }
    }
}

fn check_threshold(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x <= 1.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must lie in (0, 1], got {x}")))
    }
}

/// Standalone form of [`TerminationPolicy::evaluate`].
pub fn evaluate(
    policy: &TerminationPolicy,
    resolved: u64,
    n_users_est: u64,
    slots: u64,
    beacon_len: u32,
) -> TerminationDecision {
    policy.evaluate(resolved, n_users_est, slots, beacon_len)
}

/// `N_R / (M + L - 1)`.
#[inline]
pub fn instantaneous_throughput(resolved: u64, slots: u64, beacon_len: u32) -> f64 {
    resolved as f64 / (slots + beacon_len as u64 - 1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopReason {
    ThroughputHit,
    FractionHit,
    HorizonExhausted,
    Continue,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::ThroughputHit => "throughput",
            StopReason::FractionHit => "fraction",
            StopReason::HorizonExhausted => "horizon",
            StopReason::Continue => "none",
        }
    }
}

/// `reason` is [`StopReason::Continue`] exactly when `stop` is false.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TerminationDecision {
    pub stop: bool,
    pub reason: StopReason,
}

impl TerminationDecision {
    pub const CONTINUE: TerminationDecision = TerminationDecision {
        stop: false,
        reason: StopReason::Continue,
    };

    pub fn stop(reason: StopReason) -> Self {
        debug_assert!(reason != StopReason::Continue);
        TerminationDecision { stop: true, reason }
    }
}

/// When the policy is consulted during a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CheckPoint {
    /// After every cancellation cycle, so a stop can land mid-avalanche.
    PerCycle,
    /// Only once cancellation has stalled for the current slot.
    #[default]
    PerSlot,
}
