//! Slot-by-slot Monte Carlo simulation of one contention period.
//!
//! Participation comes from the keyed schedule, with the beacon nonce derived
//! from the run seed. Noise erasures come from a second stream keyed by
//! `(seed, slot index)`, so switching erasures on does not perturb who
//! transmits where.

use crate::access::{absorb, unit_interval, AccessParams, BeaconKey, KeyedSchedule};
use crate::error::{Error, Result};
use crate::sic::ContentionGraph;
use crate::termination::{instantaneous_throughput, CheckPoint, StopReason, TerminationPolicy, DEFAULT_HORIZON_FACTOR};

const ERASURE_STREAM: u64 = 0x006e_6f69_7365;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_users: u32,
    pub target_degree: f64,
    pub policy: TerminationPolicy,
    pub erasure_prob: f64,
    pub alpha: f64,
    pub beacon_len: u32,
    pub horizon_factor: f64,
    pub checkpoint: CheckPoint,
    pub record_trajectory: bool,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(n_users: u32, target_degree: f64, policy: TerminationPolicy) -> Self {
        RunConfig {
            n_users,
            target_degree,
            policy,
            erasure_prob: 0.0,
            alpha: 0.0,
            beacon_len: 1,
            horizon_factor: DEFAULT_HORIZON_FACTOR,
            checkpoint: CheckPoint::PerSlot,
            record_trajectory: false,
            seed: 0,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        RunConfig { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_users == 0 {
            return Err(Error::param("n_users", "must be at least 1"));
        }
        if !(self.target_degree > 0.0) || !self.target_degree.is_finite() {
            return Err(Error::param("target_degree", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.erasure_prob) {
            return Err(Error::param("erasure_prob", "must lie in [0, 1]"));
        }
        if !(self.alpha > -1.0) || !self.alpha.is_finite() {
            return Err(Error::param("alpha", "must be finite and > -1"));
        }
        if self.beacon_len == 0 {
            return Err(Error::param("beacon_len", "must be at least 1"));
        }
        if !(self.horizon_factor > 0.0) || !self.horizon_factor.is_finite() {
            return Err(Error::param("horizon_factor", "must be positive"));
        }
        match self.policy {
            TerminationPolicy::DualThreshold { s, v } => {
                TerminationPolicy::dual(s, v)?;
            }
            TerminationPolicy::FractionOnly { v } => {
                TerminationPolicy::fraction_only(v)?;
            }
            TerminationPolicy::GenieAided { horizon_factor } => {
                if !(horizon_factor > 0.0) {
                    return Err(Error::param("horizon_factor", "must be positive"));
                }
            }
            TerminationPolicy::FixedLength { slots } => {
                if slots == 0 {
                    return Err(Error::param("fixed_length", "must be at least 1"));
                }
            }
        }
        Ok(())
    }

    /// Number of slots after which a run is cut off.
    pub fn horizon(&self) -> u64 {
        ((self.horizon_factor * self.n_users as f64).ceil() as u64).max(1)
    }

    pub fn access(&self) -> Result<AccessParams> {
        AccessParams::new(self.n_users as u64, self.target_degree, self.alpha)
    }

    pub fn beacon(&self) -> BeaconKey {
        BeaconKey::from_seed(self.seed)
    }

    /// Whether slot `slot_index` of this run is hit by a noise erasure.
    pub fn slot_erased(&self, slot_index: u64) -> bool {
        if self.erasure_prob <= 0.0 {
            return false;
        }
        let key = absorb(absorb(0, self.seed), ERASURE_STREAM);
        unit_interval(absorb(key, slot_index)) < self.erasure_prob
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    /// `M`.
    pub slots: u64,
    /// `N_R`.
    pub resolved: u64,
    /// `N_R / N` with the true `N`.
    pub fraction_resolved: f64,
    /// `N_R / (M + L - 1)`.
    pub throughput: f64,
    /// Replicas per user over the `M` slots.
    pub replicas_per_user: f64,
    pub reason: StopReason,
    pub beacon_len: u32,
    /// `(M, N_R)` after each slot, when recorded.
    pub trajectory: Option<Vec<(u64, u64)>>,
}

impl RunStats {
    /// `M + L - 1`.
    pub fn charged_slots(&self) -> u64 {
        self.slots + self.beacon_len as u64 - 1
    }

    fn new(config: &RunConfig, slots: u64, resolved: u64, edges: u64, reason: StopReason) -> Self {
        let n = config.n_users as f64;
        RunStats {
            slots,
            resolved,
            fraction_resolved: resolved as f64 / n,
            throughput: instantaneous_throughput(resolved, slots, config.beacon_len),
            replicas_per_user: edges as f64 / n,
            reason,
            beacon_len: config.beacon_len,
            trajectory: None,
        }
    }
}

/// Simulates one contention period until the policy fires or the horizon is
/// reached. A genie-aided policy is delegated to [`genie_run`].
pub fn run_contention(config: &RunConfig) -> Result<RunStats> {
    config.validate()?;
    if let TerminationPolicy::GenieAided { horizon_factor } = config.policy {
        return genie_run(&RunConfig {
            horizon_factor,
            ..config.clone()
        });
    }

    let access = config.access()?;
    // The base station compares N_R / N against the realized threshold.
    let policy = config.policy.apply_estimation_error(config.alpha)?;
    let n_true = config.n_users as u64;
    let schedule = KeyedSchedule::new(config.beacon(), access.slot_access_prob, config.n_users);
    let mut graph = ContentionGraph::with_schedule(schedule.clone());
    let mut trajectory = config.record_trajectory.then(Vec::new);
    let mut participants = Vec::new();

    let horizon = config.horizon();
    for j in 1..=horizon {
        schedule.participants_into(j, &mut participants);
        graph.add_slot(&participants, config.slot_erased(j))?;

        let mut stop = None;
        let per_cycle = config.checkpoint == CheckPoint::PerCycle
            && !matches!(policy, TerminationPolicy::FixedLength { .. });
        if per_cycle {
            while graph.peel_cycle().is_some() {
                let d = policy.evaluate(graph.resolved_count() as u64, n_true, j, config.beacon_len);
                if d.stop {
                    stop = Some(d.reason);
                    break;
                }
            }
        } else {
            graph.peel();
        }
        if stop.is_none() {
            let d = policy.evaluate(graph.resolved_count() as u64, n_true, j, config.beacon_len);
            if d.stop {
                stop = Some(d.reason);
            }
        }
        if let Some(t) = trajectory.as_mut() {
            t.push((j, graph.resolved_count() as u64));
        }
        if let Some(reason) = stop {
            let mut stats = RunStats::new(config, j, graph.resolved_count() as u64, graph.edge_count(), reason);
            stats.trajectory = trajectory;
            return Ok(stats);
        }
    }
    let mut stats = RunStats::new(
        config,
        horizon,
        graph.resolved_count() as u64,
        graph.edge_count(),
        StopReason::HorizonExhausted,
    );
    stats.trajectory = trajectory;
    Ok(stats)
}

/// Genie-aided benchmark: the stop is placed, with hindsight, at the slot
/// where `T_I` is largest over the horizon (earliest on ties). Thresholds in
/// the policy are ignored. Simulation ends early once `N / (M + L - 1)` can
/// no longer beat the incumbent, since no later slot could then win.
pub fn genie_run(config: &RunConfig) -> Result<RunStats> {
    config.validate()?;
    let access = config.access()?;
    let schedule = KeyedSchedule::new(config.beacon(), access.slot_access_prob, config.n_users);
    let mut graph = ContentionGraph::with_schedule(schedule.clone());
    let mut trajectory = Vec::new();
    let mut participants = Vec::new();
    let n = config.n_users as u64;

    let mut best: Option<(f64, u64, u64, u64)> = None;
    for j in 1..=config.horizon() {
        schedule.participants_into(j, &mut participants);
        graph.add_slot(&participants, config.slot_erased(j))?;
        graph.peel();
        let resolved = graph.resolved_count() as u64;
        trajectory.push((j, resolved));
        let t = instantaneous_throughput(resolved, j, config.beacon_len);
        if best.is_none_or(|(bt, ..)| t > bt) {
            best = Some((t, j, resolved, graph.edge_count()));
        }
        let bound = instantaneous_throughput(n, j + 1, config.beacon_len);
        if bound <= best.map_or(0.0, |b| b.0) {
            break;
        }
    }
    let (_, slots, resolved, edges) = best.expect("horizon is at least one slot");
    let mut stats = RunStats::new(config, slots, resolved, edges, StopReason::ThroughputHit);
    stats.trajectory = Some(trajectory);
    Ok(stats)
}
