//! Frameless ALOHA with successive interference cancellation.
//!
//! Users transmit replicas of one packet in a random subset of slots; the
//! base station decodes singleton slots, cancels the decoded packets from
//! every stored slot, and ends the contention period adaptively once a
//! termination rule fires.
//!
//! - [`access`]: slot-access probability, degree distributions, the keyed schedule
//! - [`sic`]: contention graph and peeling decoder
//! - [`termination`]: stopping rules
//! - [`asymptotic`]: and-or tree limit of the decoder
//! - [`simulator`]: one contention period, slot by slot
//! - [`experiments`]: Monte Carlo aggregation and parameter studies
//! - [`cli`]: config files, command dispatch and CSV output
//!
//! Runnable examples live in `examples/`: `peeling`, `single_run`,
//! `threshold_vs_genie`, `asymptotic`, `noisy_slots`, `estimation_error`,
//! `beacon_overhead` and `schedule`.
//!
//! ```
//! use frameless::{monte_carlo, RunConfig, TerminationPolicy};
//!
//! let cfg = RunConfig::new(50, 2.68, TerminationPolicy::dual(1.0, 0.83)?);
//! let stats = monte_carlo(&cfg, 200)?;
//! assert!(stats.mean_throughput > 0.7);
//! # Ok::<(), frameless::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod access;
pub mod asymptotic;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod report;
pub mod sic;
pub mod simulator;
pub mod termination;

pub use access::{AccessParams, BeaconKey, KeyedSchedule};
pub use asymptotic::{and_or_fixed_point, sweep_curve, AsymptoticCurve};
pub use error::{Error, Result};
pub use experiments::{monte_carlo, AggregateStats, SensitivityResult, SweepResult};
pub use sic::ContentionGraph;
pub use simulator::{genie_run, run_contention, RunConfig, RunStats};
pub use termination::{CheckPoint, StopReason, TerminationDecision, TerminationPolicy};
