//! One contention period under the dual-threshold rule, with its trajectory.
//!
//! Usage: `cargo run --example single_run -- [N] [seed]`

use frameless::{genie_run, run_contention, RunConfig, TerminationPolicy};

fn main() -> frameless::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: u32 = args.next().and_then(|s| s.parse().ok()).unwrap_or(100);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);

    let mut cfg = RunConfig::new(n, 2.83, TerminationPolicy::dual(1.0, 0.87)?).with_seed(seed);
    cfg.record_trajectory = true;
    let run = run_contention(&cfg)?;

    let traj = run.trajectory.as_deref().unwrap_or_default();
    let stride = (traj.len() / 12).max(1);
    println!("{:>6} {:>6} {:>8}", "M", "N_R", "T_I");
    for &(m, r) in traj.iter().step_by(stride).chain(traj.last()) {
        println!("{m:>6} {r:>6} {:>8.4}", r as f64 / m as f64);
    }
    println!(
        "stopped at M={} ({}): T={:.4} F_R={:.4} R={:.3}",
        run.slots,
        run.reason.as_str(),
        run.throughput,
        run.fraction_resolved,
        run.replicas_per_user
    );

    let genie = genie_run(&cfg)?;
    println!("genie for the same seed: M={} T={:.4}", genie.slots, genie.throughput);
    Ok(())
}
