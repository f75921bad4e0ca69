//! How far the user-count estimate may be off before throughput drops more
//! than 5% below the genie benchmark.
//!
//! Usage: `cargo run --release --example estimation_error -- [runs]`

use frameless::experiments::{genie_benchmark, sensitivity_alpha, SensitivityPlan};
use frameless::{monte_carlo, RunConfig, TerminationPolicy};

fn main() -> frameless::Result<()> {
    let runs: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(500);
    let base = RunConfig::new(100, 2.83, TerminationPolicy::dual(1.0, 0.87)?);

    println!("{:>6} {:>8}", "alpha", "T");
    for alpha in [-0.15, -0.1, -0.05, 0.0, 0.05, 0.1, 0.15] {
        let cfg = RunConfig { alpha, ..base.clone() };
        println!("{alpha:>6} {:>8.4}", monte_carlo(&cfg, runs)?.mean_throughput);
    }

    let baseline = genie_benchmark(&base, &[2.7, 2.8, 2.9, 3.0], runs)?.mean_throughput;
    let plan = SensitivityPlan {
        loss_budget: 0.05,
        g_grid: vec![2.7, 2.8, 2.9],
        v_grid: vec![0.81, 0.83, 0.85, 0.87],
        alpha_step: 0.01,
        alpha_max: 0.3,
        runs,
        baseline: Some(baseline),
    };
    let r = sensitivity_alpha(&base, &plan)?;
    println!(
        "\nT_GA={:.4}: alpha up to {:.2} tolerated with G={} V={} (T={:.4} when exact)",
        r.baseline, r.alpha_ub, r.g_at_ub, r.v_at_ub, r.throughput_at_zero
    );
    Ok(())
}
