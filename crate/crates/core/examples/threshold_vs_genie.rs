//! Threshold termination against the genie-aided benchmark for several
//! population sizes, at tuned operating points.
//!
//! Usage: `cargo run --release --example threshold_vs_genie -- [runs]`

use frameless::{experiments::genie_monte_carlo, monte_carlo, RunConfig, TerminationPolicy};

const POINTS: [(u32, f64, f64); 4] = [(50, 2.68, 0.83), (100, 2.83, 0.87), (500, 2.99, 0.88), (1000, 3.03, 0.89)];

fn main() -> frameless::Result<()> {
    let runs: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1000);
    println!("{:>5} {:>5} {:>5} {:>7} {:>7} {:>7} {:>7} {:>7}", "N", "G", "V", "T", "F_R", "M/N", "R", "T_GA");
    for (n, g, v) in POINTS {
        let cfg = RunConfig::new(n, g, TerminationPolicy::dual(1.0, v)?);
        let t = monte_carlo(&cfg, runs)?;
        let ga = genie_monte_carlo(&cfg, runs)?;
        println!(
            "{n:>5} {g:>5} {v:>5} {:>7.4} {:>7.4} {:>7.4} {:>7.3} {:>7.4}",
            t.mean_throughput, t.mean_fraction, t.mean_slots_norm, t.mean_replicas, ga.mean_throughput
        );
    }
    Ok(())
}
