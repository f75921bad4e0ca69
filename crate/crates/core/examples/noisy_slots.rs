//! Throughput when slots are independently wiped out by noise.
//!
//! Usage: `cargo run --release --example noisy_slots -- [runs]`

use frameless::{monte_carlo, RunConfig, TerminationPolicy};

fn main() -> frameless::Result<()> {
    let runs: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let base = RunConfig::new(100, 2.83, TerminationPolicy::fraction_only(0.87)?);
    let clean = monte_carlo(&base, runs)?;
    println!("{:>5} {:>8} {:>8} {:>8}", "P_e", "T", "T/T(0)", "1-P_e");
    for pe in [0.0, 0.1, 0.2, 0.3, 0.5] {
        let cfg = RunConfig {
            erasure_prob: pe,
            ..base.clone()
        };
        let s = monte_carlo(&cfg, runs)?;
        println!(
            "{pe:>5} {:>8.4} {:>8.4} {:>8.2}",
            s.mean_throughput,
            s.pooled_throughput() / clean.pooled_throughput(),
            1.0 - pe
        );
    }
    Ok(())
}
