//! Cost of a terminating beacon that occupies several slots.
//!
//! Usage: `cargo run --release --example beacon_overhead -- [runs]`

use frameless::access::{p_miss, slot_access_probability};
use frameless::experiments::beacon_experiment;
use frameless::{RunConfig, TerminationPolicy};

fn main() -> frameless::Result<()> {
    let runs: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let n = 100;
    let p_a = slot_access_probability(2.89, n)?;
    for l in 1..=4 {
        println!("L={l}: a user misses the whole beacon with probability {:.3e}", p_miss(p_a, l));
    }

    let base = RunConfig::new(n as u32, 2.89, TerminationPolicy::fraction_only(0.85)?);
    for l in [1, 3] {
        let sweep = beacon_experiment(&base, l, &[2.79, 2.89, 2.99], &[0.8, 0.85, 0.9], runs)?;
        let b = sweep.best();
        println!(
            "L={l}: best G={} V={} T={:.4}",
            b.target_degree,
            b.threshold_v.unwrap_or(1.0),
            b.stats.mean_throughput
        );
    }
    Ok(())
}
