//! Large-population limit: resolved fraction and throughput against the
//! number of slots per user, showing the avalanche.
//!
//! Usage: `cargo run --example asymptotic -- [G]`

use frameless::asymptotic::linear_grid;
use frameless::sweep_curve;

fn main() -> frameless::Result<()> {
    let g: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3.12);
    let curve = sweep_curve(g, &linear_grid(0.5, 1.5, 0.001))?;

    for p in curve.points.iter().step_by(50) {
        let bar = "#".repeat((p.throughput * 40.0).round() as usize);
        println!("M/N={:.3} P_R={:.3} T={:.3} {bar}", p.ratio, p.p_resolve, p.throughput);
    }
    let best = curve.max_throughput();
    println!("\npeak T={:.4} at M/N={:.3}", best.throughput, best.ratio);
    match curve.avalanche() {
        Some((lo, hi)) => println!(
            "avalanche between M/N={:.3} and {:.3}: P_R {:.3} -> {:.3}",
            lo.ratio, hi.ratio, lo.p_resolve, hi.p_resolve
        ),
        None => println!("no avalanche for G={g}"),
    }
    Ok(())
}
