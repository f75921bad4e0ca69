#![allow(dead_code)]

use frameless::ContentionGraph;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// A random hand-built graph: each slot holds every user independently with
/// probability `density`, and is erased with probability `erase`.
pub struct RandomGraph {
    pub n_users: u32,
    pub slots: Vec<(Vec<u32>, bool)>,
}

impl RandomGraph {
    pub fn generate(seed: u64, max_users: u32, max_slots: usize, density: f64, erase: f64) -> Self {
        let mut rng = StdRng::seed_from_u64(seed);
        let n_users = rng.gen_range(1..=max_users);
        let n_slots = rng.gen_range(1..=max_slots);
        let slots = (0..n_slots)
            .map(|_| {
                let members = (0..n_users).filter(|_| rng.gen_bool(density)).collect();
                (members, rng.gen_bool(erase))
            })
            .collect();
        RandomGraph { n_users, slots }
    }

    pub fn build(&self) -> ContentionGraph {
        let mut g = ContentionGraph::new(self.n_users);
        for (members, erased) in &self.slots {
            g.add_slot(members, *erased).unwrap();
        }
        g
    }
}

/// Users left undecoded by any peeling order: the union of all stopping sets,
/// where a stopping set is a user subset that no clean slot meets exactly
/// once. Exhaustive over subsets, so only for small graphs.
pub fn largest_stopping_set(g: &RandomGraph) -> u32 {
    assert!(g.n_users <= 16);
    let masks: Vec<u32> = g
        .slots
        .iter()
        .filter(|(_, erased)| !erased)
        .map(|(m, _)| m.iter().fold(0u32, |acc, &u| acc | 1 << u))
        .collect();
    let mut union = 0u32;
    for s in 0u32..(1 << g.n_users) {
        if masks.iter().all(|&m| (m & s).count_ones() != 1) {
            union |= s;
        }
    }
    union
}

/// Decoded-user bitmask of a peeled graph.
pub fn resolved_mask(g: &ContentionGraph) -> u32 {
    g.resolved_users().iter().fold(0u32, |acc, &u| acc | 1 << u)
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
