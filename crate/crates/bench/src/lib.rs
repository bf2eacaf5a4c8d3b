//! Inputs shared by the benchmarks.

use segclust_core::signal::{generate, Cluster, PiecewiseSpec};
use segclust_core::{PenaltySpec, Result, Signal, DEFAULT_K};

/// A noisy signal of length `n` with ten equal segments on three levels.
pub fn bench_signal(n: usize, seed: u64) -> Result<Signal> {
    let levels = [0.0, 2.0, 4.0];
    let mut clusters: Vec<Cluster> = levels
        .iter()
        .map(|&level| Cluster { level, segments: Vec::new() })
        .collect();
    let pieces = 10;
    for p in 0..pieces {
        let a = p * n / pieces + 1;
        let b = (p + 1) * n / pieces;
        clusters[p % 3].segments.push((a, b));
    }
    generate(&PiecewiseSpec::new(clusters, n)?, 1.0, seed)
}

pub fn bench_penalty(n: usize, max_changes: usize) -> Result<PenaltySpec> {
    PenaltySpec::new(n, DEFAULT_K, 1.0, max_changes)
}
