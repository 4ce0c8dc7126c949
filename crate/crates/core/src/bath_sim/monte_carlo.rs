//! Naive and exponentially tilted Monte Carlo for bath energy events.

use rayon::prelude::*;

use crate::energy_laws::{EnergyLaw, SumSampler};
use crate::rng::{RngStream, StreamRng};

/// Samples per chunk; chunk `k` draws from `stream.child(k)`.
pub const MC_CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct ChunkStats {
    pub hits: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl ChunkStats {
    fn merge(self, other: ChunkStats) -> ChunkStats {
        ChunkStats {
            hits: self.hits + other.hits,
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
        }
    }
}

/// Runs `samples` draws in fixed chunks and merges the partial statistics
/// in chunk order, so the result is the same for any thread count.
pub(crate) fn run_chunks<F>(samples: u64, stream: RngStream, per_sample: F) -> ChunkStats
where
    F: Fn(&mut StreamRng) -> Option<f64> + Sync,
{
    let chunks = samples.div_ceil(MC_CHUNK);
    let parts: Vec<ChunkStats> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream.child(k).rng();
            let len = MC_CHUNK.min(samples - k * MC_CHUNK);
            let mut stats = ChunkStats::default();
            for _ in 0..len {
                if let Some(w) = per_sample(&mut rng) {
                    stats.hits += 1;
                    stats.sum += w;
                    stats.sum_sq += w * w;
                }
            }
            stats
        })
        .collect();
    parts.into_iter().fold(ChunkStats::default(), ChunkStats::merge)
}

/// Window on the molecule-summed excess energy `sum_j (H_j - ground)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ExcessWindow {
    pub lower: Option<f64>,
    pub upper: f64,
    pub slack: f64,
}

impl ExcessWindow {
    pub fn contains(&self, excess: f64) -> bool {
        excess <= self.upper + self.slack
            && self.lower.is_none_or(|lo| excess >= lo - self.slack)
    }
}

/// Fraction of `n`-molecule samples whose excess lands in the window.
pub(crate) fn naive(
    law: &EnergyLaw,
    n: usize,
    window: ExcessWindow,
    samples: u64,
    stream: RngStream,
) -> ChunkStats {
    let sampler = SumSampler::new(law);
    let ground = law.ground();
    run_chunks(samples, stream, |rng| {
        let excess = sampler.sample_excess(n as u64, ground, rng);
        window.contains(excess).then_some(1.0)
    })
}

/// Draws from the law tilted by `beta` and records
/// `exp(beta (excess - reference))` on hits, where `reference` is the window
/// top; the full importance weight is that times
/// `exp(n log Z_shifted + beta reference)`.
pub(crate) fn tilted(
    tilted_law: &EnergyLaw,
    beta: f64,
    n: usize,
    window: ExcessWindow,
    samples: u64,
    stream: RngStream,
) -> ChunkStats {
    let sampler = SumSampler::new(tilted_law);
    let ground = tilted_law.ground();
    run_chunks(samples, stream, |rng| {
        let excess = sampler.sample_excess(n as u64, ground, rng);
        window
            .contains(excess)
            .then(|| (beta * (excess - window.upper)).exp())
    })
}
