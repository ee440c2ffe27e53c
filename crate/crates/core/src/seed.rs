//! Deterministic seed derivation.
//!
//! Experiments, initial-state draws, and per-agent RNGs all get their own
//! seed derived from the run seed with SplitMix64. The derivation is plain
//! integer arithmetic, so records reproduce across platforms and builds.

/// SplitMix64 mixing step.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent stream seed from a base seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}

/// Seed for experiment `index` within a run.
pub fn experiment_seed(run_seed: u64, index: usize) -> u64 {
    derive_seed(run_seed, 1 + index as u64)
}

/// Stream id 0 within an experiment: initial-state sampling.
pub fn init_seed(experiment_seed: u64) -> u64 {
    derive_seed(experiment_seed, 0)
}

/// Stream id 1+k within an experiment: agent k's decision RNG.
pub fn agent_seed(experiment_seed: u64, agent_index: usize) -> u64 {
    derive_seed(experiment_seed, 1 + agent_index as u64)
}
