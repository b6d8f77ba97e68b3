//! Shared fixtures for the criterion benchmarks.

use dcgpann::{data, Dataset, Genome};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Template genome for `n_inputs` features with seeded weights.
pub fn template(n_inputs: usize, seed: u64) -> Genome {
    Genome::template(n_inputs, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Preprocessed Friedman #1 data.
pub fn friedman(n_samples: usize) -> Dataset {
    data::preprocess(&data::friedman1(n_samples, 1.0, 7).expect("valid size")).expect("non-constant target")
}
