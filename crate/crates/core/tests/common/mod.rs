//! Shared draw helpers for the randomized test suites.

use rand_chacha::ChaCha8Rng;

use siggame::ModelParams;
use siggame::oracle::{SearchSpace, sample_params};

/// Prior and grade accuracy satisfying the standing assumptions, sampled
/// away from exact boundaries.
pub fn draw_no_test(rng: &mut ChaCha8Rng) -> ModelParams {
    sample_params(SearchSpace::NoTest, rng)
}

/// Adds a test accuracy that is decisive on its own (delta >= 1 - p).
pub fn draw_with_test(rng: &mut ChaCha8Rng) -> ModelParams {
    sample_params(SearchSpace::WithTest, rng)
}

/// Decisive corners but possibly an indecisive score (delta down to 1/2).
pub fn draw_relaxed(rng: &mut ChaCha8Rng) -> ModelParams {
    sample_params(SearchSpace::Relaxed, rng)
}
