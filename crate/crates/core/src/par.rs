// SPDX-License-Identifier: Apache-2.0

//! Chunked data-parallel evaluation with a sequential fallback.
//!
//! Work is split into fixed-size chunks, each with its own derived seed, so
//! results are identical whichever execution mode runs them.

use crate::rng::{derive_seed, stream, RandomStream};

/// Trials per Monte Carlo chunk.
pub const CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    #[default]
    Auto,
}

impl Parallelism {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Auto
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(items: &[T], mode: Parallelism, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = mode;
    items.iter().map(f).collect()
}

/// Runs `trials` Monte Carlo trials in seeded chunks. `f` receives the chunk
/// stream and the number of trials in the chunk; per-chunk results come back
/// in chunk order.
pub fn chunked_trials<R, F>(trials: u64, seed: u64, mode: Parallelism, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(&mut RandomStream, u64) -> R + Sync + Send,
{
    let chunks: Vec<(u64, u64)> = (0..trials.div_ceil(CHUNK))
        .map(|c| (c, CHUNK.min(trials - c * CHUNK)))
        .collect();
    map(&chunks, mode, |&(idx, len)| {
        let mut rng = stream(derive_seed(seed, idx));
        f(&mut rng, len)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn modes_agree() {
        let run = |mode| {
            chunked_trials(200_000, 3, mode, |rng, n| {
                (0..n).filter(|_| rng.random_bool(0.3)).count()
            })
        };
        assert_eq!(run(Parallelism::Sequential), run(Parallelism::Auto));
        assert_eq!(run(Parallelism::Auto).len(), 4);
    }

    #[test]
    fn zero_trials() {
        let out: Vec<u64> = chunked_trials(0, 1, Parallelism::Auto, |_, n| n);
        assert!(out.is_empty());
    }
}
