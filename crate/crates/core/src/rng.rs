//! Seeded random streams.
//!
//! Every replicate (or chunk of replicates) draws from its own ChaCha stream
//! keyed by `(master seed, index)`, so results depend only on the seed and
//! the replicate count, never on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// The independent stream number `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Evaluates `f(index, stream(seed, index))` for `index in 0..count` and
/// returns the results in index order.
pub fn map_streams<T, F>(seed: u64, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut StreamRng) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count)
            .into_par_iter()
            .map(|i| f(i, &mut stream(seed, i as u64)))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count)
            .map(|i| f(i, &mut stream(seed, i as u64)))
            .collect()
    }
}

/// Evaluates `f(index)` for `index in 0..count`, results in index order.
pub fn map_indices<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}

/// Splits `total` replicates into chunks of at most `chunk` and runs each
/// chunk on its own stream; returns per-chunk results in order.
pub fn map_chunks<T, F>(seed: u64, total: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut StreamRng) -> T + Sync + Send,
{
    let chunk = chunk.max(1);
    let count = total.div_ceil(chunk);
    map_streams(seed, count, |i, rng| {
        let len = chunk.min(total - i * chunk);
        f(len, rng)
    })
}
