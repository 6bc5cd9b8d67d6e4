//! Seeded, thread-count independent Monte Carlo.
//!
//! Draw number `i` belongs to chunk `i / CHUNK`; chunk `c` uses a ChaCha8
//! generator seeded with the run seed and switched to stream `c`. Results
//! are concatenated in chunk order, so the output depends only on the seed
//! and the number of draws, never on how rayon schedules the chunks.

use std::collections::{BTreeMap, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const CHUNK: usize = 1 << 14;

/// The generator for chunk `chunk` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn chunks(n: usize) -> impl IndexedParallelIterator<Item = (u64, usize)> {
    let count = n.div_ceil(CHUNK);
    (0..count).into_par_iter().map(move |c| {
        let len = CHUNK.min(n - c * CHUNK);
        (c as u64, len)
    })
}

/// `n` draws of `f`, in a reproducible order.
pub fn par_samples<T, F>(n: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    let parts: Vec<Vec<T>> = chunks(n)
        .map(|(c, len)| {
            let mut rng = chunk_rng(seed, c);
            (0..len).map(|_| f(&mut rng)).collect()
        })
        .collect();
    parts.into_iter().flatten().collect()
}

/// Histogram of `n` draws of `f`.
pub fn par_histogram<K, F>(n: usize, seed: u64, f: F) -> BTreeMap<K, u64>
where
    K: Ord + std::hash::Hash + Eq + Send,
    F: Fn(&mut ChaCha8Rng) -> K + Sync,
{
    let parts: Vec<HashMap<K, u64>> = chunks(n)
        .map(|(c, len)| {
            let mut rng = chunk_rng(seed, c);
            let mut h = HashMap::new();
            for _ in 0..len {
                *h.entry(f(&mut rng)).or_insert(0) += 1;
            }
            h
        })
        .collect();
    let mut out = BTreeMap::new();
    for h in parts {
        for (k, v) in h {
            *out.entry(k).or_insert(0) += v;
        }
    }
    out
}

/// Runs `f` on a pool of `threads` workers (0 lets rayon decide).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    if threads == 0 {
        return f();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
        .install(f)
}
