//! Deterministic, splittable random streams.
//!
//! Every randomized computation is partitioned into fixed-size chunks. Chunk
//! `c` of a computation labelled `label` under master seed `seed` draws from
//! a ChaCha8 stream keyed by `(seed, label)` with stream id `c`, so results do
//! not depend on how many worker threads process the chunks.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Samples per chunk for all Monte Carlo work.
pub const CHUNK_SIZE: usize = 1 << 16;

/// Stable 64-bit label for a named computation.
pub fn label(name: &str) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in name.as_bytes() {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

/// The generator for one chunk.
pub fn stream(seed: u64, label: u64, chunk: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&label.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(chunk);
    rng
}

/// Derive a sub-seed, e.g. for the i-th instance of a randomized suite.
pub fn derive_seed(seed: u64, label: u64, index: u64) -> u64 {
    stream(seed, label, index).random()
}

/// Split `0..total` into consecutive chunks of `chunk_size`.
pub fn chunk_ranges(total: usize, chunk_size: usize) -> Vec<Range<usize>> {
    let chunk_size = chunk_size.max(1);
    (0..total.div_ceil(chunk_size))
        .map(|c| c * chunk_size..((c + 1) * chunk_size).min(total))
        .collect()
}

/// Run `work` over every chunk in parallel and return the per-chunk results
/// in chunk order.
pub fn par_chunks<T, F>(total: usize, chunk_size: usize, seed: u64, label: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, Range<usize>) -> T + Sync,
{
    chunk_ranges(total, chunk_size)
        .into_par_iter()
        .enumerate()
        .map(|(c, range)| {
            let mut rng = stream(seed, label, c as u64);
            work(&mut rng, range)
        })
        .collect()
}

/// Write a uniform point of the closed unit ball of dimension `out.len()`.
pub fn unit_ball_point<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    let n = out.len();
    if n == 1 {
        out[0] = rng.random_range(-1.0..1.0);
        return;
    }
    let norm = loop {
        let mut s = 0.0;
        for x in out.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *x = g;
            s += g * g;
        }
        if s > 0.0 {
            break s.sqrt();
        }
    };
    let u: f64 = rng.random();
    let radius = u.powf(1.0 / n as f64);
    for x in out.iter_mut() {
        *x *= radius / norm;
    }
}

/// Uniform point of the real ball of radius `radius` by rejection from the
/// enclosing cube.
pub fn ball_point_rejection<R: Rng + ?Sized>(rng: &mut R, radius: f64, out: &mut [f64]) {
    loop {
        let mut s = 0.0;
        for x in out.iter_mut() {
            *x = rng.random_range(-1.0..1.0);
            s += *x * *x;
        }
        if s <= 1.0 {
            break;
        }
    }
    for x in out.iter_mut() {
        *x *= radius;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_range() {
        let r = chunk_ranges(10, 4);
        assert_eq!(r, vec![0..4, 4..8, 8..10]);
        assert!(chunk_ranges(0, 4).is_empty());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| 0).scan(stream(42, 7, 3), |r, _| Some(r.random())).collect();
        let b: Vec<u64> = (0..4).map(|_| 0).scan(stream(42, 7, 3), |r, _| Some(r.random())).collect();
        let c: Vec<u64> = (0..4).map(|_| 0).scan(stream(42, 7, 4), |r, _| Some(r.random())).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn par_chunks_independent_of_thread_count() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| par_chunks(1000, 64, 1, 2, |rng, r| (r.start, rng.random::<u64>())))
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn ball_points_inside() {
        let mut rng = stream(1, 1, 0);
        let mut p = [0.0; 5];
        for _ in 0..1000 {
            unit_ball_point(&mut rng, &mut p);
            assert!(p.iter().map(|x| x * x).sum::<f64>() <= 1.0 + 1e-12);
            ball_point_rejection(&mut rng, 0.5, &mut p[..2]);
            assert!(p[..2].iter().map(|x| x * x).sum::<f64>() <= 0.25 + 1e-12);
        }
    }
}
