//! Best-of-restarts low-rank factorization over GF(p) or the Boolean semiring.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::clustering::ClusteringRun;
use crate::error::{Error, Result};
use crate::field::Matrix;
use crate::reduction::{decode, encode, Encoded, FactorizationResult};

pub const DEFAULT_RESTARTS: usize = 10;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th child stream of `master`:
/// `splitmix64(master ^ splitmix64(index))`.
///
/// Child seeds depend only on `(master, index)`, so restarts can run in any
/// order and adding restarts leaves earlier ones unchanged.
#[inline]
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// One solver run on an encoded instance, decoded back to factors.
pub fn run_restart(a: &Matrix, encoded: &Encoded, seed: u64) -> Result<(FactorizationResult, ClusteringRun)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let run = encoded.instance.alg_clus(&mut rng)?;
    let mut result = decode(a, &run.centers, &encoded.ordering, encoded.instance.q())?;
    debug_assert_eq!(result.error, run.cost);
    result.seed = seed;
    result.iterations = vec![run.iterations];
    Ok((result, run))
}

/// Rank-`r` factorization of `a`, best of `restarts` solver runs.
///
/// Restart `i` is seeded with `derive_seed(seed, i)`. The lowest error wins,
/// ties going to the earliest restart. Over a Boolean matrix this yields a
/// Boolean factorization, over GF(p) a GF(p) one.
pub fn lrmf(a: &Matrix, rank: usize, q: u32, restarts: usize, seed: u64) -> Result<FactorizationResult> {
    if restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be at least 1".into()));
    }
    let encoded = encode(a, rank, q)?;
    let mut best: Option<FactorizationResult> = None;
    let mut iterations = Vec::with_capacity(restarts);
    for i in 0..restarts {
        let (result, run) = run_restart(a, &encoded, derive_seed(seed, i as u64))?;
        iterations.push(run.iterations);
        if best.as_ref().is_none_or(|b| result.error < b.error) {
            best = Some(result);
        }
    }
    let mut best = best.expect("at least one restart");
    best.seed = seed;
    best.restarts = restarts;
    best.iterations = iterations;
    Ok(best)
}
