#![allow(dead_code)]

use lrmf_core::{product, Algebra, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gf(p: u32) -> Algebra {
    Algebra::field(p).unwrap()
}

/// Uniform residues.
pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, algebra: Algebra) -> Matrix {
    let p = algebra.modulus();
    let data = (0..rows * cols).map(|_| rng.random_range(0..p)).collect();
    Matrix::new(rows, cols, algebra, data).unwrap()
}

/// `U₀·V₀` with uniform random factors.
pub fn planted(rng: &mut ChaCha8Rng, rows: usize, cols: usize, rank: usize, algebra: Algebra) -> Matrix {
    let u = random_matrix(rng, rows, rank, algebra);
    let v = random_matrix(rng, rank, cols, algebra);
    product(&u, &v).unwrap()
}
