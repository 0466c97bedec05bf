//! Seeded instance generators and a rank-bound audit shared by the
//! acceptance suite.

use std::cell::RefCell;

use lrmf_core::{derive_seed, gfp_rank, product, Algebra, FactorizationResult, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Master seed of the acceptance schedule.
pub const SUITE_SEED: u64 = 0x5EED_0001;

/// Seed of instance `index` within `criterion`.
pub fn schedule(criterion: u64, index: u64) -> u64 {
    derive_seed(derive_seed(SUITE_SEED, criterion), index)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform residues; for p = 2 every entry is a fair coin.
pub fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, algebra: Algebra) -> Matrix {
    let p = algebra.modulus();
    let data = (0..rows * cols).map(|_| rng.random_range(0..p)).collect();
    Matrix::new(rows, cols, algebra, data).expect("positive dimensions")
}

/// `U₀·V₀` with uniform factors of inner dimension `rank`.
pub fn planted(seed: u64, rows: usize, cols: usize, rank: usize, algebra: Algebra) -> Matrix {
    let mut r = rng(seed);
    let u = uniform_matrix(&mut r, rows, rank, algebra);
    let v = uniform_matrix(&mut r, rank, cols, algebra);
    product(&u, &v).expect("conforming factors")
}

/// `blocks` planted Boolean blocks of size `rows × cols` on the diagonal.
pub fn block_diagonal(seed: u64, blocks: usize, rows: usize, cols: usize, rank: usize) -> Matrix {
    let mut r = rng(seed);
    let width = blocks * cols;
    let mut data = vec![0u8; blocks * rows * width];
    for b in 0..blocks {
        let u = uniform_matrix(&mut r, rows, rank, Algebra::Boolean);
        let v = uniform_matrix(&mut r, rank, cols, Algebra::Boolean);
        let block = product(&u, &v).expect("conforming factors");
        for i in 0..rows {
            for j in 0..cols {
                data[(b * rows + i) * width + b * cols + j] = block.get(i, j);
            }
        }
    }
    Matrix::new(blocks * rows, width, Algebra::Boolean, data).expect("positive dimensions")
}

/// Problems with a claimed rank-`rank` factorization: `U` too wide,
/// `U·V ≠ B`, or (over a field) `B` of rank above `rank`.
pub fn rank_bound_issues(b: &Matrix, u: &Matrix, v: &Matrix, rank: usize) -> Vec<String> {
    let mut issues = Vec::new();
    if u.cols() > rank {
        issues.push(format!("U has {} columns, bound {rank}", u.cols()));
    }
    match product(u, v) {
        Ok(uv) if &uv == b => {}
        Ok(_) => issues.push("U·V differs from B".into()),
        Err(e) => issues.push(format!("U·V undefined: {e}")),
    }
    if !b.algebra().is_boolean() {
        match gfp_rank(b) {
            Ok(r) if r <= rank => {}
            Ok(r) => issues.push(format!("rank(B) = {r}, bound {rank}")),
            Err(e) => issues.push(format!("rank failed: {e}")),
        }
    }
    issues
}

/// Tallies rank-bound checks over every factorization it is shown.
#[derive(Debug, Default)]
pub struct RankAudit {
    checked: RefCell<usize>,
    violations: RefCell<Vec<String>>,
}

impl RankAudit {
    pub fn record(&self, label: &str, b: &Matrix, u: &Matrix, v: &Matrix, rank: usize) {
        *self.checked.borrow_mut() += 1;
        for issue in rank_bound_issues(b, u, v, rank) {
            self.violations.borrow_mut().push(format!("{label}: {issue}"));
        }
    }

    pub fn result(&self, label: &str, res: &FactorizationResult, rank: usize) {
        self.record(label, &res.b, &res.u, &res.v, rank);
    }

    pub fn checked(&self) -> usize {
        *self.checked.borrow()
    }

    pub fn violations(&self) -> Vec<String> {
        self.violations.borrow().clone()
    }
}
