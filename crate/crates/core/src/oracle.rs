//! Exhaustive solvers for tiny instances.
//!
//! Nothing here reuses the solver's distance tables, relation builder or
//! center selection; arithmetic is redone naively so the oracles can check
//! the heuristics rather than agree with them by construction.

use crate::clustering::{CenterSet, ClusteringInstance};
use crate::error::{Error, Result};
use crate::field::{Algebra, Matrix};

/// Default enumeration budget: 2^20 candidates.
pub const DEFAULT_BUDGET: u128 = 1 << 20;

fn naive_distance(x: u8, c: u8, p: u8, q: u32) -> u64 {
    let d = (x as u64 + p as u64 - c as u64) % p as u64;
    if d == 0 {
        0
    } else {
        d.pow(q)
    }
}

fn naive_vector_distance(x: &[u8], c: &[u8], p: u8, q: u32) -> u64 {
    x.iter().zip(c).map(|(&a, &b)| naive_distance(a, b, p, q)).sum()
}

/// Advances a base-`radix` odometer; false once it wraps to all zeros.
fn advance(digits: &mut [usize], radix: &[usize]) -> bool {
    for (d, &r) in digits.iter_mut().zip(radix).rev() {
        *d += 1;
        if *d < r {
            return true;
        }
        *d = 0;
    }
    false
}

fn checked_power(base: u128, exp: usize, budget: u128) -> Result<u128> {
    let mut total: u128 = 1;
    for _ in 0..exp {
        total = total.saturating_mul(base);
        if total > budget {
            return Err(Error::BudgetExceeded { required: total, budget });
        }
    }
    Ok(total)
}

/// A provably optimal factorization and its witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactFactorization {
    pub error: u64,
    pub b: Matrix,
    pub u: Matrix,
    pub v: Matrix,
}

/// Minimum of `Σ ((A − UV) mod p)^q` over all `U ∈ {0,…,p−1}^{m×r}` and
/// all `V`, by enumerating every `U` and choosing each column of `V`
/// optimally among the `p^r` coefficient vectors.
pub fn exact_factorize(a: &Matrix, rank: usize, q: u32, budget: u128) -> Result<ExactFactorization> {
    if rank == 0 {
        return Err(Error::ZeroRank);
    }
    let algebra = a.algebra();
    let p = a.modulus();
    let (m, n) = (a.rows(), a.cols());
    checked_power(p as u128, m * rank, budget)?;

    let coeff_radix = vec![p as usize; rank];
    let mut coeffs: Vec<Vec<u8>> = Vec::new();
    let mut w = vec![0usize; rank];
    loop {
        coeffs.push(w.iter().map(|&x| x as u8).collect());
        if !advance(&mut w, &coeff_radix) {
            break;
        }
    }
    let combine = |x: u8, y: u8| -> (u8, u8) {
        match algebra {
            Algebra::Boolean => (x | y, x & y),
            Algebra::Field(p) => ((x + y) % p, ((x as u16 * y as u16) % p as u16) as u8),
        }
    };

    let columns = a.columns();
    let u_radix = vec![p as usize; m * rank];
    let mut u_digits = vec![0usize; m * rank];
    let mut best: Option<(u64, Vec<usize>, Vec<usize>)> = None;
    loop {
        // products[c][i] = row i of U·coeffs[c]
        let products: Vec<Vec<u8>> = coeffs
            .iter()
            .map(|w| {
                (0..m)
                    .map(|i| {
                        (0..rank).fold(0u8, |acc, t| {
                            let (_, prod) = combine(u_digits[i * rank + t] as u8, w[t]);
                            combine(acc, prod).0
                        })
                    })
                    .collect()
            })
            .collect();
        let mut total = 0u64;
        let mut choice = Vec::with_capacity(n);
        for col in &columns {
            let (d, c) = products
                .iter()
                .enumerate()
                .map(|(c, prod)| (naive_vector_distance(col, prod, p, q), c))
                .min()
                .expect("at least one coefficient vector");
            total += d;
            choice.push(c);
        }
        if best.as_ref().is_none_or(|(e, _, _)| total < *e) {
            best = Some((total, u_digits.clone(), choice));
        }
        if !advance(&mut u_digits, &u_radix) {
            break;
        }
    }

    let (error, u_digits, choice) = best.expect("at least one U");
    let u = Matrix::new(m, rank, algebra, u_digits.iter().map(|&d| d as u8).collect())?;
    let v_cols: Vec<&[u8]> = choice.iter().map(|&c| coeffs[c].as_slice()).collect();
    let v = Matrix::from_columns(algebra, rank, &v_cols)?;
    let b = crate::field::product(&u, &v)?;
    Ok(ExactFactorization { error, b, u, v })
}

/// A provably optimal center set for a clustering instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactClustering {
    pub cost: u64,
    pub centers: CenterSet,
}

/// Exact optimum of a constrained clustering instance.
///
/// Enumerates either every choice of one relation tuple per row (all
/// satisfying center sets) or every assignment of points to clusters with
/// per-row optimal tuples, whichever has fewer candidates.
pub fn exact_cluster(instance: &ClusteringInstance, budget: u128) -> Result<ExactClustering> {
    let m = instance.dim();
    let n = instance.len();
    let k = instance.k();
    let relations = instance.relations();
    let row_sizes: Vec<usize> = (0..m).map(|i| relations.relation(i).len()).collect();
    let by_rows = row_sizes
        .iter()
        .try_fold(1u128, |acc, &s| acc.checked_mul(s as u128).filter(|&t| t <= budget));
    let by_assignments = checked_power(k as u128, n, budget).ok();
    match (by_rows, by_assignments) {
        (Some(r), Some(a)) if a < r => exact_by_assignments(instance),
        (Some(_), _) => exact_by_rows(instance, &row_sizes),
        (None, Some(_)) => exact_by_assignments(instance),
        (None, None) => {
            let required = row_sizes.iter().fold(1u128, |acc, &s| acc.saturating_mul(s as u128));
            let alt = (k as u128).saturating_pow(n as u32);
            Err(Error::BudgetExceeded {
                required: required.min(alt),
                budget,
            })
        }
    }
}

fn exact_by_rows(instance: &ClusteringInstance, row_sizes: &[usize]) -> Result<ExactClustering> {
    let (p, q, k, m) = (instance.modulus(), instance.q(), instance.k(), instance.dim());
    let relations = instance.relations();
    let mut digits = vec![0usize; m];
    let mut best: Option<(u64, Vec<usize>)> = None;
    loop {
        let centers: Vec<Vec<u8>> = (0..k)
            .map(|c| (0..m).map(|i| relations.relation(i).tuple(digits[i])[c]).collect())
            .collect();
        let total: u64 = instance
            .points()
            .map(|x| {
                centers
                    .iter()
                    .map(|c| naive_vector_distance(x, c, p, q))
                    .min()
                    .expect("k ≥ 1")
            })
            .sum();
        if best.as_ref().is_none_or(|(b, _)| total < *b) {
            best = Some((total, digits.clone()));
        }
        if !advance(&mut digits, row_sizes) {
            break;
        }
    }
    let (cost, digits) = best.expect("at least one candidate");
    let tuples: Vec<&[u8]> = (0..m).map(|i| relations.relation(i).tuple(digits[i])).collect();
    Ok(ExactClustering {
        cost,
        centers: CenterSet::from_row_tuples(k, &tuples),
    })
}

fn exact_by_assignments(instance: &ClusteringInstance) -> Result<ExactClustering> {
    let (p, q, k, m, n) = (instance.modulus(), instance.q(), instance.k(), instance.dim(), instance.len());
    let relations = instance.relations();
    let points: Vec<&[u8]> = instance.points().collect();
    let radix = vec![k; n];
    let mut labels = vec![0usize; n];
    let mut best: Option<(u64, Vec<usize>)> = None;
    loop {
        let mut total = 0u64;
        let mut picks = Vec::with_capacity(m);
        for i in 0..m {
            let (g, t) = relations
                .relation(i)
                .iter()
                .enumerate()
                .map(|(t, tuple)| {
                    let g: u64 = points
                        .iter()
                        .zip(&labels)
                        .map(|(x, &j)| naive_distance(x[i], tuple[j], p, q))
                        .sum();
                    (g, t)
                })
                .min()
                .expect("relations are nonempty");
            total += g;
            picks.push(t);
        }
        if best.as_ref().is_none_or(|(b, _)| total < *b) {
            best = Some((total, picks));
        }
        if !advance(&mut labels, &radix) {
            break;
        }
    }
    let (cost, picks) = best.expect("at least one assignment");
    let tuples: Vec<&[u8]> = (0..m).map(|i| relations.relation(i).tuple(picks[i])).collect();
    Ok(ExactClustering {
        cost,
        centers: CenterSet::from_row_tuples(k, &tuples),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{Relation, RelationSet};
    use crate::field::gfp_rank;

    fn gf2() -> Algebra {
        Algebra::field(2).unwrap()
    }

    #[test]
    fn zero_matrix() {
        let a = Matrix::zeros(3, 4, gf2()).unwrap();
        for r in 1..=2 {
            assert_eq!(exact_factorize(&a, r, 1, DEFAULT_BUDGET).unwrap().error, 0);
        }
    }

    #[test]
    fn identity_rank_one_by_independent_enumeration() {
        // every rank-≤1 binary matrix is u·vᵀ for u, v ∈ {0,1}³
        let a = Matrix::identity(3, gf2()).unwrap();
        let mut best = u64::MAX;
        for u in 0..8u32 {
            for v in 0..8u32 {
                let mut err = 0;
                for i in 0..3 {
                    for j in 0..3 {
                        let b = ((u >> i) & 1) & ((v >> j) & 1);
                        err += (b != (i == j) as u32) as u64;
                    }
                }
                best = best.min(err);
            }
        }
        assert_eq!(best, 2);
        let exact = exact_factorize(&a, 1, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(exact.error, best);
        assert_eq!(crate::field::entrywise_error(&a, &exact.b, 1).unwrap(), 2);
    }

    #[test]
    fn rank_two_matrix_is_exact() {
        let a = Matrix::from_rows(gf2(), &[[1, 0, 1], [0, 1, 1], [1, 1, 0]]).unwrap();
        assert_eq!(gfp_rank(&a).unwrap(), 2);
        let exact = exact_factorize(&a, 2, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(exact.error, 0);
        assert_eq!(exact.b, a);
    }

    #[test]
    fn factorize_budget() {
        let a = Matrix::zeros(6, 4, gf2()).unwrap();
        assert!(matches!(
            exact_factorize(&a, 4, 1, DEFAULT_BUDGET),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn cluster_single_point_full_relation() {
        let all: Vec<[u8; 2]> = (0..3).flat_map(|a| (0..3).map(move |b| [a, b])).collect();
        let rel = RelationSet::uniform(2, 3, Relation::new(2, 3, &all).unwrap());
        let inst = ClusteringInstance::new(&[[2u8, 1]], 2, rel, 1).unwrap();
        assert_eq!(exact_cluster(&inst, DEFAULT_BUDGET).unwrap().cost, 0);
    }

    #[test]
    fn cluster_zero_only_relation() {
        let rel = RelationSet::uniform(3, 5, Relation::new(2, 5, &[[0u8, 0]]).unwrap());
        let pts = [[1u8, 2, 4], [0, 3, 0]];
        for q in [1, 2] {
            let inst = ClusteringInstance::new(&pts, 2, rel.clone(), q).unwrap();
            let exact = exact_cluster(&inst, DEFAULT_BUDGET).unwrap();
            let want: u64 = pts.iter().flatten().map(|&v| (v as u64).pow(q)).sum();
            assert_eq!(exact.cost, want);
            assert!(exact.centers.iter().all(|c| c.iter().all(|&v| v == 0)));
        }
    }

    #[test]
    fn both_enumerations_agree() {
        let tuples = [[0u8, 0, 1], [1, 1, 0], [0, 1, 1], [1, 0, 0]];
        let rel = RelationSet::uniform(3, 2, Relation::new(3, 2, &tuples).unwrap());
        let pts = [[1u8, 0, 1], [0, 0, 1], [1, 1, 1], [0, 1, 0]];
        let inst = ClusteringInstance::new(&pts, 3, rel, 1).unwrap();
        let rows = exact_by_rows(&inst, &[4, 4, 4]).unwrap();
        let assigns = exact_by_assignments(&inst).unwrap();
        assert_eq!(rows.cost, assigns.cost);
    }

    #[test]
    fn cluster_budget() {
        let all: Vec<[u8; 2]> = (0..2).flat_map(|a| (0..2).map(move |b| [a, b])).collect();
        let rel = RelationSet::uniform(30, 2, Relation::new(2, 2, &all).unwrap());
        let pts: Vec<Vec<u8>> = (0..30).map(|j| (0..30).map(|i| ((i + j) % 2) as u8).collect()).collect();
        let inst = ClusteringInstance::new(&pts, 2, rel, 1).unwrap();
        assert!(matches!(exact_cluster(&inst, 1 << 10), Err(Error::BudgetExceeded { .. })));
    }
}
