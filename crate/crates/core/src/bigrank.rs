//! Large-rank factorization by partitioning columns into blocks.
//!
//! Columns are grouped with Lloyd's k-means into `d' = r_s·d` clusters, the
//! cluster centers are grouped again into meta-clusters of at most `r_s`
//! centers each, and every meta-cluster's columns are factorized with rank
//! budget equal to its size. The block outputs are merged by replacing each
//! input column with the nearest block output column.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::factorizer::{derive_seed, lrmf};
use crate::field::{Matrix, Metric};
use crate::reduction::{center_count, FactorizationResult};

pub const DEFAULT_BLOCK_RANK: usize = 5;
pub const DEFAULT_KMEANS_ITERS: usize = 100;

const KMEANS_SALT: u64 = 0x6B6D_6561_6E73_0001;
const BLOCK_SALT: u64 = 0x626C_6F63_6B73_0002;

/// Result of [`kmeans`].
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansOutcome {
    /// Cluster index per point.
    pub assignment: Vec<usize>,
    /// One center per cluster; the mean of its members.
    pub centers: Vec<Vec<f64>>,
    /// Sum of squared Euclidean distances to the assigned centers.
    pub inertia: f64,
    /// Inertia right after each assignment step.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub requested_k: usize,
}

impl KMeansOutcome {
    pub fn k(&self) -> usize {
        self.centers.len()
    }

    /// Member indices per cluster, ascending.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.centers.len()];
        for (i, &c) in self.assignment.iter().enumerate() {
            out[c].push(i);
        }
        out
    }
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest_center(x: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(x, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn distinct_count(points: &[Vec<f64>]) -> usize {
    points
        .iter()
        .map(|p| p.iter().map(|v| v.to_bits()).collect::<Vec<u64>>())
        .collect::<HashSet<_>>()
        .len()
}

fn kmeans_plus_plus<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centers = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        if total <= 0.0 {
            break;
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = None;
        for (i, &w) in d2.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            acc += w;
            pick = Some(i);
            if acc > target {
                break;
            }
        }
        let chosen = points[pick.expect("positive total weight")].clone();
        for (slot, p) in d2.iter_mut().zip(points) {
            *slot = slot.min(sq_dist(p, &chosen));
        }
        centers.push(chosen);
    }
    centers
}

/// Lloyd's k-means from a k-means++ start.
///
/// Stops when the assignment stops changing or after `max_iters` rounds.
/// A cluster that empties out is re-seeded with the point farthest from its
/// center (taken from a cluster with at least two members). `k` larger than
/// the number of distinct points is reduced to that number.
pub fn kmeans<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, rng: &mut R, max_iters: usize) -> Result<KMeansOutcome> {
    if k == 0 {
        return Err(Error::InvalidParameter("k-means needs k ≥ 1".into()));
    }
    let Some(first) = points.first() else {
        return Err(Error::InvalidParameter("k-means needs at least one point".into()));
    };
    let dim = first.len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch("k-means points differ in dimension".into()));
    }
    let requested_k = k;
    let k = k.min(distinct_count(points));
    let mut centers = kmeans_plus_plus(points, k, rng);
    let k = centers.len();

    let mut assignment: Vec<usize> = Vec::new();
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iters.max(1) {
        iterations += 1;
        let mut dists = Vec::with_capacity(points.len());
        let next: Vec<usize> = points
            .iter()
            .map(|p| {
                let (c, d) = nearest_center(p, &centers);
                dists.push(d);
                c
            })
            .collect();
        history.push(dists.iter().sum());
        if next == assignment {
            converged = true;
            break;
        }
        assignment = next;

        let mut sizes = vec![0usize; k];
        for &c in &assignment {
            sizes[c] += 1;
        }
        for empty in 0..k {
            if sizes[empty] != 0 {
                continue;
            }
            let donor = (0..points.len())
                .filter(|&i| sizes[assignment[i]] > 1)
                .fold(None, |best: Option<usize>, i| match best {
                    Some(b) if dists[b] >= dists[i] => Some(b),
                    _ => Some(i),
                });
            if let Some(i) = donor {
                sizes[assignment[i]] -= 1;
                assignment[i] = empty;
                sizes[empty] = 1;
                dists[i] = 0.0;
            }
        }

        let mut sums = vec![vec![0.0; dim]; k];
        for (p, &c) in points.iter().zip(&assignment) {
            for (s, v) in sums[c].iter_mut().zip(p) {
                *s += v;
            }
        }
        for (c, sum) in sums.into_iter().enumerate() {
            if sizes[c] > 0 {
                centers[c] = sum.into_iter().map(|s| s / sizes[c] as f64).collect();
            }
        }
    }

    // Only reachable without convergence: drop clusters nobody belongs to.
    let mut used = vec![false; k];
    for &c in &assignment {
        used[c] = true;
    }
    if used.iter().any(|u| !u) {
        let mut remap = vec![usize::MAX; k];
        let mut kept = Vec::new();
        for c in 0..k {
            if used[c] {
                remap[c] = kept.len();
                kept.push(centers[c].clone());
            }
        }
        for c in assignment.iter_mut() {
            *c = remap[*c];
        }
        centers = kept;
    }
    let inertia = points
        .iter()
        .zip(&assignment)
        .map(|(p, &c)| sq_dist(p, &centers[c]))
        .sum();
    Ok(KMeansOutcome {
        assignment,
        centers,
        inertia,
        inertia_history: history,
        iterations,
        converged,
        requested_k,
    })
}

/// Meta-clusters of first-stage centers, each holding at most `r_s` of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaClusters {
    /// Indices into the input centers.
    pub groups: Vec<Vec<usize>>,
    /// Number of refinement rounds performed.
    pub rounds: usize,
    /// Rounds where k-means failed to split and an index split was forced.
    pub fallbacks: usize,
}

/// Groups `centers` into `d` clusters, then keeps splitting any group larger
/// than `r_s` with k-means on `⌈|Z|/r_s⌉` clusters until none remains.
pub fn split_meta_clusters<R: Rng + ?Sized>(
    centers: &[Vec<f64>],
    d: usize,
    r_s: usize,
    rng: &mut R,
) -> Result<MetaClusters> {
    if d == 0 || r_s == 0 {
        return Err(Error::InvalidParameter("d and r_s must be at least 1".into()));
    }
    let mut groups = kmeans(centers, d, rng, DEFAULT_KMEANS_ITERS)?.clusters();
    let mut rounds = 0;
    let mut fallbacks = 0;
    while let Some(pos) = groups.iter().position(|g| g.len() > r_s) {
        rounds += 1;
        let group = groups[pos].clone();
        let parts = group.len().div_ceil(r_s);
        let members: Vec<Vec<f64>> = group.iter().map(|&i| centers[i].clone()).collect();
        let mut split: Vec<Vec<usize>> = kmeans(&members, parts, rng, DEFAULT_KMEANS_ITERS)?
            .clusters()
            .into_iter()
            .map(|c| c.into_iter().map(|i| group[i]).collect())
            .collect();
        if split.len() < 2 {
            fallbacks += 1;
            split = balanced_chunks(&group, parts);
        }
        groups.splice(pos..=pos, split);
    }
    Ok(MetaClusters {
        groups,
        rounds,
        fallbacks,
    })
}

fn balanced_chunks(items: &[usize], parts: usize) -> Vec<Vec<usize>> {
    let base = items.len() / parts;
    let extra = items.len() % parts;
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for i in 0..parts {
        let len = base + usize::from(i < extra);
        out.push(items[start..start + len].to_vec());
        start += len;
    }
    out
}

/// One block of the column partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    /// First-stage clusters (by index) grouped into this block.
    pub meta_cluster: Vec<usize>,
    /// Input columns covered, ascending.
    pub columns: Vec<usize>,
    /// Rank budget `|Z|`.
    pub rank: usize,
}

/// The blocks; together their columns partition the input columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPlan {
    pub blocks: Vec<Block>,
    pub first_stage_clusters: usize,
    pub meta: MetaClusters,
}

impl BlockPlan {
    pub fn total_rank(&self) -> usize {
        self.blocks.iter().map(|b| b.rank).sum()
    }
}

/// Output of [`plrmf`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionedFactorization {
    pub result: FactorizationResult,
    pub plan: BlockPlan,
    /// Per-block factorizations, in plan order.
    pub blocks: Vec<FactorizationResult>,
}

impl PartitionedFactorization {
    pub fn block_error_sum(&self) -> u64 {
        self.blocks.iter().map(|b| b.error).sum()
    }
}

/// Seed handed to the factorizer of block `index`.
pub fn block_seed(master: u64, index: usize) -> u64 {
    derive_seed(master ^ BLOCK_SALT, index as u64)
}

/// Columns of `a` as real vectors.
fn real_columns(a: &Matrix) -> Vec<Vec<f64>> {
    a.columns()
        .into_iter()
        .map(|c| c.into_iter().map(f64::from).collect())
        .collect()
}

/// Plans the column blocks: first-stage k-means with `r_s·d` clusters, then
/// meta-clustering of the centers.
pub fn plan_blocks<R: Rng + ?Sized>(a: &Matrix, r_s: usize, d: usize, rng: &mut R) -> Result<BlockPlan> {
    if r_s == 0 || d == 0 {
        return Err(Error::InvalidParameter("r_s and d must be at least 1".into()));
    }
    let d_prime = r_s
        .checked_mul(d)
        .ok_or_else(|| Error::InvalidParameter("r_s·d overflows".into()))?;
    let first = kmeans(&real_columns(a), d_prime, rng, DEFAULT_KMEANS_ITERS)?;
    let clusters = first.clusters();
    let meta = split_meta_clusters(&first.centers, d, r_s, rng)?;
    let blocks = meta
        .groups
        .iter()
        .map(|group| {
            let mut columns: Vec<usize> = group.iter().flat_map(|&c| clusters[c].iter().copied()).collect();
            columns.sort_unstable();
            Block {
                meta_cluster: group.clone(),
                columns,
                rank: group.len(),
            }
        })
        .collect();
    Ok(BlockPlan {
        blocks,
        first_stage_clusters: first.k(),
        meta,
    })
}

/// Rank `r_s·d` factorization of `a` through column blocks of rank ≤ `r_s`.
///
/// Block `b` is factorized by [`lrmf`] seeded with `block_seed(seed, b)`.
/// Output column `i` is the block output column nearest to column `i` of
/// `a` under the instance distance (first in block order on ties). `U` is
/// the concatenation of block factors with duplicate columns merged.
pub fn plrmf(a: &Matrix, r_s: usize, d: usize, q: u32, restarts: usize, seed: u64) -> Result<PartitionedFactorization> {
    center_count(a.modulus(), r_s)?;
    let algebra = a.algebra();
    let metric = Metric::new(a.modulus(), q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, KMEANS_SALT));
    let plan = plan_blocks(a, r_s, d, &mut rng)?;

    let mut block_results = Vec::with_capacity(plan.blocks.len());
    for (b, block) in plan.blocks.iter().enumerate() {
        let sub = a.select_columns(&block.columns)?;
        block_results.push(lrmf(&sub, block.rank, q, restarts, block_seed(seed, b))?);
    }

    // D: all block output columns, with their coefficient vectors lifted
    // into the stacked coordinate system.
    let total_width: usize = block_results.iter().map(|r| r.u.cols()).sum();
    let mut candidates: Vec<(Vec<u8>, Vec<u8>)> = Vec::new();
    let mut offset = 0;
    for res in &block_results {
        for j in 0..res.b.cols() {
            let mut coeffs = vec![0u8; total_width];
            for t in 0..res.v.rows() {
                coeffs[offset + t] = res.v.get(t, j);
            }
            candidates.push((res.b.column(j), coeffs));
        }
        offset += res.u.cols();
    }

    let mut b_cols = Vec::with_capacity(a.cols());
    let mut v_cols = Vec::with_capacity(a.cols());
    for col in a.columns() {
        let mut best = (u64::MAX, 0);
        for (idx, (cand, _)) in candidates.iter().enumerate() {
            let dist = metric.vector_distance(&col, cand);
            if dist < best.0 {
                best = (dist, idx);
            }
        }
        b_cols.push(candidates[best.1].0.clone());
        v_cols.push(candidates[best.1].1.clone());
    }

    // Merge identical U columns, folding their V rows together.
    let stacked: Vec<Vec<u8>> = block_results.iter().flat_map(|r| r.u.columns()).collect();
    let mut first_seen: HashMap<&[u8], usize> = HashMap::new();
    let mut unique: Vec<&[u8]> = Vec::new();
    let mut target = Vec::with_capacity(stacked.len());
    for col in &stacked {
        let idx = *first_seen.entry(col.as_slice()).or_insert_with(|| {
            unique.push(col.as_slice());
            unique.len() - 1
        });
        target.push(idx);
    }
    let v_cols: Vec<Vec<u8>> = v_cols
        .into_iter()
        .map(|coeffs| {
            let mut merged = vec![0u8; unique.len()];
            for (t, &c) in coeffs.iter().enumerate() {
                merged[target[t]] = algebra.add(merged[target[t]], c);
            }
            merged
        })
        .collect();

    let b = Matrix::from_columns(algebra, a.rows(), &b_cols)?;
    let u = Matrix::from_columns(algebra, a.rows(), &unique)?;
    let v = Matrix::from_columns(algebra, unique.len(), &v_cols)?;
    let error = metric.vector_distance(a.as_slice(), b.as_slice());
    let result = FactorizationResult {
        b,
        u,
        v,
        rank: r_s * d,
        q,
        error,
        seed,
        restarts,
        iterations: block_results.iter().flat_map(|r| r.iterations.iter().copied()).collect(),
    };
    Ok(PartitionedFactorization {
        result,
        plan,
        blocks: block_results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Algebra;
    use crate::reduction::verify;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn kmeans_single_cluster_is_mean() {
        let pts = vec![vec![0.0, 1.0], vec![2.0, 3.0], vec![4.0, 8.0]];
        let out = kmeans(&pts, 1, &mut rng(0), 100).unwrap();
        assert_eq!(out.assignment, vec![0, 0, 0]);
        assert_eq!(out.centers, vec![vec![2.0, 4.0]]);
        assert!(out.converged);
    }

    #[test]
    fn kmeans_separated_duplicates() {
        let mut pts = vec![vec![0.0, 0.0]; 5];
        pts.extend(vec![vec![10.0, 10.0]; 4]);
        for seed in 0..10 {
            let out = kmeans(&pts, 2, &mut rng(seed), 100).unwrap();
            assert_eq!(out.inertia, 0.0);
            let mut centers = out.centers.clone();
            centers.sort_by(|a, b| a[0].total_cmp(&b[0]));
            assert_eq!(centers, vec![vec![0.0, 0.0], vec![10.0, 10.0]]);
            let clusters = out.clusters();
            assert!(clusters.iter().all(|c| c.len() == 5 || c.len() == 4));
        }
    }

    #[test]
    fn kmeans_reduces_k_to_distinct_points() {
        let pts = vec![vec![1.0], vec![1.0], vec![2.0]];
        let out = kmeans(&pts, 5, &mut rng(1), 100).unwrap();
        assert_eq!(out.k(), 2);
        assert_eq!(out.requested_k, 5);
        assert_eq!(out.inertia, 0.0);
    }

    #[test]
    fn kmeans_rejects_bad_input() {
        assert!(kmeans(&[], 1, &mut rng(0), 10).is_err());
        assert!(kmeans(&[vec![1.0]], 0, &mut rng(0), 10).is_err());
        assert!(kmeans(&[vec![1.0], vec![1.0, 2.0]], 1, &mut rng(0), 10).is_err());
    }

    #[test]
    fn split_singletons() {
        let pts: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64 * 3.0]).collect();
        let meta = split_meta_clusters(&pts, 4, 1, &mut rng(2)).unwrap();
        assert_eq!(meta.groups.len(), 4);
        assert!(meta.groups.iter().all(|g| g.len() == 1));
    }

    #[test]
    fn split_seven_into_two() {
        let pts: Vec<Vec<f64>> = (0..7).map(|i| vec![(i * i) as f64, (i % 3) as f64]).collect();
        for seed in 0..20 {
            let meta = split_meta_clusters(&pts, 2, 5, &mut rng(seed)).unwrap();
            assert!(meta.groups.iter().all(|g| g.len() <= 5));
            assert_eq!(meta.groups.iter().map(Vec::len).sum::<usize>(), 7);
            assert!(meta.rounds <= 7);
        }
    }

    #[test]
    fn split_identical_centers_falls_back() {
        let pts = vec![vec![1.0, 1.0]; 6];
        let meta = split_meta_clusters(&pts, 1, 2, &mut rng(0)).unwrap();
        assert_eq!(meta.fallbacks, 1);
        assert_eq!(meta.groups, vec![vec![0, 1], vec![2, 3], vec![4, 5]]);
    }

    #[test]
    fn balanced_chunks_sizes() {
        let items: Vec<usize> = (0..7).collect();
        let chunks = balanced_chunks(&items, 2);
        assert_eq!(chunks, vec![vec![0, 1, 2, 3], vec![4, 5, 6]]);
    }

    #[test]
    fn plrmf_small_instance_verifies() {
        let alg = Algebra::field(3).unwrap();
        let data: Vec<u8> = (0..6 * 12).map(|i| ((i * 7 + i / 5) % 3) as u8).collect();
        let a = Matrix::new(6, 12, alg, data).unwrap();
        let out = plrmf(&a, 2, 2, 1, 3, 9).unwrap();
        assert!(verify(&out.result, &a, 1).is_ok(), "{:?}", verify(&out.result, &a, 1));
        assert!(out.result.u.cols() <= 4);
        assert!(out.result.error <= out.block_error_sum());
        let mut cols: Vec<usize> = out.plan.blocks.iter().flat_map(|b| b.columns.clone()).collect();
        cols.sort_unstable();
        assert_eq!(cols, (0..12).collect::<Vec<_>>());
    }
}
