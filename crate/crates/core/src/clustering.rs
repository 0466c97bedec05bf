//! Clustering with relation-constrained centers and the alternating solver.
//!
//! An instance is a multiset of points in `{0,…,p−1}^m`, a center count `k`
//! and one `k`-ary relation per coordinate. A center set `c_1,…,c_k`
//! satisfies the relations when, for every row `i`, the tuple
//! `(c_1[i],…,c_k[i])` is a member of `R_i`. The objective is
//! `Σ_x min_c d_q(x, c)`.

use std::collections::HashSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{Metric, PackedBits};

/// A `k`-ary relation over `{0,…,p−1}`. Tuple order is fixed at
/// construction and doubles as the tie-breaking order for center selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    arity: usize,
    tuples: Vec<u8>,
}

impl Relation {
    pub fn new<T: AsRef<[u8]>>(arity: usize, modulus: u8, tuples: &[T]) -> Result<Self> {
        if arity == 0 {
            return Err(Error::InvalidRelation("arity must be positive".into()));
        }
        if tuples.is_empty() {
            return Err(Error::InvalidRelation("relation is empty".into()));
        }
        let mut seen = HashSet::with_capacity(tuples.len());
        let mut flat = Vec::with_capacity(tuples.len() * arity);
        for t in tuples {
            let t = t.as_ref();
            if t.len() != arity {
                return Err(Error::ArityMismatch {
                    expected: arity,
                    actual: t.len(),
                });
            }
            if let Some(&v) = t.iter().find(|&&v| v >= modulus) {
                return Err(Error::EntryOutOfRange {
                    value: v as u32,
                    modulus: modulus as u32,
                });
            }
            if !seen.insert(t) {
                return Err(Error::InvalidRelation(format!("duplicate tuple {t:?}")));
            }
            flat.extend_from_slice(t);
        }
        Ok(Self {
            arity,
            tuples: flat,
        })
    }

    /// Builds from an already validated flat buffer.
    pub(crate) fn from_flat_unchecked(arity: usize, tuples: Vec<u8>) -> Self {
        debug_assert_eq!(tuples.len() % arity, 0);
        Self { arity, tuples }
    }

    #[inline]
    pub fn arity(&self) -> usize {
        self.arity
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.tuples.len() / self.arity
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    #[inline]
    pub fn tuple(&self, t: usize) -> &[u8] {
        &self.tuples[t * self.arity..(t + 1) * self.arity]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u8]> + '_ {
        self.tuples.chunks_exact(self.arity)
    }

    pub fn contains(&self, tuple: &[u8]) -> bool {
        self.iter().any(|t| t == tuple)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Storage {
    Uniform(Relation),
    PerRow(Vec<Relation>),
}

/// The family `R_1,…,R_m`. A uniform family stores its single relation once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationSet {
    arity: usize,
    modulus: u8,
    rows: usize,
    storage: Storage,
}

impl RelationSet {
    /// Every row shares `relation`.
    pub fn uniform(rows: usize, modulus: u8, relation: Relation) -> Self {
        Self {
            arity: relation.arity(),
            modulus,
            rows,
            storage: Storage::Uniform(relation),
        }
    }

    pub fn per_row(modulus: u8, relations: Vec<Relation>) -> Result<Self> {
        let Some(first) = relations.first() else {
            return Err(Error::InvalidRelation("no rows".into()));
        };
        let arity = first.arity();
        if let Some(r) = relations.iter().find(|r| r.arity() != arity) {
            return Err(Error::ArityMismatch {
                expected: arity,
                actual: r.arity(),
            });
        }
        Ok(Self {
            arity,
            modulus,
            rows: relations.len(),
            storage: Storage::PerRow(relations),
        })
    }

    #[inline]
    pub fn arity(&self) -> usize {
        self.arity
    }

    #[inline]
    pub fn modulus(&self) -> u8 {
        self.modulus
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.storage, Storage::Uniform(_))
    }

    #[inline]
    pub fn relation(&self, row: usize) -> &Relation {
        match &self.storage {
            Storage::Uniform(r) => r,
            Storage::PerRow(rs) => &rs[row],
        }
    }

    /// Checks every row tuple of `centers`; reports the first violating row.
    pub fn check(&self, centers: &CenterSet) -> Result<()> {
        if centers.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                actual: centers.len(),
            });
        }
        if centers.dim() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "centers have dimension {}, relations cover {} rows",
                centers.dim(),
                self.rows
            )));
        }
        for row in 0..self.rows {
            if !self.relation(row).contains(&centers.row_tuple(row)) {
                return Err(Error::RelationViolation { row });
            }
        }
        Ok(())
    }

    pub fn is_satisfied_by(&self, centers: &CenterSet) -> bool {
        self.check(centers).is_ok()
    }
}

/// `k` centers of dimension `m`, stored center-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CenterSet {
    dim: usize,
    data: Vec<u8>,
}

impl CenterSet {
    pub fn new<C: AsRef<[u8]>>(centers: &[C]) -> Result<Self> {
        let Some(first) = centers.first() else {
            return Err(Error::EmptyCenters);
        };
        let dim = first.as_ref().len();
        let mut data = Vec::with_capacity(dim * centers.len());
        for c in centers {
            let c = c.as_ref();
            if c.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "center of dimension {} among centers of dimension {dim}",
                    c.len()
                )));
            }
            data.extend_from_slice(c);
        }
        Ok(Self { dim, data })
    }

    /// Assembles centers from per-row tuples: `tuples[i][c] = c-th center at row i`.
    pub fn from_row_tuples<T: AsRef<[u8]>>(k: usize, tuples: &[T]) -> Self {
        let dim = tuples.len();
        let mut data = vec![0u8; k * dim];
        for (i, t) in tuples.iter().enumerate() {
            for (c, &v) in t.as_ref().iter().enumerate() {
                data[c * dim + i] = v;
            }
        }
        Self { dim, data }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn center(&self, c: usize) -> &[u8] {
        &self.data[c * self.dim..(c + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u8]> + '_ {
        self.data.chunks_exact(self.dim.max(1))
    }

    /// `(c_1[row],…,c_k[row])`.
    pub fn row_tuple(&self, row: usize) -> Vec<u8> {
        (0..self.len()).map(|c| self.data[c * self.dim + row]).collect()
    }
}

/// Cluster label per point, 0-based. Clusters may be empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    k: usize,
    labels: Vec<usize>,
}

impl Assignment {
    pub fn new(k: usize, labels: Vec<usize>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::InvalidParameter(format!("label {bad} out of range for k={k}")));
        }
        Ok(Self { k, labels })
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| (l == cluster).then_some(i))
            .collect()
    }
}

/// `d_q(x, C)` and the smallest index attaining it.
pub fn point_distance(x: &[u8], centers: &CenterSet, metric: &Metric) -> Result<(u64, usize)> {
    if centers.is_empty() {
        return Err(Error::EmptyCenters);
    }
    if centers.dim() != x.len() {
        return Err(Error::DimensionMismatch(format!(
            "point of dimension {} vs centers of dimension {}",
            x.len(),
            centers.dim()
        )));
    }
    Ok(nearest(centers.iter().map(|c| metric.vector_distance(x, c))))
}

#[inline]
fn nearest(distances: impl Iterator<Item = u64>) -> (u64, usize) {
    let mut best = (u64::MAX, 0);
    for (i, d) in distances.enumerate() {
        if d < best.0 {
            best = (d, i);
        }
    }
    best
}

/// A constrained clustering instance `(X, k, R)` with distance exponent `q`.
#[derive(Debug, Clone)]
pub struct ClusteringInstance {
    dim: usize,
    n: usize,
    k: usize,
    points: Vec<u8>,
    packed: Option<Vec<PackedBits>>,
    relations: RelationSet,
    metric: Metric,
}

impl ClusteringInstance {
    pub fn new<P: AsRef<[u8]>>(points: &[P], k: usize, relations: RelationSet, q: u32) -> Result<Self> {
        let modulus = relations.modulus();
        if points.is_empty() {
            return Err(Error::InvalidParameter("no points".into()));
        }
        if relations.arity() != k {
            return Err(Error::ArityMismatch {
                expected: k,
                actual: relations.arity(),
            });
        }
        let dim = relations.rows();
        let mut flat = Vec::with_capacity(dim * points.len());
        for x in points {
            let x = x.as_ref();
            if x.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "point of dimension {} but relations cover {dim} rows",
                    x.len()
                )));
            }
            if let Some(&v) = x.iter().find(|&&v| v >= modulus) {
                return Err(Error::EntryOutOfRange {
                    value: v as u32,
                    modulus: modulus as u32,
                });
            }
            flat.extend_from_slice(x);
        }
        let metric = Metric::new(modulus, q)?;
        let packed = metric
            .is_hamming()
            .then(|| flat.chunks_exact(dim).map(PackedBits::from_residues).collect());
        Ok(Self {
            dim,
            n: points.len(),
            k,
            points: flat,
            packed,
            relations,
            metric,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn modulus(&self) -> u8 {
        self.metric.modulus()
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.metric.q()
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn relations(&self) -> &RelationSet {
        &self.relations
    }

    #[inline]
    pub fn point(&self, j: usize) -> &[u8] {
        &self.points[j * self.dim..(j + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[u8]> + '_ {
        self.points.chunks_exact(self.dim)
    }

    /// `cost(X, C) = Σ_x d_q(x, C)`.
    pub fn cost(&self, centers: &CenterSet) -> Result<u64> {
        self.check_centers(centers)?;
        Ok(self.clusters_from_centers(centers)?.1)
    }

    /// Clustering induced by `centers`: each point goes to the smallest-index
    /// nearest center. Returns the assignment and its cost.
    pub fn clusters_from_centers(&self, centers: &CenterSet) -> Result<(Assignment, u64)> {
        self.check_centers(centers)?;
        let mut labels = Vec::with_capacity(self.n);
        let mut total = 0u64;
        match &self.packed {
            Some(points) => {
                let packed: Vec<PackedBits> = centers.iter().map(PackedBits::from_residues).collect();
                for x in points {
                    let (d, c) = nearest(packed.iter().map(|c| x.hamming(c)));
                    labels.push(c);
                    total += d;
                }
            }
            None => {
                for x in self.points() {
                    let (d, c) = nearest(centers.iter().map(|c| self.metric.vector_distance(x, c)));
                    labels.push(c);
                    total += d;
                }
            }
        }
        Ok((
            Assignment {
                k: centers.len(),
                labels,
            },
            total,
        ))
    }

    /// Best relation-satisfying centers for a fixed partition.
    ///
    /// Row `i` independently picks the first tuple `b ∈ R_i` minimizing
    /// `g_i(b) = Σ_j Σ_{x∈X_j} d(x[i], b_j)`, evaluated from per-value counts.
    pub fn centers_from_clusters(&self, partition: &Assignment) -> Result<CenterSet> {
        if partition.k() != self.k {
            return Err(Error::ArityMismatch {
                expected: self.k,
                actual: partition.k(),
            });
        }
        if partition.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: partition.len(),
            });
        }
        let (m, k, p) = (self.dim, self.k, self.modulus() as usize);

        // counts[(i * k + j) * p + v] = |{x ∈ X_j : x[i] = v}|
        let mut counts = vec![0u32; m * k * p];
        for (x, &j) in self.points().zip(partition.labels()) {
            for (i, &v) in x.iter().enumerate() {
                counts[(i * k + j) * p + v as usize] += 1;
            }
        }
        let occupied: Vec<usize> = partition
            .cluster_sizes()
            .iter()
            .enumerate()
            .filter_map(|(j, &s)| (s > 0).then_some(j))
            .collect();

        let mut data = vec![0u8; k * m];
        let mut cost_jb = vec![0u64; k * p];
        for i in 0..m {
            for &j in &occupied {
                let cnt = &counts[(i * k + j) * p..(i * k + j + 1) * p];
                for b in 0..p {
                    cost_jb[j * p + b] = cnt
                        .iter()
                        .enumerate()
                        .map(|(v, &c)| c as u64 * self.metric.distance(v as u8, b as u8))
                        .sum();
                }
            }
            let relation = self.relations.relation(i);
            let mut best = (u64::MAX, 0usize);
            for (t, tuple) in relation.iter().enumerate() {
                let g: u64 = occupied.iter().map(|&j| cost_jb[j * p + tuple[j] as usize]).sum();
                if g < best.0 {
                    best = (g, t);
                }
            }
            for (c, &v) in relation.tuple(best.1).iter().enumerate() {
                data[c * m + i] = v;
            }
        }
        Ok(CenterSet { dim: m, data })
    }

    /// Runs the alternating solver from a random partition.
    ///
    /// Each iteration computes centers from the current clusters, then the
    /// clusters those centers induce. The run stops as soon as the cost does
    /// not strictly decrease.
    pub fn alg_clus<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ClusteringRun> {
        let mut partition = random_partition(self.n, self.k, rng)?;
        let mut history = Vec::new();
        let mut best: Option<(CenterSet, Assignment, u64)> = None;
        loop {
            let centers = self.centers_from_clusters(&partition)?;
            let (induced, cost) = self.clusters_from_centers(&centers)?;
            history.push(cost);
            if let Some((best_centers, best_assignment, best_cost)) = best.take() {
                if cost >= best_cost {
                    let (centers, assignment, cost) = if cost == best_cost {
                        (centers, induced, cost)
                    } else {
                        (best_centers, best_assignment, best_cost)
                    };
                    return Ok(ClusteringRun {
                        centers,
                        assignment,
                        cost,
                        iterations: history.len(),
                        cost_history: history,
                    });
                }
            }
            partition = induced.clone();
            best = Some((centers, induced, cost));
        }
    }

    fn check_centers(&self, centers: &CenterSet) -> Result<()> {
        if centers.is_empty() {
            return Err(Error::EmptyCenters);
        }
        if centers.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "centers of dimension {} for points of dimension {}",
                centers.dim(),
                self.dim
            )));
        }
        Ok(())
    }
}

/// Output of [`ClusteringInstance::alg_clus`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusteringRun {
    pub centers: CenterSet,
    pub assignment: Assignment,
    pub cost: u64,
    pub iterations: usize,
    /// `cost(X, C_t)` for every iteration `t`.
    pub cost_history: Vec<u64>,
}

/// Assigns each of `n` points independently and uniformly to one of `k` clusters.
pub fn random_partition<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Assignment> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidParameter(format!(
            "random partition needs n ≥ 1 and k ≥ 1 (got n={n}, k={k})"
        )));
    }
    let labels = (0..n).map(|_| rng.random_range(0..k)).collect();
    Ok(Assignment { k, labels })
}
