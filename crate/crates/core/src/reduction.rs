//! Factorization as constrained clustering.
//!
//! For rank `r` there are `k = p^r` centers, one per coefficient vector
//! `w ∈ {0,…,p−1}^r`. Row `i` of the center set is generated by some
//! `x ∈ {0,…,p−1}^r`: center `w` takes the value `⟨w, x⟩ mod p` there
//! (or `⋁_{j: w_j = 1} x_j` over the Boolean semiring). Every satisfying
//! center set is therefore spanned by the `r` centers sitting at the unit
//! vectors, which become the columns of `U`.

use crate::clustering::{ClusteringInstance, CenterSet, Relation, RelationSet};
use crate::error::{Error, Result};
use crate::field::{entrywise_error, gfp_rank, product, Algebra, Matrix, Metric};

/// Largest `p^r` the explicit relation is built for. The relation holds
/// `p^{2r}` residues, so this caps it at 2^30 bytes. `7^5` fits.
pub const MAX_CENTERS: usize = 1 << 15;

/// The fixed enumeration of coefficient vectors that indexes centers.
///
/// Vectors are sorted by number of nonzero entries, then by their support
/// positions, then by the values on the support. For `p = 2` this lists
/// subsets of `{1,…,r}` by size and then lexicographically, e.g. for `r = 3`:
/// `∅, {1}, {2}, {3}, {1,2}, {1,3}, {2,3}, {1,2,3}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffOrdering {
    modulus: u8,
    rank: usize,
    vectors: Vec<u8>,
    unit_positions: Vec<usize>,
}

impl CoeffOrdering {
    pub fn new(modulus: u8, rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::ZeroRank);
        }
        let k = center_count(modulus, rank)?;
        let p = modulus as usize;
        let mut all: Vec<Vec<u8>> = (0..k)
            .map(|mut idx| {
                let mut w = vec![0u8; rank];
                for slot in w.iter_mut().rev() {
                    *slot = (idx % p) as u8;
                    idx /= p;
                }
                w
            })
            .collect();
        all.sort_by_cached_key(|w| {
            let support: Vec<usize> = (0..rank).filter(|&j| w[j] != 0).collect();
            let values: Vec<u8> = support.iter().map(|&j| w[j]).collect();
            (support.len(), support, values)
        });
        let unit_positions = (0..rank)
            .map(|j| {
                all.iter()
                    .position(|w| w.iter().enumerate().all(|(t, &v)| v == (t == j) as u8))
                    .expect("unit vector is enumerated")
            })
            .collect();
        Ok(Self {
            modulus,
            rank,
            vectors: all.concat(),
            unit_positions,
        })
    }

    #[inline]
    pub fn modulus(&self) -> u8 {
        self.modulus
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of coefficient vectors, `p^r`.
    #[inline]
    pub fn len(&self) -> usize {
        self.vectors.len() / self.rank
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    #[inline]
    pub fn vector(&self, index: usize) -> &[u8] {
        &self.vectors[index * self.rank..(index + 1) * self.rank]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u8]> + '_ {
        self.vectors.chunks_exact(self.rank)
    }

    /// Index of the unit vector `e_j` (0-based `j`).
    pub fn unit_positions(&self) -> &[usize] {
        &self.unit_positions
    }

    /// `w · x` under `algebra`: the value of center `w` on a row generated by `x`.
    #[inline]
    fn combine(algebra: Algebra, w: &[u8], x: &[u8]) -> u8 {
        w.iter()
            .zip(x)
            .fold(0, |acc, (&a, &b)| algebra.add(acc, algebra.mul(a, b)))
    }
}

/// `p^r`, refusing anything above [`MAX_CENTERS`].
pub fn center_count(modulus: u8, rank: usize) -> Result<usize> {
    let too_many = || Error::TooManyCenters {
        p: modulus as u32,
        r: rank,
        limit: MAX_CENTERS,
    };
    let mut k = 1usize;
    for _ in 0..rank {
        k = k.checked_mul(modulus as usize).ok_or_else(too_many)?;
        if k > MAX_CENTERS {
            return Err(too_many());
        }
    }
    Ok(k)
}

/// The shared relation for rank `r`: one `p^r`-tuple per generator `x`,
/// listed in coefficient order, with coordinate `w` equal to `w · x`.
pub fn build_uniform_relation(algebra: Algebra, rank: usize) -> Result<(Relation, CoeffOrdering)> {
    let ordering = CoeffOrdering::new(algebra.modulus(), rank)?;
    let k = ordering.len();
    let p = algebra.modulus() as usize;
    // natural[c]: base-p index of vector c, most significant coordinate first
    let natural: Vec<usize> = ordering
        .iter()
        .map(|w| w.iter().fold(0, |acc, &v| acc * p + v as usize))
        .collect();
    // step[(xt * p + base) * p + v] = base + v·xt
    let mut step = vec![0u8; p * p * p];
    for xt in 0..p {
        for base in 0..p {
            for v in 0..p {
                step[(xt * p + base) * p + v] = algebra.add(base as u8, algebra.mul(v as u8, xt as u8));
            }
        }
    }
    let mut flat = Vec::with_capacity(k * k);
    let mut values = vec![0u8; k];
    for x in ordering.iter() {
        // values[idx] = w(idx) · x, built one coordinate at a time
        let mut len = 1;
        for &xt in x {
            for prefix in (0..len).rev() {
                let from = (xt as usize * p + values[prefix] as usize) * p;
                values[prefix * p..(prefix + 1) * p].copy_from_slice(&step[from..from + p]);
            }
            len *= p;
        }
        flat.extend(natural.iter().map(|&idx| values[idx]));
    }
    Ok((Relation::from_flat_unchecked(k, flat), ordering))
}

/// A factorization instance rewritten as a clustering instance.
#[derive(Debug, Clone)]
pub struct Encoded {
    pub instance: ClusteringInstance,
    pub ordering: CoeffOrdering,
}

/// Columns of `a` become the points (duplicates kept), `k = p^r`, and every
/// row shares the relation from [`build_uniform_relation`].
pub fn encode(a: &Matrix, rank: usize, q: u32) -> Result<Encoded> {
    let (relation, ordering) = build_uniform_relation(a.algebra(), rank)?;
    let k = ordering.len();
    let relations = RelationSet::uniform(a.rows(), a.modulus(), relation);
    let instance = ClusteringInstance::new(&a.columns(), k, relations, q)?;
    Ok(Encoded { instance, ordering })
}

/// A rank-constrained approximation `B = U·V` of some input matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorizationResult {
    pub b: Matrix,
    pub u: Matrix,
    pub v: Matrix,
    /// The rank budget `r`; `u` has at most this many columns.
    pub rank: usize,
    pub q: u32,
    /// `entrywise_error(A, B, q)`.
    pub error: u64,
    pub seed: u64,
    pub restarts: usize,
    /// Solver iterations, one entry per restart (per block for the
    /// partitioned factorizer, concatenated in block order).
    pub iterations: Vec<usize>,
}

/// Turns a relation-satisfying center set back into `B`, `U` and `V`.
///
/// Column `i` of `B` is the smallest-index center nearest to column `i` of
/// `a`; `U` holds the centers at the unit vectors and `V` the coefficient
/// vectors of the chosen centers, so `U·V = B` exactly.
pub fn decode(a: &Matrix, centers: &CenterSet, ordering: &CoeffOrdering, q: u32) -> Result<FactorizationResult> {
    let algebra = a.algebra();
    let k = ordering.len();
    let m = a.rows();
    if centers.len() != k {
        return Err(Error::ArityMismatch {
            expected: k,
            actual: centers.len(),
        });
    }
    if centers.dim() != m {
        return Err(Error::DimensionMismatch(format!(
            "centers of dimension {} for a matrix with {m} rows",
            centers.dim()
        )));
    }
    let units = ordering.unit_positions();
    let mut generator = vec![0u8; ordering.rank()];
    for i in 0..m {
        for (slot, &pos) in generator.iter_mut().zip(units) {
            *slot = centers.center(pos)[i];
        }
        for (c, w) in ordering.iter().enumerate() {
            if centers.center(c)[i] != CoeffOrdering::combine(algebra, w, &generator) {
                return Err(Error::RelationViolation { row: i });
            }
        }
    }

    let metric = Metric::new(a.modulus(), q)?;
    let n = a.cols();
    let mut b_cols = Vec::with_capacity(n);
    let mut v_cols = Vec::with_capacity(n);
    for col in a.columns() {
        let (_, c) = crate::clustering::point_distance(&col, centers, &metric)?;
        b_cols.push(centers.center(c).to_vec());
        v_cols.push(ordering.vector(c).to_vec());
    }
    let b = Matrix::from_columns(algebra, m, &b_cols)?;
    let u_cols: Vec<&[u8]> = units.iter().map(|&pos| centers.center(pos)).collect();
    let u = Matrix::from_columns(algebra, m, &u_cols)?;
    let v = Matrix::from_columns(algebra, ordering.rank(), &v_cols)?;
    let error = entrywise_error(a, &b, q)?;
    Ok(FactorizationResult {
        b,
        u,
        v,
        rank: ordering.rank(),
        q,
        error,
        seed: 0,
        restarts: 1,
        iterations: Vec::new(),
    })
}

/// Outcome of [`verify`]; empty `issues` means the result checks out.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Verification {
    pub issues: Vec<String>,
}

impl Verification {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks that `U·V = B`, that the rank bound holds, and that the recorded
/// error matches `entrywise_error(a, B, q)`.
///
/// The Boolean rank bound is witnessed by the width of `U`; for fields the
/// GF(p)-rank of `B` is recomputed as well.
pub fn verify(result: &FactorizationResult, a: &Matrix, q: u32) -> Verification {
    let mut issues = Vec::new();
    let (b, u, v) = (&result.b, &result.u, &result.v);
    if (b.rows(), b.cols()) != (a.rows(), a.cols()) {
        issues.push(format!(
            "B is {}x{} but A is {}x{}",
            b.rows(),
            b.cols(),
            a.rows(),
            a.cols()
        ));
    }
    if b.algebra() != a.algebra() || u.algebra() != a.algebra() || v.algebra() != a.algebra() {
        issues.push("factor algebras differ from the input".into());
    }
    if u.cols() > result.rank {
        issues.push(format!("U has {} columns, rank budget is {}", u.cols(), result.rank));
    }
    match product(u, v) {
        Ok(uv) if &uv == b => {}
        Ok(_) => issues.push("U·V differs from B".into()),
        Err(e) => issues.push(format!("U·V undefined: {e}")),
    }
    if let Algebra::Field(_) = b.algebra() {
        match gfp_rank(b) {
            Ok(rank) if rank <= result.rank => {}
            Ok(rank) => issues.push(format!("rank(B) = {rank} exceeds {}", result.rank)),
            Err(e) => issues.push(format!("rank check failed: {e}")),
        }
    }
    match entrywise_error(a, b, q) {
        Ok(err) if err == result.error => {}
        Ok(err) => issues.push(format!("recorded error {} but recomputed {err}", result.error)),
        Err(e) => issues.push(format!("error check failed: {e}")),
    }
    Verification { issues }
}
