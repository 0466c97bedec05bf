//! Residue matrices over GF(p) and the Boolean semiring.
//!
//! Entries are stored densely, one residue per byte, row-major. For p = 2 a
//! bit-packed view ([`PackedBits`]) is available for popcount distances.

use std::fmt;

use crate::error::{Error, Result};

/// The arithmetic a [`Matrix`] lives in.
///
/// `Boolean` shares the residue set and the distance of `Field(2)` but
/// multiplies with (∧, ∨), so `1 + 1 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algebra {
    Field(u8),
    Boolean,
}

impl Algebra {
    /// The prime field of order `p`. Composite or oversized `p` is rejected.
    pub fn field(p: u32) -> Result<Self> {
        if p > u8::MAX as u32 {
            return Err(Error::ModulusTooLarge(p));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Algebra::Field(p as u8))
    }

    pub fn boolean() -> Self {
        Algebra::Boolean
    }

    /// Size of the residue alphabet: `p` for fields, 2 for Boolean.
    pub fn modulus(self) -> u8 {
        match self {
            Algebra::Field(p) => p,
            Algebra::Boolean => 2,
        }
    }

    pub fn is_boolean(self) -> bool {
        matches!(self, Algebra::Boolean)
    }

    #[inline]
    pub fn add(self, a: u8, b: u8) -> u8 {
        match self {
            Algebra::Field(p) => ((a as u16 + b as u16) % p as u16) as u8,
            Algebra::Boolean => a | b,
        }
    }

    #[inline]
    pub fn mul(self, a: u8, b: u8) -> u8 {
        match self {
            Algebra::Field(p) => ((a as u16 * b as u16) % p as u16) as u8,
            Algebra::Boolean => a & b,
        }
    }
}

impl fmt::Display for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algebra::Field(p) => write!(f, "GF({p})"),
            Algebra::Boolean => write!(f, "Boolean"),
        }
    }
}

/// Trial-division primality test.
pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Multiplicative inverse of `a` modulo prime `p` by extended Euclid.
pub fn mod_inverse(a: u8, p: u8) -> Option<u8> {
    let (mut old_r, mut r) = (a as i32 % p as i32, p as i32);
    let (mut old_s, mut s) = (1i32, 0i32);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(p as i32) as u8)
}

/// Dense `rows × cols` matrix of residues tagged with its algebra.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    algebra: Algebra,
    data: Vec<u8>,
}

impl Matrix {
    /// Builds a matrix from row-major residues, validating every entry.
    pub fn new(rows: usize, cols: usize, algebra: Algebra, data: Vec<u8>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        let p = algebra.modulus();
        if let Some(&bad) = data.iter().find(|&&v| v >= p) {
            return Err(Error::EntryOutOfRange {
                value: bad as u32,
                modulus: p as u32,
            });
        }
        Ok(Self {
            rows,
            cols,
            algebra,
            data,
        })
    }

    /// Builds a matrix from nested rows; convenient for literals.
    pub fn from_rows<R: AsRef<[u32]>>(algebra: Algebra, rows: &[R]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(m * n);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "ragged rows: expected {n} columns, got {}",
                    row.len()
                )));
            }
            for &v in row {
                if v >= algebra.modulus() as u32 {
                    return Err(Error::EntryOutOfRange {
                        value: v,
                        modulus: algebra.modulus() as u32,
                    });
                }
                data.push(v as u8);
            }
        }
        Self::new(m, n, algebra, data)
    }

    /// Builds an `rows × columns.len()` matrix whose columns are the given vectors.
    pub fn from_columns<C: AsRef<[u8]>>(algebra: Algebra, rows: usize, columns: &[C]) -> Result<Self> {
        let cols = columns.len();
        let mut data = vec![0u8; rows * cols];
        for (j, col) in columns.iter().enumerate() {
            let col = col.as_ref();
            if col.len() != rows {
                return Err(Error::DimensionMismatch(format!(
                    "column {j} has length {}, expected {rows}",
                    col.len()
                )));
            }
            for (i, &v) in col.iter().enumerate() {
                data[i * cols + j] = v;
            }
        }
        Self::new(rows, cols, algebra, data)
    }

    pub fn zeros(rows: usize, cols: usize, algebra: Algebra) -> Result<Self> {
        Self::new(rows, cols, algebra, vec![0; rows * cols])
    }

    pub fn identity(n: usize, algebra: Algebra) -> Result<Self> {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        Self::new(n, n, algebra, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn algebra(&self) -> Algebra {
        self.algebra
    }

    #[inline]
    pub fn modulus(&self) -> u8 {
        self.algebra.modulus()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.data[i * self.cols + j]
    }

    /// Overwrites one entry. Panics if the value is not a residue.
    pub fn set(&mut self, i: usize, j: usize, value: u8) {
        assert!(value < self.modulus(), "entry {value} out of range for p={}", self.modulus());
        self.data[i * self.cols + j] = value;
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u8> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<u8>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    /// The submatrix made of the listed columns, in the listed order.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Self> {
        let cols: Vec<Vec<u8>> = indices.iter().map(|&j| self.column(j)).collect();
        Self::from_columns(self.algebra, self.rows, &cols)
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.get(i, j);
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            algebra: self.algebra,
            data,
        }
    }

    /// Same entries reinterpreted under another algebra with the same modulus.
    pub fn with_algebra(&self, algebra: Algebra) -> Result<Self> {
        Self::new(self.rows, self.cols, algebra, self.data.clone())
    }

    pub fn count_nonzero(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    fn check_same_shape(&self, other: &Matrix) -> Result<()> {
        if self.algebra != other.algebra {
            return Err(Error::AlgebraMismatch {
                left: self.algebra.to_string(),
                right: other.algebra.to_string(),
            });
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Matrix product under the shared algebra: `⋁ (u ∧ v)` for Boolean,
/// `Σ u·v mod p` for fields.
pub fn product(u: &Matrix, v: &Matrix) -> Result<Matrix> {
    if u.algebra != v.algebra {
        return Err(Error::AlgebraMismatch {
            left: u.algebra.to_string(),
            right: v.algebra.to_string(),
        });
    }
    if u.cols != v.rows {
        return Err(Error::DimensionMismatch(format!(
            "inner dimensions {} and {} differ",
            u.cols, v.rows
        )));
    }
    let alg = u.algebra;
    let (m, r, n) = (u.rows, u.cols, v.cols);
    let mut data = vec![0u8; m * n];
    for i in 0..m {
        let out = &mut data[i * n..(i + 1) * n];
        for t in 0..r {
            let a = u.get(i, t);
            if a == 0 {
                continue;
            }
            for (o, &b) in out.iter_mut().zip(v.row(t)) {
                *o = alg.add(*o, alg.mul(a, b));
            }
        }
    }
    Matrix::new(m, n, alg, data)
}

/// Rank over GF(p) by Gaussian elimination on a copy of `m`.
pub fn gfp_rank(m: &Matrix) -> Result<usize> {
    let p = match m.algebra {
        Algebra::Field(p) => p,
        Algebra::Boolean => return Err(Error::BooleanRank),
    };
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.data.clone();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pivot) = (rank..rows).find(|&i| a[i * cols + col] != 0) else {
            continue;
        };
        if pivot != rank {
            for j in 0..cols {
                a.swap(pivot * cols + j, rank * cols + j);
            }
        }
        let inv = mod_inverse(a[rank * cols + col], p).expect("nonzero residue is invertible");
        for j in col..cols {
            a[rank * cols + j] = ((a[rank * cols + j] as u16 * inv as u16) % p as u16) as u8;
        }
        for i in 0..rows {
            if i == rank {
                continue;
            }
            let factor = a[i * cols + col];
            if factor == 0 {
                continue;
            }
            for j in col..cols {
                let sub = (factor as u16 * a[rank * cols + j] as u16) % p as u16;
                a[i * cols + j] = ((a[i * cols + j] as u16 + p as u16 - sub) % p as u16) as u8;
            }
        }
        rank += 1;
    }
    Ok(rank)
}

/// `Σ ((A[i,j] − B[i,j]) mod p)^q` over the integers, with `0^0 = 0`.
pub fn entrywise_error(a: &Matrix, b: &Matrix, q: u32) -> Result<u64> {
    a.check_same_shape(b)?;
    let metric = Metric::new(a.modulus(), q)?;
    Ok(metric.vector_distance(&a.data, &b.data))
}

/// The coordinate distance `d(x, c) = ((x − c) mod p)^q`, tabulated.
///
/// The difference is one-sided: point minus center. Powers are bounded by
/// `u32::MAX` so that sums over up to 2^32 coordinates fit in a `u64`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metric {
    modulus: u8,
    q: u32,
    table: Vec<u64>,
}

impl Metric {
    pub fn new(modulus: u8, q: u32) -> Result<Self> {
        let p = modulus as usize;
        let mut powers = vec![0u64; p];
        for (d, slot) in powers.iter_mut().enumerate().skip(1) {
            let v = (d as u64)
                .checked_pow(q)
                .filter(|&v| v <= u32::MAX as u64)
                .ok_or(Error::ExponentTooLarge {
                    q,
                    modulus: modulus as u32,
                })?;
            *slot = v;
        }
        let mut table = vec![0u64; p * p];
        for x in 0..p {
            for c in 0..p {
                table[x * p + c] = powers[(x + p - c) % p];
            }
        }
        Ok(Self { modulus, q, table })
    }

    #[inline]
    pub fn modulus(&self) -> u8 {
        self.modulus
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    /// True when every `d(x, c)` is 0 or 1 and equals `x != c`.
    #[inline]
    pub fn is_hamming(&self) -> bool {
        self.modulus == 2
    }

    #[inline]
    pub fn distance(&self, x: u8, c: u8) -> u64 {
        self.table[x as usize * self.modulus as usize + c as usize]
    }

    #[inline]
    pub fn vector_distance(&self, x: &[u8], c: &[u8]) -> u64 {
        debug_assert_eq!(x.len(), c.len());
        x.iter().zip(c).map(|(&a, &b)| self.distance(a, b)).sum()
    }
}

/// A 0/1 vector packed into 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PackedBits {
    len: usize,
    words: Vec<u64>,
}

impl PackedBits {
    /// Packs residues, mapping every nonzero entry to a set bit.
    pub fn from_residues(values: &[u8]) -> Self {
        let mut words = vec![0u64; values.len().div_ceil(64)];
        for (i, &v) in values.iter().enumerate() {
            if v != 0 {
                words[i >> 6] |= 1 << (i & 63);
            }
        }
        Self {
            len: values.len(),
            words,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn hamming(&self, other: &PackedBits) -> u64 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as u64)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u32) -> Algebra {
        Algebra::field(p).unwrap()
    }

    #[test]
    fn algebra_rejects_composite_modulus() {
        assert_eq!(Algebra::field(4), Err(Error::NotPrime(4)));
        assert_eq!(Algebra::field(1), Err(Error::NotPrime(1)));
        assert_eq!(Algebra::field(257), Err(Error::ModulusTooLarge(257)));
        assert_eq!(Algebra::field(251), Ok(Algebra::Field(251)));
    }

    #[test]
    fn mod_inverse_small_primes() {
        for p in [2u8, 3, 5, 7, 11, 13, 251] {
            for a in 1..p {
                let inv = mod_inverse(a, p).unwrap();
                assert_eq!((a as u32 * inv as u32) % p as u32, 1, "a={a} p={p}");
            }
        }
    }

    #[test]
    fn matrix_validates_entries() {
        let err = Matrix::new(1, 2, gf(2), vec![0, 2]).unwrap_err();
        assert_eq!(err, Error::EntryOutOfRange { value: 2, modulus: 2 });
        assert!(Matrix::new(2, 2, gf(2), vec![0; 3]).is_err());
        assert!(Matrix::new(0, 2, gf(2), vec![]).is_err());
    }

    #[test]
    fn rank_examples() {
        assert_eq!(gfp_rank(&Matrix::identity(3, gf(2)).unwrap()).unwrap(), 3);
        let ones = Matrix::new(4, 4, gf(2), vec![1; 16]).unwrap();
        assert_eq!(gfp_rank(&ones).unwrap(), 1);
        let m = Matrix::from_rows(gf(5), &[[1, 2], [2, 4]]).unwrap();
        assert_eq!(gfp_rank(&m).unwrap(), 1);
    }

    #[test]
    fn rank_rejects_boolean() {
        let m = Matrix::identity(2, Algebra::Boolean).unwrap();
        assert_eq!(gfp_rank(&m), Err(Error::BooleanRank));
    }

    #[test]
    fn rank_does_not_mutate_input() {
        let m = Matrix::from_rows(gf(3), &[[2, 1, 0], [1, 2, 1]]).unwrap();
        let before = m.clone();
        gfp_rank(&m).unwrap();
        assert_eq!(m, before);
    }

    #[test]
    fn product_examples() {
        let u = Matrix::from_rows(Algebra::Boolean, &[[1, 1]]).unwrap();
        let v = Matrix::from_rows(Algebra::Boolean, &[[1], [1]]).unwrap();
        assert_eq!(product(&u, &v).unwrap().as_slice(), &[1]);

        let u = Matrix::from_rows(gf(2), &[[1, 1]]).unwrap();
        let v = Matrix::from_rows(gf(2), &[[1], [1]]).unwrap();
        assert_eq!(product(&u, &v).unwrap().as_slice(), &[0]);

        let u = Matrix::from_rows(gf(5), &[[2], [3]]).unwrap();
        let v = Matrix::from_rows(gf(5), &[[3, 4]]).unwrap();
        let b = product(&u, &v).unwrap();
        assert_eq!(b, Matrix::from_rows(gf(5), &[[1, 3], [4, 2]]).unwrap());
    }

    #[test]
    fn product_errors() {
        let u = Matrix::from_rows(gf(2), &[[1, 1]]).unwrap();
        let v = Matrix::from_rows(gf(2), &[[1, 1]]).unwrap();
        assert!(matches!(product(&u, &v), Err(Error::DimensionMismatch(_))));
        let w = Matrix::from_rows(Algebra::Boolean, &[[1], [1]]).unwrap();
        assert!(matches!(product(&u, &w), Err(Error::AlgebraMismatch { .. })));
    }

    #[test]
    fn error_examples() {
        let a = Matrix::from_rows(gf(2), &[[1, 0], [0, 1]]).unwrap();
        let z = Matrix::zeros(2, 2, gf(2)).unwrap();
        assert_eq!(entrywise_error(&a, &a, 1).unwrap(), 0);
        assert_eq!(entrywise_error(&a, &z, 1).unwrap(), 2);

        let zero = Matrix::from_rows(gf(5), &[[0]]).unwrap();
        let four = Matrix::from_rows(gf(5), &[[4]]).unwrap();
        assert_eq!(entrywise_error(&zero, &four, 1).unwrap(), 1);
        assert_eq!(entrywise_error(&four, &zero, 1).unwrap(), 4);
    }

    #[test]
    fn error_q_zero_counts_nonzero_differences() {
        let a = Matrix::from_rows(gf(5), &[[0, 3, 4]]).unwrap();
        let b = Matrix::from_rows(gf(5), &[[0, 1, 4]]).unwrap();
        assert_eq!(entrywise_error(&a, &b, 0).unwrap(), 1);
        assert_eq!(entrywise_error(&a, &b, 2).unwrap(), 4);
    }

    #[test]
    fn error_shape_mismatch() {
        let a = Matrix::zeros(2, 2, gf(2)).unwrap();
        let b = Matrix::zeros(2, 3, gf(2)).unwrap();
        assert!(entrywise_error(&a, &b, 1).is_err());
        let c = Matrix::zeros(2, 2, Algebra::Boolean).unwrap();
        assert!(entrywise_error(&a, &c, 1).is_err());
    }

    #[test]
    fn metric_overflow_is_rejected() {
        assert!(Metric::new(251, 4).is_ok());
        assert!(Metric::new(251, 5).is_err());
        assert!(Metric::new(2, 1000).is_ok());
    }

    #[test]
    fn packed_hamming_matches_dense() {
        let a: Vec<u8> = (0..150).map(|i| ((i * 7 + 3) % 5 == 0) as u8).collect();
        let b: Vec<u8> = (0..150).map(|i| ((i * 11 + 1) % 3 == 0) as u8).collect();
        let dense = a.iter().zip(&b).filter(|(x, y)| x != y).count() as u64;
        assert_eq!(PackedBits::from_residues(&a).hamming(&PackedBits::from_residues(&b)), dense);
    }
}
