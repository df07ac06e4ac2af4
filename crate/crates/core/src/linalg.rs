//! Exact rational matrices and spans of matrix algebras.
//!
//! Matrices are sparse by row. Spans are kept in row-echelon form over the
//! flattened coordinates `i * n + j`; the insertion order fixes the basis.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;

use num_rational::Rational64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Q = Rational64;

fn q(n: i64) -> Q {
    Q::from_integer(n)
}

type SparseVec = Vec<(usize, Q)>;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    n: usize,
    rows: Vec<SparseVec>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{}", self.n, self.n)?;
        for row in self.to_dense() {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

impl Mat {
    pub fn zero(n: usize) -> Mat {
        Mat {
            n,
            rows: vec![Vec::new(); n],
        }
    }

    pub fn identity(n: usize) -> Mat {
        Mat {
            n,
            rows: (0..n).map(|i| vec![(i, q(1))]).collect(),
        }
    }

    /// The matrix unit `E_ij`.
    pub fn unit(n: usize, i: usize, j: usize) -> Mat {
        let mut m = Mat::zero(n);
        m.rows[i].push((j, q(1)));
        m
    }

    pub fn diagonal(n: usize, ones: impl IntoIterator<Item = usize>) -> Mat {
        let mut m = Mat::zero(n);
        for i in ones {
            m.rows[i] = vec![(i, q(1))];
        }
        m
    }

    pub fn from_dense(rows: Vec<Vec<Q>>) -> Result<Mat> {
        let n = rows.len();
        let mut m = Mat::zero(n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::SizeMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            m.rows[i] = row
                .into_iter()
                .enumerate()
                .filter(|(_, x)| *x != q(0))
                .collect();
        }
        Ok(m)
    }

    pub fn to_dense(&self) -> Vec<Vec<Q>> {
        self.rows
            .iter()
            .map(|row| {
                let mut d = vec![q(0); self.n];
                for (j, x) in row {
                    d[*j] = *x;
                }
                d
            })
            .collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Q {
        match self.rows[i].binary_search_by_key(&j, |(c, _)| *c) {
            Ok(k) => self.rows[i][k].1,
            Err(_) => q(0),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(Vec::is_empty)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Nonzero entries `(i, j, value)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Q)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |(j, x)| (i, *j, *x)))
    }

    fn check(&self, other: &Mat) {
        assert_eq!(self.n, other.n, "matrix size mismatch");
    }

    fn merge(a: &SparseVec, b: &SparseVec, sign: Q) -> SparseVec {
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push((b[j].0, sign * b[j].1));
                j += 1;
            } else {
                let x = a[i].1 + sign * b[j].1;
                if x != q(0) {
                    out.push((a[i].0, x));
                }
                i += 1;
                j += 1;
            }
        }
        out
    }

    pub fn add(&self, other: &Mat) -> Mat {
        self.check(other);
        Mat {
            n: self.n,
            rows: self
                .rows
                .iter()
                .zip(&other.rows)
                .map(|(a, b)| Mat::merge(a, b, q(1)))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        self.check(other);
        Mat {
            n: self.n,
            rows: self
                .rows
                .iter()
                .zip(&other.rows)
                .map(|(a, b)| Mat::merge(a, b, q(-1)))
                .collect(),
        }
    }

    pub fn scale(&self, c: Q) -> Mat {
        if c == q(0) {
            return Mat::zero(self.n);
        }
        Mat {
            n: self.n,
            rows: self
                .rows
                .iter()
                .map(|row| row.iter().map(|(j, x)| (*j, c * x)).collect())
                .collect(),
        }
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        self.check(other);
        let mut acc = vec![q(0); self.n];
        let mut touched: Vec<usize> = Vec::new();
        let rows = self
            .rows
            .iter()
            .map(|row| {
                for (k, a) in row {
                    for (j, b) in &other.rows[*k] {
                        if acc[*j] == q(0) {
                            touched.push(*j);
                        }
                        acc[*j] += a * b;
                    }
                }
                touched.sort_unstable();
                touched.dedup();
                let out: SparseVec = touched
                    .iter()
                    .filter(|j| acc[**j] != q(0))
                    .map(|j| (*j, acc[*j]))
                    .collect();
                for j in touched.drain(..) {
                    acc[j] = q(0);
                }
                out
            })
            .collect();
        Mat { n: self.n, rows }
    }

    /// Conjugate transpose; entries are real.
    pub fn adjoint(&self) -> Mat {
        let mut rows = vec![Vec::new(); self.n];
        for (i, j, x) in self.entries() {
            rows[j].push((i, x));
        }
        Mat { n: self.n, rows }
    }

    pub fn is_projection(&self) -> bool {
        self.adjoint() == *self && self.mul(self) == *self
    }

    /// Entries with flattened index `i * n + j`.
    pub fn flatten(&self) -> SparseVec {
        self.entries()
            .map(|(i, j, x)| (i * self.n + j, x))
            .collect()
    }

    pub fn from_flat(n: usize, v: &[(usize, Q)]) -> Mat {
        let mut m = Mat::zero(n);
        for (k, x) in v {
            m.rows[k / n].push((k % n, *x));
        }
        m
    }

    /// `diag(a, b)` with `a` in the top-left corner.
    pub fn block_diag(a: &Mat, b: &Mat) -> Mat {
        let n = a.n + b.n;
        let mut m = Mat::zero(n);
        for (i, j, x) in a.entries() {
            m.rows[i].push((j, x));
        }
        for (i, j, x) in b.entries() {
            m.rows[a.n + i].push((a.n + j, x));
        }
        m
    }

    /// Embeds `a` at offset `off` in a zero matrix of size `n`.
    pub fn embed(a: &Mat, n: usize, off: usize) -> Mat {
        let mut m = Mat::zero(n);
        for (i, j, x) in a.entries() {
            m.rows[off + i].push((off + j, x));
        }
        m
    }

    /// The `len`-square block starting at `off`.
    pub fn block(&self, off: usize, len: usize) -> Mat {
        let mut m = Mat::zero(len);
        for (i, j, x) in self.entries() {
            if (off..off + len).contains(&i) && (off..off + len).contains(&j) {
                m.rows[i - off].push((j - off, x));
            }
        }
        m
    }

    /// Whether every nonzero entry lies in the block at `off` of size `len`.
    pub fn supported_in(&self, off: usize, len: usize) -> bool {
        self.entries()
            .all(|(i, j, _)| (off..off + len).contains(&i) && (off..off + len).contains(&j))
    }

    pub fn is_diagonal_01(&self) -> bool {
        self.entries().all(|(i, j, x)| i == j && x == q(1))
    }

    pub fn rank(&self) -> usize {
        let mut e = Echelon::new(self.n);
        for row in &self.rows {
            e.insert(row.clone());
        }
        e.len()
    }

    pub fn sum<'a>(n: usize, ms: impl IntoIterator<Item = &'a Mat>) -> Mat {
        ms.into_iter().fold(Mat::zero(n), |acc, m| acc.add(m))
    }
}

/// Dense JSON form: a list of rows of `[numerator, denominator]` pairs.
impl Serialize for Mat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let dense: Vec<Vec<[i64; 2]>> = self
            .to_dense()
            .into_iter()
            .map(|row| row.into_iter().map(|x| [*x.numer(), *x.denom()]).collect())
            .collect();
        dense.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let dense: Vec<Vec<[i64; 2]>> = Vec::deserialize(d)?;
        let mut rows = Vec::with_capacity(dense.len());
        for row in dense {
            let mut r = Vec::with_capacity(row.len());
            for [num, den] in row {
                if den == 0 {
                    return Err(serde::de::Error::custom("zero denominator"));
                }
                r.push(Q::new(num, den));
            }
            rows.push(r);
        }
        Mat::from_dense(rows).map_err(serde::de::Error::custom)
    }
}

/// Row-echelon form over a fixed number of coordinates. Rows are normalized
/// to leading coefficient 1 and only have entries at or after their pivot.
#[derive(Clone, Debug)]
pub struct Echelon {
    dim: usize,
    rows: Vec<SparseVec>,
    pivot_row: Vec<Option<usize>>,
    scratch: Vec<Q>,
}

impl Echelon {
    pub fn new(dim: usize) -> Self {
        Echelon {
            dim,
            rows: Vec::new(),
            pivot_row: vec![None; dim],
            scratch: vec![q(0); dim],
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[SparseVec] {
        &self.rows
    }

    /// Reduces `v` against the current rows.
    pub fn reduce(&mut self, v: &[(usize, Q)]) -> SparseVec {
        let mut heap: BinaryHeap<Reverse<usize>> = BinaryHeap::new();
        let mut touched: Vec<usize> = Vec::new();
        for (k, x) in v {
            self.scratch[*k] += x;
            heap.push(Reverse(*k));
            touched.push(*k);
        }
        let mut out = Vec::new();
        let mut last = None;
        while let Some(Reverse(k)) = heap.pop() {
            if last == Some(k) {
                continue;
            }
            last = Some(k);
            let c = self.scratch[k];
            if c == q(0) {
                continue;
            }
            match self.pivot_row[k] {
                Some(r) => {
                    for (j, x) in &self.rows[r] {
                        if self.scratch[*j] == q(0) {
                            touched.push(*j);
                            heap.push(Reverse(*j));
                        }
                        self.scratch[*j] -= c * x;
                    }
                }
                None => out.push((k, c)),
            }
        }
        for k in touched {
            self.scratch[k] = q(0);
        }
        out
    }

    pub fn contains(&mut self, v: &[(usize, Q)]) -> bool {
        self.reduce(v).is_empty()
    }

    /// Adds `v` to the span; returns whether the dimension grew.
    pub fn insert(&mut self, v: SparseVec) -> bool {
        let r = self.reduce(&v);
        let Some(&(pivot, lead)) = r.first() else {
            return false;
        };
        let inv = lead.recip();
        let row: SparseVec = r.into_iter().map(|(k, x)| (k, x * inv)).collect();
        self.pivot_row[pivot] = Some(self.rows.len());
        self.rows.push(row);
        true
    }

    /// The reduced row-echelon basis, sorted by pivot.
    pub fn rref(&self) -> Vec<SparseVec> {
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by_key(|&r| self.rows[r][0].0);
        let mut rows: Vec<SparseVec> = order.iter().map(|&r| self.rows[r].clone()).collect();
        for i in (0..rows.len()).rev() {
            let (p, _) = rows[i][0];
            let pivot_row = rows[i].clone();
            for row in rows.iter_mut().take(i) {
                if let Ok(k) = row.binary_search_by_key(&p, |(c, _)| *c) {
                    let c = row[k].1;
                    *row = Mat::merge(row, &pivot_row, -c);
                }
            }
        }
        rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// A finite-dimensional linear span of `n x n` matrices.
#[derive(Clone, Debug)]
pub struct SpannedAlgebra {
    n: usize,
    echelon: Echelon,
    /// The spanning elements in insertion order, as matrices.
    elements: Vec<Mat>,
}

impl SpannedAlgebra {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.echelon.len()
    }

    pub fn elements(&self) -> &[Mat] {
        &self.elements
    }

    pub fn contains(&mut self, m: &Mat) -> bool {
        m.n == self.n && self.echelon.contains(&m.flatten())
    }

    /// Whether the two spans are equal as subspaces.
    pub fn same_span(&mut self, other: &SpannedAlgebra) -> bool {
        self.n == other.n
            && self.dim() == other.dim()
            && other
                .elements
                .iter()
                .all(|m| self.echelon.contains(&m.flatten()))
    }

    /// The reduced row-echelon basis as matrices.
    pub fn canonical_basis(&self) -> Vec<Mat> {
        self.echelon
            .rref()
            .iter()
            .map(|r| Mat::from_flat(self.n, r))
            .collect()
    }

    /// Echelon rows, in insertion order.
    pub fn echelon_rows(&self) -> &[SparseVec] {
        self.echelon.rows()
    }

    fn new(n: usize) -> Self {
        SpannedAlgebra {
            n,
            echelon: Echelon::new(n * n),
            elements: Vec::new(),
        }
    }

    fn push(&mut self, m: Mat) -> bool {
        if self.echelon.insert(m.flatten()) {
            self.elements.push(m);
            true
        } else {
            false
        }
    }
}

fn common_size(gens: &[Mat]) -> Result<usize> {
    let n = gens.first().map_or(0, Mat::n);
    for g in gens {
        if g.n != n {
            return Err(Error::SizeMismatch {
                expected: n,
                found: g.n,
            });
        }
    }
    Ok(n)
}

fn with_adjoints(gens: &[Mat]) -> Vec<Mat> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for g in gens.iter().flat_map(|g| [g.clone(), g.adjoint()]) {
        if !g.is_zero() && seen.insert(g.clone()) {
            out.push(g);
        }
    }
    out
}

/// The smallest adjoint- and product-closed span containing `gens`.
///
/// Every accepted element is multiplied on the right by every generator;
/// words in the generators are therefore reached by induction on length.
pub fn span_closure(gens: &[Mat]) -> Result<SpannedAlgebra> {
    let n = common_size(gens)?;
    let letters = with_adjoints(gens);
    let mut span = SpannedAlgebra::new(n);
    for g in &letters {
        span.push(g.clone());
    }
    let mut seen: HashSet<Mat> = letters.iter().cloned().collect();
    let mut i = 0;
    while i < span.elements.len() {
        let x = span.elements[i].clone();
        for g in &letters {
            let p = x.mul(g);
            if p.is_zero() || !seen.insert(p.clone()) {
                continue;
            }
            span.push(p);
        }
        i += 1;
    }
    Ok(span)
}

/// The two-sided ideal generated by `seed` inside the algebra generated by
/// `gens` (which must contain the seed's algebra).
pub fn ideal_closure(seed: &[Mat], gens: &[Mat]) -> Result<SpannedAlgebra> {
    let all: Vec<Mat> = seed.iter().chain(gens).cloned().collect();
    let n = common_size(&all)?;
    let letters = with_adjoints(gens);
    let mut span = SpannedAlgebra::new(n);
    for s in seed {
        span.push(s.clone());
    }
    let mut seen: HashSet<Mat> = seed.iter().cloned().collect();
    let mut i = 0;
    while i < span.elements.len() {
        let x = span.elements[i].clone();
        for g in &letters {
            for p in [g.mul(&x), x.mul(g)] {
                if p.is_zero() || !seen.insert(p.clone()) {
                    continue;
                }
                span.push(p);
            }
        }
        i += 1;
    }
    Ok(span)
}

/// The span of arbitrary matrices, without closing under anything.
pub fn linear_span(ms: &[Mat]) -> Result<SpannedAlgebra> {
    let n = common_size(ms)?;
    let mut span = SpannedAlgebra::new(n);
    for m in ms {
        span.push(m.clone());
    }
    Ok(span)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> Q {
        Q::new(a, b)
    }

    #[test]
    fn arithmetic() {
        let a = Mat::from_dense(vec![vec![q(1), q(2)], vec![q(0), r(1, 2)]]).unwrap();
        let b = Mat::from_dense(vec![vec![q(0), q(1)], vec![q(1), q(0)]]).unwrap();
        let ab = a.mul(&b);
        assert_eq!(ab.to_dense(), vec![vec![q(2), q(1)], vec![r(1, 2), q(0)]]);
        assert_eq!(a.sub(&a), Mat::zero(2));
        assert_eq!(a.add(&a), a.scale(q(2)));
        assert_eq!(a.adjoint().get(1, 0), q(2));
        assert!(Mat::unit(3, 1, 1).is_projection());
        assert!(!b.is_projection());
        assert_eq!(a.rank(), 2);
        assert_eq!(Mat::unit(3, 0, 2).rank(), 1);
    }

    #[test]
    fn json_round_trip() {
        let a = Mat::from_dense(vec![vec![r(-3, 4), q(0)], vec![q(0), q(1)]]).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, "[[[-3,4],[0,1]],[[0,1],[1,1]]]");
        assert_eq!(serde_json::from_str::<Mat>(&s).unwrap(), a);
        assert!(serde_json::from_str::<Mat>("[[[1,0]]]").is_err());
        assert!(serde_json::from_str::<Mat>("[[[1,1],[0,1]]]").is_err());
    }

    #[test]
    fn identity_spans_scalars() {
        assert_eq!(span_closure(&[Mat::identity(4)]).unwrap().dim(), 1);
    }

    #[test]
    fn one_shift_spans_m2() {
        assert_eq!(span_closure(&[Mat::unit(2, 0, 1)]).unwrap().dim(), 4);
    }

    #[test]
    fn block_algebra() {
        // M2 + C inside M3
        let s = span_closure(&[Mat::unit(3, 0, 1), Mat::unit(3, 2, 2)]).unwrap();
        assert_eq!(s.dim(), 5);
    }

    #[test]
    fn size_mismatch_rejected() {
        assert!(matches!(
            span_closure(&[Mat::zero(2), Mat::zero(3)]),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn rref_is_canonical() {
        let a = Mat::unit(2, 0, 0).add(&Mat::unit(2, 1, 1));
        let b = Mat::unit(2, 0, 0).sub(&Mat::unit(2, 1, 1));
        let mut s1 = linear_span(&[a.clone(), b.clone()]).unwrap();
        let s2 = linear_span(&[Mat::unit(2, 0, 0), Mat::unit(2, 1, 1)]).unwrap();
        assert!(s1.same_span(&s2));
        assert_eq!(s1.canonical_basis(), s2.canonical_basis());
        assert_eq!(s1.canonical_basis()[0], Mat::unit(2, 0, 0));
    }

    #[test]
    fn ideal_of_a_corner() {
        let gens = [Mat::unit(2, 0, 1)];
        let i = ideal_closure(&[Mat::unit(2, 0, 0)], &gens).unwrap();
        assert_eq!(i.dim(), 4);
    }
}
