//! Exact integer vectors and matrices, the reduction order `⊑`, and
//! Minkowski algebra on finite point sets.
//!
//! Entries are `i64` and every arithmetic step is checked; an overflow is a
//! hard failure (panic) rather than a silent wrap. Desk-scale fibers never
//! come close to the limit.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::ops::{Deref, Index};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not rectangular: row {row} has {found} entries, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("label count mismatch: {what} has {found} labels, expected {expected}")]
    Labels {
        what: &'static str,
        expected: usize,
        found: usize,
    },
}

fn check_dim(expected: usize, found: usize) -> Result<(), IntError> {
    if expected == found {
        Ok(())
    } else {
        Err(IntError::DimensionMismatch { expected, found })
    }
}

pub(crate) fn add_i64(a: i64, b: i64) -> i64 {
    a.checked_add(b)
        .expect("integer overflow in vector arithmetic")
}

pub(crate) fn mul_i64(a: i64, b: i64) -> i64 {
    a.checked_mul(b)
        .expect("integer overflow in vector arithmetic")
}

/// Integer vector with a fixed dimension. Ordered lexicographically, which
/// gives point sets their canonical iteration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntVector(Vec<i64>);

impl IntVector {
    pub fn new(entries: Vec<i64>) -> Self {
        IntVector(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        IntVector(vec![0; dim])
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = vec![0; dim];
        v[i] = 1;
        IntVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<i64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&x| x >= 0)
    }

    pub fn checked_add(&self, other: &IntVector) -> Result<IntVector, IntError> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.add_unchecked_dim(other))
    }

    pub fn checked_sub(&self, other: &IntVector) -> Result<IntVector, IntError> {
        check_dim(self.dim(), other.dim())?;
        Ok(IntVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| {
                    a.checked_sub(b)
                        .expect("integer overflow in vector arithmetic")
                })
                .collect(),
        ))
    }

    pub fn scale(&self, k: i64) -> IntVector {
        IntVector(self.0.iter().map(|&x| mul_i64(x, k)).collect())
    }

    pub fn dot(&self, other: &IntVector) -> Result<i64, IntError> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .fold(0, |acc, (&a, &b)| add_i64(acc, mul_i64(a, b))))
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &IntVector) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    fn add_unchecked_dim(&self, other: &IntVector) -> IntVector {
        IntVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| add_i64(a, b))
                .collect(),
        )
    }
}

impl From<Vec<i64>> for IntVector {
    fn from(v: Vec<i64>) -> Self {
        IntVector(v)
    }
}

impl From<&[i64]> for IntVector {
    fn from(v: &[i64]) -> Self {
        IntVector(v.to_vec())
    }
}

impl Deref for IntVector {
    type Target = [i64];
    fn deref(&self) -> &[i64] {
        &self.0
    }
}

impl Index<usize> for IntVector {
    type Output = i64;
    fn index(&self, i: usize) -> &i64 {
        &self.0[i]
    }
}

impl fmt::Display for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// `u ⊑ v`: every component of `u` has the sign of the matching component of
/// `v` and no larger magnitude.
pub fn reduces(u: &IntVector, v: &IntVector) -> Result<bool, IntError> {
    check_dim(u.dim(), v.dim())?;
    Ok(reduces_unchecked(u, v))
}

pub(crate) fn reduces_unchecked(u: &[i64], v: &[i64]) -> bool {
    u.iter().zip(v).all(|(&a, &b)| {
        // sign test without multiplying, so no overflow is possible
        let same_sign = a == 0 || b == 0 || (a > 0) == (b > 0);
        same_sign && a.unsigned_abs() <= b.unsigned_abs()
    })
}

/// Dense integer matrix with a string tag per row and per column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntMatrix {
    rows: Vec<IntVector>,
    cols: usize,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
}

impl IntMatrix {
    pub fn new(
        rows: Vec<Vec<i64>>,
        cols: usize,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
    ) -> Result<Self, IntError> {
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(IntError::Ragged {
                    row: i,
                    expected: cols,
                    found: r.len(),
                });
            }
        }
        if row_labels.len() != rows.len() {
            return Err(IntError::Labels {
                what: "rows",
                expected: rows.len(),
                found: row_labels.len(),
            });
        }
        if col_labels.len() != cols {
            return Err(IntError::Labels {
                what: "columns",
                expected: cols,
                found: col_labels.len(),
            });
        }
        Ok(IntMatrix {
            rows: rows.into_iter().map(IntVector).collect(),
            cols,
            row_labels,
            col_labels,
        })
    }

    /// Matrix with generated labels `r0..`, `x0..`.
    pub fn from_rows(rows: Vec<Vec<i64>>, cols: usize) -> Result<Self, IntError> {
        let rl = (0..rows.len()).map(|i| format!("r{i}")).collect();
        let cl = (0..cols).map(|j| format!("x{j}")).collect();
        Self::new(rows, cols, rl, cl)
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &IntVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[IntVector] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.rows[i][j]
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn mul_vec(&self, z: &IntVector) -> Result<IntVector, IntError> {
        check_dim(self.cols, z.dim())?;
        Ok(IntVector(
            self.rows
                .iter()
                .map(|r| r.dot(z).expect("checked dimension"))
                .collect(),
        ))
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix, IntError> {
        check_dim(self.cols, other.nrows())?;
        let rows = self
            .rows
            .iter()
            .map(|r| {
                (0..other.cols)
                    .map(|j| {
                        (0..self.cols)
                            .fold(0, |acc, k| add_i64(acc, mul_i64(r[k], other.get(k, j))))
                    })
                    .collect()
            })
            .collect();
        IntMatrix::new(
            rows,
            other.cols,
            self.row_labels.clone(),
            other.col_labels.clone(),
        )
    }
}

/// Finite set of integer points of one dimension, kept in sorted order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PointSet {
    dim: usize,
    points: BTreeSet<IntVector>,
}

impl PointSet {
    pub fn empty(dim: usize) -> Self {
        PointSet {
            dim,
            points: BTreeSet::new(),
        }
    }

    /// `{0}`, the identity of the Minkowski sum.
    pub fn zero(dim: usize) -> Self {
        Self::singleton(IntVector::zeros(dim))
    }

    pub fn singleton(p: IntVector) -> Self {
        let dim = p.dim();
        let mut points = BTreeSet::new();
        points.insert(p);
        PointSet { dim, points }
    }

    pub fn from_points<I>(dim: usize, points: I) -> Result<Self, IntError>
    where
        I: IntoIterator<Item = IntVector>,
    {
        let mut set = PointSet::empty(dim);
        for p in points {
            set.insert(p)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, p: IntVector) -> Result<bool, IntError> {
        check_dim(self.dim, p.dim())?;
        Ok(self.points.insert(p))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &IntVector) -> bool {
        self.points.contains(p)
    }

    pub fn iter(&self) -> impl Iterator<Item = &IntVector> + '_ {
        self.points.iter()
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.dim == other.dim && self.points.is_subset(&other.points)
    }

    pub fn retain<F: FnMut(&IntVector) -> bool>(&mut self, f: F) {
        self.points.retain(f);
    }

    /// Image of every point under `m`.
    pub fn map_linear(&self, m: &IntMatrix) -> Result<PointSet, IntError> {
        let mut out = PointSet::empty(m.nrows());
        for p in &self.points {
            out.points.insert(m.mul_vec(p)?);
        }
        Ok(out)
    }
}

impl<'a> IntoIterator for &'a PointSet {
    type Item = &'a IntVector;
    type IntoIter = std::collections::btree_set::Iter<'a, IntVector>;
    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// `{x1 + x2 : x1 ∈ s1, x2 ∈ s2}`.
pub fn minkowski_sum(s1: &PointSet, s2: &PointSet) -> Result<PointSet, IntError> {
    check_dim(s1.dim, s2.dim)?;
    let mut out = PointSet::empty(s1.dim);
    for a in &s1.points {
        for b in &s2.points {
            out.points.insert(a.add_unchecked_dim(b));
        }
    }
    Ok(out)
}

/// Minkowski sum of `k` copies of `s`; `0·s = {0}`.
pub fn scaled_sum(k: u64, s: &PointSet) -> PointSet {
    // binary powering: (2^i)·s is built by doubling
    let mut acc = PointSet::zero(s.dim);
    let mut base = s.clone();
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            acc = minkowski_sum(&acc, &base).expect("same dimension");
        }
        k >>= 1;
        if k > 0 {
            base = minkowski_sum(&base, &base).expect("same dimension");
        }
    }
    acc
}

/// Whether `target ⊆ s1 + s2`, without materialising the full sum when a
/// cardinality argument already rules it out.
pub fn minkowski_sum_covers(s1: &PointSet, s2: &PointSet, target: &PointSet) -> bool {
    if s1.dim != s2.dim || s1.dim != target.dim {
        return false;
    }
    if target.is_empty() {
        return true;
    }
    if (s1.len() as u128) * (s2.len() as u128) < target.len() as u128 {
        return false;
    }
    let mut remaining: HashSet<&IntVector> = target.points.iter().collect();
    for a in &s1.points {
        for b in &s2.points {
            let p = a.add_unchecked_dim(b);
            remaining.remove(&p);
            if remaining.is_empty() {
                return true;
            }
        }
    }
    false
}

/// Whether `s1 + s2 == target` exactly.
pub fn minkowski_sum_equals(s1: &PointSet, s2: &PointSet, target: &PointSet) -> bool {
    if s1.dim != s2.dim || s1.dim != target.dim {
        return false;
    }
    if s1.is_empty() || s2.is_empty() {
        return target.is_empty();
    }
    for a in &s1.points {
        for b in &s2.points {
            if !target.contains(&a.add_unchecked_dim(b)) {
                return false;
            }
        }
    }
    minkowski_sum_covers(s1, s2, target)
}
