//! Fibers `{z ≥ 0 integral : Az = b}`, their truncations, and Minkowski
//! (in)decomposability with respect to coordinate monoids of right-hand
//! sides.
//!
//! Everything here is exact enumeration. Variable bounds come from interval
//! propagation over the equality rows, so a fiber is only enumerated once it
//! is provably finite.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use parking_lot::RwLock;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intcore::{
    minkowski_sum, minkowski_sum_covers, minkowski_sum_equals, reduces_unchecked, scaled_sum,
    IntError, IntMatrix, IntVector, PointSet,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FiberError {
    #[error("variable {variable} ({label}) is unbounded; the fiber may be infinite")]
    Unbounded { variable: usize, label: String },
    #[error("right-hand side {0} is not in the monoid")]
    NotInMonoid(IntVector),
    #[error("fiber of {0} is empty")]
    EmptyFiber(IntVector),
    #[error("no decomposition of {0} into the listed atoms")]
    NoDecomposition(IntVector),
    #[error("invalid monoid: {0}")]
    InvalidMonoid(String),
    #[error("invalid truncation set: {0}")]
    InvalidTruncation(String),
    #[error(transparent)]
    Int(#[from] IntError),
}

/// Nonnegative integer solutions of `Az = b`.
#[derive(Debug, Clone)]
pub struct Fiber {
    pub system: Arc<IntMatrix>,
    pub rhs: IntVector,
    pub points: PointSet,
}

impl Fiber {
    pub fn enumerate(system: Arc<IntMatrix>, rhs: IntVector) -> Result<Self, FiberError> {
        let points = enumerate_fiber(&system, &rhs)?;
        Ok(Fiber {
            system,
            rhs,
            points,
        })
    }
}

enum Propagation {
    Empty,
    Bounded { lower: Vec<i64>, upper: Vec<i64> },
}

fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn ceil_div(a: i128, b: i128) -> i128 {
    -floor_div(-a, b)
}

fn propagate(a: &IntMatrix, b: &IntVector) -> Result<Propagation, FiberError> {
    if b.dim() != a.nrows() {
        return Err(IntError::DimensionMismatch {
            expected: a.nrows(),
            found: b.dim(),
        }
        .into());
    }
    let n = a.ncols();
    let mut lower = vec![0i128; n];
    let mut upper: Vec<Option<i128>> = vec![None; n];
    let max_passes = 64 * (n + 1);

    for _ in 0..max_passes {
        let mut changed = false;
        for (i, row) in a.rows().iter().enumerate() {
            let rhs = b[i] as i128;
            // row activity range, tracking how many terms are unbounded
            let mut min_sum = 0i128;
            let mut max_sum = 0i128;
            let mut min_inf = 0usize;
            let mut max_inf = 0usize;
            for j in 0..n {
                let c = row[j] as i128;
                if c > 0 {
                    min_sum += c * lower[j];
                    match upper[j] {
                        Some(u) => max_sum += c * u,
                        None => max_inf += 1,
                    }
                } else if c < 0 {
                    max_sum += c * lower[j];
                    match upper[j] {
                        Some(u) => min_sum += c * u,
                        None => min_inf += 1,
                    }
                }
            }
            if min_inf == 0 && max_inf == 0 && (rhs < min_sum || rhs > max_sum) {
                return Ok(Propagation::Empty);
            }
            for j in 0..n {
                let c = row[j] as i128;
                if c == 0 {
                    continue;
                }
                // this term's share of the activity range
                let (own_min, own_min_inf, own_max, own_max_inf) = if c > 0 {
                    (
                        c * lower[j],
                        false,
                        upper[j].map_or(0, |u| c * u),
                        upper[j].is_none(),
                    )
                } else {
                    (
                        upper[j].map_or(0, |u| c * u),
                        upper[j].is_none(),
                        c * lower[j],
                        false,
                    )
                };
                let rest_min = (min_inf - usize::from(own_min_inf) == 0).then(|| min_sum - own_min);
                let rest_max = (max_inf - usize::from(own_max_inf) == 0).then(|| max_sum - own_max);
                // c·z_j = rhs - rest, rest ∈ [rest_min, rest_max]
                let (new_up, new_lo) = if c > 0 {
                    (
                        rest_min.map(|m| floor_div(rhs - m, c)),
                        rest_max.map(|m| ceil_div(rhs - m, c)),
                    )
                } else {
                    (
                        rest_max.map(|m| floor_div(m - rhs, -c)),
                        rest_min.map(|m| ceil_div(m - rhs, -c)),
                    )
                };
                if let Some(u) = new_up {
                    if upper[j].is_none_or(|old| u < old) {
                        upper[j] = Some(u);
                        changed = true;
                    }
                }
                if let Some(l) = new_lo {
                    if l > lower[j] {
                        lower[j] = l;
                        changed = true;
                    }
                }
                if let Some(u) = upper[j] {
                    if u < lower[j] {
                        return Ok(Propagation::Empty);
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut up = Vec::with_capacity(n);
    for (j, u) in upper.iter().enumerate() {
        match u {
            Some(u) => up.push(i64::try_from(*u).expect("variable bound fits in i64")),
            None => {
                return Err(FiberError::Unbounded {
                    variable: j,
                    label: a.col_labels()[j].clone(),
                })
            }
        }
    }
    Ok(Propagation::Bounded {
        lower: lower.into_iter().map(|l| l as i64).collect(),
        upper: up,
    })
}

/// Upper bound on every variable over the fiber of `b`.
///
/// A negative entry means propagation proved the fiber empty.
pub fn variable_bounds(a: &IntMatrix, b: &IntVector) -> Result<Vec<i64>, FiberError> {
    match propagate(a, b)? {
        Propagation::Empty => Ok(vec![-1; a.ncols()]),
        Propagation::Bounded { upper, .. } => Ok(upper),
    }
}

/// All nonnegative integer solutions of `Az = b`, by depth-first assignment
/// in column order with interval pruning on every row.
pub fn enumerate_fiber(a: &IntMatrix, b: &IntVector) -> Result<PointSet, FiberError> {
    let n = a.ncols();
    let m = a.nrows();
    let (lower, upper) = match propagate(a, b)? {
        Propagation::Empty => return Ok(PointSet::empty(n)),
        Propagation::Bounded { lower, upper } => (lower, upper),
    };

    // suffix activity ranges: smin[i][j] = min of Σ_{k≥j} a_ik z_k
    let mut smin = vec![vec![0i128; n + 1]; m];
    let mut smax = vec![vec![0i128; n + 1]; m];
    for i in 0..m {
        for j in (0..n).rev() {
            let c = a.get(i, j) as i128;
            let (lo, hi) = (c * lower[j] as i128, c * upper[j] as i128);
            smin[i][j] = smin[i][j + 1] + lo.min(hi);
            smax[i][j] = smax[i][j + 1] + lo.max(hi);
        }
    }
    let mut resid: Vec<i128> = b.iter().map(|&x| x as i128).collect();
    for i in 0..m {
        if resid[i] < smin[i][0] || resid[i] > smax[i][0] {
            return Ok(PointSet::empty(n));
        }
    }
    let col_rows: Vec<Vec<(usize, i128)>> = (0..n)
        .map(|j| {
            (0..m)
                .filter(|&i| a.get(i, j) != 0)
                .map(|i| (i, a.get(i, j) as i128))
                .collect()
        })
        .collect();

    let mut out = Vec::new();
    let mut z = vec![0i64; n];
    let search = Search {
        col_rows: &col_rows,
        smin: &smin,
        smax: &smax,
        lower: &lower,
        upper: &upper,
    };
    search.dfs(0, &mut z, &mut resid, &mut out);
    Ok(PointSet::from_points(n, out).expect("consistent dimension"))
}

struct Search<'a> {
    col_rows: &'a [Vec<(usize, i128)>],
    smin: &'a [Vec<i128>],
    smax: &'a [Vec<i128>],
    lower: &'a [i64],
    upper: &'a [i64],
}

impl Search<'_> {
    fn dfs(&self, j: usize, z: &mut [i64], resid: &mut [i128], out: &mut Vec<IntVector>) {
        let n = z.len();
        if j == n {
            out.push(IntVector::from(&z[..]));
            return;
        }
        let mut lo = self.lower[j] as i128;
        let mut hi = self.upper[j] as i128;
        for &(i, c) in &self.col_rows[j] {
            // c·z_j ∈ [resid - smax(rest), resid - smin(rest)]
            let t_lo = resid[i] - self.smax[i][j + 1];
            let t_hi = resid[i] - self.smin[i][j + 1];
            let (l, h) = if c > 0 {
                (ceil_div(t_lo, c), floor_div(t_hi, c))
            } else {
                (ceil_div(t_hi, c), floor_div(t_lo, c))
            };
            lo = lo.max(l);
            hi = hi.min(h);
            if lo > hi {
                return;
            }
        }
        for v in lo..=hi {
            for &(i, c) in &self.col_rows[j] {
                resid[i] -= c * v;
            }
            z[j] = v as i64;
            self.dfs(j + 1, z, resid, out);
            for &(i, c) in &self.col_rows[j] {
                resid[i] += c * v;
            }
        }
        z[j] = 0;
    }
}

/// A rule that cuts points out of a fiber.
pub trait Truncation: Sync {
    fn cuts(&self, point: &IntVector) -> bool;
}

/// Generators `C`; a point is cut when some generator reduces it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationSet {
    vectors: PointSet,
}

impl TruncationSet {
    pub fn new(vectors: PointSet) -> Result<Self, FiberError> {
        for v in vectors.iter() {
            if v.is_zero() || !v.is_nonnegative() {
                return Err(FiberError::InvalidTruncation(format!(
                    "generator {v} must be nonzero and nonnegative"
                )));
            }
        }
        Ok(TruncationSet { vectors })
    }

    pub fn empty(dim: usize) -> Self {
        TruncationSet {
            vectors: PointSet::empty(dim),
        }
    }

    pub fn vectors(&self) -> &PointSet {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

impl Truncation for TruncationSet {
    fn cuts(&self, point: &IntVector) -> bool {
        self.vectors
            .iter()
            .any(|c| c.dim() == point.dim() && reduces_unchecked(c, point))
    }
}

/// `{z ∈ points : no generator c with c ⊑ z}`.
pub fn truncate_fiber<T: Truncation + ?Sized>(points: &PointSet, trunc: &T) -> PointSet {
    let mut out = points.clone();
    out.retain(|z| !trunc.cuts(z));
    out
}

/// Right-hand sides with `free` coordinates ranging over the nonnegative
/// integers, `zero` coordinates pinned to 0 and `tied` pairs forced equal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoordinateMonoid {
    dim: usize,
    free: Vec<usize>,
    zero: Vec<usize>,
    tied: Vec<(usize, usize)>,
    /// representative free coordinate for each free coordinate, after ties
    class_of: Vec<usize>,
}

impl CoordinateMonoid {
    pub fn new(
        dim: usize,
        free: Vec<usize>,
        zero: Vec<usize>,
        tied: Vec<(usize, usize)>,
    ) -> Result<Self, FiberError> {
        let mut seen = vec![0u8; dim];
        for &i in free.iter().chain(&zero) {
            if i >= dim {
                return Err(FiberError::InvalidMonoid(format!(
                    "coordinate {i} out of range"
                )));
            }
            seen[i] += 1;
        }
        if let Some(i) = seen.iter().position(|&s| s != 1) {
            return Err(FiberError::InvalidMonoid(format!(
                "coordinate {i} must be in exactly one of free/zero"
            )));
        }
        let is_free: HashSet<usize> = free.iter().copied().collect();
        let mut parent: Vec<usize> = (0..dim).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for &(p, q) in &tied {
            if !is_free.contains(&p) || !is_free.contains(&q) {
                return Err(FiberError::InvalidMonoid(format!(
                    "tie ({p},{q}) must join free coordinates"
                )));
            }
            let (rp, rq) = (find(&mut parent, p), find(&mut parent, q));
            let (lo, hi) = (rp.min(rq), rp.max(rq));
            parent[hi] = lo;
        }
        let class_of = (0..dim).map(|i| find(&mut parent, i)).collect();
        let mut free = free;
        let mut zero = zero;
        free.sort_unstable();
        zero.sort_unstable();
        Ok(CoordinateMonoid {
            dim,
            free,
            zero,
            tied,
            class_of,
        })
    }

    /// Every coordinate free.
    pub fn nonnegative_orthant(dim: usize) -> Self {
        Self::new(dim, (0..dim).collect(), vec![], vec![]).expect("valid monoid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn free(&self) -> &[usize] {
        &self.free
    }

    pub fn zero(&self) -> &[usize] {
        &self.zero
    }

    pub fn tied(&self) -> &[(usize, usize)] {
        &self.tied
    }

    pub fn contains(&self, b: &IntVector) -> bool {
        b.dim() == self.dim
            && self.zero.iter().all(|&i| b[i] == 0)
            && self
                .free
                .iter()
                .all(|&i| b[i] >= 0 && b[i] == b[self.class_of[i]])
    }

    fn classes(&self) -> Vec<usize> {
        let mut reps: Vec<usize> = self.free.iter().map(|&i| self.class_of[i]).collect();
        reps.sort_unstable();
        reps.dedup();
        reps
    }

    fn expand(&self, reps: &[usize], values: &[i64]) -> IntVector {
        let mut v = vec![0; self.dim];
        let by_rep: HashMap<usize, i64> =
            reps.iter().copied().zip(values.iter().copied()).collect();
        for &i in &self.free {
            v[i] = by_rep[&self.class_of[i]];
        }
        IntVector::new(v)
    }

    /// All monoid elements `0 ≤ b ≤ upper` (on free coordinates), in
    /// lexicographic order.
    pub fn box_points(&self, upper: &IntVector) -> Vec<IntVector> {
        let reps = self.classes();
        let caps: Vec<i64> = reps
            .iter()
            .map(|&r| {
                self.free
                    .iter()
                    .filter(|&&i| self.class_of[i] == r)
                    .map(|&i| upper[i].max(-1))
                    .min()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = Vec::new();
        if caps.iter().any(|&c| c < 0) {
            return out;
        }
        mixed_radix(&caps, |vals| out.push(self.expand(&reps, vals)));
        out.sort();
        out
    }

    /// Unordered splits `b = b1 + b2` inside the monoid with both parts
    /// nonzero; each pair is reported once with `b1 ≤ b2` lexicographically.
    pub fn splits(&self, b: &IntVector) -> Vec<(IntVector, IntVector)> {
        let mut out = Vec::new();
        for b1 in self.box_points(b) {
            if b1.is_zero() || &b1 == b {
                continue;
            }
            let b2 = b.checked_sub(&b1).expect("same dimension");
            if b1 <= b2 {
                out.push((b1, b2));
            }
        }
        out
    }
}

fn mixed_radix<F: FnMut(&[i64])>(caps: &[i64], mut f: F) {
    let mut vals = vec![0i64; caps.len()];
    loop {
        f(&vals);
        let mut i = caps.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if vals[i] < caps[i] {
                vals[i] += 1;
                break;
            }
            vals[i] = 0;
        }
    }
}

/// Memoized fibers of one matrix.
pub struct FiberCache {
    system: Arc<IntMatrix>,
    memo: RwLock<HashMap<IntVector, Arc<PointSet>>>,
}

impl FiberCache {
    pub fn new(system: Arc<IntMatrix>) -> Self {
        FiberCache {
            system,
            memo: RwLock::new(HashMap::new()),
        }
    }

    pub fn system(&self) -> &Arc<IntMatrix> {
        &self.system
    }

    pub fn get(&self, b: &IntVector) -> Result<Arc<PointSet>, FiberError> {
        if let Some(p) = self.memo.read().get(b) {
            return Ok(Arc::clone(p));
        }
        let points = Arc::new(enumerate_fiber(&self.system, b)?);
        self.memo
            .write()
            .entry(b.clone())
            .or_insert_with(|| Arc::clone(&points));
        Ok(points)
    }

    /// Fill the memo for many right-hand sides in parallel.
    pub fn prefetch(&self, rhs: &[IntVector]) -> Result<(), FiberError> {
        rhs.par_iter().try_for_each(|b| self.get(b).map(|_| ()))
    }
}

/// Decomposition test shared by the untruncated and truncated variants.
struct SplitTester<'a> {
    cache: &'a FiberCache,
    monoid: &'a CoordinateMonoid,
    trunc: Option<&'a dyn Truncation>,
}

impl SplitTester<'_> {
    fn points(&self, b: &IntVector) -> Result<Arc<PointSet>, FiberError> {
        let full = self.cache.get(b)?;
        Ok(match self.trunc {
            None => full,
            Some(t) => Arc::new(truncate_fiber(&full, t)),
        })
    }

    fn check_pre(&self, b: &IntVector) -> Result<Arc<PointSet>, FiberError> {
        if !self.monoid.contains(b) {
            return Err(FiberError::NotInMonoid(b.clone()));
        }
        let pts = self.points(b)?;
        if pts.is_empty() {
            return Err(FiberError::EmptyFiber(b.clone()));
        }
        Ok(pts)
    }

    /// Whether the parts `b1 + b2 = b` realise a decomposition of `pts`.
    fn split_works(
        &self,
        pts: &PointSet,
        b1: &IntVector,
        b2: &IntVector,
    ) -> Result<bool, FiberError> {
        let p1 = self.points(b1)?;
        if p1.is_empty() {
            return Ok(false);
        }
        let p2 = self.points(b2)?;
        if p2.is_empty() {
            return Ok(false);
        }
        Ok(match self.trunc {
            None => minkowski_sum_equals(&p1, &p2, pts),
            Some(_) => minkowski_sum_covers(&p1, &p2, pts),
        })
    }

    fn witness(&self, b: &IntVector) -> Result<Option<(IntVector, IntVector)>, FiberError> {
        let pts = self.check_pre(b)?;
        for (b1, b2) in self.monoid.splits(b) {
            if self.split_works(&pts, &b1, &b2)? {
                return Ok(Some((b1, b2)));
            }
        }
        Ok(None)
    }
}

/// No monoid split `b = b1 + b2` (both nonzero) has
/// `P_b = P_b1 + P_b2`.
pub fn is_atomic(a: &IntMatrix, b: &IntVector, m: &CoordinateMonoid) -> Result<bool, FiberError> {
    let cache = FiberCache::new(Arc::new(a.clone()));
    is_atomic_cached(&cache, b, m)
}

pub fn is_atomic_cached(
    cache: &FiberCache,
    b: &IntVector,
    m: &CoordinateMonoid,
) -> Result<bool, FiberError> {
    let t = SplitTester {
        cache,
        monoid: m,
        trunc: None,
    };
    Ok(t.witness(b)?.is_none())
}

/// No monoid split with `tr(P_b) ⊆ tr(P_b1) + tr(P_b2)`.
pub fn is_truncated_indecomposable<T: Truncation + ?Sized>(
    a: &IntMatrix,
    b: &IntVector,
    trunc: &T,
    m: &CoordinateMonoid,
) -> Result<bool, FiberError> {
    let cache = FiberCache::new(Arc::new(a.clone()));
    is_truncated_indecomposable_cached(&cache, b, &Dyn(trunc), m)
}

pub fn is_truncated_indecomposable_cached(
    cache: &FiberCache,
    b: &IntVector,
    trunc: &dyn Truncation,
    m: &CoordinateMonoid,
) -> Result<bool, FiberError> {
    let t = SplitTester {
        cache,
        monoid: m,
        trunc: Some(trunc),
    };
    Ok(t.witness(b)?.is_none())
}

struct Dyn<'a, T: ?Sized>(&'a T);

impl<T: Truncation + ?Sized> Truncation for Dyn<'_, T> {
    fn cuts(&self, point: &IntVector) -> bool {
        self.0.cuts(point)
    }
}

/// One generator of the family of fibers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub rhs: IntVector,
    /// Full (untruncated) fiber.
    pub fiber: PointSet,
    /// Truncated fiber, present when the list was enumerated with a truncation.
    pub truncated: Option<PointSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomList {
    pub atoms: Vec<Atom>,
    pub bound: IntVector,
    pub complete_within_box: bool,
    pub truncated: bool,
}

impl AtomList {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn position(&self, rhs: &IntVector) -> Option<usize> {
        self.atoms.iter().position(|a| &a.rhs == rhs)
    }

    /// The points a decomposition must account for: truncated when the
    /// list is truncated.
    pub fn working_points(&self, j: usize) -> &PointSet {
        let a = &self.atoms[j];
        a.truncated.as_ref().unwrap_or(&a.fiber)
    }
}

/// Atom order: by total of the right-hand side, then descending
/// lexicographic. Unit slack atoms therefore come first, in arc order.
fn atom_order(x: &IntVector, y: &IntVector) -> std::cmp::Ordering {
    let sx: i64 = x.iter().sum();
    let sy: i64 = y.iter().sum();
    sx.cmp(&sy).then_with(|| y.cmp(x))
}

/// All atoms (or truncated-indecomposable right-hand sides when `trunc` is
/// given) inside `bound`. The zero right-hand side is never listed.
pub fn enumerate_atoms(
    a: &IntMatrix,
    m: &CoordinateMonoid,
    bound: &IntVector,
    trunc: Option<&dyn Truncation>,
) -> Result<AtomList, FiberError> {
    let cache = FiberCache::new(Arc::new(a.clone()));
    enumerate_atoms_cached(&cache, m, bound, trunc)
}

pub fn enumerate_atoms_cached(
    cache: &FiberCache,
    m: &CoordinateMonoid,
    bound: &IntVector,
    trunc: Option<&dyn Truncation>,
) -> Result<AtomList, FiberError> {
    if bound.dim() != m.dim() {
        return Err(IntError::DimensionMismatch {
            expected: m.dim(),
            found: bound.dim(),
        }
        .into());
    }
    let candidates: Vec<IntVector> = m
        .box_points(bound)
        .into_iter()
        .filter(|b| !b.is_zero())
        .collect();
    cache.prefetch(&candidates)?;
    let tester = SplitTester {
        cache,
        monoid: m,
        trunc,
    };

    enum Verdict {
        Empty,
        Atom,
        Decomposes,
    }
    let verdicts: Vec<Verdict> = candidates
        .par_iter()
        .map(|b| {
            let pts = tester.points(b)?;
            if pts.is_empty() {
                return Ok(Verdict::Empty);
            }
            Ok(match tester.witness(b)? {
                None => Verdict::Atom,
                Some(_) => Verdict::Decomposes,
            })
        })
        .collect::<Result<_, FiberError>>()?;

    let mut atoms = Vec::new();
    // every decomposable candidate has a witness split whose parts are
    // smaller and still inside the box, so by induction it decomposes into
    // listed atoms
    let complete = true;
    for (b, v) in candidates.iter().zip(&verdicts) {
        match v {
            Verdict::Empty => {}
            Verdict::Decomposes => {}
            Verdict::Atom => {
                let fiber = (*cache.get(b)?).clone();
                let truncated = trunc.map(|t| truncate_fiber(&fiber, t));
                atoms.push(Atom {
                    rhs: b.clone(),
                    fiber,
                    truncated,
                });
            }
        }
    }
    atoms.sort_by(|x, y| atom_order(&x.rhs, &y.rhs));
    Ok(AtomList {
        atoms,
        bound: bound.clone(),
        complete_within_box: complete,
        truncated: trunc.is_some(),
    })
}

/// Multiplicities `λ` with `b = Σ λ_j b_j` and `P_b = Σ λ_j P_{b_j}`
/// (`⊆` for truncated lists), found by recursive atom-first splitting and
/// re-verified before returning. Result is sorted by atom index.
pub fn decompose_fiber(
    a: &IntMatrix,
    b: &IntVector,
    atoms: &AtomList,
    trunc: Option<&dyn Truncation>,
) -> Result<Vec<(usize, u64)>, FiberError> {
    let cache = FiberCache::new(Arc::new(a.clone()));
    decompose_fiber_cached(&cache, b, atoms, trunc)
}

pub fn decompose_fiber_cached(
    cache: &FiberCache,
    b: &IntVector,
    atoms: &AtomList,
    trunc: Option<&dyn Truncation>,
) -> Result<Vec<(usize, u64)>, FiberError> {
    if atoms.truncated != trunc.is_some() {
        return Err(FiberError::InvalidTruncation(
            "truncation must match the one used to enumerate the atoms".into(),
        ));
    }
    let points_of = |rhs: &IntVector| -> Result<Arc<PointSet>, FiberError> {
        let full = cache.get(rhs)?;
        Ok(match trunc {
            None => full,
            Some(t) => Arc::new(truncate_fiber(&full, t)),
        })
    };
    let target = points_of(b)?;
    if target.is_empty() {
        return Err(FiberError::EmptyFiber(b.clone()));
    }

    struct Ctx<'a, F> {
        atoms: &'a AtomList,
        points_of: F,
        truncated: bool,
        failed: HashSet<IntVector>,
    }

    fn go<F>(ctx: &mut Ctx<'_, F>, b: &IntVector) -> Result<Option<Vec<usize>>, FiberError>
    where
        F: Fn(&IntVector) -> Result<Arc<PointSet>, FiberError>,
    {
        if b.is_zero() {
            return Ok(Some(vec![]));
        }
        if let Some(j) = ctx.atoms.position(b) {
            return Ok(Some(vec![j]));
        }
        if ctx.failed.contains(b) {
            return Ok(None);
        }
        let here = (ctx.points_of)(b)?;
        for j in 0..ctx.atoms.len() {
            let bj = &ctx.atoms.atoms[j].rhs;
            if !bj.le(b) {
                continue;
            }
            let rest = b.checked_sub(bj)?;
            let rest_pts = (ctx.points_of)(&rest)?;
            if rest_pts.is_empty() {
                continue;
            }
            let pj = ctx.atoms.working_points(j);
            let ok = if ctx.truncated {
                minkowski_sum_covers(pj, &rest_pts, &here)
            } else {
                minkowski_sum_equals(pj, &rest_pts, &here)
            };
            if ok {
                if let Some(mut tail) = go(ctx, &rest)? {
                    tail.push(j);
                    return Ok(Some(tail));
                }
            }
        }
        ctx.failed.insert(b.clone());
        Ok(None)
    }

    let mut ctx = Ctx {
        atoms,
        points_of,
        truncated: trunc.is_some(),
        failed: HashSet::new(),
    };
    let picks = go(&mut ctx, b)?.ok_or_else(|| FiberError::NoDecomposition(b.clone()))?;
    let mut mult: BTreeMap<usize, u64> = BTreeMap::new();
    for j in picks {
        *mult.entry(j).or_default() += 1;
    }
    let result: Vec<(usize, u64)> = mult.into_iter().collect();

    // re-verify: Σ λ_j b_j = b and the Minkowski relation on the points
    let mut rhs_sum = IntVector::zeros(b.dim());
    let mut sum = PointSet::zero(target.dim());
    for &(j, k) in &result {
        rhs_sum = rhs_sum.checked_add(&atoms.atoms[j].rhs.scale(k as i64))?;
        sum = minkowski_sum(&sum, &scaled_sum(k, atoms.working_points(j)))?;
    }
    let ok = &rhs_sum == b
        && if trunc.is_some() {
            target.is_subset(&sum)
        } else {
            *target == sum
        };
    if !ok {
        return Err(FiberError::NoDecomposition(b.clone()));
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Node-arc matrix of the 3-arc example: arcs a1=(1,3), a2=(1,2),
    /// a3=(2,3), one commodity 1→3; columns (f1,f2,f3,s1,s2,s3).
    fn three_arc() -> IntMatrix {
        IntMatrix::from_rows(
            vec![
                vec![1, 0, 0, 1, 0, 0],
                vec![0, 1, 0, 0, 1, 0],
                vec![0, 0, 1, 0, 0, 1],
                vec![1, 1, 0, 0, 0, 0],
                vec![0, -1, 1, 0, 0, 0],
            ],
            6,
        )
        .unwrap()
    }

    fn three_arc_monoid() -> CoordinateMonoid {
        CoordinateMonoid::new(5, vec![0, 1, 2, 3], vec![4], vec![]).unwrap()
    }

    fn v(x: &[i64]) -> IntVector {
        IntVector::from(x)
    }

    /// Independent oracle: scan the full grid {0..=u}^n.
    fn grid_scan(a: &IntMatrix, b: &IntVector, u: i64) -> PointSet {
        let n = a.ncols();
        let mut out = PointSet::empty(n);
        mixed_radix(&vec![u; n], |z| {
            let z = IntVector::from(z);
            if &a.mul_vec(&z).unwrap() == b {
                out.insert(z).unwrap();
            }
        });
        out
    }

    #[test]
    fn capacity_rows_bound_every_variable() {
        assert_eq!(
            variable_bounds(&three_arc(), &v(&[1, 1, 1, 1, 0])).unwrap(),
            vec![1; 6]
        );
    }

    #[test]
    fn zero_rhs_gives_zero_bounds() {
        assert_eq!(
            variable_bounds(&three_arc(), &v(&[0, 0, 0, 0, 0])).unwrap(),
            vec![0; 6]
        );
    }

    #[test]
    fn free_circulation_is_unbounded() {
        // two-node cycle without capacity rows: conservation only
        let a = IntMatrix::from_rows(vec![vec![1, -1], vec![-1, 1]], 2).unwrap();
        assert!(matches!(
            variable_bounds(&a, &v(&[0, 0])),
            Err(FiberError::Unbounded { variable: 0, .. })
        ));
        assert!(enumerate_fiber(&a, &v(&[0, 0])).is_err());
    }

    #[test]
    fn three_arc_fiber_matches_grid_scan() {
        let a = three_arc();
        let b = v(&[1, 1, 1, 1, 0]);
        let expected = grid_scan(&a, &b, 1);
        assert_eq!(
            expected,
            PointSet::from_points(6, [v(&[1, 0, 0, 0, 1, 1]), v(&[0, 1, 1, 1, 0, 0])]).unwrap()
        );
        assert_eq!(enumerate_fiber(&a, &b).unwrap(), expected);
    }

    #[test]
    fn fiber_of_zero_is_zero() {
        assert_eq!(
            enumerate_fiber(&three_arc(), &v(&[0, 0, 0, 0, 0])).unwrap(),
            PointSet::zero(6)
        );
    }

    #[test]
    fn single_route_fiber() {
        let p = enumerate_fiber(&three_arc(), &v(&[1, 0, 0, 1, 0])).unwrap();
        assert_eq!(p, PointSet::singleton(v(&[1, 0, 0, 0, 0, 0])));
    }

    #[test]
    fn infeasible_rhs_has_empty_fiber() {
        let p = enumerate_fiber(&three_arc(), &v(&[0, 0, 0, 1, 0])).unwrap();
        assert!(p.is_empty());
        assert!(variable_bounds(&three_arc(), &v(&[0, 0, 0, 1, 0]))
            .unwrap()
            .iter()
            .all(|&u| u < 0));
    }

    #[test]
    fn empty_truncation_is_identity() {
        let p = enumerate_fiber(&three_arc(), &v(&[1, 1, 1, 1, 0])).unwrap();
        assert_eq!(truncate_fiber(&p, &TruncationSet::empty(6)), p);
    }

    #[test]
    fn generator_cuts_itself() {
        let g = v(&[0, 1, 1, 0, 0, 0]);
        let t = TruncationSet::new(PointSet::singleton(g.clone())).unwrap();
        let p = PointSet::from_points(6, [g, v(&[1, 0, 0, 0, 0, 0])]).unwrap();
        assert_eq!(
            truncate_fiber(&p, &t),
            PointSet::singleton(v(&[1, 0, 0, 0, 0, 0]))
        );
    }

    #[test]
    fn truncation_rejects_zero_generator() {
        assert!(TruncationSet::new(PointSet::zero(3)).is_err());
    }

    #[test]
    fn monoid_validation() {
        assert!(CoordinateMonoid::new(3, vec![0, 1], vec![1, 2], vec![]).is_err());
        assert!(CoordinateMonoid::new(3, vec![0, 1], vec![2], vec![(0, 2)]).is_err());
        let m = CoordinateMonoid::new(3, vec![0, 1], vec![2], vec![(0, 1)]).unwrap();
        assert!(m.contains(&v(&[2, 2, 0])));
        assert!(!m.contains(&v(&[2, 1, 0])));
        assert!(!m.contains(&v(&[1, 1, 1])));
    }

    #[test]
    fn tied_splits_respect_ties() {
        let m = CoordinateMonoid::new(3, vec![0, 1, 2], vec![], vec![(0, 2)]).unwrap();
        let s = m.splits(&v(&[1, 1, 1]));
        assert_eq!(s, vec![(v(&[0, 1, 0]), v(&[1, 0, 1]))]);
    }

    #[test]
    fn full_three_arc_network_is_atomic() {
        assert!(is_atomic(&three_arc(), &v(&[1, 1, 1, 1, 0]), &three_arc_monoid()).unwrap());
    }

    #[test]
    fn extra_slack_makes_network_decomposable() {
        assert!(!is_atomic(&three_arc(), &v(&[1, 1, 0, 1, 0]), &three_arc_monoid()).unwrap());
    }

    #[test]
    fn unit_slack_is_atomic() {
        assert!(is_atomic(&three_arc(), &v(&[0, 1, 0, 0, 0]), &three_arc_monoid()).unwrap());
    }

    #[test]
    fn atomicity_errors() {
        let m = three_arc_monoid();
        assert!(matches!(
            is_atomic(&three_arc(), &v(&[1, 0, 0, 0, 1]), &m),
            Err(FiberError::NotInMonoid(_))
        ));
        assert!(matches!(
            is_atomic(&three_arc(), &v(&[0, 1, 0, 1, 0]), &m),
            Err(FiberError::EmptyFiber(_))
        ));
    }

    #[test]
    fn three_arc_atoms_in_unit_box() {
        let atoms = enumerate_atoms(
            &three_arc(),
            &three_arc_monoid(),
            &v(&[1, 1, 1, 1, 0]),
            None,
        )
        .unwrap();
        let rhs: Vec<IntVector> = atoms.atoms.iter().map(|a| a.rhs.clone()).collect();
        assert_eq!(
            rhs,
            vec![
                v(&[1, 0, 0, 0, 0]),
                v(&[0, 1, 0, 0, 0]),
                v(&[0, 0, 1, 0, 0]),
                v(&[1, 0, 0, 1, 0]),
                v(&[0, 1, 1, 1, 0]),
                v(&[1, 1, 1, 1, 0]),
            ]
        );
        assert!(atoms.complete_within_box);
    }

    #[test]
    fn zero_box_has_no_atoms() {
        let atoms = enumerate_atoms(
            &three_arc(),
            &three_arc_monoid(),
            &v(&[0, 0, 0, 0, 0]),
            None,
        )
        .unwrap();
        assert!(atoms.is_empty());
    }

    #[test]
    fn larger_box_adds_no_atoms() {
        let small = enumerate_atoms(
            &three_arc(),
            &three_arc_monoid(),
            &v(&[1, 1, 1, 1, 0]),
            None,
        )
        .unwrap();
        let large = enumerate_atoms(
            &three_arc(),
            &three_arc_monoid(),
            &v(&[2, 2, 2, 2, 0]),
            None,
        )
        .unwrap();
        assert_eq!(small.atoms, large.atoms);
    }

    #[test]
    fn decompositions_of_three_arc_networks() {
        let a = three_arc();
        let atoms = enumerate_atoms(&a, &three_arc_monoid(), &v(&[2, 2, 2, 2, 0]), None).unwrap();
        assert_eq!(
            decompose_fiber(&a, &v(&[1, 1, 1, 1, 0]), &atoms, None).unwrap(),
            vec![(5, 1)]
        );
        assert_eq!(
            decompose_fiber(&a, &v(&[2, 0, 0, 2, 0]), &atoms, None).unwrap(),
            vec![(3, 2)]
        );
        assert_eq!(
            decompose_fiber(&a, &v(&[1, 1, 1, 0, 0]), &atoms, None).unwrap(),
            vec![(0, 1), (1, 1), (2, 1)]
        );
    }

    #[test]
    fn decomposition_outside_the_atom_box_can_fail() {
        let a = three_arc();
        // atoms of an empty box cannot decompose anything nonzero
        let atoms = enumerate_atoms(&a, &three_arc_monoid(), &v(&[0, 0, 0, 0, 0]), None).unwrap();
        assert!(matches!(
            decompose_fiber(&a, &v(&[1, 0, 0, 1, 0]), &atoms, None),
            Err(FiberError::NoDecomposition(_))
        ));
    }

    #[test]
    fn minkowski_sum_of_parts_is_strictly_inside_the_full_fiber() {
        let a = three_arc();
        let iv = enumerate_fiber(&a, &v(&[1, 0, 0, 1, 0])).unwrap();
        let ii = enumerate_fiber(&a, &v(&[0, 1, 0, 0, 0])).unwrap();
        let iii = enumerate_fiber(&a, &v(&[0, 0, 1, 0, 0])).unwrap();
        let vi = enumerate_fiber(&a, &v(&[1, 1, 1, 1, 0])).unwrap();
        let s = minkowski_sum(&minkowski_sum(&iv, &ii).unwrap(), &iii).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(vi.len(), 2);
        assert!(s.is_subset(&vi));
    }
}
