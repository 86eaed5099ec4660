//! The design problem as an integer program over atom multiplicities.
//!
//! Each atom `b_j = (c_j, d_j)` becomes a column `λ_j` with cost `W·c_j`;
//! demand rows fix `Σ_j d_j λ_j = d̄`, survivability rows come from
//! [`crate::surviv`]. The program is solved exactly by branch-and-bound on a
//! rational simplex and can be cross-checked against [`oracle`].

mod lp;
pub mod oracle;
mod simplex;

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::fibers::{enumerate_atoms_cached, AtomList, FiberCache, FiberError, Truncation};
use crate::intcore::{IntMatrix, IntVector};
use crate::netmodel::{circulation_generators_node_arc, NetError, Network};
use crate::surviv::{FailureKind, FailureSpace, FailureState, Sense, SurvError};

pub use lp::{export_lp, parse_lp, LpFile, LpRowText};
pub use oracle::{brute_force_design, oracle_box, BruteForce, OracleOutcome};

use simplex::{solve_lp, LpOutcome, LpRow};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefError {
    #[error("negative installation cost on arc {0}")]
    NegativeCost(usize),
    #[error("expected {expected} {what}, found {found}")]
    Length {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("no finite upper bound can be derived for column `{0}`")]
    UnboundedColumn(String),
    #[error("the LP relaxation is unbounded")]
    UnboundedObjective,
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("solution is not optimal")]
    NotOptimal,
    #[error("only the node-arc formulation has survivability functionals")]
    UnsupportedFormulation,
    #[error("LP parse error on line {line}: {message}")]
    LpParse { line: usize, message: String },
    #[error(transparent)]
    Surv(#[from] SurvError),
    #[error(transparent)]
    Fiber(#[from] FiberError),
    #[error(transparent)]
    Net(#[from] NetError),
}

impl From<crate::intcore::IntError> for RefError {
    fn from(e: crate::intcore::IntError) -> Self {
        RefError::Fiber(e.into())
    }
}

/// Per-arc installation costs `W ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CostVector(Vec<BigRational>);

impl CostVector {
    pub fn new(weights: Vec<BigRational>) -> Result<Self, RefError> {
        if let Some(a) = weights.iter().position(Signed::is_negative) {
            return Err(RefError::NegativeCost(a));
        }
        Ok(CostVector(weights))
    }

    pub fn from_integers(weights: &[i64]) -> Result<Self, RefError> {
        Self::new(
            weights
                .iter()
                .map(|&w| BigRational::from_integer(w.into()))
                .collect(),
        )
    }

    pub fn uniform(n_arcs: usize) -> Self {
        CostVector(vec![BigRational::one(); n_arcs])
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.0
    }

    pub fn cost_of(&self, c: &[i64]) -> BigRational {
        self.0
            .iter()
            .zip(c)
            .map(|(w, &x)| w * BigRational::from_integer(x.into()))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowOrigin {
    Demand {
        commodity: usize,
    },
    /// Always present for node-survivable spaces (no auxiliary flow).
    Structural,
    State {
        index: usize,
    },
    Extra,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IlpRow {
    pub name: String,
    pub origin: RowOrigin,
    pub sense: Sense,
    pub coeffs: Vec<i64>,
    pub rhs: i64,
    /// Factor a rational row was multiplied by to make it integral.
    pub scale: i64,
}

impl IlpRow {
    pub fn activity(&self, lambda: &[u64]) -> i128 {
        self.coeffs
            .iter()
            .zip(lambda)
            .map(|(&a, &l)| a as i128 * l as i128)
            .sum()
    }

    pub fn is_satisfied(&self, lambda: &[u64]) -> bool {
        let v = self.activity(lambda);
        match self.sense {
            Sense::Eq => v == self.rhs as i128,
            Sense::Le => v <= self.rhs as i128,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReformulatedILP {
    pub columns: Vec<String>,
    pub objective: Vec<BigRational>,
    pub rows: Vec<IlpRow>,
    /// Right-hand side of each atom, in the space's coordinates.
    pub atom_rhs: Vec<IntVector>,
    /// Base-arc capacities `c_j` of each atom.
    pub atom_capacities: Vec<Vec<i64>>,
    pub atom_demands: Vec<Vec<i64>>,
    pub demand: Vec<i64>,
    pub states: Vec<FailureState>,
    pub n_arcs: usize,
}

impl ReformulatedILP {
    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    /// Rows `Σ_j (B·b_j)_r λ_j = v_r` for an integral selection `B·b = v`.
    pub fn add_rhs_equalities(
        &mut self,
        b: &IntMatrix,
        v: &IntVector,
        prefix: &str,
    ) -> Result<(), RefError> {
        if v.dim() != b.nrows() {
            return Err(RefError::Length {
                what: "selection values",
                expected: b.nrows(),
                found: v.dim(),
            });
        }
        let images = self
            .atom_rhs
            .iter()
            .map(|r| b.mul_vec(r))
            .collect::<Result<Vec<_>, _>>()?;
        for r in 0..b.nrows() {
            self.rows.push(IlpRow {
                name: format!("{prefix}{}", r + 1),
                origin: RowOrigin::Extra,
                sense: Sense::Eq,
                coeffs: images.iter().map(|x| x[r]).collect(),
                rhs: v[r],
                scale: 1,
            });
        }
        Ok(())
    }
}

fn unique_name(taken: &mut std::collections::HashSet<String>, base: String) -> String {
    if taken.insert(base.clone()) {
        return base;
    }
    let mut k = 2;
    loop {
        let cand = format!("{base}_{k}");
        if taken.insert(cand.clone()) {
            return cand;
        }
        k += 1;
    }
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

/// Demand rows, the space's structural rows, then one row per state, in
/// the given order. Columns follow the atom order.
pub fn build_reformulation(
    space: &FailureSpace,
    atoms: &AtomList,
    costs: &CostVector,
    demand: &[i64],
    states: &[FailureState],
) -> Result<ReformulatedILP, RefError> {
    let base = &space.base;
    let n_arcs = base.digraph.n_arcs();
    let k = base.commodities.len();
    if costs.weights().len() != n_arcs {
        return Err(RefError::Length {
            what: "costs",
            expected: n_arcs,
            found: costs.weights().len(),
        });
    }
    if demand.len() != k {
        return Err(RefError::Length {
            what: "demands",
            expected: k,
            found: demand.len(),
        });
    }
    let (atom_capacities, atom_demands): (Vec<_>, Vec<_>) =
        atoms.atoms.iter().map(|a| space.split(&a.rhs)).unzip();
    let columns = (1..=atoms.len()).map(|j| format!("lam_{j}")).collect();
    let objective = atom_capacities.iter().map(|c| costs.cost_of(c)).collect();

    let mut taken = std::collections::HashSet::new();
    let mut rows = Vec::new();
    for (l, com) in base.commodities.iter().enumerate() {
        rows.push(IlpRow {
            name: unique_name(&mut taken, format!("dem_{}", sanitize(&com.id))),
            origin: RowOrigin::Demand { commodity: l },
            sense: Sense::Eq,
            coeffs: atom_demands.iter().map(|d| d[l]).collect(),
            rhs: demand[l],
            scale: 1,
        });
    }
    for r in space.structural_rows(atoms)? {
        rows.push(IlpRow {
            name: unique_name(&mut taken, format!("surv_{}", r.label)),
            origin: RowOrigin::Structural,
            sense: r.sense,
            coeffs: r.coeffs,
            rhs: 0,
            scale: r.scale,
        });
    }
    for (index, st) in states.iter().enumerate() {
        for r in space.survivability_rows(atoms, st)? {
            rows.push(IlpRow {
                name: unique_name(&mut taken, format!("surv_{}", r.label)),
                origin: RowOrigin::State { index },
                sense: r.sense,
                coeffs: r.coeffs,
                rhs: 0,
                scale: r.scale,
            });
        }
    }
    Ok(ReformulatedILP {
        columns,
        objective,
        rows,
        atom_rhs: atoms.atoms.iter().map(|a| a.rhs.clone()).collect(),
        atom_capacities,
        atom_demands,
        demand: demand.to_vec(),
        states: states.to_vec(),
        n_arcs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignSolution {
    pub status: SolveStatus,
    pub lambda: Vec<u64>,
    pub objective: BigRational,
    pub capacity: Vec<i64>,
    pub nodes: u64,
}

impl DesignSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// Finite upper bounds on every `λ_j` that keep at least one optimal
/// solution.
///
/// An equality row with nonnegative coefficients bounds each of its columns
/// by `⌊rhs / a_j⌋`; demand rows give `min_l ⌊d̄_l / d_{l,j}⌋` and the
/// survivability rows fix atoms with positive `g` to 0. A pure-capacity
/// column that cannot help any `≤` row is fixed to 0, as it only adds
/// cost. One with a negative entry in some `≤` row only needs to
/// offset the largest positive activity of that row, which bounds it once
/// the positive columns are bounded.
pub fn column_bounds(ilp: &ReformulatedILP) -> Result<Vec<i64>, RefError> {
    let n = ilp.n_columns();
    let mut ub: Vec<Option<i64>> = vec![None; n];
    for row in &ilp.rows {
        if row.sense == Sense::Eq && row.coeffs.iter().all(|&a| a >= 0) {
            for j in 0..n {
                let a = row.coeffs[j];
                if a > 0 {
                    let cap = row.rhs.max(0) / a;
                    ub[j] = Some(ub[j].map_or(cap, |u| u.min(cap)));
                }
            }
        }
    }
    let in_eq = |j: usize| {
        ilp.rows
            .iter()
            .any(|r| r.sense == Sense::Eq && r.coeffs[j] != 0)
    };
    for j in 0..n {
        if ub[j].is_none()
            && !in_eq(j)
            && ilp
                .rows
                .iter()
                .all(|r| r.sense == Sense::Eq || r.coeffs[j] >= 0)
        {
            ub[j] = Some(0);
        }
    }
    loop {
        let mut progress = false;
        for j in 0..n {
            if ub[j].is_some() || in_eq(j) {
                continue;
            }
            let mut bound = Some(0i64);
            for r in ilp
                .rows
                .iter()
                .filter(|r| r.sense == Sense::Le && r.coeffs[j] < 0)
            {
                let mut positive = 0i128;
                for (k, &a) in r.coeffs.iter().enumerate() {
                    if a > 0 {
                        match ub[k] {
                            Some(u) => positive += a as i128 * u as i128,
                            None => {
                                bound = None;
                            }
                        }
                    }
                }
                let Some(b) = bound else { break };
                let need = positive - r.rhs as i128;
                let step = -(r.coeffs[j] as i128);
                let t = if need <= 0 {
                    0
                } else {
                    (need + step - 1) / step
                };
                bound = Some(b.max(t as i64));
            }
            if let Some(b) = bound {
                ub[j] = Some(b);
                progress = true;
            }
        }
        if !progress {
            break;
        }
    }
    ub.into_iter()
        .enumerate()
        .map(|(j, u)| u.ok_or_else(|| RefError::UnboundedColumn(ilp.columns[j].clone())))
        .collect()
}

struct Node {
    lower: Vec<i64>,
    upper: Vec<i64>,
    bound: BigRational,
}

const REORDER_EVERY: u64 = 1000;

/// Exact optimum by depth-first branch-and-bound. Branches on the most
/// fractional `λ` (lowest index on ties), down-branch first; every 1000
/// nodes the open list is reordered so the best bound is explored next.
pub fn solve_ilp(ilp: &ReformulatedILP) -> Result<DesignSolution, RefError> {
    let n = ilp.n_columns();
    let upper = column_bounds(ilp)?;
    let q = |v: i64| BigRational::from_integer(BigInt::from(v));
    let rows: Vec<LpRow> = ilp
        .rows
        .iter()
        .map(|r| LpRow {
            coeffs: r.coeffs.iter().map(|&a| q(a)).collect(),
            sense: r.sense,
            rhs: q(r.rhs),
        })
        .collect();

    let mut best: Option<(Vec<u64>, BigRational)> = None;
    let mut stack = vec![Node {
        lower: vec![0; n],
        upper,
        bound: BigRational::zero(),
    }];
    let mut processed = 0u64;
    while let Some(node) = stack.pop() {
        if let Some((_, inc)) = &best {
            if node.bound >= *inc && processed > 0 {
                continue;
            }
        }
        processed += 1;
        if processed.is_multiple_of(REORDER_EVERY) {
            // pop takes from the end: best bound last
            stack.sort_by(|a, b| b.bound.cmp(&a.bound));
        }
        let (x, obj) = match solve_lp(&ilp.objective, &rows, &node.lower, &node.upper) {
            LpOutcome::Infeasible => continue,
            LpOutcome::Unbounded => return Err(RefError::UnboundedObjective),
            LpOutcome::Optimal { x, objective } => (x, objective),
        };
        if let Some((_, inc)) = &best {
            if obj >= *inc {
                continue;
            }
        }
        let half = BigRational::new(1.into(), 2.into());
        let mut pick: Option<(usize, BigRational)> = None;
        for (j, v) in x.iter().enumerate() {
            let frac = v - v.floor();
            if frac.is_zero() {
                continue;
            }
            let dist = (&frac - &half).abs();
            if pick.as_ref().is_none_or(|(_, d)| dist < *d) {
                pick = Some((j, dist));
            }
        }
        match pick {
            None => {
                let lambda = x
                    .iter()
                    .map(|v| v.to_integer().to_u64().expect("nonnegative integral λ"))
                    .collect();
                best = Some((lambda, obj));
            }
            Some((j, _)) => {
                let f = x[j].floor().to_integer().to_i64().expect("bounded λ");
                let mut up = Node {
                    lower: node.lower.clone(),
                    upper: node.upper.clone(),
                    bound: obj.clone(),
                };
                up.lower[j] = f + 1;
                let mut down = Node {
                    lower: node.lower,
                    upper: node.upper,
                    bound: obj,
                };
                down.upper[j] = f;
                stack.push(up);
                stack.push(down);
            }
        }
    }
    Ok(match best {
        Some((lambda, objective)) => {
            let capacity = induced_capacity(ilp, &lambda);
            DesignSolution {
                status: SolveStatus::Optimal,
                lambda,
                objective,
                capacity,
                nodes: processed,
            }
        }
        None => DesignSolution {
            status: SolveStatus::Infeasible,
            lambda: vec![],
            objective: BigRational::zero(),
            capacity: vec![],
            nodes: processed,
        },
    })
}

fn combine(parts: &[Vec<i64>], lambda: &[u64], width: usize) -> Vec<i64> {
    let mut out = vec![0i64; width];
    for (p, &l) in parts.iter().zip(lambda) {
        for (o, &v) in out.iter_mut().zip(p) {
            *o = crate::intcore::add_i64(*o, crate::intcore::mul_i64(v, l as i64));
        }
    }
    out
}

/// `c = Σ_j λ_j c_j` on the base arcs.
pub fn induced_capacity(ilp: &ReformulatedILP, lambda: &[u64]) -> Vec<i64> {
    combine(&ilp.atom_capacities, lambda, ilp.n_arcs)
}

pub fn induced_demand(ilp: &ReformulatedILP, lambda: &[u64]) -> Vec<i64> {
    combine(&ilp.atom_demands, lambda, ilp.demand.len())
}

/// Re-checks every row, rebuilds `(c, d)` from `λ`, and confirms with the
/// direct oracle that `c` routes `d̄` in the no-fault case and in every state.
pub fn verify_solution(
    sol: &DesignSolution,
    ilp: &ReformulatedILP,
    oracle: &BruteForce,
) -> Result<(), RefError> {
    if !sol.is_optimal() {
        return Err(RefError::NotOptimal);
    }
    if sol.lambda.len() != ilp.n_columns() {
        return Err(RefError::VerificationFailed(format!(
            "expected {} multiplicities, found {}",
            ilp.n_columns(),
            sol.lambda.len()
        )));
    }
    for row in &ilp.rows {
        if !row.is_satisfied(&sol.lambda) {
            return Err(RefError::VerificationFailed(format!(
                "row {} has activity {}, rhs {}",
                row.name,
                row.activity(&sol.lambda),
                row.rhs
            )));
        }
    }
    let objective: BigRational = ilp
        .objective
        .iter()
        .zip(&sol.lambda)
        .map(|(w, &l)| w * BigRational::from_integer(l.into()))
        .sum();
    if objective != sol.objective {
        return Err(RefError::VerificationFailed(format!(
            "objective {} differs from Σ costs {}",
            sol.objective, objective
        )));
    }
    let c = induced_capacity(ilp, &sol.lambda);
    if c != sol.capacity {
        return Err(RefError::VerificationFailed(
            "capacity does not match λ".into(),
        ));
    }
    let d = induced_demand(ilp, &sol.lambda);
    if d != ilp.demand {
        return Err(RefError::VerificationFailed(
            "demand does not match λ".into(),
        ));
    }
    if !oracle.is_survivable(&c, &d, &ilp.states)? {
        return Err(RefError::VerificationFailed(
            "capacity fails the direct survivability check".into(),
        ));
    }
    Ok(())
}

pub fn is_verified(sol: &DesignSolution, ilp: &ReformulatedILP, oracle: &BruteForce) -> bool {
    verify_solution(sol, ilp, oracle).is_ok()
}

/// A design problem over a network: costs, target demand, failure states
/// and the per-arc capacity box atoms are enumerated in.
#[derive(Debug, Clone)]
pub struct DesignProblem {
    pub network: Network,
    pub costs: CostVector,
    pub demand: Vec<i64>,
    pub states: Vec<FailureState>,
    pub capacity_box: Vec<i64>,
}

impl DesignProblem {
    /// Capacity box from [`oracle_box`].
    pub fn new(
        network: Network,
        costs: CostVector,
        demand: Vec<i64>,
        states: Vec<FailureState>,
    ) -> Self {
        let capacity_box = oracle_box(&network, &demand, &states);
        DesignProblem {
            network,
            costs,
            demand,
            states,
            capacity_box,
        }
    }
}

/// Atoms of a failure space, enumerated once and reusable across demands
/// and state lists inside the same box.
pub struct AtomCatalog {
    pub space: FailureSpace,
    pub atoms: AtomList,
    pub cache: Arc<FiberCache>,
}

impl AtomCatalog {
    /// Circulation-truncated atoms of the space in `cap × dem`.
    pub fn new(space: FailureSpace, cap: &[i64], dem: &[i64]) -> Result<Self, RefError> {
        let cache = Arc::new(FiberCache::new(Arc::clone(space.system.matrix())));
        let network = match &space.augmented {
            Some((aug, _)) => aug.network.clone(),
            None => space.base.clone(),
        };
        let delta = circulation_generators_node_arc(&network, &space.system);
        let bound = space.bound(cap, dem);
        let trunc: Option<&dyn Truncation> = if delta.is_empty() { None } else { Some(&delta) };
        let atoms = enumerate_atoms_cached(&cache, &space.monoid, &bound, trunc)?;
        Ok(AtomCatalog {
            space,
            atoms,
            cache,
        })
    }

    pub fn reformulate(
        &self,
        costs: &CostVector,
        demand: &[i64],
        states: &[FailureState],
    ) -> Result<ReformulatedILP, RefError> {
        build_reformulation(&self.space, &self.atoms, costs, demand, states)
    }
}

/// Everything one end-to-end solve produces.
pub struct DesignRun {
    pub catalog: AtomCatalog,
    pub ilp: ReformulatedILP,
    pub solution: DesignSolution,
}

pub fn run_design(problem: &DesignProblem) -> Result<DesignRun, RefError> {
    let space = FailureSpace::for_states(&problem.network, &problem.states)?;
    if space.is_augmented()
        && problem
            .states
            .iter()
            .any(|s| matches!(s.kind(), FailureKind::PartialArcFailure { .. }))
    {
        return Err(SurvError::PartialOnAugmented.into());
    }
    let catalog = AtomCatalog::new(space, &problem.capacity_box, &problem.demand)?;
    let ilp = catalog.reformulate(&problem.costs, &problem.demand, &problem.states)?;
    let solution = solve_ilp(&ilp)?;
    Ok(DesignRun {
        catalog,
        ilp,
        solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    fn q(p: i64) -> BigRational {
        BigRational::from_integer(p.into())
    }

    fn three_arc_catalog(space: FailureSpace) -> AtomCatalog {
        AtomCatalog::new(space, &[1, 1, 1], &[1]).unwrap()
    }

    fn all_arc_states(net: &Network) -> Vec<FailureState> {
        (0..net.digraph.n_arcs())
            .map(|a| FailureState::total(net, &[a]).unwrap())
            .collect()
    }

    #[test]
    fn displayed_program() {
        let net = gallery::three_arc(1);
        let cat = three_arc_catalog(FailureSpace::plain(&net));
        // distinct weights make the symbolic objective readable
        let w = CostVector::from_integers(&[1, 10, 100]).unwrap();
        let ilp = cat.reformulate(&w, &[1], &all_arc_states(&net)).unwrap();
        assert_eq!(
            ilp.objective,
            vec![q(1), q(10), q(100), q(1), q(110), q(111)]
        );
        assert_eq!(ilp.rows[0].coeffs, vec![0, 0, 0, 1, 1, 1]);
        assert_eq!(ilp.rows[0].name, "dem_k1");
        assert_eq!(ilp.rows[1].coeffs, vec![0, 0, 0, 1, 0, 0]);
        assert_eq!(ilp.rows[2].coeffs, vec![0, 0, 0, 0, 1, 0]);
        assert_eq!(ilp.rows[3].coeffs, ilp.rows[2].coeffs);
        assert_eq!(ilp.rows.len(), 4);
    }

    #[test]
    fn no_states_gives_demand_rows_only() {
        let net = gallery::three_arc(1);
        let cat = three_arc_catalog(FailureSpace::plain(&net));
        let ilp = cat.reformulate(&CostVector::uniform(3), &[1], &[]).unwrap();
        assert_eq!(ilp.rows.len(), 1);
    }

    #[test]
    fn survivable_three_arc() {
        let net = gallery::three_arc(1);
        let cat = three_arc_catalog(FailureSpace::plain(&net));
        let ilp = cat
            .reformulate(&CostVector::uniform(3), &[1], &all_arc_states(&net))
            .unwrap();
        let sol = solve_ilp(&ilp).unwrap();
        assert!(sol.is_optimal());
        assert_eq!(sol.lambda, vec![0, 0, 0, 0, 0, 1]);
        assert_eq!(sol.objective, q(3));
        assert_eq!(sol.capacity, vec![1, 1, 1]);
        let oracle = BruteForce::new(&net);
        verify_solution(&sol, &ilp, &oracle).unwrap();
    }

    #[test]
    fn plain_three_arc() {
        let net = gallery::three_arc(1);
        let cat = three_arc_catalog(FailureSpace::plain(&net));
        let ilp = cat.reformulate(&CostVector::uniform(3), &[1], &[]).unwrap();
        let sol = solve_ilp(&ilp).unwrap();
        assert_eq!(sol.lambda, vec![0, 0, 0, 1, 0, 0]);
        assert_eq!(sol.objective, q(1));
        assert_eq!(sol.capacity, vec![1, 0, 0]);
    }

    #[test]
    fn single_arc_cannot_survive() {
        let net = gallery::single_arc(1);
        let cat = AtomCatalog::new(FailureSpace::plain(&net), &[1], &[1]).unwrap();
        let ilp = cat
            .reformulate(&CostVector::uniform(1), &[1], &all_arc_states(&net))
            .unwrap();
        assert_eq!(solve_ilp(&ilp).unwrap().status, SolveStatus::Infeasible);
    }

    #[test]
    fn verification_rejects_a_violated_row() {
        let net = gallery::three_arc(1);
        let cat = three_arc_catalog(FailureSpace::plain(&net));
        let ilp = cat
            .reformulate(&CostVector::uniform(3), &[1], &all_arc_states(&net))
            .unwrap();
        let lambda = vec![0, 0, 0, 1, 0, 0];
        let sol = DesignSolution {
            status: SolveStatus::Optimal,
            capacity: induced_capacity(&ilp, &lambda),
            lambda,
            objective: q(1),
            nodes: 0,
        };
        let err = verify_solution(&sol, &ilp, &BruteForce::new(&net)).unwrap_err();
        assert!(matches!(err, RefError::VerificationFailed(m) if m.contains("surv_total_a1")));
    }

    #[test]
    fn zero_demand_zero_design() {
        let net = gallery::three_arc(0);
        let cat = three_arc_catalog(FailureSpace::plain(&net));
        let ilp = cat
            .reformulate(&CostVector::uniform(3), &[0], &all_arc_states(&net))
            .unwrap();
        let sol = solve_ilp(&ilp).unwrap();
        assert_eq!(sol.lambda, vec![0; 6]);
        verify_solution(&sol, &ilp, &BruteForce::new(&net)).unwrap();
    }

    #[test]
    fn partial_failure_needs_slack_capacity() {
        let net = gallery::three_arc(2);
        let st = FailureState::partial(&net, 0, BigRational::new(1.into(), 2.into())).unwrap();
        let problem = DesignProblem::new(net.clone(), CostVector::uniform(3), vec![2], vec![st]);
        let run = run_design(&problem).unwrap();
        assert_eq!(run.solution.objective, q(4));
        verify_solution(&run.solution, &run.ilp, &BruteForce::new(&net)).unwrap();
    }

    #[test]
    fn bounds_fix_capacity_only_columns() {
        let net = gallery::three_arc(1);
        let cat = three_arc_catalog(FailureSpace::plain(&net));
        let ilp = cat
            .reformulate(&CostVector::uniform(3), &[1], &all_arc_states(&net))
            .unwrap();
        assert_eq!(column_bounds(&ilp).unwrap(), vec![0, 0, 0, 0, 0, 1]);
    }

    #[test]
    fn extra_rhs_rows() {
        let net = gallery::three_arc(1);
        let cat = three_arc_catalog(FailureSpace::plain(&net));
        let mut ilp = cat.reformulate(&CostVector::uniform(3), &[1], &[]).unwrap();
        // fix the capacity of a1 to 1
        let sel = IntMatrix::from_rows(vec![vec![1, 0, 0, 0, 0]], 5).unwrap();
        ilp.add_rhs_equalities(&sel, &IntVector::from(&[1][..]), "fix_")
            .unwrap();
        assert_eq!(ilp.rows.last().unwrap().coeffs, vec![1, 0, 0, 1, 0, 1]);
        let sol = solve_ilp(&ilp).unwrap();
        assert_eq!(sol.capacity, vec![1, 0, 0]);
    }

    #[test]
    fn rational_costs() {
        let net = gallery::three_arc(1);
        let cat = three_arc_catalog(FailureSpace::plain(&net));
        let half = BigRational::new(1.into(), 2.into());
        let w = CostVector::new(vec![q(2), half.clone(), half]).unwrap();
        let sol = solve_ilp(&cat.reformulate(&w, &[1], &[]).unwrap()).unwrap();
        assert_eq!(sol.objective, q(1));
        assert_eq!(sol.capacity, vec![0, 1, 1]);
        assert!(CostVector::from_integers(&[1, -1, 0]).is_err());
    }
}
