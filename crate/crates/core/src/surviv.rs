//! Failure states and the survivability functionals `g`.
//!
//! `g_S(P)` is the least aggregated flow any point of `P` sends over the arc
//! set `S`; it is Minkowski-additive and `+∞` on an empty fiber. A design is
//! survivable under total failure of `S` exactly when `g_S = 0`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::fibers::AtomList;
use crate::fibers::{enumerate_fiber, CoordinateMonoid, FiberError};
use crate::intcore::{IntVector, PointSet};
use crate::netmodel::{DiArc, NetError, Network, NodeArcSystem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurvError {
    #[error("state `{state}` has an infinite coefficient on atom {atom}")]
    InfiniteCoefficient { state: String, atom: usize },
    #[error("demand coefficients must be 0 or 1")]
    FractionalDemandCoefficient,
    #[error("availability {0} outside [0,1]")]
    InvalidAlpha(String),
    #[error("unsupported failure state: {0}")]
    Unsupported(String),
    #[error("node failure states need the node-survivability transform")]
    NeedsAugmentation,
    #[error("partial failures cannot be combined with node-survivability rows")]
    PartialOnAugmented,
    #[error("coefficient overflow in state `{0}`")]
    Overflow(String),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Fiber(#[from] FiberError),
}

/// Nonnegative integer or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SurvivabilityValue {
    Finite(u64),
    Infinite,
}

impl SurvivabilityValue {
    pub fn is_zero(self) -> bool {
        self == SurvivabilityValue::Finite(0)
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            SurvivabilityValue::Finite(v) => Some(v),
            SurvivabilityValue::Infinite => None,
        }
    }
}

impl std::ops::Add for SurvivabilityValue {
    type Output = SurvivabilityValue;
    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (SurvivabilityValue::Finite(x), SurvivabilityValue::Finite(y)) => {
                SurvivabilityValue::Finite(x + y)
            }
            _ => SurvivabilityValue::Infinite,
        }
    }
}

impl fmt::Display for SurvivabilityValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurvivabilityValue::Finite(v) => write!(f, "{v}"),
            SurvivabilityValue::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FailureKind {
    TotalArcFailure(Vec<usize>),
    PartialArcFailure { arc: usize, alpha: BigRational },
    NodeFailure(usize),
}

/// A scenario `(α, χ)`: per-arc availability and per-commodity demand
/// coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FailureState {
    kind: FailureKind,
    alpha: Vec<BigRational>,
    chi: Vec<u8>,
    label: String,
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

impl FailureState {
    /// Total failure of every arc in `arcs` (simultaneous when more than one).
    pub fn total(network: &Network, arcs: &[usize]) -> Result<Self, SurvError> {
        let g = &network.digraph;
        let mut arcs = arcs.to_vec();
        arcs.sort_unstable();
        arcs.dedup();
        if arcs.is_empty() {
            return Err(SurvError::Unsupported("total failure of no arcs".into()));
        }
        if let Some(&a) = arcs.iter().find(|&&a| a >= g.n_arcs()) {
            return Err(NetError::UnknownArc(a.to_string()).into());
        }
        let mut alpha = vec![BigRational::one(); g.n_arcs()];
        for &a in &arcs {
            alpha[a] = BigRational::zero();
        }
        let ids: Vec<String> = arcs.iter().map(|&a| sanitize(&g.arcs()[a].id)).collect();
        Ok(FailureState {
            label: format!("total_{}", ids.join("_")),
            kind: FailureKind::TotalArcFailure(arcs),
            alpha,
            chi: vec![1; network.commodities.len()],
        })
    }

    pub fn partial(network: &Network, arc: usize, alpha: BigRational) -> Result<Self, SurvError> {
        let g = &network.digraph;
        if arc >= g.n_arcs() {
            return Err(NetError::UnknownArc(arc.to_string()).into());
        }
        if alpha < BigRational::zero() || alpha > BigRational::one() {
            return Err(SurvError::InvalidAlpha(alpha.to_string()));
        }
        let mut av = vec![BigRational::one(); g.n_arcs()];
        av[arc] = alpha.clone();
        Ok(FailureState {
            label: format!("partial_{}", sanitize(&g.arcs()[arc].id)),
            kind: FailureKind::PartialArcFailure { arc, alpha },
            alpha: av,
            chi: vec![1; network.commodities.len()],
        })
    }

    /// Node `v` fails: every incident arc is lost, and commodities with `v`
    /// as a terminal are dropped.
    pub fn node(network: &Network, v: usize) -> Result<Self, SurvError> {
        let g = &network.digraph;
        if v >= g.n_nodes() {
            return Err(NetError::UnknownNode(v.to_string()).into());
        }
        let mut alpha = vec![BigRational::one(); g.n_arcs()];
        for a in g.incident(v) {
            alpha[a] = BigRational::zero();
        }
        let chi = network
            .commodities
            .iter()
            .map(|c| u8::from(c.source != v && c.sink != v))
            .collect();
        Ok(FailureState {
            label: format!("node_{}", sanitize(&g.nodes()[v])),
            kind: FailureKind::NodeFailure(v),
            alpha,
            chi,
        })
    }

    /// Classify raw coefficients into one of the supported shapes.
    pub fn from_coefficients(
        network: &Network,
        alpha: Vec<BigRational>,
        chi: Vec<BigRational>,
    ) -> Result<Self, SurvError> {
        let g = &network.digraph;
        if alpha.len() != g.n_arcs() || chi.len() != network.commodities.len() {
            return Err(SurvError::Unsupported("coefficient vector length".into()));
        }
        if let Some(a) = alpha
            .iter()
            .find(|a| **a < BigRational::zero() || **a > BigRational::one())
        {
            return Err(SurvError::InvalidAlpha(a.to_string()));
        }
        if chi.iter().any(|x| !x.is_zero() && !x.is_one()) {
            return Err(SurvError::FractionalDemandCoefficient);
        }
        let failed: Vec<usize> = (0..alpha.len()).filter(|&a| alpha[a].is_zero()).collect();
        let fractional: Vec<usize> = (0..alpha.len())
            .filter(|&a| !alpha[a].is_zero() && !alpha[a].is_one())
            .collect();
        if chi.iter().all(One::is_one) {
            return match (failed.len(), fractional.len()) {
                (_, 0) if !failed.is_empty() => Self::total(network, &failed),
                (0, 1) => Self::partial(network, fractional[0], alpha[fractional[0]].clone()),
                _ => Err(SurvError::Unsupported(
                    "mixed or empty availability pattern".into(),
                )),
            };
        }
        if fractional.is_empty() {
            for v in 0..g.n_nodes() {
                let s = Self::node(network, v)?;
                let chi01: Vec<u8> = chi.iter().map(|x| u8::from(x.is_one())).collect();
                if s.alpha == alpha && s.chi == chi01 {
                    return Ok(s);
                }
            }
        }
        Err(SurvError::Unsupported(
            "demand coefficients only arise from node failures".into(),
        ))
    }

    pub fn kind(&self) -> &FailureKind {
        &self.kind
    }

    pub fn alpha(&self) -> &[BigRational] {
        &self.alpha
    }

    pub fn chi(&self) -> &[u8] {
        &self.chi
    }

    /// Identifier-safe name, e.g. `total_a1` or `node_v`.
    pub fn label(&self) -> &str {
        &self.label
    }
}

/// `min_{z ∈ points} Σ_l Σ_{a ∈ arcs} f_a^l`.
pub fn g_of_points(
    system: &NodeArcSystem,
    points: &PointSet,
    arcs: &[usize],
) -> SurvivabilityValue {
    points
        .iter()
        .map(|p| system.aggregated_flow(p, arcs))
        .min()
        .map_or(SurvivabilityValue::Infinite, |v| {
            SurvivabilityValue::Finite(v as u64)
        })
}

pub fn g_arcs(
    system: &NodeArcSystem,
    b: &IntVector,
    arcs: &[usize],
) -> Result<SurvivabilityValue, FiberError> {
    let pts = enumerate_fiber(system.matrix(), b)?;
    Ok(g_of_points(system, &pts, arcs))
}

pub fn g_arc(
    system: &NodeArcSystem,
    b: &IntVector,
    arc: usize,
) -> Result<SurvivabilityValue, FiberError> {
    g_arcs(system, b, &[arc])
}

/// Network with one auxiliary arc `ā_l = (s_l, t_l)` per commodity appended
/// after the original arcs. The auxiliary capacity is tied to the demand.
#[derive(Debug, Clone)]
pub struct AugmentedInstance {
    pub base: Network,
    pub network: Network,
    /// Positions of the auxiliary arcs, one per commodity.
    pub aux_arcs: Vec<usize>,
}

impl AugmentedInstance {
    pub fn is_auxiliary(&self, arc: usize) -> bool {
        arc >= self.base.digraph.n_arcs()
    }

    /// Right-hand side monoid of the augmented node-arc system.
    pub fn monoid(&self, system: &NodeArcSystem) -> CoordinateMonoid {
        let base = system.monoid();
        let tied = self
            .aux_arcs
            .iter()
            .enumerate()
            .map(|(l, &a)| (system.cap_coord(a), system.demand_coord(l)))
            .collect();
        CoordinateMonoid::new(base.dim(), base.free().to_vec(), base.zero().to_vec(), tied)
            .expect("auxiliary ties join capacity and demand coordinates")
    }

    /// Capacities on the augmented arcs: `c` followed by `d`.
    pub fn lift_capacities(&self, c: &[i64], d: &[i64]) -> Vec<i64> {
        let mut out = c.to_vec();
        out.extend_from_slice(d);
        out
    }
}

/// One required `g_S = 0` row over the arc set `S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroRow {
    pub label: String,
    pub arcs: Vec<usize>,
}

/// Adds the auxiliary arcs and returns the no-fault row over all of them,
/// followed by one row per node `v` over `(A ∩ δ(v)) ∪ (Ā \ δ(v))`.
pub fn node_survivability_transform(
    network: &Network,
) -> Result<(AugmentedInstance, Vec<ZeroRow>), SurvError> {
    let g = &network.digraph;
    let n = g.n_arcs();
    let extra: Vec<DiArc> = network
        .commodities
        .iter()
        .map(|c| DiArc {
            id: format!("aux[{}]", c.id),
            tail: c.source,
            head: c.sink,
        })
        .collect();
    let aux_arcs: Vec<usize> = (n..n + extra.len()).collect();
    let augmented = Network::new(g.with_arcs(extra)?, network.commodities.clone())?;
    let mut rows = vec![ZeroRow {
        label: "nofault".into(),
        arcs: aux_arcs.clone(),
    }];
    for v in 0..g.n_nodes() {
        let touching = augmented.digraph.incident(v);
        let mut arcs: Vec<usize> = touching.iter().copied().filter(|&a| a < n).collect();
        arcs.extend(aux_arcs.iter().filter(|a| !touching.contains(a)));
        rows.push(ZeroRow {
            label: format!("node_{}", sanitize(&g.nodes()[v])),
            arcs,
        });
    }
    Ok((
        AugmentedInstance {
            base: network.clone(),
            network: augmented,
            aux_arcs,
        },
        rows,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Eq,
    Le,
}

/// A survivability row `Σ_j coeff_j λ_j (= | ≤) 0` with integer
/// coefficients. `scale` is the factor the rational row was multiplied by.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurvRow {
    pub label: String,
    pub sense: Sense,
    pub coeffs: Vec<i64>,
    pub scale: i64,
}

/// Where survivability is evaluated: the plain node-arc system, or its
/// augmented counterpart when node states are in play.
pub struct FailureSpace {
    pub base: Network,
    pub system: NodeArcSystem,
    pub monoid: CoordinateMonoid,
    pub augmented: Option<(AugmentedInstance, Vec<ZeroRow>)>,
}

impl FailureSpace {
    pub fn plain(network: &Network) -> Self {
        let system = NodeArcSystem::new(network);
        let monoid = system.monoid();
        FailureSpace {
            base: network.clone(),
            system,
            monoid,
            augmented: None,
        }
    }

    pub fn node_survivable(network: &Network) -> Result<Self, SurvError> {
        let (aug, rows) = node_survivability_transform(network)?;
        let system = NodeArcSystem::new(&aug.network);
        let monoid = aug.monoid(&system);
        Ok(FailureSpace {
            base: network.clone(),
            system,
            monoid,
            augmented: Some((aug, rows)),
        })
    }

    /// The right space for a list of states.
    pub fn for_states(network: &Network, states: &[FailureState]) -> Result<Self, SurvError> {
        if states
            .iter()
            .any(|s| matches!(s.kind, FailureKind::NodeFailure(_)))
        {
            Self::node_survivable(network)
        } else {
            Ok(Self::plain(network))
        }
    }

    pub fn is_augmented(&self) -> bool {
        self.augmented.is_some()
    }

    /// Right-hand side for base capacities `c` and demands `d`.
    pub fn rhs(&self, c: &[i64], d: &[i64]) -> IntVector {
        match &self.augmented {
            None => self.system.rhs(c, d),
            Some((aug, _)) => self.system.rhs(&aug.lift_capacities(c, d), d),
        }
    }

    /// Box for atom enumeration from per-arc capacity and per-commodity
    /// demand bounds.
    pub fn bound(&self, cap: &[i64], dem: &[i64]) -> IntVector {
        self.rhs(cap, dem)
    }

    /// Base capacities and demands of a right-hand side.
    pub fn split(&self, b: &IntVector) -> (Vec<i64>, Vec<i64>) {
        let (mut c, d) = self.system.split_rhs(b);
        c.truncate(self.base.digraph.n_arcs());
        (c, d)
    }

    fn aux_arcs(&self) -> &[usize] {
        self.augmented.as_ref().map_or(&[], |(a, _)| &a.aux_arcs)
    }

    /// Rows every design in this space must satisfy regardless of states.
    pub fn structural_rows(&self, atoms: &AtomList) -> Result<Vec<SurvRow>, SurvError> {
        match &self.augmented {
            None => Ok(vec![]),
            Some((_, rows)) => {
                zero_row(&self.system, atoms, &rows[0].arcs, "nofault").map(|r| vec![r])
            }
        }
    }

    /// The constraint row(s) for one state on these atoms.
    pub fn survivability_rows(
        &self,
        atoms: &AtomList,
        state: &FailureState,
    ) -> Result<Vec<SurvRow>, SurvError> {
        match &state.kind {
            FailureKind::TotalArcFailure(arcs) => {
                let mut s = arcs.clone();
                s.extend_from_slice(self.aux_arcs());
                Ok(vec![zero_row(&self.system, atoms, &s, &state.label)?])
            }
            FailureKind::PartialArcFailure { arc, alpha } => {
                if self.is_augmented() {
                    return Err(SurvError::PartialOnAugmented);
                }
                Ok(vec![partial_row(
                    &self.system,
                    atoms,
                    *arc,
                    alpha,
                    &state.label,
                )?])
            }
            FailureKind::NodeFailure(v) => {
                let Some((_, rows)) = &self.augmented else {
                    return Err(SurvError::NeedsAugmentation);
                };
                Ok(vec![zero_row(
                    &self.system,
                    atoms,
                    &rows[1 + v].arcs,
                    &state.label,
                )?])
            }
        }
    }
}

fn atom_g(
    system: &NodeArcSystem,
    atoms: &AtomList,
    arcs: &[usize],
    label: &str,
) -> Result<Vec<u64>, SurvError> {
    atoms
        .atoms
        .iter()
        .enumerate()
        .map(|(j, atom)| {
            g_of_points(system, &atom.fiber, arcs)
                .finite()
                .ok_or_else(|| SurvError::InfiniteCoefficient {
                    state: label.into(),
                    atom: j,
                })
        })
        .collect()
}

fn zero_row(
    system: &NodeArcSystem,
    atoms: &AtomList,
    arcs: &[usize],
    label: &str,
) -> Result<SurvRow, SurvError> {
    let coeffs = atom_g(system, atoms, arcs, label)?
        .into_iter()
        .map(|g| i64::try_from(g).map_err(|_| SurvError::Overflow(label.into())))
        .collect::<Result<_, _>>()?;
    Ok(SurvRow {
        label: label.into(),
        sense: Sense::Eq,
        coeffs,
        scale: 1,
    })
}

/// `Σ_j (q·g_a(b_j) − p·c_{a,j}) λ_j ≤ 0` for `α = p/q`.
fn partial_row(
    system: &NodeArcSystem,
    atoms: &AtomList,
    arc: usize,
    alpha: &BigRational,
    label: &str,
) -> Result<SurvRow, SurvError> {
    let g = atom_g(system, atoms, &[arc], label)?;
    let p = alpha.numer();
    let q = alpha.denom();
    let mut coeffs = Vec::with_capacity(g.len());
    for (j, atom) in atoms.atoms.iter().enumerate() {
        let c = BigInt::from(atom.rhs[system.cap_coord(arc)]);
        let v = q * BigInt::from(g[j]) - p * c;
        coeffs.push(
            v.to_i64()
                .ok_or_else(|| SurvError::Overflow(label.into()))?,
        );
    }
    Ok(SurvRow {
        label: label.into(),
        sense: Sense::Le,
        coeffs,
        scale: q
            .to_i64()
            .ok_or_else(|| SurvError::Overflow(label.into()))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fibers::enumerate_atoms;
    use crate::gallery;

    fn ratio(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    fn three_arc_atoms() -> (FailureSpace, AtomList) {
        let net = gallery::three_arc(1);
        let space = FailureSpace::plain(&net);
        let atoms = enumerate_atoms(
            space.system.matrix(),
            &space.monoid,
            &space.bound(&[1, 1, 1], &[1]),
            None,
        )
        .unwrap();
        (space, atoms)
    }

    fn f(x: u64) -> SurvivabilityValue {
        SurvivabilityValue::Finite(x)
    }

    #[test]
    fn g_on_three_arc_atoms() {
        let (space, atoms) = three_arc_atoms();
        let sys = &space.system;
        let iv = space.rhs(&[1, 0, 0], &[1]);
        assert_eq!(g_arc(sys, &iv, 0).unwrap(), f(1));
        let vi = space.rhs(&[1, 1, 1], &[1]);
        for a in 0..3 {
            assert_eq!(g_arc(sys, &vi, a).unwrap(), f(0));
        }
        assert_eq!(g_arcs(sys, &vi, &[1, 2]).unwrap(), f(0));
        assert_eq!(g_arcs(sys, &vi, &[0, 1]).unwrap(), f(1));
        let empty = space.rhs(&[0, 0, 0], &[1]);
        assert_eq!(g_arc(sys, &empty, 0).unwrap(), SurvivabilityValue::Infinite);
        assert_eq!(atoms.len(), 6);
    }

    #[test]
    fn total_failure_rows() {
        let (space, atoms) = three_arc_atoms();
        let net = &space.base;
        let row = |a| {
            space
                .survivability_rows(&atoms, &FailureState::total(net, &[a]).unwrap())
                .unwrap()
                .remove(0)
        };
        let r1 = row(0);
        assert_eq!(r1.coeffs, vec![0, 0, 0, 1, 0, 0]);
        assert_eq!(r1.sense, Sense::Eq);
        assert_eq!(r1.label, "total_a1");
        assert_eq!(row(1).coeffs, vec![0, 0, 0, 0, 1, 0]);
        assert_eq!(row(2).coeffs, vec![0, 0, 0, 0, 1, 0]);
    }

    #[test]
    fn partial_failure_row_is_scaled() {
        let (space, atoms) = three_arc_atoms();
        let st = FailureState::partial(&space.base, 0, ratio(1, 2)).unwrap();
        let r = space.survivability_rows(&atoms, &st).unwrap().remove(0);
        // rational coefficients -1/2, 0, 0, 1/2, 0, -1/2 times 2
        assert_eq!(r.coeffs, vec![-1, 0, 0, 1, 0, -1]);
        assert_eq!(r.scale, 2);
        assert_eq!(r.sense, Sense::Le);
    }

    #[test]
    fn node_transform_rows() {
        let net = gallery::three_arc(1);
        let (aug, rows) = node_survivability_transform(&net).unwrap();
        assert_eq!(aug.aux_arcs, vec![3]);
        assert_eq!(rows.len(), 1 + 3);
        assert_eq!(rows[0].arcs, vec![3]);
        // node 1 is the source: its incident arcs a1, a2; aux arc excluded
        assert_eq!(rows[1].arcs, vec![0, 1]);
        // node 2: a2, a3 and the aux arc
        assert_eq!(rows[2].arcs, vec![1, 2, 3]);
    }

    #[test]
    fn augmented_monoid_ties_aux_capacity_to_demand() {
        let space = FailureSpace::node_survivable(&gallery::three_arc(1)).unwrap();
        assert!(space.monoid.contains(&space.rhs(&[1, 0, 0], &[1])));
        let mut bad = space.rhs(&[1, 0, 0], &[1]).into_inner();
        bad[3] = 0;
        assert!(!space.monoid.contains(&IntVector::new(bad)));
    }

    #[test]
    fn node_state_requires_augmentation() {
        let (space, atoms) = three_arc_atoms();
        let st = FailureState::node(&space.base, 1).unwrap();
        assert_eq!(
            space.survivability_rows(&atoms, &st),
            Err(SurvError::NeedsAugmentation)
        );
    }

    #[test]
    fn classification_of_coefficients() {
        let net = gallery::three_arc(1);
        let one = BigRational::one;
        let zero = BigRational::zero;
        let s =
            FailureState::from_coefficients(&net, vec![zero(), one(), one()], vec![one()]).unwrap();
        assert_eq!(s.kind(), &FailureKind::TotalArcFailure(vec![0]));
        let s = FailureState::from_coefficients(&net, vec![ratio(1, 2), one(), one()], vec![one()])
            .unwrap();
        assert!(matches!(
            s.kind(),
            FailureKind::PartialArcFailure { arc: 0, .. }
        ));
        assert_eq!(
            FailureState::from_coefficients(&net, vec![one(), one(), one()], vec![ratio(1, 2)]),
            Err(SurvError::FractionalDemandCoefficient)
        );
        // node 1 (the source): a1, a2 lost, commodity dropped
        let s = FailureState::from_coefficients(&net, vec![zero(), zero(), one()], vec![zero()])
            .unwrap();
        assert_eq!(s.kind(), &FailureKind::NodeFailure(0));
        assert!(FailureState::partial(&net, 0, ratio(3, 2)).is_err());
    }

    #[test]
    fn node_state_demand_coefficients() {
        let net = gallery::three_arc(1);
        assert_eq!(FailureState::node(&net, 0).unwrap().chi(), &[0]);
        assert_eq!(FailureState::node(&net, 1).unwrap().chi(), &[1]);
    }

    #[test]
    fn survivability_value_order_and_sum() {
        assert!(f(3) < SurvivabilityValue::Infinite);
        assert_eq!(f(1) + f(2), f(3));
        assert_eq!(
            f(1) + SurvivabilityValue::Infinite,
            SurvivabilityValue::Infinite
        );
        assert_eq!(SurvivabilityValue::Infinite.to_string(), "inf");
    }
}
