//! Direct design oracle: scan every capacity vector in a box and test each
//! failure state by fiber enumeration on the original network.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use std::sync::Arc;

use crate::fibers::FiberCache;
use crate::netmodel::{Network, NodeArcSystem};
use crate::surviv::{g_of_points, FailureKind, FailureState};

use super::{CostVector, RefError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleOutcome {
    Optimal {
        cost: BigRational,
        capacity: Vec<i64>,
    },
    Infeasible,
}

impl OracleOutcome {
    pub fn cost(&self) -> Option<&BigRational> {
        match self {
            OracleOutcome::Optimal { cost, .. } => Some(cost),
            OracleOutcome::Infeasible => None,
        }
    }
}

/// Per-arc capacity bound that contains an optimal design.
///
/// Cycle-free routings put at most `D = Σ d̄` units on an arc, so capacity
/// beyond `D` is never needed, except that a partial state on `a` with
/// availability `α > 0` may need `c_a` up to `⌈D/α⌉`.
pub fn oracle_box(network: &Network, demand: &[i64], states: &[FailureState]) -> Vec<i64> {
    let total: i64 = demand.iter().sum();
    let mut cap = vec![total; network.digraph.n_arcs()];
    for s in states {
        if let FailureKind::PartialArcFailure { arc, alpha } = s.kind() {
            if !alpha.is_zero() {
                let need = (BigRational::from_integer(total.into()) / alpha).ceil();
                let need = need.to_integer().try_into().unwrap_or(i64::MAX);
                cap[*arc] = cap[*arc].max(need);
            }
        }
    }
    cap
}

/// Feasibility and survivability by enumeration, memoized per network.
pub struct BruteForce {
    network: Network,
    system: NodeArcSystem,
    cache: Arc<FiberCache>,
}

impl BruteForce {
    pub fn new(network: &Network) -> Self {
        let system = NodeArcSystem::new(network);
        let cache = Arc::new(FiberCache::new(Arc::clone(system.matrix())));
        BruteForce {
            network: network.clone(),
            system,
            cache,
        }
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    fn routable(&self, c: &[i64], d: &[i64]) -> Result<bool, RefError> {
        Ok(!self.cache.get(&self.system.rhs(c, d))?.is_empty())
    }

    /// Whether capacity `c` carries `d` in the given failure state.
    pub fn state_holds(
        &self,
        c: &[i64],
        d: &[i64],
        state: &FailureState,
    ) -> Result<bool, RefError> {
        match state.kind() {
            FailureKind::TotalArcFailure(arcs) => {
                let mut c = c.to_vec();
                for &a in arcs {
                    c[a] = 0;
                }
                self.routable(&c, d)
            }
            FailureKind::PartialArcFailure { arc, alpha } => {
                let pts = self.cache.get(&self.system.rhs(c, d))?;
                Ok(match g_of_points(&self.system, &pts, &[*arc]).finite() {
                    None => false,
                    Some(g) => {
                        BigRational::from_integer(BigInt::from(g))
                            <= alpha * BigRational::from_integer(c[*arc].into())
                    }
                })
            }
            FailureKind::NodeFailure(v) => {
                let mut c = c.to_vec();
                for a in self.network.digraph.incident(*v) {
                    c[a] = 0;
                }
                let d: Vec<i64> = d
                    .iter()
                    .zip(state.chi())
                    .map(|(&x, &k)| x * k as i64)
                    .collect();
                self.routable(&c, &d)
            }
        }
    }

    /// No-fault routability plus every state.
    pub fn is_survivable(
        &self,
        c: &[i64],
        d: &[i64],
        states: &[FailureState],
    ) -> Result<bool, RefError> {
        if !self.routable(c, d)? {
            return Ok(false);
        }
        for s in states {
            if !self.state_holds(c, d, s)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Cheapest qualifying `c ≤ cap_box`; ties go to the lexicographically
    /// smallest capacity vector.
    pub fn design(
        &self,
        costs: &CostVector,
        cap_box: &[i64],
        demand: &[i64],
        states: &[FailureState],
    ) -> Result<OracleOutcome, RefError> {
        let mut candidates = vec![vec![]];
        for &cap in cap_box {
            candidates = candidates
                .into_iter()
                .flat_map(|prefix: Vec<i64>| {
                    (0..=cap.max(0)).map(move |x| {
                        let mut p = prefix.clone();
                        p.push(x);
                        p
                    })
                })
                .collect();
        }
        let hits: Vec<(BigRational, Vec<i64>)> = candidates
            .into_par_iter()
            .map(|c| {
                Ok(self
                    .is_survivable(&c, demand, states)?
                    .then(|| (costs.cost_of(&c), c)))
            })
            .collect::<Result<Vec<_>, RefError>>()?
            .into_iter()
            .flatten()
            .collect();
        Ok(match hits.into_iter().min() {
            Some((cost, capacity)) => OracleOutcome::Optimal { cost, capacity },
            None => OracleOutcome::Infeasible,
        })
    }
}

pub fn brute_force_design(
    network: &Network,
    costs: &CostVector,
    cap_box: &[i64],
    demand: &[i64],
    states: &[FailureState],
) -> Result<OracleOutcome, RefError> {
    BruteForce::new(network).design(costs, cap_box, demand, states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    fn q(p: i64) -> BigRational {
        BigRational::from_integer(p.into())
    }

    fn arc_states(net: &Network) -> Vec<FailureState> {
        (0..net.digraph.n_arcs())
            .map(|a| FailureState::total(net, &[a]).unwrap())
            .collect()
    }

    #[test]
    fn survivable_three_arc_designs() {
        let net = gallery::three_arc(1);
        let states = arc_states(&net);
        let w = CostVector::uniform(3);
        assert_eq!(
            brute_force_design(&net, &w, &[2, 2, 2], &[1], &states).unwrap(),
            OracleOutcome::Optimal {
                cost: q(3),
                capacity: vec![1, 1, 1]
            }
        );
        assert_eq!(
            brute_force_design(&net, &w, &[2, 2, 2], &[2], &states).unwrap(),
            OracleOutcome::Optimal {
                cost: q(6),
                capacity: vec![2, 2, 2]
            }
        );
    }

    #[test]
    fn partial_failure_design() {
        let net = gallery::three_arc(2);
        let st = FailureState::partial(&net, 0, BigRational::new(1.into(), 2.into())).unwrap();
        let out = brute_force_design(
            &net,
            &CostVector::uniform(3),
            &[4, 4, 4],
            &[2],
            std::slice::from_ref(&st),
        )
        .unwrap();
        assert_eq!(out.cost(), Some(&q(4)));
        let bf = BruteForce::new(&net);
        assert!(bf
            .is_survivable(&[0, 2, 2], &[2], std::slice::from_ref(&st))
            .unwrap());
        assert!(bf
            .is_survivable(&[2, 1, 1], &[2], std::slice::from_ref(&st))
            .unwrap());
        // every routing of 2 units through (1,1,1) puts one unit on a1
        assert!(!bf.is_survivable(&[1, 1, 1], &[2], &[st]).unwrap());
    }

    #[test]
    fn box_for_partial_states() {
        let net = gallery::three_arc(2);
        let st = FailureState::partial(&net, 0, BigRational::new(1.into(), 3.into())).unwrap();
        assert_eq!(oracle_box(&net, &[2], &[st]), vec![6, 2, 2]);
        assert_eq!(oracle_box(&net, &[2], &[]), vec![2, 2, 2]);
    }

    #[test]
    fn node_failure_drops_terminal_commodities() {
        let net = gallery::three_arc(1);
        let bf = BruteForce::new(&net);
        let source = FailureState::node(&net, 0).unwrap();
        let middle = FailureState::node(&net, 1).unwrap();
        assert!(bf.is_survivable(&[1, 0, 0], &[1], &[source]).unwrap());
        assert!(bf
            .is_survivable(&[1, 0, 0], &[1], std::slice::from_ref(&middle))
            .unwrap());
        assert!(!bf.is_survivable(&[0, 1, 1], &[1], &[middle]).unwrap());
    }

    #[test]
    fn single_arc_infeasible() {
        let net = gallery::single_arc(1);
        let s = arc_states(&net);
        assert_eq!(
            brute_force_design(&net, &CostVector::uniform(1), &[2], &[1], &s).unwrap(),
            OracleOutcome::Infeasible
        );
    }
}
