//! Solver optimum against the direct oracle, exhaustively over small cases.

use std::time::Instant;

use survnet_core::gallery;
use survnet_core::netmodel::Network;
use survnet_core::refsolve::{
    oracle_box, solve_ilp, verify_solution, AtomCatalog, BruteForce, CostVector, OracleOutcome,
};
use survnet_core::surviv::{FailureSpace, FailureState};

fn state_subsets(net: &Network) -> Vec<Vec<FailureState>> {
    let n = net.digraph.n_arcs();
    (0u32..1 << n)
        .map(|mask| {
            (0..n)
                .filter(|a| mask & (1 << a) != 0)
                .map(|a| FailureState::total(net, &[a]).unwrap())
                .collect()
        })
        .collect()
}

fn check_equivalence(net: &Network, max_demand: i64) -> usize {
    let n = net.digraph.n_arcs();
    let catalog = AtomCatalog::new(
        FailureSpace::plain(net),
        &vec![max_demand; n],
        &[max_demand],
    )
    .unwrap();
    let oracle = BruteForce::new(net);
    let costs = CostVector::uniform(n);
    let mut cases = 0;
    for d in 0..=max_demand {
        for states in state_subsets(net) {
            let ilp = catalog.reformulate(&costs, &[d], &states).unwrap();
            let sol = solve_ilp(&ilp).unwrap();
            let direct = oracle
                .design(&costs, &oracle_box(net, &[d], &states), &[d], &states)
                .unwrap();
            match direct {
                OracleOutcome::Infeasible => assert!(!sol.is_optimal(), "d={d} states={states:?}"),
                OracleOutcome::Optimal { cost, .. } => {
                    assert!(sol.is_optimal(), "d={d}");
                    assert_eq!(sol.objective, cost, "d={d} states={states:?}");
                    verify_solution(&sol, &ilp, &oracle).unwrap();
                }
            }
            cases += 1;
        }
    }
    cases
}

#[test]
fn three_arc_solver_matches_oracle() {
    let t = Instant::now();
    assert_eq!(check_equivalence(&gallery::three_arc(1), 3), 4 * 8);
    eprintln!("three-arc: {:?}", t.elapsed());
}

#[test]
fn parallel_pairs_solver_matches_oracle() {
    let t = Instant::now();
    assert_eq!(check_equivalence(&gallery::parallel_pairs(1), 3), 4 * 16);
    eprintln!("parallel pairs: {:?}", t.elapsed());
}

fn optimum(
    catalog: &AtomCatalog,
    costs: &CostVector,
    d: i64,
    states: &[FailureState],
) -> Option<num_rational::BigRational> {
    let sol = solve_ilp(&catalog.reformulate(costs, &[d], states).unwrap()).unwrap();
    sol.is_optimal().then_some(sol.objective)
}

#[test]
fn adding_a_state_never_lowers_the_optimum() {
    for net in [gallery::three_arc(1), gallery::parallel_pairs(1)] {
        let n = net.digraph.n_arcs();
        let catalog = AtomCatalog::new(FailureSpace::plain(&net), &vec![2; n], &[2]).unwrap();
        let costs = CostVector::uniform(n);
        for d in 0..=2 {
            for states in state_subsets(&net) {
                let base = optimum(&catalog, &costs, d, &states);
                for a in 0..n {
                    let mut more = states.clone();
                    more.push(FailureState::total(&net, &[a]).unwrap());
                    let after = optimum(&catalog, &costs, d, &more);
                    match (&base, &after) {
                        (None, Some(_)) => panic!("infeasible program became feasible"),
                        (Some(x), Some(y)) => assert!(y >= x),
                        _ => {}
                    }
                }
            }
        }
    }
}

#[test]
fn atoms_with_positive_equality_coefficients_stay_unused() {
    let net = gallery::parallel_pairs(1);
    let catalog = AtomCatalog::new(FailureSpace::plain(&net), &[2; 4], &[2]).unwrap();
    let all: Vec<FailureState> = (0..4)
        .map(|a| FailureState::total(&net, &[a]).unwrap())
        .collect();
    for d in 0..=2 {
        let ilp = catalog
            .reformulate(&CostVector::uniform(4), &[d], &all)
            .unwrap();
        let sol = solve_ilp(&ilp).unwrap();
        if !sol.is_optimal() {
            continue;
        }
        for row in ilp.rows.iter().filter(|r| r.name.starts_with("surv_")) {
            for (j, &a) in row.coeffs.iter().enumerate() {
                if a > 0 {
                    assert_eq!(sol.lambda[j], 0);
                }
            }
        }
    }
}

#[test]
fn node_states_match_oracle() {
    for net in [gallery::three_arc(1), gallery::parallel_pairs(1)] {
        let n = net.digraph.n_arcs();
        let oracle = BruteForce::new(&net);
        let costs = CostVector::uniform(n);
        let catalog = AtomCatalog::new(
            FailureSpace::node_survivable(&net).unwrap(),
            &vec![2; n],
            &[2],
        )
        .unwrap();
        for v in 0..net.digraph.n_nodes() {
            let mut states = vec![FailureState::node(&net, v).unwrap()];
            for extra in [None, Some(0)] {
                if let Some(a) = extra {
                    states.push(FailureState::total(&net, &[a]).unwrap());
                }
                for d in 0..=2 {
                    let ilp = catalog.reformulate(&costs, &[d], &states).unwrap();
                    let sol = solve_ilp(&ilp).unwrap();
                    let direct = oracle
                        .design(&costs, &oracle_box(&net, &[d], &states), &[d], &states)
                        .unwrap();
                    assert_eq!(
                        sol.is_optimal().then_some(&sol.objective),
                        direct.cost(),
                        "v={v} d={d} {states:?}"
                    );
                    if sol.is_optimal() {
                        verify_solution(&sol, &ilp, &oracle).unwrap();
                    }
                }
            }
        }
    }
}

#[test]
fn partial_states_match_oracle() {
    use num_rational::BigRational;
    let net = gallery::three_arc(1);
    let oracle = BruteForce::new(&net);
    let costs = CostVector::uniform(3);
    for (p, q) in [(0, 1), (1, 3), (1, 2), (2, 3), (1, 1)] {
        let alpha = BigRational::new(p.into(), q.into());
        for arc in 0..3 {
            let states = vec![FailureState::partial(&net, arc, alpha.clone()).unwrap()];
            for d in 0..=2 {
                let cap = oracle_box(&net, &[d], &states);
                let catalog = AtomCatalog::new(FailureSpace::plain(&net), &cap, &[d]).unwrap();
                let ilp = catalog.reformulate(&costs, &[d], &states).unwrap();
                let sol = solve_ilp(&ilp).unwrap();
                let direct = oracle.design(&costs, &cap, &[d], &states).unwrap();
                assert_eq!(
                    sol.is_optimal().then_some(&sol.objective),
                    direct.cost(),
                    "alpha={alpha} arc={arc} d={d}"
                );
                if sol.is_optimal() {
                    verify_solution(&sol, &ilp, &oracle).unwrap();
                }
            }
        }
    }
}

mod random_costs {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn solver_matches_oracle_for_any_costs(w in prop::collection::vec(0i64..=5, 4), d in 0i64..=2, mask in 0u32..16) {
            let net = gallery::parallel_pairs(1);
            let states: Vec<FailureState> = (0..4)
                .filter(|a| mask & (1 << a) != 0)
                .map(|a| FailureState::total(&net, &[a]).unwrap())
                .collect();
            let costs = CostVector::from_integers(&w).unwrap();
            let catalog = AtomCatalog::new(FailureSpace::plain(&net), &[2; 4], &[2]).unwrap();
            let sol = solve_ilp(&catalog.reformulate(&costs, &[d], &states).unwrap()).unwrap();
            let direct = BruteForce::new(&net).design(&costs, &[2; 4], &[d], &states).unwrap();
            prop_assert_eq!(sol.is_optimal().then_some(&sol.objective), direct.cost());
        }
    }
}
