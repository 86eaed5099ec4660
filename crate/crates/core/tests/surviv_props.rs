use proptest::prelude::*;
use survnet_core::fibers::{
    decompose_fiber_cached, enumerate_atoms_cached, truncate_fiber, Truncation,
};
use survnet_core::gallery;
use survnet_core::intcore::{minkowski_sum_equals, PointSet};
use survnet_core::netmodel::{Network, NetworkModel};
use survnet_core::surviv::{g_of_points, SurvivabilityValue};

fn arc_sets(n: usize) -> Vec<Vec<usize>> {
    (1u32..1 << n)
        .map(|m| (0..n).filter(|a| m & (1 << a) != 0).collect())
        .collect()
}

fn check_additivity(net: Network, cap: i64, dem: i64) -> usize {
    let model = NetworkModel::new(net).unwrap();
    let na = model.node_arc();
    let monoid = na.monoid();
    let cache = model.node_arc_cache();
    let bound = na.rhs(&vec![cap; na.n_arcs()], &[dem]);
    let sets = arc_sets(na.n_arcs());
    let mut verified = 0;
    for b in monoid.box_points(&bound) {
        let whole = cache.get(&b).unwrap();
        for (b1, b2) in monoid.splits(&b) {
            let (p1, p2) = (cache.get(&b1).unwrap(), cache.get(&b2).unwrap());
            if !minkowski_sum_equals(&p1, &p2, &whole) {
                continue;
            }
            verified += 1;
            for s in &sets {
                assert_eq!(
                    g_of_points(na, &whole, s),
                    g_of_points(na, &p1, s) + g_of_points(na, &p2, s),
                    "b={b} split {b1} + {b2} arcs {s:?}"
                );
            }
        }
    }
    verified
}

#[test]
fn g_is_minkowski_additive() {
    assert!(check_additivity(gallery::three_arc(1), 2, 2) > 0);
    assert!(check_additivity(gallery::parallel_pairs(1), 1, 2) > 0);
    assert!(check_additivity(gallery::circulation(1), 1, 1) > 0);
}

#[test]
fn g_is_nonnegative_and_infinite_exactly_on_empty_fibers() {
    let model = NetworkModel::new(gallery::circulation(1)).unwrap();
    let na = model.node_arc();
    let bound = na.rhs(&[1; 6], &[2]);
    for b in na.monoid().box_points(&bound) {
        let pts = model.node_arc_cache().get(&b).unwrap();
        for s in arc_sets(6) {
            let g = g_of_points(na, &pts, &s);
            assert_eq!(g == SurvivabilityValue::Infinite, pts.is_empty());
        }
    }
}

#[test]
fn truncation_preserves_g() {
    let model = NetworkModel::new(gallery::circulation(1)).unwrap();
    let na = model.node_arc();
    for b in na.monoid().box_points(&na.rhs(&[2; 6], &[2])) {
        let full = model.node_arc_cache().get(&b).unwrap();
        let tr = truncate_fiber(&full, model.delta());
        for s in arc_sets(6) {
            assert_eq!(
                g_of_points(na, &tr, &s),
                g_of_points(na, &full, &s),
                "b={b}"
            );
        }
    }
}

proptest! {
    #[test]
    fn g_is_antitone_in_the_point_set(mask in prop::collection::vec(any::<bool>(), 32), arcs in prop::collection::btree_set(0usize..6, 1..=6)) {
        let model = NetworkModel::new(gallery::circulation(1)).unwrap();
        let na = model.node_arc();
        let full = model.node_arc_cache().get(&na.rhs(&[2; 6], &[2])).unwrap();
        let mut sub = PointSet::empty(full.dim());
        for (p, keep) in full.iter().zip(mask.iter().cycle()) {
            if *keep {
                sub.insert(p.clone()).unwrap();
            }
        }
        let arcs: Vec<usize> = arcs.into_iter().collect();
        prop_assert!(g_of_points(na, &full, &arcs) <= g_of_points(na, &sub, &arcs));
    }
}

#[test]
fn survivable_designs_decompose_into_survivable_atoms() {
    for (net, cap, dem) in [
        (gallery::three_arc(1), 2, 2),
        (gallery::parallel_pairs(1), 2, 2),
        (gallery::circulation(1), 1, 2),
    ] {
        let model = NetworkModel::new(net).unwrap();
        let na = model.node_arc();
        let monoid = na.monoid();
        let cache = model.node_arc_cache();
        let bound = na.rhs(&vec![cap; na.n_arcs()], &[dem]);
        let delta = model.delta().clone();
        let trunc: Option<&dyn Truncation> = if delta.is_empty() { None } else { Some(&delta) };
        let atoms = enumerate_atoms_cached(cache, &monoid, &bound, trunc).unwrap();
        for b in monoid.box_points(&bound) {
            let pts = cache.get(&b).unwrap();
            if pts.is_empty() {
                continue;
            }
            let parts = decompose_fiber_cached(cache, &b, &atoms, trunc).unwrap();
            for s in arc_sets(na.n_arcs()) {
                if !g_of_points(na, &pts, &s).is_zero() {
                    continue;
                }
                for &(j, _) in &parts {
                    assert!(
                        g_of_points(na, &atoms.atoms[j].fiber, &s).is_zero(),
                        "b={b} arcs {s:?} atom {j}"
                    );
                }
            }
        }
    }
}
