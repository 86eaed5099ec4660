use survnet_core::fibers::{enumerate_fiber, truncate_fiber, CoordinateMonoid};
use survnet_core::gallery;
use survnet_core::intcore::{IntVector, PointSet};
use survnet_core::netmodel::{
    decompose_arc_flow, FlowComponent, Formulation, Network, NetworkModel,
};

fn path_box(model: &NetworkModel, cap: i64, dem: i64) -> Vec<IntVector> {
    let ps = model.path_system().unwrap();
    let n_arcs = model.network().digraph.n_arcs();
    let k = model.network().commodities.len();
    let upper = ps.rhs(&vec![cap; n_arcs], &vec![dem; k]);
    CoordinateMonoid::nonnegative_orthant(upper.dim()).box_points(&upper)
}

#[test]
fn path_fibers_project_onto_node_arc_fibers() {
    for net in [gallery::parallel_pairs(1), gallery::three_arc(1)] {
        let model = NetworkModel::new(net).unwrap();
        let ps = model.path_system().unwrap();
        let pair = model.projection().unwrap();
        let na = model.node_arc();
        for b in path_box(&model, 2, 2) {
            let path_fiber = enumerate_fiber(ps.matrix(), &b).unwrap();
            let image = path_fiber.map_linear(&pair.pi).unwrap();
            let na_fiber = enumerate_fiber(na.matrix(), &pair.n.mul_vec(&b).unwrap()).unwrap();
            assert_eq!(image, na_fiber, "rhs {b}");
        }
    }
}

#[test]
fn path_fibers_miss_only_circulations() {
    let model = NetworkModel::new(gallery::circulation(1)).unwrap();
    let ps = model.path_system().unwrap();
    let pair = model.projection().unwrap();
    let na = model.node_arc();
    for b in path_box(&model, 1, 2) {
        let image = enumerate_fiber(ps.matrix(), &b)
            .unwrap()
            .map_linear(&pair.pi)
            .unwrap();
        let na_fiber = enumerate_fiber(na.matrix(), &pair.n.mul_vec(&b).unwrap()).unwrap();
        assert!(image.is_subset(&na_fiber), "rhs {b}");
        for p in na_fiber.iter().filter(|p| !image.contains(p)) {
            assert!(model.is_cyclic(p, Formulation::NodeArc).unwrap(), "rhs {b}");
        }
    }
}

#[test]
fn noncyclic_path_points_project_onto_noncyclic_arc_flows() {
    for net in [gallery::parallel_pairs(1), gallery::circulation(1)] {
        let model = NetworkModel::new(net).unwrap();
        let n_arcs = model.network().digraph.n_arcs();
        let pair = model.projection().unwrap();
        for c in CoordinateMonoid::nonnegative_orthant(n_arcs)
            .box_points(&IntVector::new(vec![1; n_arcs]))
        {
            for d in 0..=2 {
                let fnp = model.noncyclic_set(&c, &[d], Formulation::Path).unwrap();
                let fnna = model.noncyclic_set(&c, &[d], Formulation::NodeArc).unwrap();
                assert_eq!(fnp.map_linear(&pair.pi).unwrap(), fnna, "c={c} d={d}");
            }
        }
    }
}

fn irreducibility_implication(net: Network, cap: i64, dem: i64) -> (usize, usize) {
    let model = NetworkModel::new(net).unwrap();
    let n_arcs = model.network().digraph.n_arcs();
    let mut na_irreducible = 0;
    let mut checked = 0;
    for c in
        CoordinateMonoid::nonnegative_orthant(n_arcs).box_points(&IntVector::new(vec![cap; n_arcs]))
    {
        for d in 0..=dem {
            if c.is_zero() && d == 0 {
                continue;
            }
            if model
                .feasible_set(&c, &[d], Formulation::NodeArc)
                .unwrap()
                .is_empty()
            {
                continue;
            }
            checked += 1;
            if model
                .is_irreducible(&c, &[d], Formulation::NodeArc)
                .unwrap()
            {
                na_irreducible += 1;
                assert!(
                    model.is_irreducible(&c, &[d], Formulation::Path).unwrap(),
                    "counterexample c={c} d={d}"
                );
            }
        }
    }
    (checked, na_irreducible)
}

#[test]
fn node_arc_irreducible_implies_path_irreducible() {
    let (checked, irreducible) = irreducibility_implication(gallery::three_arc(1), 2, 2);
    assert!(checked > 0 && irreducible > 0);
    let (checked, irreducible) = irreducibility_implication(gallery::parallel_pairs(1), 1, 2);
    assert!(checked > 0 && irreducible > 0);
    let (checked, irreducible) = irreducibility_implication(gallery::circulation(1), 1, 2);
    assert!(checked > 0 && irreducible > 0);
}

#[test]
fn arc_flow_decompositions_reaggregate() {
    for net in [
        gallery::circulation(1),
        gallery::parallel_pairs(1),
        gallery::three_arc(1),
    ] {
        let model = NetworkModel::new(net).unwrap();
        let g = &model.network().digraph;
        let na = model.node_arc();
        let (s, t) = (
            model.network().commodities[0].source,
            model.network().commodities[0].sink,
        );
        let n_arcs = g.n_arcs();
        for c in CoordinateMonoid::nonnegative_orthant(n_arcs)
            .box_points(&IntVector::new(vec![2; n_arcs]))
        {
            for d in 0..=2 {
                for point in &model.feasible_set(&c, &[d], Formulation::NodeArc).unwrap() {
                    let flow = na.commodity_flow(point, 0);
                    let mut rebuilt = vec![0i64; n_arcs];
                    let mut routed = 0u64;
                    for (part, k) in decompose_arc_flow(g, flow, s, t) {
                        let arcs = match &part {
                            FlowComponent::Path(p) => {
                                routed += k;
                                assert_eq!(g.arcs()[p[0]].tail, s);
                                assert_eq!(g.arcs()[*p.last().unwrap()].head, t);
                                p
                            }
                            FlowComponent::Cycle(w) => {
                                assert_eq!(g.arcs()[w[0]].tail, g.arcs()[*w.last().unwrap()].head);
                                w
                            }
                        };
                        for &a in arcs {
                            rebuilt[a] += k as i64;
                        }
                    }
                    assert_eq!(rebuilt, flow);
                    assert_eq!(routed, d as u64);
                }
            }
        }
    }
}

#[test]
fn circulation_example_fibers() {
    let model = NetworkModel::new(gallery::circulation(2)).unwrap();
    let full = model
        .feasible_set(&[1; 6], &[2], Formulation::Path)
        .unwrap();
    let noncyclic = model
        .noncyclic_set(&[1; 6], &[2], Formulation::Path)
        .unwrap();
    assert_eq!(full.len(), 2);
    assert_eq!(noncyclic.len(), 1);
    let filter = model.path_filter().unwrap();
    assert_eq!(truncate_fiber(&full, &filter), noncyclic);
    assert!(noncyclic.is_subset(&full));
    let _ = PointSet::empty(0);
}
