//! Small reference networks used by the tests, examples and the CLI.

use crate::netmodel::{Commodity, Digraph, Network};

fn one_commodity(g: Digraph, s: &str, t: &str, demand: i64) -> Network {
    let k = Commodity::new(&g, "k1", s, t, demand).expect("valid commodity");
    Network::new(g, vec![k]).expect("valid network")
}

/// Nodes 1,2,3; arcs a1=(1,3), a2=(1,2), a3=(2,3); one commodity 1→3.
pub fn three_arc(demand: i64) -> Network {
    let g = Digraph::new(
        &["1", "2", "3"],
        &[("a1", "1", "3"), ("a2", "1", "2"), ("a3", "2", "3")],
    )
    .expect("valid digraph");
    one_commodity(g, "1", "3", demand)
}

/// Two parallel arcs s→m (1, 3) followed by two parallel arcs m→t (2, 4);
/// one commodity s→t. Its arc flows have non-unique path representations.
pub fn parallel_pairs(demand: i64) -> Network {
    let g = Digraph::new(
        &["s", "m", "t"],
        &[
            ("1", "s", "m"),
            ("2", "m", "t"),
            ("3", "s", "m"),
            ("4", "m", "t"),
        ],
    )
    .expect("valid digraph");
    one_commodity(g, "s", "t", demand)
}

/// Nodes s,u,v,t with arcs 1=s→u, 2=u→v, 3=v→u, 4=u→t, 5=s→v, 6=v→t:
/// four s–t paths and a single cycle on arcs 2,3.
pub fn circulation(demand: i64) -> Network {
    let g = Digraph::new(
        &["s", "u", "v", "t"],
        &[
            ("1", "s", "u"),
            ("2", "u", "v"),
            ("3", "v", "u"),
            ("4", "u", "t"),
            ("5", "s", "v"),
            ("6", "v", "t"),
        ],
    )
    .expect("valid digraph");
    one_commodity(g, "s", "t", demand)
}

/// A single arc s→t carrying one commodity.
pub fn single_arc(demand: i64) -> Network {
    let g = Digraph::new(&["s", "t"], &[("1", "s", "t")]).expect("valid digraph");
    one_commodity(g, "s", "t", demand)
}
