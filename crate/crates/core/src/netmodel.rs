//! Multicommodity networks and their two integer formulations.
//!
//! The node-arc system has columns `f[l,a]` (commodity-major) followed by the
//! arc slacks `s[a]`, and rows capacity / demand / conservation with
//! right-hand side `(c, d, 0)`. The path system has one column per simple
//! source-sink path (commodity-major, lexicographic by arc sequence) followed
//! by the slacks, and rows demand / capacity with right-hand side `(d, c)`.
//!
//! Arcs are identified by position; parallel arcs are ordinary arcs.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fibers::{
    is_truncated_indecomposable_cached, truncate_fiber, CoordinateMonoid, FiberCache, FiberError,
    Truncation, TruncationSet,
};
use crate::intcore::{reduces_unchecked, IntError, IntMatrix, IntVector, PointSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("unknown arc `{0}`")]
    UnknownArc(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("digraph is not connected")]
    Disconnected,
    #[error("commodity `{0}` has identical source and sink")]
    SameEndpoints(String),
    #[error("commodity `{0}` has no source-sink path")]
    NoPath(String),
    #[error("negative {what} for `{id}`")]
    Negative { what: &'static str, id: String },
    #[error("expected {expected} {what}, found {found}")]
    Length {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("the set of non-cyclic solutions is empty")]
    EmptyFN,
    #[error("projection identity N·D = C·Π fails")]
    ProjectionMismatch,
    #[error(transparent)]
    Fiber(#[from] FiberError),
    #[error(transparent)]
    Int(#[from] IntError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiArc {
    pub id: String,
    pub tail: usize,
    pub head: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Digraph {
    nodes: Vec<String>,
    arcs: Vec<DiArc>,
}

impl Digraph {
    /// Build from node ids and `(arc id, tail id, head id)` triples.
    pub fn new<S: AsRef<str>>(nodes: &[S], arcs: &[(S, S, S)]) -> Result<Self, NetError> {
        let mut index = HashMap::new();
        let mut node_ids = Vec::with_capacity(nodes.len());
        for n in nodes {
            let n = n.as_ref().to_string();
            if index.insert(n.clone(), node_ids.len()).is_some() {
                return Err(NetError::DuplicateId(n));
            }
            node_ids.push(n);
        }
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(arcs.len());
        for (id, t, h) in arcs {
            let id = id.as_ref().to_string();
            if !seen.insert(id.clone()) {
                return Err(NetError::DuplicateId(id));
            }
            let tail = *index
                .get(t.as_ref())
                .ok_or_else(|| NetError::UnknownNode(t.as_ref().into()))?;
            let head = *index
                .get(h.as_ref())
                .ok_or_else(|| NetError::UnknownNode(h.as_ref().into()))?;
            out.push(DiArc { id, tail, head });
        }
        let g = Digraph {
            nodes: node_ids,
            arcs: out,
        };
        if !g.is_weakly_connected() {
            return Err(NetError::Disconnected);
        }
        Ok(g)
    }

    fn is_weakly_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for a in &self.arcs {
                for (x, y) in [(a.tail, a.head), (a.head, a.tail)] {
                    if x == v && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[DiArc] {
        &self.arcs
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn node_index(&self, id: &str) -> Result<usize, NetError> {
        self.nodes
            .iter()
            .position(|n| n == id)
            .ok_or_else(|| NetError::UnknownNode(id.into()))
    }

    pub fn arc_index(&self, id: &str) -> Result<usize, NetError> {
        self.arcs
            .iter()
            .position(|a| a.id == id)
            .ok_or_else(|| NetError::UnknownArc(id.into()))
    }

    pub fn out_arcs(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.arcs.len()).filter(move |&a| self.arcs[a].tail == v)
    }

    pub fn in_arcs(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.arcs.len()).filter(move |&a| self.arcs[a].head == v)
    }

    /// `δ(v)`: every arc with `v` as an endpoint.
    pub fn incident(&self, v: usize) -> Vec<usize> {
        (0..self.arcs.len())
            .filter(|&a| self.arcs[a].tail == v || self.arcs[a].head == v)
            .collect()
    }

    /// Copy with `extra` arcs appended.
    pub fn with_arcs(&self, extra: Vec<DiArc>) -> Result<Digraph, NetError> {
        let mut g = self.clone();
        for a in extra {
            if g.arcs.iter().any(|b| b.id == a.id) {
                return Err(NetError::DuplicateId(a.id));
            }
            g.arcs.push(a);
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Commodity {
    pub id: String,
    pub source: usize,
    pub sink: usize,
    pub demand: i64,
}

impl Commodity {
    pub fn new(
        g: &Digraph,
        id: &str,
        source: &str,
        sink: &str,
        demand: i64,
    ) -> Result<Self, NetError> {
        let c = Commodity {
            id: id.into(),
            source: g.node_index(source)?,
            sink: g.node_index(sink)?,
            demand,
        };
        if c.source == c.sink {
            return Err(NetError::SameEndpoints(c.id));
        }
        if demand < 0 {
            return Err(NetError::Negative {
                what: "demand",
                id: c.id,
            });
        }
        Ok(c)
    }
}

/// Digraph with commodities; the topology a design is sought for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Network {
    pub digraph: Digraph,
    pub commodities: Vec<Commodity>,
}

impl Network {
    pub fn new(digraph: Digraph, commodities: Vec<Commodity>) -> Result<Self, NetError> {
        for c in &commodities {
            if c.source >= digraph.n_nodes() || c.sink >= digraph.n_nodes() {
                return Err(NetError::UnknownNode(c.id.clone()));
            }
            if c.source == c.sink {
                return Err(NetError::SameEndpoints(c.id.clone()));
            }
            if c.demand < 0 {
                return Err(NetError::Negative {
                    what: "demand",
                    id: c.id.clone(),
                });
            }
        }
        Ok(Network {
            digraph,
            commodities,
        })
    }

    pub fn demands(&self) -> Vec<i64> {
        self.commodities.iter().map(|c| c.demand).collect()
    }

    pub fn with_demands(&self, d: &[i64]) -> Result<Network, NetError> {
        if d.len() != self.commodities.len() {
            return Err(NetError::Length {
                what: "demands",
                expected: self.commodities.len(),
                found: d.len(),
            });
        }
        let mut n = self.clone();
        for (c, &x) in n.commodities.iter_mut().zip(d) {
            c.demand = x;
        }
        Network::new(n.digraph, n.commodities)
    }
}

/// `N = (V, A, d, c)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkInstance {
    pub network: Network,
    pub capacities: Vec<i64>,
}

impl NetworkInstance {
    pub fn new(network: Network, capacities: Vec<i64>) -> Result<Self, NetError> {
        if capacities.len() != network.digraph.n_arcs() {
            return Err(NetError::Length {
                what: "capacities",
                expected: network.digraph.n_arcs(),
                found: capacities.len(),
            });
        }
        if let Some(a) = capacities.iter().position(|&c| c < 0) {
            return Err(NetError::Negative {
                what: "capacity",
                id: network.digraph.arcs()[a].id.clone(),
            });
        }
        Ok(NetworkInstance {
            network,
            capacities,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formulation {
    NodeArc,
    Path,
}

/// Node-arc constraint matrix `C`.
#[derive(Debug, Clone)]
pub struct NodeArcSystem {
    matrix: Arc<IntMatrix>,
    n_arcs: usize,
    n_commodities: usize,
    conservation: Vec<(usize, usize)>,
}

impl NodeArcSystem {
    pub fn new(network: &Network) -> Self {
        let g = &network.digraph;
        let n_arcs = g.n_arcs();
        let k = network.commodities.len();
        let ncols = (k + 1) * n_arcs;
        let mut rows = Vec::new();
        let mut row_labels = Vec::new();
        for (a, arc) in g.arcs().iter().enumerate() {
            let mut r = vec![0; ncols];
            for l in 0..k {
                r[l * n_arcs + a] = 1;
            }
            r[k * n_arcs + a] = 1;
            rows.push(r);
            row_labels.push(format!("cap[{}]", arc.id));
        }
        let balance = |l: usize, v: usize| {
            let mut r = vec![0; ncols];
            for a in g.out_arcs(v) {
                r[l * n_arcs + a] += 1;
            }
            for a in g.in_arcs(v) {
                r[l * n_arcs + a] -= 1;
            }
            r
        };
        for (l, c) in network.commodities.iter().enumerate() {
            rows.push(balance(l, c.source));
            row_labels.push(format!("dem[{}]", c.id));
        }
        let mut conservation = Vec::new();
        for (l, c) in network.commodities.iter().enumerate() {
            for v in 0..g.n_nodes() {
                if v != c.source && v != c.sink {
                    rows.push(balance(l, v));
                    row_labels.push(format!("cons[{},{}]", c.id, g.nodes()[v]));
                    conservation.push((l, v));
                }
            }
        }
        let mut col_labels = Vec::with_capacity(ncols);
        for c in &network.commodities {
            for arc in g.arcs() {
                col_labels.push(format!("f[{},{}]", c.id, arc.id));
            }
        }
        for arc in g.arcs() {
            col_labels.push(format!("s[{}]", arc.id));
        }
        NodeArcSystem {
            matrix: Arc::new(IntMatrix::new(rows, ncols, row_labels, col_labels).expect("layout")),
            n_arcs,
            n_commodities: k,
            conservation,
        }
    }

    pub fn matrix(&self) -> &Arc<IntMatrix> {
        &self.matrix
    }

    pub fn n_arcs(&self) -> usize {
        self.n_arcs
    }

    pub fn n_commodities(&self) -> usize {
        self.n_commodities
    }

    pub fn conservation_rows(&self) -> &[(usize, usize)] {
        &self.conservation
    }

    pub fn flow_col(&self, commodity: usize, arc: usize) -> usize {
        commodity * self.n_arcs + arc
    }

    pub fn slack_col(&self, arc: usize) -> usize {
        self.n_commodities * self.n_arcs + arc
    }

    pub fn cap_coord(&self, arc: usize) -> usize {
        arc
    }

    pub fn demand_coord(&self, commodity: usize) -> usize {
        self.n_arcs + commodity
    }

    pub fn rhs_dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `(c, d, 0)`.
    pub fn rhs(&self, c: &[i64], d: &[i64]) -> IntVector {
        assert_eq!(c.len(), self.n_arcs, "capacity vector length");
        assert_eq!(d.len(), self.n_commodities, "demand vector length");
        let mut b = Vec::with_capacity(self.rhs_dim());
        b.extend_from_slice(c);
        b.extend_from_slice(d);
        b.resize(self.rhs_dim(), 0);
        IntVector::new(b)
    }

    /// Splits `(c, d, 0)` into `(c, d)`.
    pub fn split_rhs(&self, b: &IntVector) -> (Vec<i64>, Vec<i64>) {
        (
            b.entries()[..self.n_arcs].to_vec(),
            b.entries()[self.n_arcs..self.n_arcs + self.n_commodities].to_vec(),
        )
    }

    /// Capacity and demand coordinates free, conservation coordinates zero.
    pub fn monoid(&self) -> CoordinateMonoid {
        let free = (0..self.n_arcs + self.n_commodities).collect();
        let zero = (self.n_arcs + self.n_commodities..self.rhs_dim()).collect();
        CoordinateMonoid::new(self.rhs_dim(), free, zero, vec![]).expect("valid monoid")
    }

    /// `f^l` of a fiber point, one entry per arc.
    pub fn commodity_flow<'a>(&self, point: &'a IntVector, commodity: usize) -> &'a [i64] {
        let start = commodity * self.n_arcs;
        &point.entries()[start..start + self.n_arcs]
    }

    /// `Σ_l f_a^l` summed over `arcs`.
    pub fn aggregated_flow(&self, point: &IntVector, arcs: &[usize]) -> i64 {
        arcs.iter()
            .flat_map(|&a| (0..self.n_commodities).map(move |l| (l, a)))
            .map(|(l, a)| point[self.flow_col(l, a)])
            .sum()
    }
}

pub fn build_node_arc_system(instance: &NetworkInstance) -> NodeArcSystem {
    NodeArcSystem::new(&instance.network)
}

/// All simple directed `s`–`t` paths as arc sequences, lexicographic by arc
/// position.
pub fn enumerate_simple_paths(g: &Digraph, s: usize, t: usize) -> Vec<Vec<usize>> {
    fn dfs(
        g: &Digraph,
        v: usize,
        t: usize,
        on_path: &mut [bool],
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if v == t {
            out.push(path.clone());
            return;
        }
        for a in g.out_arcs(v) {
            let h = g.arcs[a].head;
            if on_path[h] {
                continue;
            }
            on_path[h] = true;
            path.push(a);
            dfs(g, h, t, on_path, path, out);
            path.pop();
            on_path[h] = false;
        }
    }
    let mut out = Vec::new();
    if s == t {
        return out;
    }
    let mut on_path = vec![false; g.n_nodes()];
    on_path[s] = true;
    dfs(g, s, t, &mut on_path, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// All simple directed cycles as arc sequences, each starting at its
/// lowest-position arc; the list is sorted.
pub fn enumerate_simple_cycles(g: &Digraph) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for first in 0..g.n_arcs() {
        let start = g.arcs[first].tail;
        let head = g.arcs[first].head;
        if head == start {
            out.push(vec![first]);
            continue;
        }
        // simple paths head → start using only arcs after `first`
        let mut on_path = vec![false; g.n_nodes()];
        on_path[start] = true;
        on_path[head] = true;
        let mut path = vec![first];
        cycle_dfs(g, first, head, start, &mut on_path, &mut path, &mut out);
    }
    out.sort();
    out
}

fn cycle_dfs(
    g: &Digraph,
    first: usize,
    v: usize,
    start: usize,
    on_path: &mut [bool],
    path: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    for a in g.out_arcs(v).filter(|&a| a > first) {
        let h = g.arcs[a].head;
        if h == start {
            path.push(a);
            out.push(path.clone());
            path.pop();
        } else if !on_path[h] {
            on_path[h] = true;
            path.push(a);
            cycle_dfs(g, first, h, start, on_path, path, out);
            path.pop();
            on_path[h] = false;
        }
    }
}

/// Path-formulation constraint matrix `D`.
#[derive(Debug, Clone)]
pub struct PathSystem {
    matrix: Arc<IntMatrix>,
    paths: Vec<Vec<Vec<usize>>>,
    offsets: Vec<usize>,
    n_arcs: usize,
}

impl PathSystem {
    pub fn new(network: &Network) -> Result<Self, NetError> {
        let g = &network.digraph;
        let n_arcs = g.n_arcs();
        let mut paths = Vec::new();
        for c in &network.commodities {
            let p = enumerate_simple_paths(g, c.source, c.sink);
            if p.is_empty() {
                return Err(NetError::NoPath(c.id.clone()));
            }
            paths.push(p);
        }
        let mut offsets = Vec::with_capacity(paths.len());
        let mut n_paths = 0;
        for p in &paths {
            offsets.push(n_paths);
            n_paths += p.len();
        }
        let ncols = n_paths + n_arcs;
        let mut rows = Vec::new();
        let mut row_labels = Vec::new();
        for (l, c) in network.commodities.iter().enumerate() {
            let mut r = vec![0; ncols];
            for p in 0..paths[l].len() {
                r[offsets[l] + p] = 1;
            }
            rows.push(r);
            row_labels.push(format!("dem[{}]", c.id));
        }
        for (a, arc) in g.arcs().iter().enumerate() {
            let mut r = vec![0; ncols];
            for (l, ps) in paths.iter().enumerate() {
                for (p, path) in ps.iter().enumerate() {
                    if path.contains(&a) {
                        r[offsets[l] + p] = 1;
                    }
                }
            }
            r[n_paths + a] = 1;
            rows.push(r);
            row_labels.push(format!("cap[{}]", arc.id));
        }
        let mut col_labels = Vec::with_capacity(ncols);
        for (l, c) in network.commodities.iter().enumerate() {
            for path in &paths[l] {
                let ids: Vec<&str> = path.iter().map(|&a| g.arcs()[a].id.as_str()).collect();
                col_labels.push(format!("y[{},{}]", c.id, ids.join("-")));
            }
        }
        for arc in g.arcs() {
            col_labels.push(format!("s[{}]", arc.id));
        }
        Ok(PathSystem {
            matrix: Arc::new(IntMatrix::new(rows, ncols, row_labels, col_labels)?),
            paths,
            offsets,
            n_arcs,
        })
    }

    pub fn matrix(&self) -> &Arc<IntMatrix> {
        &self.matrix
    }

    pub fn paths(&self, commodity: usize) -> &[Vec<usize>] {
        &self.paths[commodity]
    }

    pub fn n_paths(&self) -> usize {
        self.paths.iter().map(Vec::len).sum()
    }

    pub fn path_col(&self, commodity: usize, path: usize) -> usize {
        self.offsets[commodity] + path
    }

    pub fn slack_col(&self, arc: usize) -> usize {
        self.n_paths() + arc
    }

    /// `(d, c)`.
    pub fn rhs(&self, c: &[i64], d: &[i64]) -> IntVector {
        assert_eq!(c.len(), self.n_arcs, "capacity vector length");
        assert_eq!(d.len(), self.paths.len(), "demand vector length");
        let mut b = d.to_vec();
        b.extend_from_slice(c);
        IntVector::new(b)
    }

    pub fn monoid(&self) -> CoordinateMonoid {
        CoordinateMonoid::nonnegative_orthant(self.matrix.nrows())
    }
}

pub fn build_path_system(instance: &NetworkInstance) -> Result<PathSystem, NetError> {
    PathSystem::new(&instance.network)
}

/// `Π` maps path-space points to node-arc points; `N` maps path right-hand
/// sides `(d, c)` to `(c, d, 0)`.
#[derive(Debug, Clone)]
pub struct ProjectionPair {
    pub pi: IntMatrix,
    pub n: IntMatrix,
}

impl ProjectionPair {
    pub fn new(na: &NodeArcSystem, ps: &PathSystem) -> Result<Self, NetError> {
        let na_cols = na.matrix.ncols();
        let p_cols = ps.matrix.ncols();
        let mut pi = vec![vec![0; p_cols]; na_cols];
        for (l, paths) in ps.paths.iter().enumerate() {
            for (p, path) in paths.iter().enumerate() {
                for &a in path {
                    pi[na.flow_col(l, a)][ps.path_col(l, p)] = 1;
                }
            }
        }
        for a in 0..na.n_arcs {
            pi[na.slack_col(a)][ps.slack_col(a)] = 1;
        }
        let k = na.n_commodities;
        let p_rows = ps.matrix.nrows();
        let mut n = vec![vec![0; p_rows]; na.rhs_dim()];
        for a in 0..na.n_arcs {
            n[na.cap_coord(a)][k + a] = 1;
        }
        for l in 0..k {
            n[na.demand_coord(l)][l] = 1;
        }
        let pi = IntMatrix::new(
            pi,
            p_cols,
            na.matrix.col_labels().to_vec(),
            ps.matrix.col_labels().to_vec(),
        )?;
        let n = IntMatrix::new(
            n,
            p_rows,
            na.matrix.row_labels().to_vec(),
            ps.matrix.row_labels().to_vec(),
        )?;
        let lhs = n.mul(&ps.matrix)?;
        let rhs = na.matrix.mul(&pi)?;
        if lhs.rows() != rhs.rows() {
            return Err(NetError::ProjectionMismatch);
        }
        Ok(ProjectionPair { pi, n })
    }
}

/// Node-arc point `Π·(y, s)` of a path-space point.
pub fn project_solution(y: &IntVector, pair: &ProjectionPair) -> Result<IntVector, NetError> {
    Ok(pair.pi.mul_vec(y)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FlowComponent {
    Path(Vec<usize>),
    Cycle(Vec<usize>),
}

/// Path/cycle decomposition of one commodity's arc flow: repeatedly peel
/// the lexicographically smallest `s`–`t` path in the support (bottleneck
/// multiplicity), then the smallest cycle, until nothing remains.
pub fn decompose_arc_flow(
    g: &Digraph,
    flow: &[i64],
    source: usize,
    sink: usize,
) -> Vec<(FlowComponent, u64)> {
    assert_eq!(flow.len(), g.n_arcs(), "flow vector length");
    let mut rest = flow.to_vec();
    let mut parts: BTreeMap<FlowComponent, u64> = BTreeMap::new();
    let mut order: Vec<FlowComponent> = Vec::new();
    let mut record = |c: FlowComponent, k: u64, parts: &mut BTreeMap<FlowComponent, u64>| {
        if !parts.contains_key(&c) {
            order.push(c.clone());
        }
        *parts.entry(c).or_default() += k;
    };
    let support = |rest: &[i64]| -> Digraph {
        let arcs = g
            .arcs
            .iter()
            .enumerate()
            .filter(|(a, _)| rest[*a] > 0)
            .map(|(_, arc)| arc.clone())
            .collect();
        Digraph {
            nodes: g.nodes.clone(),
            arcs,
        }
    };
    let original_index =
        |rest: &[i64]| -> Vec<usize> { (0..g.n_arcs()).filter(|&a| rest[a] > 0).collect() };
    loop {
        let sub = support(&rest);
        let idx = original_index(&rest);
        let path = first_simple_path(&sub, source, sink)
            .map(|p| p.into_iter().map(|a| idx[a]).collect::<Vec<_>>());
        let Some(path) = path else { break };
        let k = path.iter().map(|&a| rest[a]).min().expect("nonempty path");
        for &a in &path {
            rest[a] -= k;
        }
        record(FlowComponent::Path(path), k as u64, &mut parts);
    }
    loop {
        let sub = support(&rest);
        let idx = original_index(&rest);
        let Some(cycle) = enumerate_simple_cycles(&sub).into_iter().next() else {
            break;
        };
        let cycle: Vec<usize> = cycle.into_iter().map(|a| idx[a]).collect();
        let k = cycle
            .iter()
            .map(|&a| rest[a])
            .min()
            .expect("nonempty cycle");
        for &a in &cycle {
            rest[a] -= k;
        }
        record(FlowComponent::Cycle(cycle), k as u64, &mut parts);
    }
    order
        .into_iter()
        .map(|c| {
            let k = parts[&c];
            (c, k)
        })
        .collect()
}

fn first_simple_path(g: &Digraph, s: usize, t: usize) -> Option<Vec<usize>> {
    fn dfs(g: &Digraph, v: usize, t: usize, on: &mut [bool], path: &mut Vec<usize>) -> bool {
        if v == t {
            return true;
        }
        for a in g.out_arcs(v) {
            let h = g.arcs[a].head;
            if on[h] {
                continue;
            }
            on[h] = true;
            path.push(a);
            if dfs(g, h, t, on, path) {
                return true;
            }
            path.pop();
            on[h] = false;
        }
        false
    }
    if s == t {
        return None;
    }
    let mut on = vec![false; g.n_nodes()];
    on[s] = true;
    let mut path = Vec::new();
    dfs(g, s, t, &mut on, &mut path).then_some(path)
}

/// `Δ`: one generator per (commodity, simple cycle), the cycle indicator on
/// that commodity's flow block.
pub fn circulation_generators_node_arc(network: &Network, na: &NodeArcSystem) -> TruncationSet {
    let cycles = enumerate_simple_cycles(&network.digraph);
    cycle_generators(na, &cycles)
}

fn cycle_generators(na: &NodeArcSystem, cycles: &[Vec<usize>]) -> TruncationSet {
    let dim = na.matrix.ncols();
    let mut gens = PointSet::empty(dim);
    for l in 0..na.n_commodities {
        for w in cycles {
            let mut v = vec![0; dim];
            for &a in w {
                v[na.flow_col(l, a)] = 1;
            }
            gens.insert(IntVector::new(v)).expect("dimension");
        }
    }
    TruncationSet::new(gens).expect("cycle indicators are nonzero and nonnegative")
}

/// Cuts path-space points whose projected arc flow carries a circulation.
pub struct PathCirculationFilter<'a> {
    pair: &'a ProjectionPair,
    delta: &'a TruncationSet,
}

impl Truncation for PathCirculationFilter<'_> {
    fn cuts(&self, point: &IntVector) -> bool {
        let f = self.pair.pi.mul_vec(point).expect("path-space point");
        self.delta.cuts(&f)
    }
}

struct PathBundle {
    system: PathSystem,
    pair: ProjectionPair,
    cache: FiberCache,
}

/// Both formulations of one network, with fiber caches.
pub struct NetworkModel {
    network: Network,
    node_arc: NodeArcSystem,
    na_cache: FiberCache,
    cycles: Vec<Vec<usize>>,
    delta: TruncationSet,
    path: Result<PathBundle, NetError>,
}

impl NetworkModel {
    pub fn new(network: Network) -> Result<Self, NetError> {
        let node_arc = NodeArcSystem::new(&network);
        let cycles = enumerate_simple_cycles(&network.digraph);
        let delta = cycle_generators(&node_arc, &cycles);
        let path = PathSystem::new(&network).and_then(|system| {
            let pair = ProjectionPair::new(&node_arc, &system)?;
            let cache = FiberCache::new(Arc::clone(system.matrix()));
            Ok(PathBundle {
                system,
                pair,
                cache,
            })
        });
        if let Err(e @ NetError::ProjectionMismatch) = &path {
            return Err(e.clone());
        }
        let na_cache = FiberCache::new(Arc::clone(node_arc.matrix()));
        Ok(NetworkModel {
            network,
            node_arc,
            na_cache,
            cycles,
            delta,
            path,
        })
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn node_arc(&self) -> &NodeArcSystem {
        &self.node_arc
    }

    pub fn node_arc_cache(&self) -> &FiberCache {
        &self.na_cache
    }

    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    pub fn delta(&self) -> &TruncationSet {
        &self.delta
    }

    fn bundle(&self) -> Result<&PathBundle, NetError> {
        self.path.as_ref().map_err(Clone::clone)
    }

    pub fn path_system(&self) -> Result<&PathSystem, NetError> {
        Ok(&self.bundle()?.system)
    }

    pub fn projection(&self) -> Result<&ProjectionPair, NetError> {
        Ok(&self.bundle()?.pair)
    }

    pub fn path_cache(&self) -> Result<&FiberCache, NetError> {
        Ok(&self.bundle()?.cache)
    }

    pub fn path_filter(&self) -> Result<PathCirculationFilter<'_>, NetError> {
        Ok(PathCirculationFilter {
            pair: &self.bundle()?.pair,
            delta: &self.delta,
        })
    }

    /// Whether a fiber point of the given formulation carries a circulation.
    pub fn is_cyclic(&self, point: &IntVector, formulation: Formulation) -> Result<bool, NetError> {
        match formulation {
            Formulation::NodeArc => Ok(self
                .delta
                .vectors()
                .iter()
                .any(|g| g.dim() == point.dim() && reduces_unchecked(g, point))),
            Formulation::Path => {
                let f = project_solution(point, &self.bundle()?.pair)?;
                self.is_cyclic(&f, Formulation::NodeArc)
            }
        }
    }

    /// Every feasible point of `(c, d)` in the given formulation.
    pub fn feasible_set(
        &self,
        c: &[i64],
        d: &[i64],
        formulation: Formulation,
    ) -> Result<PointSet, NetError> {
        Ok(match formulation {
            Formulation::NodeArc => (*self.na_cache.get(&self.node_arc.rhs(c, d))?).clone(),
            Formulation::Path => {
                let b = self.bundle()?;
                (*b.cache.get(&b.system.rhs(c, d))?).clone()
            }
        })
    }

    /// `FN`: the non-cyclic feasible points.
    pub fn noncyclic_set(
        &self,
        c: &[i64],
        d: &[i64],
        formulation: Formulation,
    ) -> Result<PointSet, NetError> {
        let full = self.feasible_set(c, d, formulation)?;
        Ok(match formulation {
            Formulation::NodeArc => truncate_fiber(&full, &self.delta),
            Formulation::Path => truncate_fiber(&full, &self.path_filter()?),
        })
    }

    /// No split `(c,d) = (c1,d1) + (c2,d2)`, both nonzero, with
    /// `FN ⊆ FN_1 + FN_2`.
    pub fn is_irreducible(
        &self,
        c: &[i64],
        d: &[i64],
        formulation: Formulation,
    ) -> Result<bool, NetError> {
        let r = match formulation {
            Formulation::NodeArc => is_truncated_indecomposable_cached(
                &self.na_cache,
                &self.node_arc.rhs(c, d),
                &self.delta,
                &self.node_arc.monoid(),
            ),
            Formulation::Path => {
                let b = self.bundle()?;
                let filter = self.path_filter()?;
                is_truncated_indecomposable_cached(
                    &b.cache,
                    &b.system.rhs(c, d),
                    &filter,
                    &b.system.monoid(),
                )
            }
        };
        match r {
            Err(FiberError::EmptyFiber(_)) => Err(NetError::EmptyFN),
            other => Ok(other?),
        }
    }
}

pub fn is_irreducible(
    instance: &NetworkInstance,
    formulation: Formulation,
) -> Result<bool, NetError> {
    let model = NetworkModel::new(instance.network.clone())?;
    model.is_irreducible(
        &instance.capacities,
        &instance.network.demands(),
        formulation,
    )
}
