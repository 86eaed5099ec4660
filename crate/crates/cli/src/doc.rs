//! The instance document: a TOML file describing `N = (V, A, d, c)` plus
//! costs, an enumeration box and failure states.

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use survnet_core::netmodel::{Commodity, Digraph, Formulation, Network};
use survnet_core::refsolve::CostVector;
use survnet_core::surviv::FailureState;

use crate::CliError;

pub const FORMAT_TAG: &str = "survnet-instance/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub format: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub nodes: Vec<String>,
    pub arcs: Vec<ArcSpec>,
    #[serde(default)]
    pub commodities: Vec<CommoditySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacities: Option<BTreeMap<String, i64>>,
    #[serde(default, skip_serializing_if = "Options::is_empty")]
    pub options: Options,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcSpec {
    pub id: String,
    pub tail: String,
    pub head: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostSpec>,
}

/// An integer, or a rational written `"p/q"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CostSpec {
    Integer(i64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommoditySpec {
    pub id: String,
    pub source: String,
    pub sink: String,
    pub demand: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoxSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formulation: Option<Formulation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub states: Vec<StateSpec>,
}

impl Options {
    pub fn is_empty(&self) -> bool {
        self == &Options::default()
    }
}

/// Per-arc capacity and per-commodity demand bounds; a single number
/// applies to every entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub capacity: Bound,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand: Option<Bound>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Uniform(i64),
    PerEntry(Vec<i64>),
}

impl Bound {
    pub fn expand(&self, n: usize, what: &str) -> Result<Vec<i64>, CliError> {
        let v = match self {
            Bound::Uniform(x) => vec![*x; n],
            Bound::PerEntry(v) if v.len() == n => v.clone(),
            Bound::PerEntry(v) => {
                return Err(CliError::Invalid(format!(
                    "{what} bound has {} entries, expected {n}",
                    v.len()
                )))
            }
        };
        if v.iter().any(|&x| x < 0) {
            return Err(CliError::Invalid(format!("negative {what} bound")));
        }
        Ok(v)
    }
}

/// Declarative failure scenarios.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSpec {
    Total(Vec<String>),
    Simultaneous(Vec<String>),
    Partial {
        arc: String,
        alpha: String,
    },
    Node(String),
    /// One total state per arc.
    AllArcs(bool),
}

impl StateSpec {
    /// `total:a1`, `simultaneous:a1+a2`, `partial:a1@1/2`, `node:v`, `all-arcs`.
    pub fn parse_flag(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Invalid(format!("cannot read failure state `{s}`"));
        if s == "all-arcs" {
            return Ok(StateSpec::AllArcs(true));
        }
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let list = || rest.split('+').map(str::to_string).collect::<Vec<_>>();
        match kind {
            "total" => Ok(StateSpec::Total(list())),
            "simultaneous" => Ok(StateSpec::Simultaneous(list())),
            "partial" => {
                let (arc, alpha) = rest.split_once('@').ok_or_else(bad)?;
                Ok(StateSpec::Partial {
                    arc: arc.into(),
                    alpha: alpha.into(),
                })
            }
            "node" => Ok(StateSpec::Node(rest.into())),
            _ => Err(bad()),
        }
    }

    pub fn resolve(&self, network: &Network) -> Result<Vec<FailureState>, CliError> {
        let g = &network.digraph;
        let arcs = |ids: &[String]| -> Result<Vec<usize>, CliError> {
            ids.iter().map(|id| Ok(g.arc_index(id)?)).collect()
        };
        Ok(match self {
            StateSpec::Total(ids) | StateSpec::Simultaneous(ids) => {
                vec![FailureState::total(network, &arcs(ids)?)?]
            }
            StateSpec::Partial { arc, alpha } => {
                vec![FailureState::partial(
                    network,
                    g.arc_index(arc)?,
                    parse_rational(alpha)?,
                )?]
            }
            StateSpec::Node(v) => vec![FailureState::node(network, g.node_index(v)?)?],
            StateSpec::AllArcs(false) => vec![],
            StateSpec::AllArcs(true) => (0..g.n_arcs())
                .map(|a| FailureState::total(network, &[a]))
                .collect::<Result<_, _>>()?,
        })
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Invalid(format!("`{s}` is not an integer or a fraction p/q")))
}

impl InstanceDocument {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let doc: InstanceDocument =
            toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        if doc.format != FORMAT_TAG {
            return Err(CliError::Invalid(format!(
                "unsupported format `{}`, expected `{FORMAT_TAG}`",
                doc.format
            )));
        }
        doc.network()?;
        doc.costs()?;
        doc.capacities()?;
        Ok(doc)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("documents serialize")
    }

    pub fn network(&self) -> Result<Network, CliError> {
        let triples: Vec<(String, String, String)> = self
            .arcs
            .iter()
            .map(|a| (a.id.clone(), a.tail.clone(), a.head.clone()))
            .collect();
        let g = Digraph::new(&self.nodes, &triples)?;
        let mut seen = std::collections::HashSet::new();
        let mut commodities = Vec::with_capacity(self.commodities.len());
        for c in &self.commodities {
            if !seen.insert(c.id.as_str()) {
                return Err(CliError::Invalid(format!("duplicate commodity `{}`", c.id)));
            }
            commodities.push(Commodity::new(&g, &c.id, &c.source, &c.sink, c.demand)?);
        }
        Ok(Network::new(g, commodities)?)
    }

    /// Arc costs; arcs without a cost cost 1.
    pub fn costs(&self) -> Result<CostVector, CliError> {
        let w = self
            .arcs
            .iter()
            .map(|a| match &a.cost {
                None => Ok(BigRational::from_integer(1.into())),
                Some(CostSpec::Integer(x)) => Ok(BigRational::from_integer((*x).into())),
                Some(CostSpec::Text(s)) => parse_rational(s),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CostVector::new(w)?)
    }

    /// Installed capacities in arc order, if the document has them.
    pub fn capacities(&self) -> Result<Option<Vec<i64>>, CliError> {
        let Some(map) = &self.capacities else {
            return Ok(None);
        };
        if let Some(id) = map
            .keys()
            .find(|id| !self.arcs.iter().any(|a| &a.id == *id))
        {
            return Err(CliError::Invalid(format!(
                "capacity for unknown arc `{id}`"
            )));
        }
        let mut c = Vec::with_capacity(self.arcs.len());
        for a in &self.arcs {
            let v = map.get(&a.id).copied().unwrap_or(0);
            if v < 0 {
                return Err(CliError::Invalid(format!(
                    "negative capacity on `{}`",
                    a.id
                )));
            }
            c.push(v);
        }
        Ok(Some(c))
    }

    pub fn states(&self, network: &Network) -> Result<Vec<FailureState>, CliError> {
        resolve_states(&self.options.states, network)
    }
}

pub fn resolve_states(
    specs: &[StateSpec],
    network: &Network,
) -> Result<Vec<FailureState>, CliError> {
    let mut out: Vec<FailureState> = Vec::new();
    for s in specs {
        for st in s.resolve(network)? {
            if !out.contains(&st) {
                out.push(st);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE_ARC: &str = r#"
format = "survnet-instance/1"
nodes = ["1", "2", "3"]

[[arcs]]
id = "a1"
tail = "1"
head = "3"
cost = 1

[[arcs]]
id = "a2"
tail = "1"
head = "2"
cost = "1/2"

[[arcs]]
id = "a3"
tail = "2"
head = "3"

[[commodities]]
id = "k1"
source = "1"
sink = "3"
demand = 1

[options]
box = { capacity = 1, demand = 1 }
states = [{ total = ["a1"] }, { partial = { arc = "a2", alpha = "1/2" } }, { all-arcs = true }]
"#;

    #[test]
    fn reads_the_three_arc_instance() {
        let doc = InstanceDocument::from_toml(THREE_ARC).unwrap();
        let net = doc.network().unwrap();
        assert_eq!(net.digraph.n_arcs(), 3);
        let w = doc.costs().unwrap();
        assert_eq!(w.weights()[1], BigRational::new(1.into(), 2.into()));
        assert_eq!(w.weights()[2], BigRational::from_integer(1.into()));
        let states = doc.states(&net).unwrap();
        // total a1 appears once even though all-arcs repeats it
        assert_eq!(states.len(), 4);
        assert_eq!(
            doc.options.bounds.as_ref().unwrap().capacity,
            Bound::Uniform(1)
        );
    }

    #[test]
    fn round_trips() {
        let doc = InstanceDocument::from_toml(THREE_ARC).unwrap();
        assert_eq!(InstanceDocument::from_toml(&doc.to_toml()).unwrap(), doc);
    }

    #[test]
    fn parse_errors_report_a_position() {
        let err = InstanceDocument::from_toml("format = \"survnet-instance/1\"\nnodes = [\n")
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn referential_integrity() {
        let text = THREE_ARC.replace("head = \"3\"\ncost = 1", "head = \"9\"\ncost = 1");
        assert!(InstanceDocument::from_toml(&text).is_err());
        let text = THREE_ARC.replace("demand = 1\n\n[options]", "demand = -1\n\n[options]");
        assert!(InstanceDocument::from_toml(&text).is_err());
        let text = THREE_ARC.replace("survnet-instance/1", "survnet-instance/9");
        assert!(InstanceDocument::from_toml(&text).is_err());
    }

    #[test]
    fn state_flags() {
        assert_eq!(
            StateSpec::parse_flag("simultaneous:a1+a2").unwrap(),
            StateSpec::Simultaneous(vec!["a1".into(), "a2".into()])
        );
        assert_eq!(
            StateSpec::parse_flag("partial:a1@1/2").unwrap(),
            StateSpec::Partial {
                arc: "a1".into(),
                alpha: "1/2".into()
            }
        );
        assert_eq!(
            StateSpec::parse_flag("node:2").unwrap(),
            StateSpec::Node("2".into())
        );
        assert_eq!(
            StateSpec::parse_flag("all-arcs").unwrap(),
            StateSpec::AllArcs(true)
        );
        assert!(StateSpec::parse_flag("broken").is_err());
    }
}
