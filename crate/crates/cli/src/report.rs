//! Machine-readable run reports and their plain-text renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use survnet_core::netmodel::Formulation;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub status: String,
    pub formulation: Formulation,
    pub arcs: Vec<String>,
    pub commodities: Vec<String>,
    #[serde(rename = "box")]
    pub bounds: BoxReport,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub states: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<AtomReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ilp: Option<IlpSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution: Option<SolutionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckReport>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoxReport {
    pub capacity: Vec<i64>,
    pub demand: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AtomReport {
    pub id: usize,
    pub capacity: Vec<i64>,
    pub demand: Vec<i64>,
    pub fiber_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noncyclic_size: Option<usize>,
    /// `g_a` for every arc, in arc order.
    pub g: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IlpSummary {
    pub columns: usize,
    pub rows: Vec<RowSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowSummary {
    pub name: String,
    pub sense: String,
    pub rhs: i64,
    pub nonzeros: usize,
    pub scale: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolutionReport {
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<String>,
    pub lambda: Vec<u64>,
    pub capacity: Vec<i64>,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub verified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub capacity: Option<Vec<i64>>,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub state: String,
    /// `g` over the failed arcs, or `inf`.
    pub g: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<String>,
    pub survivable: bool,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// Atom table: id, capacity, demand, fiber size and `g` per arc.
    pub fn atom_table(&self) -> String {
        let mut head = vec![
            "atom".to_string(),
            "capacity".into(),
            "demand".into(),
            "|fiber|".into(),
        ];
        head.extend(self.arcs.iter().map(|a| format!("g[{a}]")));
        let tuple = |v: &[i64]| {
            let parts: Vec<String> = v.iter().map(i64::to_string).collect();
            format!("({})", parts.join(","))
        };
        let mut rows = vec![head];
        for a in &self.atoms {
            let mut r = vec![
                a.id.to_string(),
                tuple(&a.capacity),
                tuple(&a.demand),
                a.fiber_size.to_string(),
            ];
            r.extend(a.g.iter().map(u64::to_string));
            rows.push(r);
        }
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for r in &rows {
            let cells: Vec<String> = r
                .iter()
                .zip(&widths)
                .map(|(cell, w)| format!("{cell:<w$}"))
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}
