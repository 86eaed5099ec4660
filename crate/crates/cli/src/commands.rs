use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;

use survnet_core::fibers::{enumerate_atoms_cached, AtomList};
use survnet_core::netmodel::{Formulation, Network, NetworkModel, NodeArcSystem};
use survnet_core::refsolve::{
    export_lp, oracle_box, solve_ilp, verify_solution, AtomCatalog, BruteForce, CostVector,
    OracleOutcome, ReformulatedILP,
};
use survnet_core::surviv::{
    g_of_points, FailureKind, FailureSpace, FailureState, Sense, SurvivabilityValue,
};

use crate::doc::{Bound, BoxSpec, InstanceDocument, StateSpec};
use crate::report::{
    AtomReport, BoxReport, CheckReport, IlpSummary, OracleReport, RowSummary, RunReport,
    SolutionReport, VerificationReport,
};
use crate::CliError;

/// Flags shared by the subcommands; `None` falls back to the document.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub bounds: Option<BoxSpec>,
    pub formulation: Option<Formulation>,
    pub states: Option<Vec<StateSpec>>,
    pub survivable: bool,
    pub oracle: bool,
    pub timings: bool,
}

/// `CAP[:DEM]`, each a single integer or a comma-separated list.
pub fn parse_box_flag(s: &str) -> Result<BoxSpec, CliError> {
    let bound = |part: &str| -> Result<Bound, CliError> {
        let vals = part
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<i64>()
                    .map_err(|_| CliError::Invalid(format!("bad box entry `{x}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(if vals.len() == 1 && !part.contains(',') {
            Bound::Uniform(vals[0])
        } else {
            Bound::PerEntry(vals)
        })
    };
    let (cap, dem) = match s.split_once(':') {
        Some((c, d)) => (c, Some(d)),
        None => (s, None),
    };
    Ok(BoxSpec {
        capacity: bound(cap)?,
        demand: dem.map(bound).transpose()?,
    })
}

struct Setup {
    network: Network,
    costs: CostVector,
    demand: Vec<i64>,
    states: Vec<FailureState>,
    formulation: Formulation,
    cap_box: Vec<i64>,
    dem_box: Vec<i64>,
    below_derived: bool,
}

fn setup(doc: &InstanceDocument, opts: &RunOptions) -> Result<Setup, CliError> {
    let network = doc.network()?;
    let costs = doc.costs()?;
    let demand = network.demands();
    let mut specs = opts
        .states
        .clone()
        .unwrap_or_else(|| doc.options.states.clone());
    if opts.survivable {
        specs.push(StateSpec::AllArcs(true));
    }
    let states = crate::doc::resolve_states(&specs, &network)?;
    let formulation = opts
        .formulation
        .or(doc.options.formulation)
        .unwrap_or(Formulation::NodeArc);
    let derived = oracle_box(&network, &demand, &states);
    let mut below_derived = false;
    let (cap_box, dem_box) = match opts.bounds.as_ref().or(doc.options.bounds.as_ref()) {
        Some(b) => {
            let cap = b.capacity.expand(network.digraph.n_arcs(), "capacity")?;
            let dem = match &b.demand {
                Some(d) => d.expand(network.commodities.len(), "demand")?,
                None => demand.clone(),
            };
            if cap.iter().zip(&derived).any(|(c, d)| c < d) {
                below_derived = true;
            }
            (cap, dem)
        }
        None => (derived.iter().map(|&c| c.max(1)).collect(), demand.clone()),
    };
    Ok(Setup {
        network,
        costs,
        demand,
        states,
        formulation,
        cap_box,
        dem_box,
        below_derived,
    })
}

fn base_report(command: &str, s: &Setup) -> RunReport {
    RunReport {
        command: command.into(),
        status: String::new(),
        formulation: s.formulation,
        arcs: s
            .network
            .digraph
            .arcs()
            .iter()
            .map(|a| a.id.clone())
            .collect(),
        commodities: s.network.commodities.iter().map(|c| c.id.clone()).collect(),
        bounds: BoxReport {
            capacity: s.cap_box.clone(),
            demand: s.dem_box.clone(),
        },
        states: s.states.iter().map(|st| st.label().to_string()).collect(),
        atoms: vec![],
        ilp: None,
        solution: None,
        verification: None,
        oracle: None,
        checks: vec![],
        warnings: vec![],
        timings_ms: None,
    }
}

fn node_arc_atom_reports(space: &FailureSpace, atoms: &AtomList) -> Vec<AtomReport> {
    let n = space.base.digraph.n_arcs();
    atoms
        .atoms
        .iter()
        .enumerate()
        .map(|(j, a)| {
            let (capacity, demand) = space.split(&a.rhs);
            AtomReport {
                id: j + 1,
                capacity,
                demand,
                fiber_size: a.fiber.len(),
                noncyclic_size: a.truncated.as_ref().map(|t| t.len()),
                g: (0..n)
                    .map(|arc| {
                        g_of_points(&space.system, &a.fiber, &[arc])
                            .finite()
                            .unwrap_or(u64::MAX)
                    })
                    .collect(),
            }
        })
        .collect()
}

fn path_atom_reports(model: &NetworkModel, s: &Setup) -> Result<Vec<AtomReport>, CliError> {
    let ps = model.path_system()?;
    let pair = model.projection()?;
    let filter = model.path_filter()?;
    let na = model.node_arc();
    let k = s.network.commodities.len();
    let bound = ps.rhs(&s.cap_box, &s.dem_box);
    let atoms = enumerate_atoms_cached(model.path_cache()?, &ps.monoid(), &bound, Some(&filter))?;
    atoms
        .atoms
        .iter()
        .enumerate()
        .map(|(j, a)| {
            let projected = a.fiber.map_linear(&pair.pi)?;
            Ok(AtomReport {
                id: j + 1,
                capacity: a.rhs.entries()[k..].to_vec(),
                demand: a.rhs.entries()[..k].to_vec(),
                fiber_size: a.fiber.len(),
                noncyclic_size: a.truncated.as_ref().map(|t| t.len()),
                g: (0..na.n_arcs())
                    .map(|arc| {
                        g_of_points(na, &projected, &[arc])
                            .finite()
                            .unwrap_or(u64::MAX)
                    })
                    .collect(),
            })
        })
        .collect::<Result<_, survnet_core::intcore::IntError>>()
        .map_err(|e| CliError::Core(e.to_string()))
}

fn warn_if_unroutable(report: &mut RunReport, s: &Setup) {
    if s.demand.iter().any(|&d| d > 0)
        && report
            .atoms
            .iter()
            .all(|a| a.demand.iter().all(|&d| d == 0))
    {
        report
            .warnings
            .push("box too small to route any demand; only capacity atoms were found".into());
    }
}

fn ms(t: Instant) -> f64 {
    (t.elapsed().as_secs_f64() * 1e6).round() / 1e3
}

pub fn cmd_atoms(doc: &InstanceDocument, opts: &RunOptions) -> Result<RunReport, CliError> {
    let s = setup(doc, opts)?;
    let start = Instant::now();
    let mut report = base_report("atoms", &s);
    report.atoms = match s.formulation {
        Formulation::NodeArc => {
            let space = FailureSpace::for_states(&s.network, &s.states)?;
            let catalog = AtomCatalog::new(space, &s.cap_box, &s.dem_box)?;
            node_arc_atom_reports(&catalog.space, &catalog.atoms)
        }
        Formulation::Path => {
            let model = NetworkModel::new(s.network.clone())?;
            path_atom_reports(&model, &s)?
        }
    };
    warn_if_unroutable(&mut report, &s);
    report.status = "OK".into();
    if opts.timings {
        report.timings_ms = Some(BTreeMap::from([("atoms".into(), ms(start))]));
    }
    Ok(report)
}

fn ilp_summary(ilp: &ReformulatedILP) -> IlpSummary {
    IlpSummary {
        columns: ilp.n_columns(),
        rows: ilp
            .rows
            .iter()
            .map(|r| RowSummary {
                name: r.name.clone(),
                sense: match r.sense {
                    Sense::Eq => "=".into(),
                    Sense::Le => "<=".into(),
                },
                rhs: r.rhs,
                nonzeros: r.coeffs.iter().filter(|&&a| a != 0).count(),
                scale: r.scale,
            })
            .collect(),
    }
}

/// Atoms, reformulation, exact solve, verification, and optionally the
/// brute-force oracle. Returns the program alongside for LP export.
pub fn cmd_solve(
    doc: &InstanceDocument,
    opts: &RunOptions,
) -> Result<(RunReport, ReformulatedILP), CliError> {
    let s = setup(doc, opts)?;
    if s.formulation != Formulation::NodeArc {
        return Err(CliError::Invalid(
            "solve works on the node-arc formulation, where the survivability functionals live"
                .into(),
        ));
    }
    if s.dem_box.iter().zip(&s.demand).any(|(b, d)| b < d) {
        return Err(CliError::Invalid(
            "box does not cover the target demand".into(),
        ));
    }
    let mut timings = BTreeMap::new();
    let mut report = base_report("solve", &s);
    if s.below_derived {
        report.warnings.push(
            "capacity box is below the derived design bound; optima are relative to the box".into(),
        );
    }

    let t = Instant::now();
    let space = FailureSpace::for_states(&s.network, &s.states)?;
    let catalog = AtomCatalog::new(space, &s.cap_box, &s.dem_box)?;
    timings.insert("atoms".to_string(), ms(t));
    report.atoms = node_arc_atom_reports(&catalog.space, &catalog.atoms);
    warn_if_unroutable(&mut report, &s);

    let t = Instant::now();
    let ilp = catalog.reformulate(&s.costs, &s.demand, &s.states)?;
    let sol = solve_ilp(&ilp)?;
    timings.insert("solve".to_string(), ms(t));
    report.ilp = Some(ilp_summary(&ilp));
    report.status = if sol.is_optimal() {
        "OPTIMAL"
    } else {
        "INFEASIBLE"
    }
    .into();
    report.solution = Some(SolutionReport {
        status: report.status.clone(),
        objective: sol.is_optimal().then(|| sol.objective.to_string()),
        lambda: sol.lambda.clone(),
        capacity: sol.capacity.clone(),
        nodes: sol.nodes,
    });

    let brute = BruteForce::new(&s.network);
    if sol.is_optimal() {
        let t = Instant::now();
        let v = verify_solution(&sol, &ilp, &brute);
        timings.insert("verify".to_string(), ms(t));
        report.verification = Some(VerificationReport {
            verified: v.is_ok(),
            detail: v.err().map(|e| e.to_string()),
        });
    }

    if opts.oracle {
        let t = Instant::now();
        let obox = oracle_box(&s.network, &s.demand, &s.states);
        let out = brute.design(&s.costs, &obox, &s.demand, &s.states)?;
        timings.insert("oracle".to_string(), ms(t));
        let agrees = match &out {
            OracleOutcome::Infeasible => !sol.is_optimal(),
            OracleOutcome::Optimal { cost, .. } => sol.is_optimal() && &sol.objective == cost,
        };
        report.oracle = Some(match &out {
            OracleOutcome::Infeasible => OracleReport {
                status: "INFEASIBLE".into(),
                objective: None,
                capacity: None,
                agrees,
            },
            OracleOutcome::Optimal { cost, capacity } => OracleReport {
                status: "OPTIMAL".into(),
                objective: Some(cost.to_string()),
                capacity: Some(capacity.clone()),
                agrees,
            },
        });
        if !agrees {
            if opts.timings {
                report.timings_ms = Some(timings);
            }
            return Err(CliError::OracleMismatch(report.to_json()));
        }
    }
    if opts.timings {
        report.timings_ms = Some(timings);
    }
    Ok((report, ilp))
}

pub fn cmd_export_lp(doc: &InstanceDocument, opts: &RunOptions) -> Result<String, CliError> {
    let s = setup(doc, opts)?;
    let space = FailureSpace::for_states(&s.network, &s.states)?;
    let catalog = AtomCatalog::new(space, &s.cap_box, &s.dem_box)?;
    Ok(export_lp(
        &catalog.reformulate(&s.costs, &s.demand, &s.states)?,
    ))
}

fn value_text(v: SurvivabilityValue) -> String {
    v.to_string()
}

/// Per-state `g` and verdict for a given capacity vector; without states
/// every single-arc total failure is checked.
pub fn cmd_check(
    doc: &InstanceDocument,
    capacity: Option<Vec<i64>>,
    opts: &RunOptions,
) -> Result<RunReport, CliError> {
    let mut s = setup(doc, opts)?;
    let c = match capacity.or(doc.capacities()?) {
        Some(c) => c,
        None => return Err(CliError::Invalid("no capacity vector given".into())),
    };
    if c.len() != s.network.digraph.n_arcs() || c.iter().any(|&x| x < 0) {
        return Err(CliError::Invalid(format!(
            "capacity vector must have {} nonnegative entries",
            s.network.digraph.n_arcs()
        )));
    }
    if s.states.is_empty() {
        s.states = StateSpec::AllArcs(true).resolve(&s.network)?;
    }
    let mut report = base_report("check", &s);
    report.bounds.capacity = c.clone();
    let d = &s.demand;
    let na = NodeArcSystem::new(&s.network);
    let pts = enumerate(&na, &c, d)?;
    let feasible = !pts.is_empty();
    report.checks.push(CheckReport {
        state: "nofault".into(),
        g: if feasible { "0" } else { "inf" }.into(),
        threshold: None,
        survivable: feasible,
    });
    let augmented = if s
        .states
        .iter()
        .any(|st| matches!(st.kind(), FailureKind::NodeFailure(_)))
    {
        Some(FailureSpace::node_survivable(&s.network)?)
    } else {
        None
    };
    for st in &s.states {
        let check = match st.kind() {
            FailureKind::TotalArcFailure(arcs) => {
                let g = g_of_points(&na, &pts, arcs);
                CheckReport {
                    state: st.label().into(),
                    g: value_text(g),
                    threshold: None,
                    survivable: g.is_zero(),
                }
            }
            FailureKind::PartialArcFailure { arc, alpha } => {
                let g = g_of_points(&na, &pts, &[*arc]);
                let limit = alpha * BigRational::from_integer(BigInt::from(c[*arc]));
                let ok = g
                    .finite()
                    .is_some_and(|x| BigRational::from_integer(BigInt::from(x)) <= limit);
                CheckReport {
                    state: st.label().into(),
                    g: value_text(g),
                    threshold: Some(limit.to_string()),
                    survivable: ok,
                }
            }
            FailureKind::NodeFailure(v) => {
                let space = augmented.as_ref().expect("built for node states");
                let (_, rows) = space.augmented.as_ref().expect("augmented");
                let apts = enumerate(
                    &space.system,
                    &space.system.split_rhs(&space.rhs(&c, d)).0,
                    d,
                )?;
                let g = g_of_points(&space.system, &apts, &rows[1 + v].arcs);
                CheckReport {
                    state: st.label().into(),
                    g: value_text(g),
                    threshold: None,
                    survivable: g.is_zero(),
                }
            }
        };
        report.checks.push(check);
    }
    report.status = if !feasible {
        "INFEASIBLE"
    } else if report.checks.iter().all(|ch| ch.survivable) {
        "SURVIVABLE"
    } else {
        "NOT_SURVIVABLE"
    }
    .into();
    Ok(report)
}

fn enumerate(
    system: &NodeArcSystem,
    c: &[i64],
    d: &[i64],
) -> Result<survnet_core::intcore::PointSet, CliError> {
    Ok(survnet_core::fibers::enumerate_fiber(
        system.matrix(),
        &system.rhs(c, d),
    )?)
}
