use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use survnet::commands::{
    cmd_atoms, cmd_check, cmd_export_lp, cmd_solve, parse_box_flag, RunOptions,
};
use survnet::doc::{InstanceDocument, StateSpec};
use survnet::{exit, CliError};
use survnet_core::netmodel::Formulation;

#[derive(Parser)]
#[command(
    name = "survnet",
    version,
    about = "Survivable network design by fiber atoms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the atoms of the network inside the box.
    Atoms(Common),
    /// Build and solve the reformulated design program.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Also run the brute-force oracle and require agreement.
        #[arg(long)]
        oracle: bool,
        /// Write the reformulated program in LP format.
        #[arg(long, value_name = "FILE")]
        export_lp: Option<PathBuf>,
        /// Report phase timings.
        #[arg(long)]
        timings: bool,
    },
    /// Check a capacity vector against the failure states.
    Check {
        #[command(flatten)]
        common: Common,
        /// Capacities in arc order, comma separated.
        #[arg(long, value_delimiter = ',')]
        capacity: Option<Vec<i64>>,
    },
    /// Write the reformulated program in LP format.
    ExportLp(Common),
}

#[derive(Args)]
struct Common {
    /// Instance document (TOML).
    instance: PathBuf,
    /// Enumeration box `CAP[:DEM]`, each an integer or a comma list.
    #[arg(long = "box", value_name = "CAP[:DEM]")]
    bounds: Option<String>,
    #[arg(long, value_enum)]
    formulation: Option<FormArg>,
    /// Failure state, e.g. `total:a1`, `partial:a1@1/2`, `node:2`, `all-arcs`.
    #[arg(long = "states", value_name = "STATE")]
    states: Vec<String>,
    /// Add every single-arc total failure.
    #[arg(long)]
    survivable: bool,
    /// Emit the JSON report instead of text.
    #[arg(long)]
    json: bool,
    /// Write the output here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FormArg {
    NodeArc,
    Path,
}

impl Common {
    fn load(&self) -> Result<(InstanceDocument, RunOptions), CliError> {
        let text = fs::read_to_string(&self.instance)?;
        let doc = InstanceDocument::from_toml(&text)?;
        let states = if self.states.is_empty() {
            None
        } else {
            Some(
                self.states
                    .iter()
                    .map(|s| StateSpec::parse_flag(s))
                    .collect::<Result<_, _>>()?,
            )
        };
        let opts = RunOptions {
            bounds: self.bounds.as_deref().map(parse_box_flag).transpose()?,
            formulation: self.formulation.map(|f| match f {
                FormArg::NodeArc => Formulation::NodeArc,
                FormArg::Path => Formulation::Path,
            }),
            states,
            survivable: self.survivable,
            ..RunOptions::default()
        };
        Ok((doc, opts))
    }

    fn emit(&self, text: &str) -> Result<(), CliError> {
        match &self.out {
            Some(p) => fs::write(p, text)?,
            None => print!("{text}"),
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Atoms(common) => {
            let (doc, opts) = common.load()?;
            let report = cmd_atoms(&doc, &opts)?;
            common.emit(&if common.json {
                report.to_json()
            } else {
                report.atom_table()
            })?;
            Ok(exit::OK)
        }
        Command::Solve {
            common,
            oracle,
            export_lp,
            timings,
        } => {
            let (doc, mut opts) = common.load()?;
            opts.oracle = oracle;
            opts.timings = timings;
            let (report, ilp) = cmd_solve(&doc, &opts)?;
            if let Some(p) = export_lp {
                fs::write(p, survnet_core::refsolve::export_lp(&ilp))?;
            }
            let text = if common.json {
                report.to_json()
            } else {
                solve_text(&report)
            };
            common.emit(&text)?;
            if report.verification.as_ref().is_some_and(|v| !v.verified) {
                return Ok(exit::ERROR);
            }
            Ok(if report.status == "OPTIMAL" {
                exit::OK
            } else {
                exit::NEGATIVE
            })
        }
        Command::Check { common, capacity } => {
            let (doc, opts) = common.load()?;
            let report = cmd_check(&doc, capacity, &opts)?;
            let text = if common.json {
                report.to_json()
            } else {
                let mut s = String::new();
                for c in &report.checks {
                    let thr = c
                        .threshold
                        .as_deref()
                        .map(|t| format!(" <= {t}"))
                        .unwrap_or_default();
                    let verdict = if c.survivable { "ok" } else { "FAIL" };
                    s.push_str(&format!("{:<16} g={}{thr}  {verdict}\n", c.state, c.g));
                }
                s.push_str(&format!("{}\n", report.status));
                s
            };
            common.emit(&text)?;
            Ok(if report.status == "SURVIVABLE" {
                exit::OK
            } else {
                exit::NEGATIVE
            })
        }
        Command::ExportLp(common) => {
            let (doc, opts) = common.load()?;
            common.emit(&cmd_export_lp(&doc, &opts)?)?;
            Ok(exit::OK)
        }
    }
}

fn solve_text(r: &survnet::report::RunReport) -> String {
    let mut s = format!("status: {}\n", r.status);
    if let Some(sol) = &r.solution {
        if let Some(obj) = &sol.objective {
            s.push_str(&format!("objective: {obj}\n"));
            let caps: Vec<String> = r
                .arcs
                .iter()
                .zip(&sol.capacity)
                .map(|(a, c)| format!("{a}={c}"))
                .collect();
            s.push_str(&format!("capacity: {}\n", caps.join(" ")));
            let used: Vec<String> = sol
                .lambda
                .iter()
                .enumerate()
                .filter(|(_, &l)| l > 0)
                .map(|(j, l)| format!("atom{}x{l}", j + 1))
                .collect();
            s.push_str(&format!("atoms used: {}\n", used.join(" ")));
        }
        s.push_str(&format!("branch-and-bound nodes: {}\n", sol.nodes));
    }
    if let Some(v) = &r.verification {
        s.push_str(&format!("verified: {}\n", v.verified));
    }
    if let Some(o) = &r.oracle {
        s.push_str(&format!(
            "oracle: {} agrees={}\n",
            o.objective.as_deref().unwrap_or("INFEASIBLE"),
            o.agrees
        ));
    }
    if let Some(t) = &r.timings_ms {
        for (k, v) in t {
            s.push_str(&format!("time {k}: {v} ms\n"));
        }
    }
    for w in &r.warnings {
        s.push_str(&format!("warning: {w}\n"));
    }
    s
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit::ERROR as u8)
        }
    }
}
