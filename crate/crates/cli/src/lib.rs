//! Instance documents, run reports and the subcommand implementations
//! behind the `survnet` binary.

pub mod commands;
pub mod doc;
pub mod report;

use survnet_core::fibers::FiberError;
use survnet_core::netmodel::NetError;
use survnet_core::refsolve::RefError;
use survnet_core::surviv::SurvError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Surv(#[from] SurvError),
    #[error(transparent)]
    Ref(#[from] RefError),
    #[error(transparent)]
    Fiber(#[from] FiberError),
    #[error("{0}")]
    Core(String),
    #[error("solver and brute-force oracle disagree\n{0}")]
    OracleMismatch(String),
}

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const ERROR: i32 = 1;
    /// Infeasible design problem or a capacity vector that fails a state.
    pub const NEGATIVE: i32 = 2;
}
