//! Configuration, run orchestration and the acceptance checks behind the `kinetic` CLI.

mod commands;
mod config;
mod criteria;
mod formats;

use thiserror::Error;

pub use commands::{run_decay, run_paths, run_simulate, run_spectrum, run_trace, run_verify_command, Artifacts, RunContext};
pub use config::{alpha_threshold, PathsConfig, Resolved, RunConfig, Scheme, SimulateConfig, SpectrumConfig, TraceConfig};
pub use criteria::{
    run_verify, run_verify_with, select, standard_solver, Criterion, CriterionReport, Verifier, VerifyReport, CRITERIA,
    STANDARD_AMPLITUDE, SURVIVAL_PIN_P2,
};
pub use formats::formats_markdown;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("writing output: {0}")]
    Output(String),
    #[error(transparent)]
    Solver(#[from] crate::solver::SolverError),
    #[error(transparent)]
    Transport(#[from] crate::transport_semigroup::TransportError),
    #[error(transparent)]
    Field(#[from] crate::gas_state::FieldError),
    #[error(transparent)]
    LinearOps(#[from] crate::linear_ops::LinearOpsError),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}

impl HarnessError {
    /// Process exit code: 2 for configuration errors, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            _ => 1,
        }
    }
}
