//! Scenario files, model dispatch, CSV output and the command-line front
//! end.
//!
//! A scenario file holds one `[name]` section per scenario with
//! `key = value` lines. Values are numbers, identifiers, or bracketed
//! comma-separated lists of either. `#` starts a comment.

pub mod cli;
pub mod models;
pub mod output;
pub mod scenario;

pub use models::{run_scenario, Model, RunArtifacts};
pub use output::{emit_csv, fmt_g12, Column};
pub use scenario::{parse_scenario, parse_scenarios, serialize_scenario, ParamValue, Scenario, ScenarioError, Sweep};

use std::path::PathBuf;
use thiserror::Error;

use crate::error::ModelError;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),

    #[error("scenario `{scenario}`: {source}")]
    Model {
        scenario: String,
        #[source]
        source: ModelError,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Output(#[from] output::OutputError),
}

impl RunError {
    /// 1 for invalid input, 2 for failures while running a valid scenario.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Scenario(_) => 1,
            _ => 2,
        }
    }
}
