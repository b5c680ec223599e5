//! Reproducible experiments on spectra of Gaussian-field matrices.
//!
//! A scenario is described by a [`ScenarioConfig`]; [`run_scenario`]
//! executes it and returns a [`RunManifest`] that is also written to disk
//! together with CSV views produced by [`emit_plot_data`].

pub mod config;
pub mod manifest;
pub mod scenarios;

pub use config::{list_scenarios, scenario_info, ScenarioConfig, ScenarioId, ScenarioInfo, Tolerances};
pub use manifest::{emit_plot_data, PlotKind, RunManifest, RunStatus};
pub use scenarios::run_scenario;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("numerical failure: {0}")]
    Numeric(#[from] freelab_core::Error),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl RunError {
    /// Process exit code. Output failures count as configuration errors
    /// since they stem from the output directory.
    pub fn code(&self) -> i32 {
        match self {
            RunError::Validation(_) | RunError::NotFound(_) | RunError::Io(_) => 2,
            RunError::Numeric(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Validation(_) => "validation",
            RunError::NotFound(_) => "not_found",
            RunError::Numeric(_) => "numeric",
            RunError::Io(_) => "io",
        }
    }
}
