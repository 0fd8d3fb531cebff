//! Batch driver behind the `harvest` command: runs the pipeline stages over
//! a bundle directory and formats reports.

pub mod config;
pub mod error;
pub mod pipeline;
pub mod report;

pub use config::PipelineConfig;
pub use error::{CliError, Result};
pub use pipeline::{run_pipeline, PipelineOutput, StageRun, Workspace};
