use std::path::PathBuf;

use harvest_core::CoreError;
use harvest_milp::MilpError;
use harvest_service::ServiceError;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RESOURCE_LIMIT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("[{stage}] {source}")]
    Stage {
        stage: &'static str,
        source: Box<CliError>,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Service(#[from] ServiceError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ CliError::Stage { .. } => e,
            e => CliError::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// 1 for bad input, 2 for solver limits, 3 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_VALIDATION,
            CliError::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => {
                EXIT_VALIDATION
            }
            CliError::Io { .. } => EXIT_INTERNAL,
            CliError::Stage { source, .. } => source.exit_code(),
            CliError::Core(e) => core_code(e),
            CliError::Service(ServiceError::Core(e)) => core_code(e),
            CliError::Service(ServiceError::Io(_)) => EXIT_INTERNAL,
            CliError::Service(_) => EXIT_VALIDATION,
        }
    }
}

fn core_code(e: &CoreError) -> i32 {
    match e {
        CoreError::Solver(MilpError::ResourceLimit)
        | CoreError::Solver(MilpError::IterationLimit(_)) => EXIT_RESOURCE_LIMIT,
        CoreError::Solver(_) | CoreError::Io(_) => EXIT_INTERNAL,
        _ => EXIT_VALIDATION,
    }
}

pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T, E: Into<CliError>> StageExt<T> for std::result::Result<T, E> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.into().in_stage(stage))
    }
}
