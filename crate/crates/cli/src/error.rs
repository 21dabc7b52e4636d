use std::path::PathBuf;

/// Errors of the command line layer, each with its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("stage ({k},{i}): {source}")]
    Stage {
        k: usize,
        i: usize,
        #[source]
        source: corrugate::Error,
    },
    #[error(transparent)]
    Core(#[from] corrugate::Error),
    #[error("checksum mismatch in {}: {file}", dir.display())]
    Checksum { dir: PathBuf, file: String },
    #[error("missing artifacts in {}: {hint}", dir.display())]
    MissingArtifacts { dir: PathBuf, hint: String },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 0 success, 1 verification failure, 2 configuration error, 3 numeric error.
    pub fn exit_code(&self) -> i32 {
        use corrugate::Error as E;
        let core = |e: &E| match e {
            E::Config(_) | E::Format(_) | E::Io(_) => 2,
            _ => 3,
        };
        match self {
            CliError::Verification(_) | CliError::Checksum { .. } => 1,
            CliError::Config(_) | CliError::MissingArtifacts { .. } | CliError::Io { .. } | CliError::Csv(_) => 2,
            CliError::Stage { source, .. } => core(source),
            CliError::Core(e) => core(e),
        }
    }
}
