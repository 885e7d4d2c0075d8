use quso::error::QusoError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] QusoError),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: QusoError,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    pub fn context(context: impl Into<String>) -> impl FnOnce(QusoError) -> CliError {
        let context = context.into();
        move |source| CliError::Context { context, source }
    }

    /// 2 for configuration problems, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) | CliError::Context { source: e, .. } => match e {
                QusoError::InvalidNetwork(_)
                | QusoError::InvalidArgument(_)
                | QusoError::ConfigurationLength { .. }
                | QusoError::ResourceLimit(_)
                | QusoError::Json(_) => 2,
                QusoError::NoConvergence { .. } | QusoError::NonFinite(_) => 3,
                _ => 1,
            },
            _ => 1,
        }
    }
}
