use std::path::PathBuf;

use thinlab_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: CoreError,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for bad input (config, files, ill-posed problems), 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Io { .. } => 2,
            CliError::Core { source, .. } => match source {
                CoreError::NonPositiveProfile { .. }
                | CoreError::EndpointViolation { .. }
                | CoreError::InvalidDescriptor(_)
                | CoreError::EllipticityViolation { .. }
                | CoreError::InvalidArgument(_) => 2,
                _ => 3,
            },
        }
    }
}

pub(crate) trait Context<T> {
    fn ctx(self, context: impl FnOnce() -> String) -> Result<T, CliError>;

    fn at(self, sigma: f64) -> Result<T, CliError>
    where
        Self: Sized,
    {
        self.ctx(|| format!("sigma = {sigma}"))
    }
}

impl<T> Context<T> for Result<T, CoreError> {
    fn ctx(self, context: impl FnOnce() -> String) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core {
            context: context(),
            source,
        })
    }
}
