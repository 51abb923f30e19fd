use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("instance has no `{0}` section")]
    MissingSection(&'static str),
    #[error("bad shape: {0}")]
    BadShape(String),
    #[error("{context}: {source}")]
    Core {
        context: &'static str,
        #[source]
        source: krein_core::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        CliError::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn core(context: &'static str) -> impl FnOnce(krein_core::Error) -> Self {
        move |source| CliError::Core { context, source }
    }

    /// Process exit code: 1 for input problems, 2 when the mathematics says no,
    /// 3 when two independent computations disagree.
    pub fn exit_code(&self) -> i32 {
        use krein_core::Error as E;
        match self {
            CliError::Core { source, .. } => match source {
                E::NoExtension | E::NotSolvable { .. } => 2,
                E::OracleMismatch { .. } | E::RangeIdentityViolated { .. } | E::RouteMismatch { .. } => 3,
                _ => 1,
            },
            _ => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
