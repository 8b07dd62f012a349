use std::path::PathBuf;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const DATA: i32 = 3;
    pub const INFEASIBLE: i32 = 4;
    pub const INTERNAL: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] fraudlab_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Data { path: PathBuf, message: String },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use fraudlab_core::Error as C;
        match self {
            Error::Usage(_) => exit::USAGE,
            Error::Io { .. } | Error::Data { .. } => exit::DATA,
            Error::Context { source, .. } => source.exit_code(),
            Error::Internal(_) => exit::INTERNAL,
            Error::Core(e) => match e {
                C::InvalidParameter { .. } => exit::USAGE,
                C::Infeasible { .. } => exit::INFEASIBLE,
                C::Schema(_)
                | C::Parse { .. }
                | C::Validation { .. }
                | C::EmptyDataset
                | C::DimensionMismatch { .. }
                | C::Precondition(_) => exit::DATA,
                C::Diverged(_) | C::Leakage(_) => exit::INTERNAL,
            },
        }
    }

    /// The innermost core error, if any.
    pub fn core(&self) -> Option<&fraudlab_core::Error> {
        match self {
            Error::Core(e) => Some(e),
            Error::Context { source, .. } => source.core(),
            _ => None,
        }
    }
}

/// Adds a description of the failing step to an error.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T>;
}

impl<T, E: Into<Error>> Context<T> for std::result::Result<T, E> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| Error::Context {
            context: what(),
            source: Box::new(e.into()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_kind() {
        let infeasible = Error::from(fraudlab_core::Error::Infeasible {
            reason: "r".into(),
            remedy: "m".into(),
        });
        assert_eq!(infeasible.exit_code(), exit::INFEASIBLE);
        let wrapped: Result<()> = Err(infeasible).context(|| "experiment hybrid".into());
        let wrapped = wrapped.unwrap_err();
        assert_eq!(wrapped.exit_code(), exit::INFEASIBLE);
        assert!(wrapped
            .to_string()
            .starts_with("experiment hybrid: infeasible plan"));
        assert_eq!(Error::Usage("x".into()).exit_code(), exit::USAGE);
        assert_eq!(
            Error::from(fraudlab_core::Error::EmptyDataset).exit_code(),
            exit::DATA
        );
    }
}
