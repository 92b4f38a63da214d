//! Errors of the command-line layer and their process exit codes.

use std::path::PathBuf;

use mifht_core::Error;
use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn schema(field: &str, msg: impl std::fmt::Display) -> Self {
        CliError::Schema(format!("field `{field}`: {msg}"))
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 2 schema, 3 geometry, 4 degenerate theta, 5 range violation,
    /// 6 near-singular, 7 convergence, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Io { .. } => 1,
            CliError::Core(e) => match e {
                Error::InvalidArgument(_) | Error::ZeroLambda | Error::NonFinite(_) => 2,
                Error::Overlap(_) | Error::Index { .. } | Error::Domain(_) | Error::Endpoint(_) | Error::Coincidence(_) => 3,
                Error::DegenerateDiagonal(_) | Error::Symmetry(_) => 4,
                Error::Range { .. } | Error::RangeViolation { .. } | Error::RangeExceeded { .. } | Error::SingularData(_) => 5,
                Error::NearSingular { .. } | Error::NonPositiveEigenvalue(_) => 6,
                Error::Convergence(_) => 7,
            },
        }
    }
}

/// Exit code of a run that completed but whose checks did not all pass.
pub const EXIT_CHECK_FAILED: i32 = 1;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_failure_class_has_its_own_code() {
        let code = |e: Error| CliError::from(e).exit_code();
        assert_eq!(CliError::Schema("x".into()).exit_code(), 2);
        assert_eq!(code(Error::Overlap("x".into())), 3);
        assert_eq!(code(Error::DegenerateDiagonal(0)), 4);
        assert_eq!(code(Error::Range { moment: 1.0, tol: 0.0 }), 5);
        assert_eq!(code(Error::RangeViolation { channel: 0, score: 1.0, tol: 0.0 }), 5);
        assert_eq!(code(Error::NearSingular { sigma_min: 0.0, threshold: 1.0 }), 6);
        assert_eq!(code(Error::Convergence("x".into())), 7);
    }
}
