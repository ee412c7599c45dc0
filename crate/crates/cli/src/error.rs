use kwsolve::KwError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Kw(#[from] KwError),

    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_UNSOLVABLE: i32 = 4;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Kw(
                KwError::LinearNotConverged { .. }
                | KwError::SingularOperator(_)
                | KwError::CannotCertify(_)
                | KwError::LineSearchStall { .. }
                | KwError::Diverged { .. }
                | KwError::ContinuationFailed { .. },
            ) => EXIT_NOT_CONVERGED,
            _ => EXIT_INVALID,
        }
    }

    pub fn offset(&self) -> Option<usize> {
        match self {
            CliError::Kw(e) => e.offset(),
            _ => None,
        }
    }
}
