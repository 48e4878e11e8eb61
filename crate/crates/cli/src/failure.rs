use std::fmt;

use vstates::Error;

/// Process exit codes.
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_GUARD: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;
pub const EXIT_IO: u8 = 1;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn guard(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_GUARD,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERICAL,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let message = err.to_string();
        let code = match err {
            Error::InvalidInput(_) => EXIT_USAGE,
            Error::PreconditionViolated(_)
            | Error::IndexOutOfTable { .. }
            | Error::TableExhausted { .. }
            | Error::NotSimple { .. }
            | Error::BelowThreshold { .. }
            | Error::BoundaryCollision { .. }
            | Error::GuardViolation { .. } => EXIT_GUARD,
            Error::Range(_)
            | Error::NonConvergence { .. }
            | Error::NotAnEigenvalue { .. }
            | Error::NoConvergence { .. }
            | Error::SingularJacobian { .. } => EXIT_NUMERICAL,
        };
        Self { code, message }
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Self {
            code: EXIT_IO,
            message: err.to_string(),
        }
    }
}
