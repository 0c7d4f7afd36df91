// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("numerical consistency check failed: {0}")]
    Numerical(String),

    #[error("Fock truncation too small: norm leak {leak:.3e} exceeds {limit:.1e}")]
    Truncation { leak: f64, limit: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) | Error::Io { .. } => 2,
            Error::Eigensolver(_) | Error::Numerical(_) | Error::Truncation { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
