use std::path::PathBuf;

/// Errors raised by the design, simulation and analysis routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A numeric argument lies outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural parameter (order, arm count, lattice size) is out of range.
    #[error("configuration error: {0}")]
    Config(String),

    /// Inputs are individually valid but inconsistent with each other.
    #[error("input error: {0}")]
    Input(String),

    /// Data is present but degenerate (e.g. zero variance).
    #[error("degenerate data: {0}")]
    Degenerate(String),

    /// A dataset could not be read or parsed.
    #[error("failed to load {path}: {message}")]
    Load { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
