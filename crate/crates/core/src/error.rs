use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown molecule `{name}`; available: {}", available.join(", "))]
    UnknownMolecule { name: String, available: Vec<String> },

    #[error("molecule `{name}` has no polarizability; supply `alpha_A3` in the configuration")]
    MissingPolarizability { name: String },

    /// A Fourier spectrum is too short to represent its grating.
    #[error("truncation error: {0}")]
    Truncation(String),

    /// A quadrature or averaging scheme failed to reach its tolerance.
    #[error("numerical non-convergence: {0}")]
    Convergence(String),

    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("invalid value for `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerical machinery rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Truncation(_) | Error::Convergence(_) | Error::Fit(_))
    }
}
