use std::path::PathBuf;

use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("non-finite value in {signal}")]
    NonFinite { signal: &'static str },

    #[error("{signal} diverged: magnitude {magnitude:.3e} exceeds {limit:.0e}")]
    Divergence {
        signal: &'static str,
        magnitude: f64,
        limit: f64,
    },

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config key `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error("unknown config key `{key}`")]
    UnknownKey { key: String },

    #[error("config line {line}: expected `key=value`, got `{text}`")]
    ConfigSyntax { line: usize, text: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Attach the simulation step at which the error occurred.
    pub(crate) fn at_step(self, step: usize) -> Error {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }

    pub(crate) fn invalid_config(key: &str, reason: impl Into<String>) -> Error {
        Error::InvalidConfig {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}
