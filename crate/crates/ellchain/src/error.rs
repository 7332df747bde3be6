use std::fmt;

use crate::C64;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A theta function vanished in a denominator (argument on the period lattice).
    #[error("pole: {what} at {}", fmt_c(*.at))]
    Pole { what: String, at: C64 },
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// A verification residual exceeded its tolerance where the caller required it not to.
    #[error("residual {name} = {value:e} exceeds tolerance {tolerance:e}")]
    Residual {
        name: String,
        value: f64,
        tolerance: f64,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by poles or degenerate parameters rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Pole { .. } | Error::Degenerate(_))
    }
}

fn fmt_c(z: C64) -> impl fmt::Display {
    struct D(C64);
    impl fmt::Display for D {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write!(f, "{}{:+}i", self.0.re, self.0.im)
        }
    }
    D(z)
}

pub type Result<T> = std::result::Result<T, Error>;
