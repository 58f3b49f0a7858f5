use thiserror::Error;

/// Errors raised anywhere in the wave / spectrum / evolution pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("no sign change on bracket [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no standing wave: {0}")]
    Existence(String),

    #[error("step size underflow at t = {t} (h = {h:e})")]
    Stiffness { t: f64, h: f64 },

    #[error("invalid usage: {0}")]
    Usage(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Process exit code used by the `waves` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Existence(_) | Error::Bracket { .. } | Error::Usage(_) => 2,
            Error::Dimension { .. } | Error::Stiffness { .. } | Error::Numerical(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn existence(msg: impl Into<String>) -> Error {
    Error::Existence(msg.into())
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
