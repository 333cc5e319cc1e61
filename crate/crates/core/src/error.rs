use thiserror::Error;

use crate::shift::Symbol;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("symbol {symbol} is outside the alphabet of size {size}")]
    SymbolOutOfRange { symbol: Symbol, size: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: need {needed} symbols, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("enumeration of {count} cylinders exceeds the budget of {budget}")]
    Budget { count: u128, budget: u128 },

    #[error("truncation index {index} out of range (schedule has {len} entries)")]
    NoSuchTruncation { index: usize, len: usize },

    #[error("truncation of size {size} is not primitive; run check_primitive first")]
    NotPrimitive { size: usize },

    #[error("power iteration did not converge after {iterations} iterations (gap {gap:e})")]
    NoConvergence { iterations: usize, gap: f64 },

    #[error("total mass {mass} is below the required 1 - delta = {required}")]
    InsufficientMass { mass: f64, required: f64 },

    #[error("measure is not in M_T(tau): {0}")]
    NotIntegrable(String),

    #[error("potential undefined on word {0:?}")]
    UndefinedPotential(Vec<Symbol>),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
