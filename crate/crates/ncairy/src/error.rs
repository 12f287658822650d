use thiserror::Error;

use crate::ncp2::HmGrid;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("overflow risk: {0}")]
    OverflowRisk(String),

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("no convergence: {0}")]
    ConvergenceFailure(String),

    #[error("Picard iteration does not contract from S0 = {s0}")]
    NoContraction { s0: f64 },

    /// The grid carried here is valid for every S above `pole_at`.
    #[error("pole encountered near S = {pole_at}")]
    PoleEncountered { pole_at: f64, grid: Box<HmGrid> },

    #[error("{what} = {value} is outside the covered range [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
