use thiserror::Error;

/// Errors raised by model construction, tests and experiments.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid density: minimum {floor} of p on cell [{cell_lo}, {cell_hi}] is negative")]
    InvalidDensity { floor: f64, cell_lo: f64, cell_hi: f64 },

    #[error("CDF is not invertible: density floor is {floor}")]
    NonInvertible { floor: f64 },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("boundary case: {0}")]
    Boundary(String),

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("invalid model descriptor: {0}")]
    Descriptor(String),

    #[error("at n = {n}: {source}")]
    AtSampleSize { n: usize, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
