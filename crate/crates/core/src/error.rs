use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Model parameters outside their admissible domain.
    #[error("parameter domain error: {0}")]
    ParameterDomain(String),

    /// Arguments of a rate or solver outside the function's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Observations inconsistent with the requested statistic.
    #[error("data error: {0}")]
    Data(String),

    /// Data for which a statistic is undefined (e.g. zero denominators).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// Incompatible combination of arguments.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("stability error: {0}")]
    Stability(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("linear program is {0}")]
    Lp(crate::lp::LpStatus),

    #[error("trial {trial} at T={horizon}: {source}")]
    Trial {
        horizon: usize,
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}
