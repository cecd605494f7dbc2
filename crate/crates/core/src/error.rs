use num_complex::Complex64;
use thiserror::Error;

/// Every failure mode of the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} lies outside [0, pi]")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported configuration: {0}")]
    UnsupportedConfig(String),

    #[error("non-finite state while integrating at lambda = {lambda}")]
    Overflow { lambda: Complex64 },

    #[error("no eigenvalue found for index n = {n}")]
    MissingRoot { n: i64 },

    #[error("psi is not proportional to phi at lambda = {lambda} (relative residual {residual:e})")]
    NonProportional { lambda: f64, residual: f64 },

    #[error("lambda = {lambda} is not an eigenvalue: {reason}")]
    StaleDatum { lambda: f64, reason: String },

    #[error("lambda = {lambda} is at or near a pole (|Delta| = {delta_abs:e}){}", nearest_suffix(.nearest))]
    Pole {
        lambda: Complex64,
        delta_abs: f64,
        nearest: Option<f64>,
    },

    #[error("spectral data set is empty")]
    EmptyData,

    #[error("grid mismatch: expected {expected} samples, found {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("parameter vector has {found} entries, basis expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn nearest_suffix(nearest: &Option<f64>) -> String {
    match nearest {
        Some(l) => format!("; nearest eigenvalue {l}"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
