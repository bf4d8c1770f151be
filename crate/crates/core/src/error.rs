use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{stage}: LO at {freq_hz} Hz outside mixer range [{low_hz}, {high_hz}] Hz")]
    RangeViolation {
        stage: String,
        freq_hz: f64,
        low_hz: f64,
        high_hz: f64,
    },

    #[error("no tone within {tolerance_hz} Hz of {freq_hz} Hz")]
    ToneNotFound { freq_hz: f64, tolerance_hz: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no passband: {0}")]
    NoPassband(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("synthesis failed at section {section}: cannot realize Z0e = {z0e:.3} ohm, Z0o = {z0o:.3} ohm")]
    Synthesis { section: usize, z0e: f64, z0o: f64 },

    #[error("planning infeasible: {0}")]
    Planning(String),

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
