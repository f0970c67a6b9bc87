//! Error type shared by every numerical stage.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("range escape in {context}: majorant range {range:.4e} exceeds slack {slack}")]
    RangeEscape {
        context: String,
        range: f64,
        slack: f64,
    },
    #[error("derivative {derivative:.3e} at base point is below the floor {floor:.1e}")]
    CriticalAtBase { derivative: f64, floor: f64 },
    #[error("rescaling factor {scale:.3e} is degenerate")]
    ZeroScale { scale: f64 },
    #[error("input {value} is rational with denominator {denominator}")]
    RationalInput { value: f64, denominator: u64 },
    #[error("continued-fraction prefix has {available} quotients, {needed} needed")]
    InsufficientPrefix { needed: usize, available: usize },
    #[error("malformed multi-index: {0}")]
    MalformedWord(String),
    #[error("linearizer stalled at residual {residual:.3e} after {iterations} iterations")]
    LinearizerDivergence { residual: f64, iterations: usize },
    #[error("no critical point within radius {radius}")]
    NoCriticalPoint { radius: f64 },
    #[error("{count} critical points within radius {radius}")]
    MultipleCriticalPoints { count: i64, radius: f64 },
    #[error("Newton stalled in {context} at residual {residual:.3e}")]
    NewtonStall { context: String, residual: f64 },
    #[error("seeds converged to distinct solutions {distance:.3e} apart")]
    NonUnique { distance: f64 },
    #[error("Newton matrix condition estimate {condition:.3e} too large")]
    IllConditioned { condition: f64 },
    #[error("coefficient of modulus {modulus:.3e} exceeds the ceiling")]
    Overflow { modulus: f64 },
    #[error("incompatible operands: {0}")]
    Incompatible(String),
    #[error("column {column} of the differential failed: {message}")]
    ColumnFailed { column: usize, message: String },
    #[error("spectra do not match: unmatched {unmatched:?}")]
    SpectrumMismatch { unmatched: Vec<[f64; 2]> },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
