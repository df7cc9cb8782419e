use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("cell index {index} out of range for mesh with {len} cells")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("region mask selects no cells")]
    EmptyMask,

    #[error("field length {got} does not match mesh cell count {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("magnetization not unit-norm at cell {cell}: | |m| - 1 | = {deviation:e}")]
    NotUnitNorm { cell: usize, deviation: f64 },

    #[error("{field}: {message}")]
    Validation { field: String, message: String },

    #[error("time step underflow at t = {t:e} s (dt = {dt:e} s): {diagnostic}")]
    Stiffness { t: f64, dt: f64, diagnostic: String },

    #[error("trace error: {0}")]
    Trace(String),

    #[error("indeterminate readout: |<m_z>| = {mz:.3} under the pillar is below 0.5")]
    IndeterminateReadout { mz: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl Error {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidMesh(_) => "invalid_mesh",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::EmptyMask => "empty_mask",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::NotUnitNorm { .. } => "not_unit_norm",
            Error::Validation { .. } => "validation",
            Error::Stiffness { .. } => "stiffness",
            Error::Trace(_) => "trace",
            Error::IndeterminateReadout { .. } => "indeterminate_readout",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}
