use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("spatial dimension must be 1, 2 or 3 (got {0})")]
    Dimension(usize),

    #[error("period must be positive and finite (got {0})")]
    Period(f64),

    #[error("axis {axis}: point count {points} is not a power of two >= 4")]
    Points { axis: usize, points: usize },

    #[error(
        "axis {axis}: frequency index {needed} does not fit the dealiased band |m| <= {limit}"
    )]
    Band {
        axis: usize,
        needed: i64,
        limit: i64,
    },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("component count mismatch: expected {expected}, got {got}")]
    Components { expected: usize, got: usize },

    #[error("sample array has {got} entries, grid has {expected} points")]
    SampleLength { expected: usize, got: usize },

    #[error("non-finite sample in component {component} at flat index {index}")]
    NonFinite { component: usize, index: usize },

    #[error(
        "corrupted field: imaginary residue {residue:e} (relative) violates Hermitian symmetry"
    )]
    Corrupted { residue: f64 },

    #[error("Lebesgue exponent must lie in [1, inf] (got {0})")]
    Exponent(f64),

    #[error("dealias fraction must lie in (0, 1] (got {0})")]
    Dealias(f64),

    #[error("field is not supported in the required frequency region: {0}")]
    Support(String),

    #[error("invalid initial-data parameters: {0}")]
    InvalidSpec(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("solution became non-finite; last finite state at t = {last_finite_time}")]
    BlowUp { last_finite_time: f64 },
}
