use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: a[{axis}] = {a} is not below b[{axis}] = {b}")]
    InvalidDomain { axis: usize, a: f64, b: f64 },

    #[error("grid size N[{axis}] = {n} must be positive and even")]
    InvalidGridSize { axis: usize, n: usize },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: [usize; 3],
        found: [usize; 3],
    },

    #[error("coordinate {value} on axis {axis} lies outside [{a}, {b})")]
    OutsideDomain {
        axis: usize,
        value: f64,
        a: f64,
        b: f64,
    },

    #[error("invalid NUFFT parameters: {0}")]
    InvalidNufftParams(String),

    #[error("Padé order q = {0} is not supported (only q = 4)")]
    UnsupportedPadeOrder(usize),

    #[error("Padé root selection failed: {0}")]
    PadeRoot(String),

    #[error("vortex direction must be nonzero")]
    ZeroDirection,

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("invalid density thresholds: {0}")]
    InvalidThreshold(String),

    #[error("malformed snapshot: {0}")]
    MalformedSnapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
