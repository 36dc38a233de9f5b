use thiserror::Error;

/// Error type shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {0} out of supported range 2..=6")]
    DimensionOutOfRange(usize),

    #[error("derivative order {order} out of range 1..={max}")]
    DerivativeOrder { order: usize, max: usize },

    #[error("eps {0} out of range (0, 1)")]
    EpsOutOfRange(f64),

    #[error("tolerance {0} must be positive")]
    NonPositiveTol(f64),

    #[error("interval [{0}, {1}] is not a nonempty subinterval of [0, 1]")]
    BadInterval(f64, f64),

    #[error("invalid cascade parameters: {0}")]
    InvalidCascadeParams(String),

    #[error("level {level} out of range (cascade has levels 0..={max})")]
    LevelOutOfRange { level: usize, max: usize },

    #[error("offset {0} is not an interval of the requested level")]
    NotALevelInterval(u64),

    #[error("frequency-cell variant requires d = 3, got d = {0}")]
    VariantDimensionMismatch(usize),

    #[error("invalid frequency-cell regime: {0}")]
    InvalidRegime(String),

    #[error("anchor parallelotope has a singular constraint matrix")]
    SingularAnchor,

    #[error("level {0} has no intervals")]
    EmptyLevel(usize),

    #[error("degenerate fit: need at least 2 annuli, got {0}")]
    DegenerateFit(usize),

    #[error("q = {0} out of range [1, inf]")]
    BadLebesgueExponent(f64),

    #[error("alpha = {0} out of range (0, 1]")]
    AlphaOutOfRange(f64),

    #[error("cascade parse error: {0}")]
    CascadeParse(String),

    #[error("config error:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
