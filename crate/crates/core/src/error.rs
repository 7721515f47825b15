use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed rational {0:?}: expected \"p/q\", an integer, or a finite decimal")]
    Parse(String),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("log coordinate needs a positive ratio, got {0}")]
    NonPositiveRatio(String),
    #[error("{value} lies outside [0, 1/2]")]
    OutOfUnitHalf { value: String },
    #[error("partial quotient {index} is {value}; quotients must be positive integers")]
    BadQuotient { index: usize, value: String },
    #[error("index {index} out of range {lo}..={hi}")]
    IndexOutOfRange { index: i64, lo: i64, hi: i64 },
    #[error("trajectory of the zero vector is undefined")]
    ZeroPoint,
    #[error("degenerate trajectory branch: {0}")]
    DegenerateBranch(&'static str),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("abscissa {q} lies outside the constructed range of a truncated graph")]
    OutOfRange { q: String },
    #[error("graph truncated after {} intervals; decoded prefix only", prefix.len())]
    Truncated { prefix: Vec<String> },
    #[error("invalid render configuration: {0}")]
    RenderConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
