use thiserror::Error;

/// Every failure a library operation can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid context: {0}")]
    InvalidContext(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("zero input")]
    ZeroInput,
    #[error("not a unit")]
    NotAUnit,
    #[error("zero operator")]
    ZeroOperator,
    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(u32, u32),
    #[error("norm overflow: log_p norm {0} exceeds the precision cap")]
    NormOverflow(i64),
    #[error("not invertible: nbar = {nbar}, nk = {nk}")]
    NotInvertible { nbar: usize, nk: usize },
    #[error("zero divisor")]
    ZeroDivisor,
    #[error("dominant coefficient is not t^N times a unit")]
    NonNormalizedLead,
    #[error("completion exceeded the pair budget of {0}")]
    CapExceeded(usize),
    #[error("staircase touches the {0}x{1} box boundary")]
    BoxTooSmall(usize, usize),
    #[error("division basis unavailable")]
    BasisUnavailable,
    #[error("horizon inconclusive at k_max = {0}")]
    HorizonInconclusive(u32),
    #[error("truncation depth {depth} insufficient for level {level}")]
    TruncationInsufficient { depth: u32, level: u32 },
    #[error("out of range: {0}")]
    RangeError(String),
}

impl Error {
    pub(crate) fn precision(what: impl Into<String>) -> Self {
        Error::PrecisionExhausted(what.into())
    }

    /// Short machine-readable tag.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::InvalidContext(_) => "InvalidContext",
            Error::DivisionByZero => "DivisionByZero",
            Error::PrecisionExhausted(_) => "PrecisionExhausted",
            Error::ZeroInput => "ZeroInput",
            Error::NotAUnit => "NotAUnit",
            Error::ZeroOperator => "ZeroOperator",
            Error::LevelMismatch(..) => "LevelMismatch",
            Error::NormOverflow(_) => "NormOverflow",
            Error::NotInvertible { .. } => "NotInvertible",
            Error::ZeroDivisor => "ZeroDivisor",
            Error::NonNormalizedLead => "NonNormalizedLead",
            Error::CapExceeded(_) => "CapExceeded",
            Error::BoxTooSmall(..) => "BoxTooSmall",
            Error::BasisUnavailable => "BasisUnavailable",
            Error::HorizonInconclusive(_) => "HorizonInconclusive",
            Error::TruncationInsufficient { .. } => "TruncationInsufficient",
            Error::RangeError(_) => "RangeError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
