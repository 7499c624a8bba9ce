use crate::padic::Valuation;

/// Errors shared by the arithmetic layers and the record/criteria layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),

    #[error("not invertible: operand has valuation {0}")]
    NotInvertible(Valuation),

    #[error("precision underflow: operation needs {needed} digits but only {available} are available")]
    PrecisionUnderflow { needed: u32, available: u32 },

    #[error("cannot prepare: no unit coefficient below the degree cutoff {cutoff}")]
    CannotPrepare { cutoff: usize },

    #[error("zero series at available precision")]
    ZeroSeries,

    #[error("unbounded tail: evaluation at a unit argument of a truncated series")]
    UnboundedTail,

    #[error("Hensel condition violated: ord(h(x0)) = {value_val} is not greater than 2*ord(h'(x0)) = 2*{deriv_val}")]
    HenselCondition {
        value_val: Valuation,
        deriv_val: Valuation,
    },

    #[error("ambiguous multiplicity: all coefficients vanish at the available precision")]
    AmbiguousMultiplicity,

    #[error("leading coefficient is not a unit at the available precision: valuation {0}")]
    AmbiguousLeadingCoefficient(Valuation),

    #[error("record schema violation at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("split condition violated: -{d} is not a nonzero square mod {p}")]
    SplitCondition { p: u64, d: u64 },

    #[error("characteristic data violation: {0}")]
    InvalidChar(String),

    #[error("required data missing: {0}")]
    DataMissing(String),

    #[error("record key mismatch: left is (p={left_p}, d={left_d}), right is (p={right_p}, d={right_d})")]
    KeyMismatch {
        left_p: u64,
        left_d: u64,
        right_p: u64,
        right_d: u64,
    },

    #[error("computer-algebra engine not found at `{0}`")]
    EngineMissing(String),

    #[error("computer-algebra task `{task}` timed out after {seconds}s")]
    EngineTimeout { task: String, seconds: u64 },

    #[error("could not parse engine output for task `{task}`: {message}\nraw output:\n{raw}")]
    ParseFailure {
        task: String,
        message: String,
        raw: String,
    },

    #[error("unsupported engine task: {0}")]
    TaskUnsupported(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
