use thiserror::Error;

/// Errors raised by the arithmetic, annulus, curve and lifting layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("root not representable: {0} (enlarge the conductor N)")]
    RootNotRepresentable(String),
    #[error("leading exponent {exponent} is not divisible by {q}")]
    ExponentNotDivisible { exponent: i64, q: u32 },
    #[error("no dominant term: {0}")]
    NoDominantTerm(String),
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("iteration did not contract after {rounds} rounds (gap {gap})")]
    IterationDivergence { rounds: usize, gap: String },
    #[error("malformed form: {0}")]
    MalformedForm(String),
    #[error("not an n-th power: {0}")]
    NotAnNthPower(String),
    #[error("explicit form required: {0}")]
    ExplicitFormRequired(String),
    #[error("malformed datum: {0}")]
    MalformedDatum(String),
    #[error("inconsistent levels on {edge}: {detail}")]
    InconsistentLevels { edge: String, detail: String },
    #[error("enumeration too large: {0} tuples")]
    TooLarge(u128),
    #[error("no realizable root tuple at {vertex}: {table}")]
    NoRealizableRoots { vertex: String, table: String },
    #[error("gluing mismatch on {edge}: {residual}")]
    GluingMismatch { edge: String, residual: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), message: message.into() }
    }
}
