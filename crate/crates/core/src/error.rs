use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("continued fraction holds {available} quotients, {requested} requested")]
    InsufficientDepth { requested: usize, available: usize },
    #[error("input is exactly rational")]
    RationalInput,
    #[error("power-log function with nonzero log exponent has no declared value at q = 1")]
    UndefinedAtOne,
    #[error("q = {0} lies beyond the table and default_zero is false")]
    OutsideTable(u64),
    #[error("sieve limit {limit} exceeds the memory budget {budget}")]
    LimitTooLarge { limit: u64, budget: u64 },
    #[error("zero vector")]
    ZeroVector,
    #[error("dimension {0} exceeds the enumeration cap")]
    DimensionTooLarge(usize),
    #[error("missing parameter `{0}`")]
    MissingParameter(&'static str),
    #[error("zero denominator at checkpoint {0}")]
    ZeroDenominator(u64),
    #[error("{count} arcs before merging exceed the budget {budget}")]
    TooManyArcs { count: u128, budget: u128 },
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("grid of {0} boxes exceeds the indexing budget")]
    GridTooFine(u128),
    #[error("only {0} usable scales; at least 3 are needed")]
    DegenerateFit(usize),
    #[error("transformed radius exceeds 1/2")]
    ArcTooLarge,
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
