use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NonPrimeModulus(u64),
    #[error("q = {q} is not congruent to 1 mod r = {r}")]
    CongruenceViolation { q: u64, r: u32 },
    #[error("cover order r = {0} must be at least 2")]
    DegenerateOrder(u32),
    #[error("field size {q} exceeds the discrete-log table cap {cap}")]
    FieldTooLarge { q: u64, cap: u64 },
    #[error("division by zero in F_q")]
    DivisionByZero,
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("zero polynomial where a nonzero one is required")]
    ZeroPolynomial,
    #[error("conductor mismatch: {0} vs {1}")]
    ConductorMismatch(u32, u32),
    #[error("{d} does not divide {r}")]
    NotADivisor { d: u32, r: u32 },
    #[error("{j} is not coprime to {r}")]
    NotCoprime { j: u32, r: u32 },
    #[error("character order {d} does not divide q - 1 = {q_minus_one}")]
    OrderNotDividing { d: u32, q_minus_one: u64 },
    #[error("genus numerator {0} is odd")]
    NonIntegralGenus(i64),
    #[error("genus would be negative ({0})")]
    NegativeGenus(i64),
    #[error("family is empty")]
    EmptyFamily,
    #[error("rejection sampling gave up after {0} attempts")]
    RejectionBudgetExceeded(u64),
    #[error("invalid family member: {0}")]
    InvalidMember(String),
    #[error("character-sum point count is not a rational integer: {0}")]
    NonIntegralCount(String),
    #[error("enumeration size {size} exceeds budget {budget}")]
    BudgetExceeded { size: u128, budget: u128 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("site distribution does not sum to one: {0}")]
    NormalizationFailure(String),
    #[error("marginal mismatch: {0}")]
    MarginalMismatch(String),
    #[error("conditional law violated: {0}")]
    ConditionalMismatch(String),
    #[error("key spaces do not match: {0}")]
    KeyspaceMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
