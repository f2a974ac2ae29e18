use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("base must be at least 2, got {0}")]
    InvalidBase(u64),
    #[error("digit out of range for base {base}")]
    InvalidDigit { base: u64 },
    #[error("digit vector has a leading zero")]
    LeadingZeroDigit,
    #[error("direct evaluation needs {cost} terms, budget is {budget}")]
    CostBudget { cost: u128, budget: u128 },
    #[error("{what}: {value} is not a divisor of g = {g}")]
    NotADivisor {
        what: &'static str,
        value: u64,
        g: u64,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("k g^delta must divide g^lambda (k = {k}, delta = {delta}, lambda = {lambda})")]
    ModulusNotDividing { k: u64, delta: u32, lambda: u32 },
    #[error("g = {g} divides k = {k}")]
    BaseDividesK { g: u64, k: u64 },
    #[error("{n} exceeds the sieve limit {limit}")]
    BeyondSieveLimit { n: u64, limit: u64 },
    #[error("sieve limit {limit} exceeds the memory budget of {budget} entries")]
    SieveBudget { limit: u64, budget: u64 },
    #[error("alpha = {0} is an integer")]
    IntegerAlpha(f64),
    #[error("degenerate input: min_i ||g^i (g^2-1) alpha|| vanishes for alpha = {0}")]
    DegenerateAlpha(f64),
    #[error("unknown seed family `{0}`")]
    UnknownSeedFamily(String),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("empty parameter grid")]
    EmptyGrid,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
