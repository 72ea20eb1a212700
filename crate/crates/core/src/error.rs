use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NonPrime(i64),
    #[error("prime {0} is too large (must fit in 32 bits)")]
    PrimeTooLarge(i64),
    #[error("p = 2 is not supported, the prime must be odd")]
    EvenPrime,
    #[error("invalid precision {0}")]
    BadPrecision(i64),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands live in different p-adic contexts")]
    ContextMismatch,
    #[error("no significant digits left")]
    PrecisionExhausted,
    #[error("zero has no valuation")]
    ZeroHasNoValuation,
    #[error("argument is not a p-adic unit")]
    NotAUnit,
    #[error("argument has valuation {0}, exp_p needs valuation >= 1")]
    OutsideConvergenceDomain(i64),
    #[error("argument is not congruent to 1 mod p")]
    NotAOneUnit,
    #[error("logarithm of zero")]
    ZeroArgument,
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("q depth m = {0} is below 1")]
    DepthTooSmall(i64),
    #[error("q depth m = {depth} is not below the working precision {precision}")]
    DepthExceedsPrecision { depth: i64, precision: u32 },
    #[error("unit part t = {0} of q - 1 is divisible by p")]
    UnitPartDivisible(i64),
    #[error("q^x undefined: v_p(x) = {valuation} with q depth {depth}")]
    ExponentOutOfDomain { valuation: i64, depth: u32 },
    #[error("integrand domain error: {0}")]
    IntegrandDomain(String),
    #[error("sum budget exceeded: {points} summands > {limit}")]
    BudgetExceeded { points: u128, limit: u128 },
    #[error("Riemann sums not stabilized at depth {depth} (stability valuation {stability}, target {target})")]
    NotStabilized { depth: u32, stability: i64, target: i64 },
    #[error("n = {n} exceeds the table bound {bound}")]
    BoundExceeded { n: usize, bound: usize },
    #[error("series did not reach the requested precision within {cap} terms")]
    SeriesBudgetExceeded { cap: usize },
    #[error("x is outside the domain Q_p \\ Z_p compatible with q: {0}")]
    GammaDomain(String),
    #[error("series term {n} has valuation {actual} below its bound {bound}")]
    TermBound { n: usize, actual: i64, bound: i64 },
}
