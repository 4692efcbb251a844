use thiserror::Error;

/// Errors raised by the arithmetic, census and experiment layers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid modulus {0}: expected an odd prime")]
    InvalidModulus(u64),

    #[error("prime {0} is not supported: primes 2 and 3 are rejected, p must be >= 5")]
    UnsupportedPrime(u64),

    #[error("curve y^2 = x^3 + {a}x + {b} is singular modulo {modulus}")]
    SingularCurve { a: i128, b: i128, modulus: u64 },

    #[error("Hensel lifting failed: {0}")]
    HenselFailure(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("p-adic precision exhausted")]
    PrecisionExhausted,

    #[error("division by exact zero")]
    DivisionByZero,

    #[error("mismatched primes in p-adic operation ({0} vs {1})")]
    PrimeMismatch(u64, u64),

    #[error("bad reduction: p = {0} divides the discriminant")]
    BadReduction(u64),

    #[error("point has non-unit y coordinate modulo {0}")]
    UnsupportedPoint(u64),

    #[error("p-adic order oracle failed at p = {p} after escalating to precision {precision}")]
    OracleFailure { p: u64, precision: u32 },

    #[error("invalid discriminant {0}: must be negative and congruent to 0 or 1 mod 4")]
    InvalidDiscriminant(i64),

    #[error("census integrity failure at p = {p}: {detail}")]
    CensusIntegrity { p: u64, detail: String },

    #[error("no census record for p = {0}")]
    MissingCensus(u64),

    #[error("out of scope: {0}")]
    OutOfScope(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("table regression failure at p = {p}: computed {computed}, published {published}")]
    Regression {
        p: u64,
        computed: String,
        published: String,
    },

    #[error("cache i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
