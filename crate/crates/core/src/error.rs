use galimage_arith::ArithError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("not normalized: a_1 = {0}, expected 1")]
    NotNormalized(String),
    #[error("r_{p} = a_{p}^2/eps({p}) is not integral")]
    NonIntegralR { p: u64 },
    #[error("{p} divides the level {level}")]
    PrimeDividesLevel { p: u64, level: u64 },
    #[error("coefficient a_{0} is not available")]
    MissingCoefficient(u64),
    #[error("insufficient coefficients: {0}")]
    InsufficientCoefficients(String),
    #[error("non-integral coefficient at q^{0} after halving")]
    NonIntegralCoefficient(usize),
    #[error("unsupported nebentypus: {0}")]
    UnsupportedNebentypus(String),
    #[error("Hecke relation violated: {0}")]
    HeckeViolation(String),
    #[error("non-unit argument {a} for a character modulo {modulus}")]
    NonUnitArgument { a: i64, modulus: u64 },
    #[error("invalid choice: {0}")]
    InvalidChoice(String),
    #[error("exhausted coefficient supply before generating (Z/{0}Z)^x")]
    GeneratorsExhausted(u64),
    #[error("unknown builtin form {0:?} (known: level27, level160)")]
    UnknownBuiltin(String),
    #[error("malformed label {0:?}: expected N.k.c.x")]
    MalformedLabel(String),
    #[error("offline mode: network access disabled; use the shipped fixture {fixture}")]
    Offline { fixture: String },
    #[error("HTTP request to {url} failed: {message}")]
    Http { url: String, message: String },
    #[error("unexpected response from {url}: {message}; payload starts {excerpt:?}")]
    BadPayload {
        url: String,
        message: String,
        excerpt: String,
    },
    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;

impl CoreError {
    /// Short machine-readable kind, used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            CoreError::Arith(_) => "arithmetic",
            CoreError::Schema(_) => "schema",
            CoreError::NotNormalized(_) => "not-normalized",
            CoreError::NonIntegralR { .. } => "non-integral-r",
            CoreError::PrimeDividesLevel { .. } => "prime-divides-level",
            CoreError::MissingCoefficient(_) => "missing-coefficient",
            CoreError::InsufficientCoefficients(_) => "insufficient-coefficients",
            CoreError::NonIntegralCoefficient(_) => "non-integral-coefficient",
            CoreError::UnsupportedNebentypus(_) => "unsupported-nebentypus",
            CoreError::HeckeViolation(_) => "hecke-violation",
            CoreError::NonUnitArgument { .. } => "non-unit-argument",
            CoreError::InvalidChoice(_) => "invalid-choice",
            CoreError::GeneratorsExhausted(_) => "generators-exhausted",
            CoreError::UnknownBuiltin(_) => "unknown-builtin",
            CoreError::MalformedLabel(_) => "malformed-label",
            CoreError::Offline { .. } => "offline",
            CoreError::Http { .. } => "http",
            CoreError::BadPayload { .. } => "bad-payload",
            CoreError::Io { .. } => "io",
            CoreError::Json(_) => "json",
        }
    }
}
