use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("read past valid truncation: requested exponent {requested}, valid below {bound}")]
    PastTruncation { requested: String, bound: String },
    #[error("incompatible prefactors: {0}")]
    Prefactor(String),
    #[error("unsupported Eisenstein weight {0}")]
    UnsupportedWeight(i64),
    #[error("eta quotient scale must be positive, got {0}")]
    BadScale(String),
    #[error("non-unital base: leading coefficient must be 1")]
    NonUnital,
    #[error("composition diverges at cusp: inner series must have positive leading exponent")]
    CompositionDiverges,
    #[error("exponent trace mismatch: expected {expected}, got {got}")]
    TraceMismatch { expected: String, got: String },
    #[error("logarithmic case unsupported: exponents {0} and {1} coincide mod Z")]
    Logarithmic(String, String),
    #[error("unsupported rank {0}")]
    UnsupportedRank(usize),
    #[error("resonant exponent: Q0(e+{0}) vanishes")]
    Resonant(usize),
    #[error("exponent {0} is not a root of the indicial polynomial")]
    NotARoot(String),
    #[error("Pochhammer zero in denominator at index {0}")]
    PochhammerPole(usize),
    #[error("gamma pole at {0}")]
    GammaPole(String),
    #[error("degenerate parameter: {0}")]
    Degenerate(String),
    #[error("not extremal: k1 = {0}")]
    NotExtremal(String),
    #[error("Verlinde denominator vanishes at column {0}")]
    VerlindeDenominator(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("insufficient truncation: {0}")]
    InsufficientTruncation(String),
    #[error("unknown instance {0}")]
    UnknownInstance(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("scan budget exhausted after {0} tuples")]
    Budget(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
