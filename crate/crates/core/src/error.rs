use thiserror::Error;

/// Why a cyclotomic place had to be skipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BadPlaceReason {
    /// The common denominator of the system vanishes modulo `Φ_ℓ`.
    Denominator,
    /// The reduced matrix is not invertible.
    Determinant,
    /// A gauge or auxiliary matrix does not reduce.
    Auxiliary,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("denominator vanishes modulo the cyclotomic polynomial of order {0}")]
    BadDenominator(u64),
    #[error("argument must be nonzero")]
    ZeroArgument,
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("gauge matrix is singular")]
    SingularGauge,
    #[error("rank mismatch: {0}")]
    RankMismatch(String),
    #[error("bad place at order {order} ({reason:?})")]
    BadPlace { order: u64, reason: BadPlaceReason },
    #[error("no shearing within window {0} makes the system regular at the origin")]
    ShearingFailed(u32),
    #[error("matrix is singular at the origin")]
    SingularAtZero,
    #[error("system is not normalized (A1(0) must be the identity)")]
    NotNormalized,
    #[error("resonant exponents: {0}")]
    Resonant(String),
    #[error("singular linear system at degree {0}")]
    SingularLinearSolve(usize),
    #[error("system not prepared for numeric evaluation: {0}")]
    NotPrepared(String),
    #[error("|q| must exceed 1 (got {0})")]
    UnitModulus(f64),
    #[error("evaluation point too close to a pole")]
    NearPole,
    #[error("infinite product did not converge within {0} factors")]
    NoConvergence(usize),
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("system matrix has zero determinant")]
    ZeroDeterminant,
    #[error("leading coefficient of the scalar equation is zero")]
    ZeroLeadingCoefficient,
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
