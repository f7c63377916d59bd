use thiserror::Error;

/// Errors raised by the numerical modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid support: {0}")]
    InvalidSupport(String),

    #[error("dictionary Gram matrix is degenerate (minimum eigenvalue {min_eigenvalue:e})")]
    DegenerateSystem { min_eigenvalue: f64 },

    #[error("frequency 2^{v} exceeds the dictionary maximum frequency {max_frequency}")]
    FrequencyOverflow { v: usize, max_frequency: usize },

    #[error("operation requires a {expected} dictionary")]
    UnsupportedDictionary { expected: &'static str },

    #[error("Gram submatrix for support {support:?} is not positive definite")]
    SingularGram { support: Vec<usize> },

    #[error("{count} supports exceed the enumeration cap {cap} and sampling is disabled")]
    CombinatorialOverflow { count: u128, cap: u64 },

    #[error("function has zero norm")]
    ZeroFunction,

    #[error("stage-one point set failed verification after {attempts} attempts")]
    Stage1Failed { attempts: usize },

    #[error("no subsample passed verification ({attempts} stage-one draws, {trials} trials each)")]
    BudgetExhausted { attempts: usize, trials: usize },

    #[error("coefficient grid has {points} points, above the cap {cap}")]
    GridOverflow { points: u64, cap: u64 },

    #[error("entropy sum does not terminate: H({scale}) = {bits} > 0 beyond twice the class radius")]
    NonterminatingSum { scale: f64, bits: f64 },

    #[error("no net element within sup distance {radius:e} at level {level}")]
    NetDeficient { level: i64, radius: f64 },

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("inner minimization stalled: {0}")]
    ConvergenceFailure(String),

    #[error("unknown {kind} '{name}' (known: {known})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        known: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
