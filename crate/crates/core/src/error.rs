use thiserror::Error;

/// Errors reported by every fallible operation in the crate.
///
/// Numeric values are carried as display strings so the error type does not
/// depend on the active field.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by zero while evaluating {0}")]
    DivisionByZero(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular matrix: rank deficiency detected at pivot stage {stage}")]
    Singular { stage: usize },

    #[error("the {regime} regime needs a transcendental field; exact rationals cannot represent sinh")]
    TranscendentalInExactField { regime: &'static str },

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("pole collision: {what} (parameters {a} and {b})")]
    PoleCollision { what: String, a: String, b: String },

    #[error("coinciding parameters in {set}: {value}")]
    CoincidingParameters { set: &'static str, value: String },

    #[error("invalid occupation set: {0}")]
    InvalidOccupation(String),

    #[error("parameter sets of unequal size ({left} vs {right})")]
    SizeMismatch { left: usize, right: usize },

    #[error("M = {m} exceeds chain length N = {n}")]
    TooManyParticles { m: usize, n: usize },

    #[error("roots are off-shell: Bethe residuals {residuals:?}")]
    OffShell { residuals: Vec<String> },

    #[error("Newton iteration did not converge after {iterations} iterations (seed {seed})")]
    NonConvergence { iterations: usize, seed: String },

    #[error("two roots collapsed below separation {separation:e}")]
    RootCollapse { separation: f64 },

    #[error("vanishing f-hat entry for occupation {occupation}: c~(xi_{a} - xi_{b}) = 0")]
    VanishingNormalization { occupation: String, a: usize, b: usize },

    #[error("cannot parse scalar {0:?}")]
    Parse(String),

    #[error("fixture bounds too tight: no valid chain after {attempts} attempts")]
    FixtureBounds { attempts: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
