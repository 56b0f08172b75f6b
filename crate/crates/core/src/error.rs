use thiserror::Error;

/// Errors raised by the library. Mathematical *verdicts* (a relation that
/// fails, a section that is not compatible) are reported through the
/// report types of each module, not through this enum.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("standard polynomial of degree {degree} exceeds the supported maximum {max}")]
    DegreeTooLarge { degree: usize, max: usize },

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("loop undersampled: det phase step {step:.6} rad at sample {index} (limit pi/2)")]
    Undersampled { index: usize, step: f64 },

    #[error("inconsistent loop: accumulated det phase is {turns:.6} turns, not near an integer")]
    InconsistentLoop { turns: f64 },

    #[error("singular sample at index {0}: determinant vanishes")]
    SingularSample(usize),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("base mismatch: {0}")]
    BaseMismatch(String),

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("missing generator `{0}` in representation")]
    MissingGenerator(String),

    #[error("generator `{0}` is not declared by the presentation")]
    UnknownGenerator(String),

    #[error("certificate mismatch: {0}")]
    CertificateMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
