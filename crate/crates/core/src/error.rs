use thiserror::Error;

/// Broad classification used for exit codes and reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed or out-of-contract input.
    InvalidInput,
    /// The requested object provably does not exist.
    Nonexistence,
    /// A tolerance-based decision or certification could not be made reliably.
    Numerical,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not in the omega-embedded block pattern (deviation {deviation:.3e})")]
    NotOmegaStructured { deviation: f64 },
    #[error("H is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("H is singular (smallest/largest singular value ratio {ratio:.3e})")]
    SingularForm { ratio: f64 },
    #[error("matrix is not H-selfadjoint (residual {residual:.3e})")]
    NotSelfAdjoint { residual: f64 },
    #[error("invalid block: {0}")]
    InvalidBlock(String),
    #[error("numerical ambiguity: {0}")]
    Ambiguity(String),
    #[error("certification failed for {what}: residual {residual:.3e} exceeds {bound:.3e}")]
    Certification { what: &'static str, residual: f64, bound: f64 },
    #[error("no H-selfadjoint square root exists: {0}")]
    NoSquareRoot(String),
    #[error("kernel target cannot be realized by an H-selfadjoint square root: {0}")]
    KernelUnachievable(String),
    #[error("Gram condition fails: ||Y^[*]Y - X^[*]X|| = {residual:.3e}")]
    GramMismatch { residual: f64 },
    #[error("kernels differ: dim Ker X = {dim_x}, dim Ker Y = {dim_y}, containment residual {residual:.3e}")]
    KernelMismatch { dim_x: usize, dim_y: usize, residual: f64 },
    #[error("signatures differ: {first:?} vs {second:?}")]
    SignatureMismatch { first: (usize, usize), second: (usize, usize) },
    #[error("map is not an isometry on the subspace (residual {residual:.3e})")]
    NotIsometry { residual: f64 },
    #[error("map is singular on the subspace")]
    SingularIsometry,
    #[error("invalid Witt parameters: {0}")]
    InvalidParams(String),
    #[error("no H-polar decomposition: {0}")]
    NoPolarDecomposition(String),
    #[error("instance generation failed: {0}")]
    Generation(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            DimensionMismatch(_) | NotSquare { .. } | NotOmegaStructured { .. } | NotHermitian { .. }
            | SingularForm { .. } | NotSelfAdjoint { .. } | InvalidBlock(_) | InvalidParams(_) => {
                ErrorClass::InvalidInput
            }
            NoSquareRoot(_) | KernelUnachievable(_) | GramMismatch { .. } | KernelMismatch { .. }
            | SignatureMismatch { .. } | NotIsometry { .. } | SingularIsometry
            | NoPolarDecomposition(_) => ErrorClass::Nonexistence,
            Ambiguity(_) | Certification { .. } | Generation(_) => ErrorClass::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
