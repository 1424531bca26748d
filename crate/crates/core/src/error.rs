use thiserror::Error;

/// Errors raised by tensor construction and the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("conjugate symmetry violated: max |H[I,J] - conj(H[J,I])| = {max_dev:e}")]
    SymmetryViolation { max_dev: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("invalid index: {0}")]
    InvalidIndex(String),
    #[error("non-finite value in input")]
    NonFinite,
    #[error("inner product has imaginary residue {0:e}")]
    NonRealInner(f64),
    #[error("diagonal basis entry must be real")]
    NonRealDiagonal,
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("tensor is zero")]
    ZeroTensor,
    #[error("term {0} has a zero vector")]
    DegenerateTerm(usize),
    #[error("mode {mode} has dimension 1 but the indices differ there")]
    DimensionTooSmall { mode: usize },
    #[error("rank budget {rmax} exceeds the simultaneous-diagonalization limit {limit}")]
    RankBudgetExceeded { rmax: usize, limit: usize },
    #[error("degenerate slice mixtures: {0}")]
    DegenerateSlices(String),
    #[error("order {0} is too small for this flattening")]
    OrderTooSmall(usize),
    #[error("entry {0} has a nonzero imaginary part")]
    RealityViolation(String),
    #[error("tensor is not real Hermitian decomposable: {0}")]
    NotRealDecomposable(String),
    #[error("tensor shape must be [2,2]")]
    NotShape22,
    #[error("monomial basis of size {size} exceeds the cap {cap}")]
    BasisTooLarge { size: usize, cap: usize },
    #[error("block {mode} of term {term} is not positive semidefinite")]
    BlockNotPsd { term: usize, mode: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
