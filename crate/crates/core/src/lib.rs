//! Hermitian tensors: decompositions, flattenings, real decomposability,
//! eigentuples, positivity certificates and separability.
//!
//! Indices in the public API are 1-based; storage is the row-major `N x N`
//! Hermitian flattening with the last mode varying fastest.

pub mod decomposition;
pub mod error;
pub mod exec;
pub mod flatten;
pub mod io;
pub mod linalg;
pub mod psd_sos;
pub mod real_herm;
pub mod separability;
pub mod spectral;
pub mod tensor;
pub mod tol;

pub use decomposition::{HermitianDecomposition, Term};
pub use error::{Error, Result};
pub use exec::Execution;
pub use linalg::{CMat, SpectralDecomp};
pub use num_complex::Complex64 as C64;
pub use spectral::Field;
pub use tensor::{DenseTensor, HermitianTensor, Shape, VectorTuple};
pub use tol::Tolerances;
