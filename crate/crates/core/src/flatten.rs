//! Flattenings of Hermitian tensors and the rank bounds they give.

use num_complex::Complex64 as C64;

use crate::decomposition::HermitianDecomposition;
use crate::error::{Error, Result};
use crate::linalg::{matrix_rank, CMat};
use crate::tensor::{HermitianTensor, Shape};
use crate::tol::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlatSource {
    HermitianM,
    KroneckerK,
    CubicSlice,
}

/// A flattening matrix tagged with the map that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatMatrix {
    pub matrix: CMat,
    pub source: FlatSource,
}

/// The `N x N` Hermitian flattening. With the storage layout this is a copy.
pub fn hermitian_flatten(h: &HermitianTensor) -> FlatMatrix {
    FlatMatrix {
        matrix: h.to_matrix(),
        source: FlatSource::HermitianM,
    }
}

pub fn hermitian_unflatten(mat: &CMat, shape: &Shape, tol: &Tolerances) -> Result<HermitianTensor> {
    HermitianTensor::from_matrix(shape.clone(), mat, tol.sym_tol)
}

/// Canonical Kronecker flattening.
///
/// Splitting each multi-index as `(a, b)` with `b` the last-mode index,
/// entry `((a, a'), (b, b'))` is `H[(a, b), (a', b')]`. A rank-1 term maps to
/// `lambda * Z x conj(Z)` with `Z = (u1 x ... x u_{m-1}) u_m^T`.
pub fn kronecker_flatten(h: &HermitianTensor) -> Result<FlatMatrix> {
    let m = h.shape().order();
    if m < 2 {
        return Err(Error::OrderTooSmall(m));
    }
    let d2 = h.dims()[m - 1];
    let d1 = h.size() / d2;
    let matrix = CMat::from_fn(d1 * d1, d2 * d2, |row, col| {
        let (a, ap) = (row / d1, row % d1);
        let (b, bp) = (col / d2, col % d2);
        h.at(a * d2 + b, ap * d2 + bp)
    });
    Ok(FlatMatrix {
        matrix,
        source: FlatSource::KroneckerK,
    })
}

/// Cubic flattening with dimensions `(N, N / N3, N3)`, `N3` the smallest mode.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicTensor {
    dims: (usize, usize, usize),
    data: Vec<C64>,
    /// Mode order (0-based) applied before flattening; the last entry is the
    /// mode carried by the third index.
    pub mode_order: Vec<usize>,
}

impl CubicTensor {
    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn get(&self, a: usize, b: usize, l: usize) -> C64 {
        let (_, n2, n3) = self.dims;
        self.data[(a * n2 + b) * n3 + l]
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// Frontal slice `T[:, :, l]`.
    pub fn slice(&self, l: usize) -> CMat {
        let (n1, n2, _) = self.dims;
        CMat::from_fn(n1, n2, |a, b| self.get(a, b, l))
    }
}

/// Index of the mode moved last by [`cubic_flatten`]: the smallest
/// dimension, ties going to the lowest mode index.
pub fn cubic_last_mode(shape: &Shape) -> usize {
    let dims = shape.dims();
    (0..dims.len()).min_by_key(|&k| (dims[k], k)).unwrap_or(0)
}

/// `T[I, J', l] = H[I, (J', l)]` after moving the smallest mode last.
/// A rank-1 term maps to `(u1 x ... x um) x conj(u1 x ... x u_{m-1}) x conj(um)`
/// in the permuted mode order.
pub fn cubic_flatten(h: &HermitianTensor) -> CubicTensor {
    let m = h.shape().order();
    let last = cubic_last_mode(h.shape());
    let mut order: Vec<usize> = (0..m).filter(|&k| k != last).collect();
    order.push(last);
    let p = h.permute_modes(&order).expect("valid permutation");
    let n1 = p.size();
    let n3 = p.dims()[m - 1];
    let n2 = n1 / n3;
    CubicTensor {
        dims: (n1, n2, n3),
        data: p.data().to_vec(),
        mode_order: order,
    }
}

/// Flattening ranks that bound the Hermitian rank from below.
#[derive(Clone, Debug, PartialEq)]
pub struct RankBoundReport {
    pub m_rank: usize,
    pub kappa_rank: Option<usize>,
    pub bound: usize,
}

pub fn hrank_lower_bound(h: &HermitianTensor, tol: &Tolerances) -> Result<RankBoundReport> {
    let m_rank = matrix_rank(&h.to_matrix(), tol.rank_tol)?;
    let kappa_rank = if h.shape().order() >= 2 {
        Some(matrix_rank(&kronecker_flatten(h)?.matrix, tol.rank_tol)?)
    } else {
        None
    };
    let bound = m_rank.max(kappa_rank.unwrap_or(0));
    Ok(RankBoundReport {
        m_rank,
        kappa_rank,
        bound,
    })
}

/// True when the Kronecker-term sum of `d` reproduces `mat` within
/// `1e-9 * ||mat||`, which shows `mat` has rank at most `d.len()` in the
/// Kronecker sense.
pub fn verify_m_rank(mat: &CMat, d: &HermitianDecomposition) -> Result<bool> {
    let n = d.shape().size();
    if mat.rows() != n || mat.cols() != n {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} matrix for shape {}",
            mat.rows(),
            mat.cols(),
            d.shape()
        )));
    }
    let mut sum = CMat::zeros(n, n);
    for t in d.terms() {
        let mut k = CMat::identity(1);
        for v in t.vectors.vectors() {
            k = k.kron(&CMat::outer(v));
        }
        sum = sum.add(&k.scale(C64::new(t.lambda, 0.0)));
    }
    Ok(sum.sub(mat).frob_norm() <= 1e-9 * mat.frob_norm().max(1e-300))
}
