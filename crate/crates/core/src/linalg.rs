//! Dense complex matrices and the small set of factorizations the crate needs.
//!
//! Everything here is written for desk-scale sizes (a few hundred rows at
//! most). Factorizations go through nalgebra; `CMat` is the row-major
//! currency the rest of the crate passes around.

use std::ops::{Index, IndexMut};

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// `v v*` for a column vector `v`.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul inner dimensions");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Kronecker product; the row index of `self` is the more significant one.
    pub fn kron(&self, other: &Self) -> Self {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |i, j| {
            self[(i / other.rows, j / other.cols)] * other[(i % other.rows, j % other.cols)]
        })
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius inner product `Re tr(A* B)`.
    pub fn inner_re(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Largest `|A[i,j] - conj(A[j,i])|`; infinite for non-square matrices.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// `(A + A*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.data.iter().all(|z| z.im.abs() <= tol)
    }

    pub fn real_part(&self) -> Self {
        self.map(|z| C64::new(z.re, 0.0))
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Eigen-decomposition `A = V diag(values) V*` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct SpectralDecomp {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, one per column, matching `values`.
    pub vectors: CMat,
}

impl SpectralDecomp {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_radius(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    pub fn reconstruct(&self) -> CMat {
        let n = self.values.len();
        let mut out = CMat::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            if lam == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * lam;
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }
}

fn to_na(a: &CMat) -> DMatrix<C64> {
    DMatrix::from_row_slice(a.rows, a.cols, &a.data)
}

fn from_na(m: &DMatrix<C64>) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Hermitian eigen-decomposition, eigenvalues ascending.
///
/// The input is symmetrized first; callers that need to reject non-Hermitian
/// input should check [`CMat::hermitian_deviation`] themselves, or use
/// [`herm_eig_checked`].
pub fn herm_eig(a: &CMat) -> Result<SpectralDecomp> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "eigen-decomposition of a {}x{} matrix",
            a.rows, a.cols
        )));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = a.rows;
    if n == 0 {
        return Ok(SpectralDecomp {
            values: Vec::new(),
            vectors: CMat::zeros(0, 0),
        });
    }
    let mut m = a.hermitian_part();
    for i in 0..n {
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
    }
    let e = SymmetricEigen::try_new(to_na(&m), f64::EPSILON, 0)
        .ok_or_else(|| Error::NoConvergence("Hermitian eigensolver".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| e.eigenvalues[x].total_cmp(&e.eigenvalues[y]));
    let values = order.iter().map(|&k| e.eigenvalues[k]).collect();
    let vectors = CMat::from_fn(n, n, |i, j| e.eigenvectors[(i, order[j])]);
    Ok(SpectralDecomp { values, vectors })
}

/// Like [`herm_eig`] but rejects input whose Hermitian deviation exceeds
/// `tol * (1 + max|a_ij|)`.
pub fn herm_eig_checked(a: &CMat, tol: f64) -> Result<SpectralDecomp> {
    let dev = a.hermitian_deviation();
    if dev > tol * (1.0 + a.max_abs()) {
        return Err(Error::NotHermitian(dev));
    }
    herm_eig(a)
}

/// Singular values in descending order.
pub fn singular_values(a: &CMat) -> Result<Vec<f64>> {
    if a.rows.min(a.cols) == 0 {
        return Ok(Vec::new());
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let svd = SVD::try_new(to_na(a), false, false, f64::EPSILON, 0)
        .ok_or_else(|| Error::NoConvergence("singular value decomposition".into()))?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// Numerical rank: the number of singular values above `rel_tol * s_max`.
pub fn matrix_rank(a: &CMat, rel_tol: f64) -> Result<usize> {
    let s = singular_values(a)?;
    Ok(rank_from_singular(&s, rel_tol))
}

pub(crate) fn rank_from_singular(s: &[f64], rel_tol: f64) -> usize {
    let top = s.first().copied().unwrap_or(0.0);
    if top <= 1e-300 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * top).count()
}

/// Nearest positive semidefinite matrix in Frobenius norm.
pub fn psd_project(a: &CMat) -> Result<CMat> {
    let mut e = herm_eig(a)?;
    for lam in e.values.iter_mut() {
        if *lam < 0.0 {
            *lam = 0.0;
        }
    }
    Ok(e.reconstruct())
}

/// True when the Hermitian matrix has no eigenvalue below `-tol * (1 + radius)`.
pub fn is_psd(a: &CMat, tol: f64) -> Result<bool> {
    let e = herm_eig(a)?;
    Ok(e.min() >= -tol * (1.0 + e.spectral_radius()))
}

/// Solves `A X = B` through an LU factorization with partial pivoting.
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    let n = a.rows;
    if !a.is_square() || b.rows != n {
        return Err(Error::ShapeMismatch("linear solve".into()));
    }
    let lu = to_na(a).lu();
    let scale = a.max_abs().max(1e-300);
    let u = lu.u();
    if (0..n).any(|k| u[(k, k)].norm() <= 1e-14 * scale) {
        return Err(Error::DegenerateSlices("singular matrix in linear solve".into()));
    }
    let x = lu
        .solve(&to_na(b))
        .ok_or_else(|| Error::DegenerateSlices("singular matrix in linear solve".into()))?;
    Ok(from_na(&x))
}

/// Solves the real symmetric system `G x = b` with a tiny ridge term for
/// stability; `g` is `n x n` row-major.
pub(crate) fn solve_real_sym(g: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let a = CMat::from_real(n, n, g)?;
    let trace: f64 = (0..n).map(|i| g[i * n + i]).sum::<f64>().abs();
    let ridge = CMat::diag(&vec![1e-13 * trace.max(1e-300); n]);
    let rhs = CMat::from_real(n, 1, b)?;
    let x = solve(&a.add(&ridge), &rhs)?;
    Ok(x.data.iter().map(|z| z.re).collect())
}

/// Eigenvalues and unit eigenvectors of a general complex matrix: complex
/// Schur form, then back-substitution on the triangular factor.
pub(crate) fn eig_general(a: &CMat) -> Result<(Vec<C64>, CMat)> {
    let n = a.rows;
    if !a.is_square() {
        return Err(Error::ShapeMismatch("general eigenproblem".into()));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    if n == 0 {
        return Ok((Vec::new(), CMat::zeros(0, 0)));
    }
    let (z, h) = Schur::try_new(to_na(a), f64::EPSILON, 0)
        .ok_or_else(|| Error::NoConvergence("Schur iteration".into()))?
        .unpack();
    let norm = h.iter().map(|c| c.norm()).fold(1e-300, f64::max);
    let eps = f64::EPSILON * norm;
    let mut vecs = CMat::zeros(n, n);
    for k in 0..n {
        let lam = h[(k, k)];
        let mut y = DVector::from_element(n, ZERO);
        y[k] = ONE;
        for j in (0..k).rev() {
            let mut acc = ZERO;
            for l in j + 1..=k {
                acc += h[(j, l)] * y[l];
            }
            let mut d = h[(j, j)] - lam;
            if d.norm() < eps {
                d = C64::new(eps, 0.0);
            }
            y[j] = -acc / d;
        }
        let x = &z * y;
        let nx = x.norm();
        for i in 0..n {
            vecs[(i, k)] = x[i] / nx;
        }
    }
    let values = (0..n).map(|k| h[(k, k)]).collect();
    Ok((values, vecs))
}

/// Best rank-1 approximation of a dense tensor.
///
/// Returns factor vectors whose outer product approximates `t` (the scale is
/// carried by the first vector) and the relative residual
/// `||t - u1 x ... x um|| / ||t||`. Initialized from the leading singular
/// vectors of each unfolding and refined by power sweeps.
pub fn rank1_factor(t: &DenseTensor) -> Result<(Vec<Vec<C64>>, f64)> {
    let dims = t.dims().to_vec();
    let m = dims.len();
    let norm = t.norm();
    if norm == 0.0 {
        return Err(Error::ZeroTensor);
    }
    let mut us: Vec<Vec<C64>> = Vec::with_capacity(m);
    for (k, &n) in dims.iter().enumerate() {
        let unf = t.unfold(k);
        let g = unf.matmul(&unf.adjoint());
        let e = herm_eig(&g)?;
        us.push(e.vector(n - 1));
    }
    if m > 1 {
        let mut prev = f64::NAN;
        for _ in 0..50 {
            for k in 0..m {
                let v = t.contract_except(&us, k);
                let nv = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                if nv <= 1e-300 {
                    break;
                }
                us[k] = v.into_iter().map(|c| c / nv).collect();
            }
            let sigma = t.contract_all(&us).norm();
            if (sigma - prev).abs() <= 1e-15 * norm {
                break;
            }
            prev = sigma;
        }
    }
    let sigma = t.contract_all(&us);
    for c in us[0].iter_mut() {
        *c *= sigma;
    }
    let approx = DenseTensor::outer(&us);
    let resid = t.sub(&approx).norm() / norm;
    Ok((us, resid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_mat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMat {
        CMat::from_fn(r, c, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    fn random_herm(rng: &mut ChaCha8Rng, n: usize) -> CMat {
        random_mat(rng, n, n).hermitian_part()
    }

    #[test]
    fn herm_eig_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..9 {
            let a = random_herm(&mut rng, n);
            let e = herm_eig(&a).unwrap();
            assert!(e.reconstruct().sub(&a).max_abs() < 1e-12);
            let vtv = e.vectors.adjoint().matmul(&e.vectors);
            assert!(vtv.sub(&CMat::identity(n)).max_abs() < 1e-12);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn herm_eig_known_spectrum() {
        let a = CMat::from_vec(
            2,
            2,
            vec![
                C64::new(2.0, 0.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, -1.0),
                C64::new(2.0, 0.0),
            ],
        )
        .unwrap();
        let e = herm_eig(&a).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn checked_rejects_non_hermitian() {
        let a = CMat::from_real(2, 2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(herm_eig_checked(&a, 1e-9), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn singular_values_match_gram() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_mat(&mut rng, 5, 3);
        let s = singular_values(&a).unwrap();
        let g = herm_eig(&a.adjoint().matmul(&a)).unwrap();
        let mut from_gram: Vec<f64> = g.values.iter().map(|x| x.max(0.0).sqrt()).collect();
        from_gram.sort_by(|x, y| y.total_cmp(x));
        for (x, y) in s.iter().zip(&from_gram) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_of_low_rank_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_mat(&mut rng, 6, 2).matmul(&random_mat(&mut rng, 2, 7));
        assert_eq!(matrix_rank(&a, 1e-8).unwrap(), 2);
        assert_eq!(matrix_rank(&CMat::zeros(3, 3), 1e-8).unwrap(), 0);
    }

    #[test]
    fn rank_sees_tiny_but_genuine_singular_value() {
        // A*A would square 1e-7 down to 1e-14 and lose it against 1e-8 relTol.
        let a = CMat::from_real(2, 2, &[1.0, 0.0, 0.0, 1e-7]).unwrap();
        let b = a.matmul(&CMat::from_real(2, 2, &[0.6, 0.8, -0.8, 0.6]).unwrap());
        assert_eq!(matrix_rank(&b, 1e-8).unwrap(), 2);
    }

    #[test]
    fn psd_projection_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_herm(&mut rng, 5);
        let p = psd_project(&a).unwrap();
        assert!(herm_eig(&p).unwrap().min() > -1e-12);
        assert!(psd_project(&p).unwrap().sub(&p).max_abs() < 1e-12);
    }

    #[test]
    fn linear_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_mat(&mut rng, 4, 4);
        let x = random_mat(&mut rng, 4, 2);
        let b = a.matmul(&x);
        assert!(solve(&a, &b).unwrap().sub(&x).max_abs() < 1e-10);
    }

    #[test]
    fn general_eigen() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in 1..8 {
            let a = random_mat(&mut rng, n, n);
            let (vals, vecs) = eig_general(&a).unwrap();
            for (k, &lam) in vals.iter().enumerate() {
                let v = vecs.column(k);
                let av = a.mul_vec(&v);
                let err: f64 = av
                    .iter()
                    .zip(&v)
                    .map(|(x, y)| (x - lam * y).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(err < 1e-9, "n={n} k={k} err={err}");
            }
            let tr: C64 = vals.iter().sum();
            assert!((tr - a.trace()).norm() < 1e-10);
        }
    }

    #[test]
    fn general_eigen_known_diagonalizable() {
        let d = CMat::diag(&[1.0, 2.0, -3.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = random_mat(&mut rng, 3, 3);
        let a = p.matmul(&d).matmul(&solve(&p, &CMat::identity(3)).unwrap());
        let (vals, _) = eig_general(&a).unwrap();
        let mut re: Vec<f64> = vals.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        for (x, y) in re.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn rank1_recovers_outer_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let vs: Vec<Vec<C64>> = [2usize, 3, 2]
            .iter()
            .map(|&n| (0..n).map(|_| C64::new(rng.random(), rng.random())).collect())
            .collect();
        let t = DenseTensor::outer(&vs);
        let (us, r) = rank1_factor(&t).unwrap();
        assert!(r < 1e-12);
        assert!(DenseTensor::outer(&us).sub(&t).norm() < 1e-10);
    }

    #[test]
    fn rank1_reports_residual_for_rank2() {
        let e1 = vec![ONE, ZERO];
        let e2 = vec![ZERO, ONE];
        let t = DenseTensor::outer(&[e1.clone(), e1]).add(&DenseTensor::outer(&[e2.clone(), e2]));
        let (_, r) = rank1_factor(&t).unwrap();
        assert!((r - 0.5f64.sqrt()).abs() < 1e-10);
    }
}
