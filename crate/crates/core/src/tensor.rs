//! Hermitian tensors, dense tensors and vector tuples.
//!
//! A Hermitian tensor of shape `[n1, ..., nm]` is stored as its `N x N`
//! flattening (`N = n1 * ... * nm`), row-major over the pair `(I, J)` of
//! multi-indices. Multi-indices are ordered mode-1-major, so the last mode
//! varies fastest. Public index arguments are 1-based.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::CMat;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Mode dimensions of a tensor.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Shape {
    dims: Vec<usize>,
}

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("order must be at least 1".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidShape(format!("zero dimension in {dims:?}")));
        }
        if dims.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n)).is_none() {
            return Err(Error::InvalidShape("size overflows".into()));
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    /// `N`, the product of the dimensions.
    pub fn size(&self) -> usize {
        self.dims.iter().product()
    }

    /// Flat 0-based position of a 1-based multi-index.
    pub fn flat(&self, idx: &[usize]) -> Result<usize> {
        if idx.len() != self.dims.len() {
            return Err(Error::InvalidIndex(format!(
                "{} components for order {}",
                idx.len(),
                self.dims.len()
            )));
        }
        let mut f = 0;
        for (k, (&i, &n)) in idx.iter().zip(&self.dims).enumerate() {
            if i == 0 || i > n {
                return Err(Error::InvalidIndex(format!(
                    "component {} = {i} outside 1..={n}",
                    k + 1
                )));
            }
            f = f * n + (i - 1);
        }
        Ok(f)
    }

    /// 1-based multi-index of a flat position.
    pub fn multi(&self, flat: usize) -> Vec<usize> {
        self.multi0(flat).into_iter().map(|i| i + 1).collect()
    }

    pub(crate) fn multi0(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            out[k] = flat % self.dims[k];
            flat /= self.dims[k];
        }
        out
    }

    pub(crate) fn flat0(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.dims).fold(0, |f, (&i, &n)| f * n + i)
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|n| n.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// One complex vector per mode.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorTuple {
    vecs: Vec<Vec<C64>>,
}

impl VectorTuple {
    pub fn new(vecs: Vec<Vec<C64>>) -> Self {
        Self { vecs }
    }

    pub fn from_real(vecs: &[Vec<f64>]) -> Self {
        Self::new(
            vecs.iter()
                .map(|v| v.iter().map(|&x| C64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vecs
    }

    pub fn into_vectors(self) -> Vec<Vec<C64>> {
        self.vecs
    }

    pub fn order(&self) -> usize {
        self.vecs.len()
    }

    pub fn check(&self, shape: &Shape) -> Result<()> {
        let lens: Vec<usize> = self.vecs.iter().map(Vec::len).collect();
        if lens != shape.dims() {
            return Err(Error::ShapeMismatch(format!(
                "vector lengths {lens:?} against shape {shape}"
            )));
        }
        if self
            .vecs
            .iter()
            .flatten()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    /// `u1 x ... x um` as a flat vector, mode 1 most significant.
    pub fn kron(&self) -> Vec<C64> {
        let mut out = vec![C64::new(1.0, 0.0)];
        for v in &self.vecs {
            let mut next = Vec::with_capacity(out.len() * v.len());
            for a in &out {
                for b in v {
                    next.push(a * b);
                }
            }
            out = next;
        }
        out
    }

    pub fn norms(&self) -> Vec<f64> {
        self.vecs.iter().map(|v| vec_norm(v)).collect()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.vecs.iter().flatten().all(|z| z.im.abs() <= tol)
    }

    /// Each vector scaled to unit norm.
    pub fn normalized(&self) -> Self {
        Self::new(
            self.vecs
                .iter()
                .map(|v| {
                    let n = vec_norm(v);
                    v.iter().map(|z| z / n).collect()
                })
                .collect(),
        )
    }

    /// Random unit vectors, real-valued when `real` is set.
    pub fn random_unit(shape: &Shape, rng: &mut impl Rng, real: bool) -> Self {
        let vecs = shape
            .dims()
            .iter()
            .map(|&n| {
                let v: Vec<C64> = (0..n)
                    .map(|_| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = if real { 0.0 } else { rng.sample(StandardNormal) };
                        C64::new(re, im)
                    })
                    .collect();
                let nv = vec_norm(&v).max(1e-300);
                v.into_iter().map(|z| z / nv).collect()
            })
            .collect();
        Self::new(vecs)
    }
}

pub(crate) fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn vdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// A Hermitian tensor, stored through its Hermitian flattening.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianTensor {
    shape: Shape,
    data: Vec<C64>,
}

impl HermitianTensor {
    /// Validates conjugate symmetry within `sym_tol`, then stores the exactly
    /// symmetrized entries. `data` is the row-major `N x N` flattening.
    pub fn new(shape: Shape, data: Vec<C64>, sym_tol: f64) -> Result<Self> {
        let n = shape.size();
        if data.len() != n * n {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for shape {shape} (need {})",
                data.len(),
                n * n
            )));
        }
        if data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((data[i * n + j] - data[j * n + i].conj()).norm());
            }
        }
        if dev > sym_tol {
            return Err(Error::SymmetryViolation { max_dev: dev });
        }
        Ok(Self::symmetrized(shape, data))
    }

    pub(crate) fn symmetrized(shape: Shape, data: Vec<C64>) -> Self {
        let n = shape.size();
        let mut out = data.clone();
        for i in 0..n {
            out[i * n + i] = C64::new(data[i * n + i].re, 0.0);
            for j in i + 1..n {
                let v = (data[i * n + j] + data[j * n + i].conj()) * 0.5;
                out[i * n + j] = v;
                out[j * n + i] = v.conj();
            }
        }
        Self { shape, data: out }
    }

    /// Builds from a flattening matrix; see [`HermitianTensor::new`].
    pub fn from_matrix(shape: Shape, m: &CMat, sym_tol: f64) -> Result<Self> {
        let n = shape.size();
        if m.rows() != n || m.cols() != n {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix for shape {shape}",
                m.rows(),
                m.cols()
            )));
        }
        Self::new(shape, m.data().to_vec(), sym_tol)
    }

    pub fn zeros(shape: Shape) -> Self {
        let n = shape.size();
        Self {
            shape,
            data: vec![ZERO; n * n],
        }
    }

    /// The tensor whose flattening is the identity.
    pub fn identity(shape: Shape) -> Self {
        let mut t = Self::zeros(shape);
        let n = t.shape.size();
        for i in 0..n {
            t.data[i * n + i] = C64::new(1.0, 0.0);
        }
        t
    }

    /// `lambda [u1, ..., um]`, with entry `(I, J) = lambda * q_I * conj(q_J)`.
    pub fn rank1(lambda: f64, x: &VectorTuple) -> Result<Self> {
        let dims: Vec<usize> = x.vectors().iter().map(Vec::len).collect();
        let shape = Shape::new(dims)?;
        if !lambda.is_finite() {
            return Err(Error::NonFinite);
        }
        x.check(&shape)?;
        let q = x.kron();
        let n = q.len();
        let mut data = Vec::with_capacity(n * n);
        for a in &q {
            for b in &q {
                data.push(a * b.conj() * lambda);
            }
        }
        Ok(Self::symmetrized(shape, data))
    }

    /// `E^{IJ}(c)`: entry `c` at `(I, J)` and `conj(c)` at `(J, I)`.
    pub fn basis(shape: Shape, i: &[usize], j: &[usize], c: C64) -> Result<Self> {
        let a = shape.flat(i)?;
        let b = shape.flat(j)?;
        if a == b && c.im != 0.0 {
            return Err(Error::NonRealDiagonal);
        }
        let mut t = Self::zeros(shape);
        let n = t.shape.size();
        t.data[a * n + b] = c;
        t.data[b * n + a] = c.conj();
        Ok(t)
    }

    /// Entries `(G + G*)/2` with `G` iid standard complex Gaussian.
    pub fn random(shape: Shape, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(shape, &mut rng, false)
    }

    /// Like [`HermitianTensor::random`] with real entries.
    pub fn random_real(shape: Shape, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(shape, &mut rng, true)
    }

    pub(crate) fn random_with(shape: Shape, rng: &mut impl Rng, real: bool) -> Self {
        let n = shape.size();
        let data = (0..n * n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = if real { 0.0 } else { rng.sample(StandardNormal) };
                C64::new(re, im)
            })
            .collect();
        Self::symmetrized(shape, data)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    /// `N`, the side of the flattening.
    pub fn size(&self) -> usize {
        self.shape.size()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// Entry at 1-based multi-indices.
    pub fn get(&self, i: &[usize], j: &[usize]) -> Result<C64> {
        let a = self.shape.flat(i)?;
        let b = self.shape.flat(j)?;
        Ok(self.at(a, b))
    }

    /// Entry at flat 0-based positions.
    pub fn at(&self, a: usize, b: usize) -> C64 {
        self.data[a * self.shape.size() + b]
    }

    pub fn to_matrix(&self) -> CMat {
        let n = self.size();
        CMat::from_vec(n, n, self.data.clone()).expect("square storage")
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm over all entries.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.data.iter().all(|z| z.im.abs() <= tol)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!("{} vs {}", self.shape, other.shape)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            shape: self.shape.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            shape: self.shape.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub(crate) fn add_assign_scaled(&mut self, other: &Self, s: f64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    /// Real inner product `Re sum a_IJ conj(b_IJ)`.
    ///
    /// An imaginary residue above `tol * (1 + |<a,b>|)` means an operand was
    /// not Hermitian and raises `NonRealInner`.
    pub fn inner(&self, other: &Self, tol: f64) -> Result<f64> {
        self.check_same(other)?;
        let s: C64 = self.data.iter().zip(&other.data).map(|(a, b)| a * b.conj()).sum();
        if s.im.abs() > tol * (1.0 + s.norm()) {
            return Err(Error::NonRealInner(s.im));
        }
        Ok(s.re)
    }

    /// `H(x, conj x) = sum H_IJ conj(q_I) q_J` with `q = x1 x ... x xm`.
    pub fn eval_poly(&self, x: &VectorTuple) -> Result<f64> {
        x.check(&self.shape)?;
        Ok(self.quad(&x.kron()))
    }

    /// `q* M q` for a flat vector `q`.
    pub(crate) fn quad(&self, q: &[C64]) -> f64 {
        let n = self.size();
        let mut s = ZERO;
        for a in 0..n {
            if q[a] == ZERO {
                continue;
            }
            let row = &self.data[a * n..(a + 1) * n];
            let r: C64 = row.iter().zip(q).map(|(h, qb)| h * qb).sum();
            s += q[a].conj() * r;
        }
        s.re
    }

    /// `H x (Q1, ..., Qm, conj Q1, ..., conj Qm)`; the flattening becomes
    /// `K M K*` with `K = Q1 x ... x Qm`. Output dimensions are the row
    /// counts of the `Qk`.
    pub fn congruent(&self, qs: &[CMat]) -> Result<Self> {
        if qs.len() != self.shape.order() {
            return Err(Error::ShapeMismatch(format!(
                "{} matrices for order {}",
                qs.len(),
                self.shape.order()
            )));
        }
        for (k, (q, &n)) in qs.iter().zip(self.dims()).enumerate() {
            if q.cols() != n {
                return Err(Error::ShapeMismatch(format!(
                    "matrix {} has {} columns, mode has dimension {n}",
                    k + 1,
                    q.cols()
                )));
            }
        }
        let mut k = CMat::identity(1);
        for q in qs {
            k = k.kron(q);
        }
        let out = k.matmul(&self.to_matrix()).matmul(&k.adjoint());
        let shape = Shape::new(qs.iter().map(CMat::rows).collect())?;
        Ok(Self::symmetrized(shape, out.into_data()))
    }

    /// Reorders modes: new mode `k` is old mode `perm[k]` (0-based).
    pub fn permute_modes(&self, perm: &[usize]) -> Result<Self> {
        let m = self.shape.order();
        let mut seen = vec![false; m];
        if perm.len() != m || perm.iter().any(|&p| p >= m || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidShape(format!("{perm:?} is not a permutation")));
        }
        let new_shape = Shape::new(perm.iter().map(|&p| self.dims()[p]).collect())?;
        let n = self.size();
        let map: Vec<usize> = (0..n)
            .map(|f| {
                let new_idx = new_shape.multi0(f);
                let mut old = vec![0; m];
                for (k, &p) in perm.iter().enumerate() {
                    old[p] = new_idx[k];
                }
                self.shape.flat0(&old)
            })
            .collect();
        let mut data = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                data.push(self.at(map[a], map[b]));
            }
        }
        Ok(Self { shape: new_shape, data })
    }

    /// Entrywise conjugate (again Hermitian).
    pub fn conj(&self) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn as_dense(&self) -> DenseTensor {
        let mut dims = self.dims().to_vec();
        dims.extend_from_slice(self.shape.dims());
        DenseTensor {
            dims,
            data: self.data.clone(),
        }
    }
}

/// A general dense tensor, row-major (last index fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<C64>,
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidShape(format!("{dims:?}")));
        }
        if data.len() != dims.iter().product::<usize>() {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for dims {dims:?}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        Self {
            dims,
            data: vec![ZERO; n],
        }
    }

    pub fn outer(vs: &[Vec<C64>]) -> Self {
        let t = VectorTuple::new(vs.to_vec());
        Self {
            dims: vs.iter().map(Vec::len).collect(),
            data: t.kron(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn norm(&self) -> f64 {
        vec_norm(&self.data)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dims, other.dims);
        Self {
            dims: self.dims.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dims, other.dims);
        Self {
            dims: self.dims.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dims: self.dims.clone(),
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.dims[k + 1];
        }
        s
    }

    /// Mode-`k` unfolding: `n_k` rows, remaining indices in order as columns.
    pub fn unfold(&self, k: usize) -> CMat {
        let nk = self.dims[k];
        let cols = self.data.len() / nk;
        let strides = self.strides();
        let mut out = CMat::zeros(nk, cols);
        let mut counters = vec![0usize; self.dims.len()];
        for (f, &v) in self.data.iter().enumerate() {
            let mut rem = f;
            for (c, &s) in counters.iter_mut().zip(&strides) {
                *c = rem / s;
                rem %= s;
            }
            let mut col = 0;
            for (l, &c) in counters.iter().enumerate() {
                if l != k {
                    col = col * self.dims[l] + c;
                }
            }
            out[(counters[k], col)] = v;
        }
        out
    }

    /// `v[a] = sum_{i_k = a} t[i] prod_{l != k} conj(u_l[i_l])`.
    pub fn contract_except(&self, us: &[Vec<C64>], k: usize) -> Vec<C64> {
        let mut out = vec![ZERO; self.dims[k]];
        let strides = self.strides();
        for (f, &v) in self.data.iter().enumerate() {
            if v == ZERO {
                continue;
            }
            let mut w = v;
            let mut ik = 0;
            for (l, (&s, &n)) in strides.iter().zip(&self.dims).enumerate() {
                let i = (f / s) % n;
                if l == k {
                    ik = i;
                } else {
                    w *= us[l][i].conj();
                }
            }
            out[ik] += w;
        }
        out
    }

    /// `<u1 x ... x um, t>`, conjugate-linear in the vectors.
    pub fn contract_all(&self, us: &[Vec<C64>]) -> C64 {
        let q = VectorTuple::new(us.to_vec()).kron();
        vdot(&q, &self.data)
    }

    /// `t x (M1, ..., Mm)`: mode `k` is multiplied by `Mk`.
    pub fn matmul_modes(&self, ms: &[CMat]) -> Result<Self> {
        if ms.len() != self.dims.len() {
            return Err(Error::ShapeMismatch("one matrix per mode".into()));
        }
        let mut cur = self.clone();
        for (k, m) in ms.iter().enumerate() {
            if m.cols() != cur.dims[k] {
                return Err(Error::ShapeMismatch(format!(
                    "matrix {} has {} columns for dimension {}",
                    k + 1,
                    m.cols(),
                    cur.dims[k]
                )));
            }
            cur = cur.apply_mode(k, m);
        }
        Ok(cur)
    }

    fn apply_mode(&self, k: usize, m: &CMat) -> Self {
        let mut dims = self.dims.clone();
        dims[k] = m.rows();
        let outer: usize = self.dims[..k].iter().product();
        let inner: usize = self.dims[k + 1..].iter().product();
        let nk = self.dims[k];
        let rk = m.rows();
        let mut data = vec![ZERO; outer * rk * inner];
        for o in 0..outer {
            for r in 0..rk {
                for c in 0..nk {
                    let w = m[(r, c)];
                    if w == ZERO {
                        continue;
                    }
                    let src = &self.data[(o * nk + c) * inner..(o * nk + c + 1) * inner];
                    let dst = &mut data[(o * rk + r) * inner..(o * rk + r + 1) * inner];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += w * s;
                    }
                }
            }
        }
        Self { dims, data }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn flat_index_round_trip() {
        let s = Shape::new(vec![2, 3, 2]).unwrap();
        for f in 0..s.size() {
            assert_eq!(s.flat(&s.multi(f)).unwrap(), f);
        }
        assert_eq!(s.flat(&[1, 1, 2]).unwrap(), 1);
        assert_eq!(s.flat(&[2, 1, 1]).unwrap(), 6);
        assert!(s.flat(&[3, 1, 1]).is_err());
        assert!(s.flat(&[1, 1]).is_err());
    }

    #[test]
    fn shape_rejects_zero() {
        assert!(Shape::new(vec![]).is_err());
        assert!(Shape::new(vec![2, 0]).is_err());
    }

    #[test]
    fn validation_rejects_asymmetry() {
        let s = Shape::new(vec![2]).unwrap();
        let bad = vec![c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)];
        assert!(matches!(
            HermitianTensor::new(s.clone(), bad, 1e-9),
            Err(Error::SymmetryViolation { .. })
        ));
        let ok = vec![c(1.0, 0.0), c(1.0, 1.0), c(1.0, -1.0), c(1.0, 0.0)];
        assert!(HermitianTensor::new(s.clone(), ok, 1e-9).is_ok());
        let nonfinite = vec![c(f64::NAN, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        assert_eq!(HermitianTensor::new(s, nonfinite, 1e-9), Err(Error::NonFinite));
    }

    #[test]
    fn rank1_entry_convention() {
        let x = VectorTuple::new(vec![vec![c(1.0, 0.0), c(0.0, 1.0)]]);
        let t = HermitianTensor::rank1(2.0, &x).unwrap();
        // (1,2) entry = 2 * 1 * conj(i) = -2i
        assert_eq!(t.get(&[1], &[2]).unwrap(), c(0.0, -2.0));
        assert_eq!(t.get(&[2], &[2]).unwrap(), c(2.0, 0.0));
    }

    #[test]
    fn eval_poly_is_inner_with_rank1() {
        let h = HermitianTensor::random(Shape::new(vec![2, 3]).unwrap(), 7);
        let x = VectorTuple::new(vec![
            vec![c(0.3, -1.0), c(0.5, 0.2)],
            vec![c(1.0, 0.0), c(-0.4, 0.4), c(0.0, 2.0)],
        ]);
        let r1 = HermitianTensor::rank1(1.0, &x).unwrap();
        let a = h.eval_poly(&x).unwrap();
        let b = h.inner(&r1, 1e-9).unwrap();
        assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn basis_tensor_rejects_complex_diagonal() {
        let s = Shape::new(vec![2, 2]).unwrap();
        assert_eq!(
            HermitianTensor::basis(s, &[1, 2], &[1, 2], c(0.0, 1.0)),
            Err(Error::NonRealDiagonal)
        );
    }

    #[test]
    fn congruent_matches_dense_matmul() {
        let h = HermitianTensor::random(Shape::new(vec![2, 2]).unwrap(), 3);
        let q1 = CMat::from_vec(2, 2, vec![c(1.0, 1.0), c(0.0, 2.0), c(-1.0, 0.5), c(0.3, 0.0)]).unwrap();
        let q2 = CMat::from_vec(
            3,
            2,
            vec![
                c(1.0, 0.0),
                c(2.0, 0.0),
                c(0.0, 1.0),
                c(1.0, -1.0),
                c(0.5, 0.5),
                c(0.0, 0.0),
            ],
        )
        .unwrap();
        let out = h.congruent(&[q1.clone(), q2.clone()]).unwrap();
        assert_eq!(out.dims(), &[2, 3]);
        let dense = h
            .as_dense()
            .matmul_modes(&[q1.clone(), q2.clone(), q1.conj(), q2.conj()])
            .unwrap();
        for (a, b) in out.data().iter().zip(dense.data()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn permute_modes_moves_entries() {
        let h = HermitianTensor::random(Shape::new(vec![2, 3]).unwrap(), 11);
        let p = h.permute_modes(&[1, 0]).unwrap();
        assert_eq!(p.dims(), &[3, 2]);
        assert_eq!(p.get(&[3, 1], &[2, 2]).unwrap(), h.get(&[1, 3], &[2, 2]).unwrap());
        assert!(h.permute_modes(&[0, 0]).is_err());
    }

    #[test]
    fn unfold_and_contract() {
        let vs = vec![
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(0.0, 1.0), c(1.0, 0.0), c(3.0, 0.0)],
        ];
        let t = DenseTensor::outer(&vs);
        let u = t.unfold(1);
        assert_eq!((u.rows(), u.cols()), (3, 2));
        assert_eq!(u[(2, 1)], c(6.0, 0.0));
        let full = t.contract_all(&vs);
        let n2: f64 = vs.iter().map(|v| vec_norm(v).powi(2)).product();
        assert!((full - c(n2, 0.0)).norm() < 1e-12);
    }
}
