//! Real Hermitian tensors: the decomposability test, a constructive real
//! decomposition for any order, and the `[2,2]` normal form with its
//! five-term construction.

use num_complex::Complex64 as C64;

use crate::decomposition::{HermitianDecomposition, Term, DEGENERATE_NORM};
use crate::error::{Error, Result};
use crate::linalg::{herm_eig, CMat};
use crate::tensor::{HermitianTensor, Shape, VectorTuple};
use crate::tol::Tolerances;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Outcome of the real-decomposability test.
#[derive(Clone, Debug, PartialEq)]
pub struct RealCheck {
    pub decomposable: bool,
    /// On failure, `(I, J, K, L)` (1-based) with `H[I,J] != H[K,L]` although
    /// `(K, L)` arises from `(I, J)` by swapping one mode.
    pub witness: Option<RealWitness>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealWitness {
    pub i: Vec<usize>,
    pub j: Vec<usize>,
    pub k: Vec<usize>,
    pub l: Vec<usize>,
    pub left: f64,
    pub right: f64,
}

fn check_real(h: &HermitianTensor, tol: &Tolerances) -> Result<()> {
    let n = h.size();
    for a in 0..n {
        for b in 0..n {
            if h.at(a, b).im.abs() > tol.sym_tol {
                let s = h.shape();
                return Err(Error::RealityViolation(format!(
                    "H[{:?},{:?}] = {}",
                    s.multi(a),
                    s.multi(b),
                    h.at(a, b)
                )));
            }
        }
    }
    Ok(())
}

/// Tests whether entries agree under every per-mode swap `i_s <-> j_s`,
/// the condition for a real tensor to be a sum of real rank-1 terms.
pub fn is_real_decomposable(h: &HermitianTensor, tol: &Tolerances) -> Result<RealCheck> {
    check_real(h, tol)?;
    let shape = h.shape();
    let n = h.size();
    let eps = tol.sym_tol * (1.0 + h.max_abs());
    for a in 0..n {
        let i = shape.multi0(a);
        for b in 0..n {
            let j = shape.multi0(b);
            for mode in (0..shape.order()).rev() {
                if i[mode] == j[mode] {
                    continue;
                }
                let mut k = i.clone();
                let mut l = j.clone();
                std::mem::swap(&mut k[mode], &mut l[mode]);
                let (fa, fb) = (shape.flat0(&k), shape.flat0(&l));
                let left = h.at(a, b).re;
                let right = h.at(fa, fb).re;
                if (left - right).abs() > eps {
                    let one = |v: &[usize]| v.iter().map(|x| x + 1).collect();
                    return Ok(RealCheck {
                        decomposable: false,
                        witness: Some(RealWitness {
                            i: one(&i),
                            j: one(&j),
                            k: one(&k),
                            l: one(&l),
                            left,
                            right,
                        }),
                    });
                }
            }
        }
    }
    Ok(RealCheck {
        decomposable: true,
        witness: None,
    })
}

fn require_decomposable(h: &HermitianTensor, tol: &Tolerances) -> Result<()> {
    let check = is_real_decomposable(h, tol)?;
    match check.witness {
        None => Ok(()),
        Some(w) => Err(Error::NotRealDecomposable(format!(
            "H[{:?},{:?}] = {} but H[{:?},{:?}] = {}",
            w.i, w.j, w.left, w.k, w.l, w.right
        ))),
    }
}

/// `prod n_k (n_k + 1) / 2`, the dimension of the real decomposable subspace.
pub fn dim_rd(shape: &Shape) -> u64 {
    shape.dims().iter().map(|&n| (n * (n + 1) / 2) as u64).product()
}

/// `N (N + 1) / 2`, the dimension of all real Hermitian tensors.
pub fn dim_r(shape: &Shape) -> u64 {
    let n = shape.size() as u64;
    n * (n + 1) / 2
}

/// Constructive real decomposition by recursion on the last mode.
///
/// Not length-minimal: it splits into last-mode slices, decomposes each one
/// recursively and lifts every term with `e_s` or `(e_s +- e_t) / sqrt 2`.
pub fn real_decompose(h: &HermitianTensor, tol: &Tolerances) -> Result<HermitianDecomposition> {
    require_decomposable(h, tol)?;
    let shape = h.shape().clone();
    if h.norm() <= DEGENERATE_NORM {
        return Ok(HermitianDecomposition::empty(shape));
    }
    let raw = decompose_rec(&real_matrix(h), h.dims());
    let terms = raw
        .into_iter()
        .map(|(l, vs)| Term::new(l, VectorTuple::from_real(&vs)))
        .collect();
    let d = HermitianDecomposition::new(shape, terms)?;
    let res = d.residual(h)?;
    if res > tol.rd_tol * h.norm() {
        return Err(Error::NoConvergence(format!("real decomposition residual {res:e}")));
    }
    Ok(d)
}

fn real_matrix(h: &HermitianTensor) -> Vec<f64> {
    h.data().iter().map(|z| z.re).collect()
}

/// `mat` is the row-major real flattening for `dims`.
fn decompose_rec(mat: &[f64], dims: &[usize]) -> Vec<(f64, Vec<Vec<f64>>)> {
    let n: usize = dims.iter().product();
    let m = dims.len();
    if m == 1 {
        let a = CMat::from_real(n, n, mat).expect("square");
        let e = herm_eig(&a).expect("finite symmetric matrix");
        let cut = 1e-14 * e.spectral_radius();
        return (0..n)
            .filter(|&k| e.values[k].abs() > cut)
            .map(|k| (e.values[k], vec![e.vector(k).iter().map(|z| z.re).collect()]))
            .collect();
    }
    let nm = dims[m - 1];
    let rest = n / nm;
    let mut out = Vec::new();
    for s in 0..nm {
        for t in s..nm {
            let slice: Vec<f64> = (0..rest * rest)
                .map(|f| {
                    let (a, b) = (f / rest, f % rest);
                    mat[(a * nm + s) * n + b * nm + t]
                })
                .collect();
            if slice.iter().all(|&x| x == 0.0) {
                continue;
            }
            for (lam, vs) in decompose_rec(&slice, &dims[..m - 1]) {
                let lift = |w: Vec<f64>| {
                    let mut v = vs.clone();
                    v.push(w);
                    v
                };
                if s == t {
                    let mut e = vec![0.0; nm];
                    e[s] = 1.0;
                    out.push((lam, lift(e)));
                } else {
                    let mut p = vec![0.0; nm];
                    let mut q = vec![0.0; nm];
                    p[s] = 1.0;
                    p[t] = 1.0;
                    q[s] = 1.0;
                    q[t] = -1.0;
                    out.push((lam / 2.0, lift(p)));
                    out.push((-lam / 2.0, lift(q)));
                }
            }
        }
    }
    out
}

type M2 = [[f64; 2]; 2];

/// The blocks of a real `[2,2]` flattening `[[A, C], [C^T, B]]`, indexed
/// by mode 1 at the block level and mode 2 inside each block.
#[derive(Clone, Debug, PartialEq)]
pub struct RealBlockView {
    pub a: M2,
    pub b: M2,
    pub c: M2,
}

impl RealBlockView {
    pub fn of(h: &HermitianTensor) -> Result<Self> {
        if h.dims() != [2, 2] {
            return Err(Error::NotShape22);
        }
        let e = |p: usize, q: usize, i: usize, j: usize| h.at(p * 2 + i, q * 2 + j).re;
        let block = |p: usize, q: usize| [[e(p, q, 0, 0), e(p, q, 0, 1)], [e(p, q, 1, 0), e(p, q, 1, 1)]];
        Ok(Self {
            a: block(0, 0),
            b: block(1, 1),
            c: block(0, 1),
        })
    }
}

/// Congruence normal form of a real decomposable `[2,2]` tensor:
/// `(P, Q) x H` has flattening `[[s I, D], [D, s Bt]] - s [[u u^T, 0], [0, 0]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalForm22 {
    /// Acts on mode 1.
    pub p: M2,
    /// Acts on mode 2.
    pub q: M2,
    pub s: i8,
    pub d: [f64; 2],
    pub u: [f64; 2],
    pub b_tilde: M2,
}

impl NormalForm22 {
    /// The normal-form flattening itself.
    pub fn matrix(&self) -> CMat {
        let s = self.s as f64;
        let mut m = [[0.0; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                let eye = if i == j { 1.0 } else { 0.0 };
                m[i][j] = s * eye - s * self.u[i] * self.u[j];
                m[i][2 + j] = if i == j { self.d[i] } else { 0.0 };
                m[2 + i][j] = m[i][2 + j];
                m[2 + i][2 + j] = s * self.b_tilde[i][j];
            }
        }
        CMat::from_fn(4, 4, |i, j| C64::new(m[i][j], 0.0))
    }

    /// Relative mismatch between `(P, Q) x h` and [`NormalForm22::matrix`].
    pub fn residual(&self, h: &HermitianTensor) -> Result<f64> {
        let t = h.congruent(&[to_cmat(&self.p), to_cmat(&self.q)])?;
        let diff = t.to_matrix().sub(&self.matrix()).frob_norm();
        Ok(diff / h.norm().max(1e-300))
    }
}

fn to_cmat(m: &M2) -> CMat {
    CMat::from_fn(2, 2, |i, j| C64::new(m[i][j], 0.0))
}

fn sym_eig(m: &M2) -> ([f64; 2], M2) {
    let e = herm_eig(&to_cmat(m)).expect("finite 2x2");
    // Columns are eigenvectors.
    let v = [
        [e.vectors[(0, 0)].re, e.vectors[(0, 1)].re],
        [e.vectors[(1, 0)].re, e.vectors[(1, 1)].re],
    ];
    ([e.values[0], e.values[1]], v)
}

fn mul(a: &M2, b: &M2) -> M2 {
    let mut o = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            o[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    o
}

fn tr(a: &M2) -> M2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

fn neg(a: &M2) -> M2 {
    [[-a[0][0], -a[0][1]], [-a[1][0], -a[1][1]]]
}

fn is_zero(a: &M2, eps: f64) -> bool {
    a.iter().flatten().all(|x| x.abs() <= eps)
}

const I2: M2 = [[1.0, 0.0], [0.0, 1.0]];
const SWAP: M2 = [[0.0, 1.0], [1.0, 0.0]];

/// Definiteness sign of a symmetric `2 x 2`: `1` positive definite,
/// `-1` negative definite, `0` otherwise.
fn definite(a: &M2, eps: f64) -> i8 {
    let (vals, _) = sym_eig(a);
    if vals[0] > eps {
        1
    } else if vals[1] < -eps {
        -1
    } else {
        0
    }
}

pub fn normal_form_22(h: &HermitianTensor, tol: &Tolerances) -> Result<NormalForm22> {
    if h.dims() != [2, 2] {
        return Err(Error::NotShape22);
    }
    require_decomposable(h, tol)?;
    let view = RealBlockView::of(h)?;
    let scale = h.max_abs().max(1e-300);
    let eps = 1e-12 * scale;

    // Choose the block used for whitening: prefer a definite one, so no shift is needed.
    let (p, a, b, shift_needed) = {
        let da = definite(&view.a, eps);
        let db = definite(&view.b, eps);
        if da != 0 {
            (I2, view.a, view.b, false)
        } else if db != 0 {
            (SWAP, view.b, view.a, false)
        } else if !is_zero(&view.a, eps) {
            (I2, view.a, view.b, true)
        } else if !is_zero(&view.b, eps) {
            (SWAP, view.b, view.a, true)
        } else {
            return Ok(case_two(&view.c));
        }
    };
    let c = view.c;
    let (a_vals, _) = sym_eig(&a);
    // s = -1 when the whitening block is negative semidefinite: work with -H.
    let s: i8 = if a_vals[1] > eps { 1 } else { -1 };
    let (a, b, c) = if s == 1 { (a, b, c) } else { (neg(&a), neg(&b), neg(&c)) };
    let (vals, w) = sym_eig(&a);
    let v = if shift_needed && vals[0] <= eps {
        // A + v v^T = lambda_max I with v along the bottom eigenvector.
        let t = (vals[1] - vals[0]).sqrt();
        [t * w[0][0], t * w[1][0]]
    } else {
        [0.0, 0.0]
    };
    let shifted = [
        [a[0][0] + v[0] * v[0], a[0][1] + v[0] * v[1]],
        [a[1][0] + v[1] * v[0], a[1][1] + v[1] * v[1]],
    ];
    let (lam, wv) = sym_eig(&shifted);
    // U = Lambda^{-1/2} W^T whitens the shifted block.
    let wt = tr(&wv);
    let uw = [
        [wt[0][0] / lam[0].sqrt(), wt[0][1] / lam[0].sqrt()],
        [wt[1][0] / lam[1].sqrt(), wt[1][1] / lam[1].sqrt()],
    ];
    let ucu = mul(&mul(&uw, &c), &tr(&uw));
    let sym_ucu = [
        [ucu[0][0], 0.5 * (ucu[0][1] + ucu[1][0])],
        [0.5 * (ucu[0][1] + ucu[1][0]), ucu[1][1]],
    ];
    let (dvals, vv) = sym_eig(&sym_ucu);
    let vrot = tr(&vv);
    let q = mul(&vrot, &uw);
    let uvec = [q[0][0] * v[0] + q[0][1] * v[1], q[1][0] * v[0] + q[1][1] * v[1]];
    let bt = mul(&mul(&q, &b), &tr(&q));
    let bt = [
        [bt[0][0], 0.5 * (bt[0][1] + bt[1][0])],
        [0.5 * (bt[0][1] + bt[1][0]), bt[1][1]],
    ];
    let sf = s as f64;
    let nf = NormalForm22 {
        p,
        q,
        s,
        d: [sf * dvals[0], sf * dvals[1]],
        u: uvec,
        b_tilde: bt,
    };
    let res = nf.residual(h)?;
    if res > tol.nf_tol {
        return Err(Error::NoConvergence(format!("normal form residual {res:e}")));
    }
    Ok(nf)
}

fn case_two(c: &M2) -> NormalForm22 {
    let (dvals, vv) = sym_eig(c);
    NormalForm22 {
        p: I2,
        q: tr(&vv),
        s: 0,
        d: dvals,
        u: [0.0, 0.0],
        b_tilde: [[0.0; 2]; 2],
    }
}

fn inv2(m: &M2) -> M2 {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

/// Real decomposition of length at most 5 (at most 4 when a diagonal
/// block is definite or both vanish), built on the normal form.
pub fn real_decompose_22(h: &HermitianTensor, tol: &Tolerances) -> Result<HermitianDecomposition> {
    let nf = normal_form_22(h, tol)?;
    let shape = h.shape().clone();
    if h.norm() <= DEGENERATE_NORM {
        return Ok(HermitianDecomposition::empty(shape));
    }
    let s = nf.s as f64;
    let e1 = [1.0, 0.0];
    let e2 = [0.0, 1.0];
    let mut raw: Vec<(f64, [f64; 2], [f64; 2])> = Vec::new();
    if nf.s == 0 {
        for (k, ek) in [e1, e2].into_iter().enumerate() {
            raw.push((nf.d[k] / 2.0, [1.0, 1.0], ek));
            raw.push((-nf.d[k] / 2.0, [1.0, -1.0], ek));
        }
    } else {
        raw.push((s, [1.0, s * nf.d[0]], e1));
        raw.push((s, [1.0, s * nf.d[1]], e2));
        let e = [
            [s * nf.b_tilde[0][0] - s * nf.d[0] * nf.d[0], s * nf.b_tilde[0][1]],
            [s * nf.b_tilde[1][0], s * nf.b_tilde[1][1] - s * nf.d[1] * nf.d[1]],
        ];
        let (lv, vv) = sym_eig(&e);
        for k in 0..2 {
            raw.push((lv[k], e2, [vv[0][k], vv[1][k]]));
        }
        raw.push((-s, e1, nf.u));
    }
    let pinv = inv2(&nf.p);
    let qinv = inv2(&nf.q);
    let apply = |m: &M2, x: [f64; 2]| vec![m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]];
    let cut = 1e-14 * h.max_abs();
    let terms = raw
        .into_iter()
        .filter(|(l, a, b)| {
            let na = a[0].hypot(a[1]);
            let nb = b[0].hypot(b[1]);
            (l * na * na * nb * nb).abs() > cut
        })
        .map(|(l, a, b)| Term::new(l, VectorTuple::from_real(&[apply(&pinv, a), apply(&qinv, b)])))
        .collect();
    let d = HermitianDecomposition::new(shape, terms)?;
    let res = d.residual(h)?;
    if res > tol.rd_tol * h.norm() {
        return Err(Error::NoConvergence(format!("[2,2] decomposition residual {res:e}")));
    }
    Ok(d)
}

/// Builds the `[2,2]` tensor with flattening `[[A, C], [C, B]]`.
pub fn from_blocks(a: M2, b: M2, c: M2) -> HermitianTensor {
    let shape = Shape::new(vec![2, 2]).expect("valid");
    let mut data = vec![ZERO; 16];
    for i in 0..2 {
        for j in 0..2 {
            data[i * 4 + j] = C64::new(a[i][j], 0.0);
            data[(2 + i) * 4 + 2 + j] = C64::new(b[i][j], 0.0);
            data[i * 4 + 2 + j] = C64::new(c[i][j], 0.0);
            data[(2 + j) * 4 + i] = C64::new(c[i][j], 0.0);
        }
    }
    HermitianTensor::symmetrized(shape, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn hankel() -> HermitianTensor {
        let s = Shape::new(vec![2, 2]).unwrap();
        let mut data = Vec::new();
        for f in 0..4 {
            for g in 0..4 {
                let (i, j) = (s.multi(f), s.multi(g));
                data.push(C64::new((i[0] + i[1] + j[0] + j[1]) as f64, 0.0));
            }
        }
        HermitianTensor::new(s, data, 1e-12).unwrap()
    }

    #[test]
    fn hankel_is_decomposable() {
        assert!(is_real_decomposable(&hankel(), &tol()).unwrap().decomposable);
        let d = real_decompose(&hankel(), &tol()).unwrap();
        assert!(d.residual(&hankel()).unwrap() <= 1e-9);
        assert!(d.len() <= 18);
        assert!(d.is_real(0.0));
    }

    #[test]
    fn e1122_witness() {
        let s = Shape::new(vec![2, 2]).unwrap();
        let e = HermitianTensor::basis(s, &[1, 1], &[2, 2], C64::new(1.0, 0.0)).unwrap();
        let c = is_real_decomposable(&e, &tol()).unwrap();
        assert!(!c.decomposable);
        let w = c.witness.unwrap();
        assert_eq!((w.i, w.j, w.k, w.l), (vec![1, 1], vec![2, 2], vec![1, 2], vec![2, 1]));
        assert_eq!((w.left, w.right), (1.0, 0.0));
        assert!(matches!(real_decompose(&e, &tol()), Err(Error::NotRealDecomposable(_))));
    }

    #[test]
    fn complex_entry_rejected() {
        let s = Shape::new(vec![2]).unwrap();
        let e = HermitianTensor::basis(s, &[1], &[2], C64::new(0.0, 1.0)).unwrap();
        assert!(matches!(
            is_real_decomposable(&e, &tol()),
            Err(Error::RealityViolation(_))
        ));
    }

    #[test]
    fn dimensions() {
        let sh = |d: Vec<usize>| Shape::new(d).unwrap();
        assert_eq!((dim_rd(&sh(vec![2, 2])), dim_r(&sh(vec![2, 2]))), (9, 10));
        assert_eq!((dim_rd(&sh(vec![2, 2, 2])), dim_r(&sh(vec![2, 2, 2]))), (27, 36));
        assert_eq!((dim_rd(&sh(vec![4])), dim_r(&sh(vec![4]))), (10, 10));
    }

    #[test]
    fn diagonal_tensor_exact() {
        let s = Shape::new(vec![2, 3]).unwrap();
        let mut h = HermitianTensor::zeros(s.clone());
        for (idx, c) in [(vec![1, 1], 2.0), (vec![2, 3], -1.5)] {
            let e = HermitianTensor::basis(s.clone(), &idx, &idx, C64::new(c, 0.0)).unwrap();
            h = h.add(&e).unwrap();
        }
        let d = real_decompose(&h, &tol()).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.residual(&h).unwrap() < 1e-14);
    }

    #[test]
    fn identity_normal_form() {
        let h = from_blocks(I2, I2, [[0.0; 2]; 2]);
        let nf = normal_form_22(&h, &tol()).unwrap();
        assert_eq!(nf.s, 1);
        assert!(nf.d.iter().all(|x| x.abs() < 1e-14));
        assert_eq!(nf.u, [0.0, 0.0]);
        assert!(is_zero(
            &[
                [nf.b_tilde[0][0] - 1.0, nf.b_tilde[0][1]],
                [nf.b_tilde[1][0], nf.b_tilde[1][1] - 1.0]
            ],
            1e-12
        ));
        let d = real_decompose_22(&h, &tol()).unwrap();
        assert!(d.len() <= 4);
    }

    #[test]
    fn case_two_gives_eigenvalues() {
        let c = [[1.0, 2.0], [2.0, -2.0]];
        let h = from_blocks([[0.0; 2]; 2], [[0.0; 2]; 2], c);
        let nf = normal_form_22(&h, &tol()).unwrap();
        assert_eq!(nf.s, 0);
        let mut d = nf.d;
        d.sort_by(f64::total_cmp);
        assert!((d[0] + 3.0).abs() < 1e-12 && (d[1] - 2.0).abs() < 1e-12);
        assert!(nf.residual(&h).unwrap() < 1e-12);
        let dec = real_decompose_22(&h, &tol()).unwrap();
        assert_eq!(dec.len(), 4);
    }

    #[test]
    fn indefinite_block_needs_shift() {
        // Shifting along the first axis cannot make diag(1,-1) definite.
        let h = from_blocks(
            [[1.0, 0.0], [0.0, -1.0]],
            [[0.0, 1.0], [1.0, 0.0]],
            [[0.5, 0.3], [0.3, 2.0]],
        );
        let nf = normal_form_22(&h, &tol()).unwrap();
        assert!(nf.residual(&h).unwrap() <= 1e-8);
        let d = real_decompose_22(&h, &tol()).unwrap();
        assert!(d.len() <= 5);
        assert!(d.residual(&h).unwrap() <= 1e-8 * h.norm());
    }

    #[test]
    fn negative_semidefinite_block() {
        let h = from_blocks(
            [[-1.0, 0.0], [0.0, 0.0]],
            [[0.0, 0.0], [0.0, 3.0]],
            [[1.0, 0.0], [0.0, 1.0]],
        );
        let nf = normal_form_22(&h, &tol()).unwrap();
        assert_eq!(nf.s, -1);
        assert!(real_decompose_22(&h, &tol()).unwrap().residual(&h).unwrap() <= 1e-8 * h.norm());
    }

    #[test]
    fn not_shape_22() {
        let h = HermitianTensor::identity(Shape::new(vec![2, 3]).unwrap());
        assert_eq!(normal_form_22(&h, &tol()), Err(Error::NotShape22));
    }
}
