//! Hermitian decompositions: assembly, normalization, Kruskal certificates,
//! closed-form decompositions of basis tensors and the
//! simultaneous-diagonalization decomposer.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::flatten::cubic_flatten;
use crate::linalg::{eig_general, herm_eig, matrix_rank, rank1_factor, solve, solve_real_sym, CMat};
use crate::tensor::{vdot, vec_norm, DenseTensor, HermitianTensor, Shape, VectorTuple};
use crate::tol::Tolerances;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Norm at or below which a tensor is treated as zero.
pub const DEGENERATE_NORM: f64 = 1e-14;

/// One term `lambda [u1, ..., um]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub lambda: f64,
    pub vectors: VectorTuple,
}

impl Term {
    pub fn new(lambda: f64, vectors: VectorTuple) -> Self {
        Self { lambda, vectors }
    }

    pub fn tensor(&self) -> Result<HermitianTensor> {
        HermitianTensor::rank1(self.lambda, &self.vectors)
    }
}

/// A finite sum of rank-1 Hermitian terms of a common shape.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianDecomposition {
    shape: Shape,
    terms: Vec<Term>,
}

impl HermitianDecomposition {
    pub fn new(shape: Shape, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            t.vectors.check(&shape)?;
            if !t.lambda.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self { shape, terms })
    }

    pub fn empty(shape: Shape) -> Self {
        Self {
            shape,
            terms: Vec::new(),
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.terms.iter().all(|t| t.vectors.is_real(tol))
    }

    pub fn is_positive(&self) -> bool {
        self.terms.iter().all(|t| t.lambda > 0.0)
    }

    /// Sum of the rank-1 terms.
    pub fn assemble(&self) -> HermitianTensor {
        let mut out = HermitianTensor::zeros(self.shape.clone());
        for t in &self.terms {
            let r1 = t.tensor().expect("terms validated on construction");
            out.add_assign_scaled(&r1, 1.0);
        }
        out
    }

    /// `||assemble(self) - h||`.
    pub fn residual(&self, h: &HermitianTensor) -> Result<f64> {
        Ok(self.assemble().sub(h)?.norm())
    }

    /// Unit vectors with a real positive leading entry; the scale moves into
    /// `lambda` as `|c|^2`. Terms with a zero vector or zero weight are dropped.
    pub fn normalize(&self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len());
        'terms: for t in &self.terms {
            let mut lambda = t.lambda;
            let mut vecs = Vec::with_capacity(t.vectors.order());
            for v in t.vectors.vectors() {
                let nv = vec_norm(v);
                if nv == 0.0 {
                    continue 'terms;
                }
                let lead = v.iter().find(|z| z.norm() > 1e-12 * nv).copied().unwrap_or(ONE);
                let phase = lead.conj() / lead.norm();
                lambda *= nv * nv;
                vecs.push(v.iter().map(|z| z * phase / nv).collect());
            }
            if lambda == 0.0 {
                continue;
            }
            terms.push(Term::new(lambda, VectorTuple::new(vecs)));
        }
        Self {
            shape: self.shape.clone(),
            terms,
        }
    }

    /// Kruskal uniqueness test on the per-mode factor matrices.
    pub fn kruskal_certify(&self, tol: &Tolerances) -> Result<KruskalReport> {
        let m = self.shape.order();
        let r = self.terms.len();
        for (i, t) in self.terms.iter().enumerate() {
            if t.vectors.norms().contains(&0.0) {
                return Err(Error::DegenerateTerm(i + 1));
            }
        }
        let k_ranks: Vec<usize> = (0..m)
            .map(|k| {
                let cols: Vec<Vec<C64>> = self.terms.iter().map(|t| t.vectors.vectors()[k].clone()).collect();
                kruskal_rank(&cols, tol.rank_tol)
            })
            .collect();
        let sum: usize = k_ranks.iter().sum();
        let margin = sum as i64 - (r + m) as i64;
        Ok(KruskalReport {
            k_ranks,
            rank: r,
            certified: m > 1 && r > 0 && margin >= 0,
            margin,
        })
    }
}

/// Outcome of the Kruskal test.
#[derive(Clone, Debug, PartialEq)]
pub struct KruskalReport {
    /// Kruskal rank of each mode's factor matrix.
    pub k_ranks: Vec<usize>,
    /// Number of terms tested.
    pub rank: usize,
    /// True when the sum of k-ranks reaches `rank + m`; the decomposition is
    /// then unique and its length is the Hermitian rank.
    pub certified: bool,
    pub margin: i64,
}

/// Largest `k` such that every `k` of the given vectors are independent.
pub fn kruskal_rank(vectors: &[Vec<C64>], rel_tol: f64) -> usize {
    let r = vectors.len();
    if r == 0 {
        return 0;
    }
    let n = vectors[0].len();
    let scale = vectors.iter().map(|v| vec_norm(v)).fold(0.0, f64::max);
    if vectors
        .iter()
        .any(|v| vec_norm(v) <= rel_tol * scale || vec_norm(v) == 0.0)
    {
        return 0;
    }
    let mut best = 1;
    for k in 2..=r.min(n) {
        let mut all = true;
        for_each_subset(r, k, &mut |sub| {
            let m = CMat::from_fn(n, k, |i, j| vectors[sub[j]][i]);
            if matrix_rank(&m, rel_tol).unwrap_or(0) < k {
                all = false;
            }
            all
        });
        if !all {
            break;
        }
        best = k;
    }
    best
}

fn for_each_subset(r: usize, k: usize, f: &mut impl FnMut(&[usize]) -> bool) {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return;
        }
        let mut i = k;
        while i > 0 && idx[i - 1] == r - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// `ceil(N^2 / (2 (n1 + ... + nm - m) + 1))`.
pub fn expected_hrank(shape: &Shape) -> u64 {
    let n = shape.size() as u64;
    let s: u64 = shape.dims().iter().map(|&d| d as u64 - 1).sum();
    (n * n).div_ceil(2 * s + 1)
}

/// Closed-form `2d`-term decomposition of `E^{IJ}(c)` restricted to the `d`
/// modes where `I` and `J` differ, each mode reduced to two coordinates.
#[derive(Clone, Debug)]
pub struct BasisDecompPlan {
    pub order: usize,
    /// `(coefficient, one 2-vector per differing mode)`.
    pub terms: Vec<(f64, Vec<[C64; 2]>)>,
}

impl BasisDecompPlan {
    pub fn new(order: usize, c: C64) -> Self {
        let d = order;
        let mut terms = Vec::with_capacity(2 * d);
        for k in 0..=d {
            let coef = if k % 2 == 0 { 1.0 } else { -1.0 } / (2.0 * d as f64);
            let w = C64::from_polar(1.0, k as f64 * PI / d as f64);
            let first = |z: C64| [c, z];
            let rest = |z: C64| [ONE, z];
            let mut a = vec![first(w)];
            a.extend((1..d).map(|_| rest(w)));
            terms.push((coef, a));
            if k > 0 && k < d {
                let mut b = vec![first(w.conj())];
                b.extend((1..d).map(|_| rest(w.conj())));
                terms.push((coef, b));
            }
        }
        Self { order: d, terms }
    }
}

/// A Hermitian rank decomposition of the basis tensor `E^{IJ}(c)`.
///
/// One term when `I = J`, otherwise `2d` terms where `d` counts the modes in
/// which `I` and `J` differ.
pub fn basis_decomposition(i: &[usize], j: &[usize], c: C64, shape: &Shape) -> Result<HermitianDecomposition> {
    let a = shape.flat(i)?;
    let b = shape.flat(j)?;
    let dims = shape.dims();
    if a == b && c.im != 0.0 {
        return Err(Error::NonRealDiagonal);
    }
    if c == ZERO {
        return Ok(HermitianDecomposition::empty(shape.clone()));
    }
    let unit = |n: usize, p: usize| {
        let mut v = vec![ZERO; n];
        v[p - 1] = ONE;
        v
    };
    if a == b {
        let vecs = dims.iter().zip(i).map(|(&n, &p)| unit(n, p)).collect();
        return HermitianDecomposition::new(shape.clone(), vec![Term::new(c.re, VectorTuple::new(vecs))]);
    }
    let differ: Vec<usize> = (0..dims.len()).filter(|&k| i[k] != j[k]).collect();
    for &k in &differ {
        if dims[k] < 2 {
            return Err(Error::DimensionTooSmall { mode: k + 1 });
        }
    }
    let plan = BasisDecompPlan::new(differ.len(), c);
    let mut terms = Vec::with_capacity(plan.terms.len());
    for (coef, local) in &plan.terms {
        let mut vecs: Vec<Vec<C64>> = dims.iter().zip(i).map(|(&n, &p)| unit(n, p)).collect();
        for (slot, &k) in differ.iter().enumerate() {
            let mut v = vec![ZERO; dims[k]];
            v[i[k] - 1] = local[slot][0];
            v[j[k] - 1] = local[slot][1];
            vecs[k] = v;
        }
        terms.push(Term::new(*coef, VectorTuple::new(vecs)));
    }
    HermitianDecomposition::new(shape.clone(), terms)
}

/// Result of the simultaneous-diagonalization decomposer.
#[derive(Clone, Debug)]
pub enum JennrichOutcome {
    Decomposed(HermitianDecomposition),
    Unknown(String),
}

/// Recovers a Hermitian decomposition of length at most `rmax` from the
/// cubic flattening by diagonalizing two random slice mixtures.
pub fn jennrich_decompose(h: &HermitianTensor, rmax: usize, seed: u64, tol: &Tolerances) -> Result<JennrichOutcome> {
    let cubic = cubic_flatten(h);
    let (n1, n2, n3) = cubic.dims();
    if rmax > n3 {
        return Err(Error::RankBudgetExceeded { rmax, limit: n3 });
    }
    let shape = h.shape().clone();
    if h.norm() <= DEGENERATE_NORM {
        return Ok(JennrichOutcome::Decomposed(HermitianDecomposition::empty(shape)));
    }
    // Work in the permuted mode order used by the cubic flattening.
    let flat = CMat::from_vec(n1, n1, cubic.data().to_vec())?;
    let pdims: Vec<usize> = cubic.mode_order.iter().map(|&k| h.dims()[k]).collect();
    let eig = herm_eig(&flat)?;
    let r = crate::linalg::rank_from_singular(&sorted_abs(&eig.values), tol.rank_tol);
    if r > rmax {
        return Ok(JennrichOutcome::Unknown(format!(
            "flattening rank {r} exceeds the budget {rmax}"
        )));
    }
    if r > n2 {
        return Ok(JennrichOutcome::Unknown(format!(
            "rank {r} exceeds the middle dimension {n2}"
        )));
    }
    // Column space of the a_j: leading eigenvectors of the flattening.
    let mut order: Vec<usize> = (0..n1).collect();
    order.sort_by(|&x, &y| eig.values[y].abs().total_cmp(&eig.values[x].abs()));
    let u = CMat::from_fn(n1, r, |i, j| eig.vectors[(i, order[j])]);
    // Column space of the b_j: leading left singular vectors of the mode-2 unfolding.
    let y = CMat::from_fn(n2, n1 * n3, |b, col| cubic.get(col / n3, b, col % n3));
    let yy = herm_eig(&y.matmul(&y.adjoint()))?;
    let w = CMat::from_fn(n2, r, |i, j| yy.vectors[(i, n2 - 1 - j)]);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = || -> Vec<f64> {
        let v: Vec<f64> = (0..n3).map(|_| StandardNormal.sample(&mut rng)).collect();
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / nv).collect()
    };
    let w1 = weights();
    let w2 = weights();
    let mix = |wt: &[f64]| CMat::from_fn(n1, n2, |a, b| (0..n3).map(|l| cubic.get(a, b, l) * wt[l]).sum());
    let wc = w.conj();
    let ud = u.adjoint();
    let m1 = ud.matmul(&mix(&w1)).matmul(&wc);
    let m2 = ud.matmul(&mix(&w2)).matmul(&wc);
    let m2inv = solve(&m2, &CMat::identity(r))?;
    let (vals, vecs) = eig_general(&m1.matmul(&m2inv))?;
    let scale = vals.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    for p in 0..r {
        for q in p + 1..r {
            if (vals[p] - vals[q]).norm() <= tol.eig_gap_tol * scale {
                return Err(Error::DegenerateSlices(format!(
                    "generalized eigenvalues {} and {} coincide",
                    p + 1,
                    q + 1
                )));
            }
        }
    }
    let a = u.matmul(&vecs);
    let mut tuples = Vec::with_capacity(r);
    for j in 0..r {
        let aj = DenseTensor::new(pdims.clone(), a.column(j))?;
        let (pus, res) = rank1_factor(&aj)?;
        let mut us = vec![Vec::new(); pus.len()];
        for (slot, v) in cubic.mode_order.iter().zip(pus) {
            us[*slot] = v;
        }
        if res > 1e-6 {
            return Ok(JennrichOutcome::Unknown(format!(
                "recovered factor {} is not rank-1 (residual {res:e})",
                j + 1
            )));
        }
        tuples.push(VectorTuple::new(us).normalized());
    }
    let lambdas = fit_weights(h, &tuples)?;
    let terms = lambdas
        .into_iter()
        .zip(tuples)
        .filter(|(l, _)| *l != 0.0)
        .map(|(l, t)| Term::new(l, t))
        .collect();
    let d = HermitianDecomposition::new(shape, terms)?.normalize();
    let res = d.residual(h)?;
    if res > tol.cp_tol * h.norm() {
        return Ok(JennrichOutcome::Unknown(format!("residual {res:e} exceeds tolerance")));
    }
    Ok(JennrichOutcome::Decomposed(d))
}

fn sorted_abs(v: &[f64]) -> Vec<f64> {
    let mut s: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Least-squares real weights for fixed unit rank-1 directions.
pub(crate) fn fit_weights(h: &HermitianTensor, tuples: &[VectorTuple]) -> Result<Vec<f64>> {
    let r = tuples.len();
    let qs: Vec<Vec<C64>> = tuples.iter().map(VectorTuple::kron).collect();
    let mut g = vec![0.0; r * r];
    for p in 0..r {
        for q in 0..r {
            g[p * r + q] = vdot(&qs[p], &qs[q]).norm_sqr();
        }
    }
    let rhs: Vec<f64> = qs.iter().map(|q| h.quad(q)).collect();
    solve_real_sym(&g, &rhs)
}
