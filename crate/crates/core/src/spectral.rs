//! Hermitian eigentuples and spectral decomposability.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::decomposition::{HermitianDecomposition, Term};
use crate::error::{Error, Result};
use crate::exec::{map_jobs, Execution};
use crate::linalg::{herm_eig, rank1_factor, CMat};
use crate::tensor::{vdot, vec_norm, DenseTensor, HermitianTensor, VectorTuple};
use crate::tol::Tolerances;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Field over which eigenvectors (and psd or separability questions) range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Complex,
    Real,
}

impl Field {
    pub fn name(self) -> &'static str {
        match self {
            Field::Complex => "COMPLEX",
            Field::Real => "REAL",
        }
    }
}

impl std::str::FromStr for Field {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "complex" | "c" => Ok(Field::Complex),
            "real" | "r" => Ok(Field::Real),
            _ => Err(format!("unknown field '{s}' (expected complex or real)")),
        }
    }
}

/// The `n_k x n_k` matrix `H_k` with `(H_k)_{ab}` summing `H_IJ` over
/// `i_k = a`, `j_k = b`, weighted by `prod_{l != k} conj(x_l[i_l]) x_l[j_l]`.
pub(crate) fn mode_matrix(h: &HermitianTensor, x: &[Vec<C64>], k: usize) -> CMat {
    let shape = h.shape();
    let n = h.size();
    let nk = shape.dims()[k];
    let mut pos = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for f in 0..n {
        let idx = shape.multi0(f);
        let mut p = C64::new(1.0, 0.0);
        for (l, &i) in idx.iter().enumerate() {
            if l != k {
                p *= x[l][i];
            }
        }
        pos.push(idx[k]);
        w.push(p);
    }
    let mut out = CMat::zeros(nk, nk);
    for a in 0..n {
        if w[a] == ZERO {
            continue;
        }
        let wa = w[a].conj();
        let row = &h.data()[a * n..(a + 1) * n];
        for (b, hab) in row.iter().enumerate() {
            if *hab != ZERO && w[b] != ZERO {
                out[(pos[a], pos[b])] += hab * wa * w[b];
            }
        }
    }
    out
}

/// `H_k x_k` for 1-based mode `k`; satisfies `x_k* contract_k = eval_poly(h, x)`.
pub fn contract_k(h: &HermitianTensor, x: &VectorTuple, k: usize) -> Result<Vec<C64>> {
    x.check(h.shape())?;
    if k == 0 || k > h.shape().order() {
        return Err(Error::ShapeMismatch(format!(
            "mode {k} outside 1..={}",
            h.shape().order()
        )));
    }
    let hk = mode_matrix(h, x.vectors(), k - 1);
    Ok(hk.mul_vec(&x.vectors()[k - 1]))
}

/// A stationary point of `h` on the product of unit spheres.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenTuple {
    pub lambda: f64,
    pub vectors: VectorTuple,
    /// Per-mode KKT residuals `||H_k u_k - lambda u_k||` (real part of `H_k`
    /// for real searches).
    pub residuals: Vec<f64>,
}

impl EigenTuple {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Multistart configuration for [`herm_eigenpairs`].
#[derive(Clone, Debug)]
pub struct EigenSearch {
    pub seed: u64,
    pub field: Field,
    pub starts: usize,
    pub max_sweeps: usize,
    pub exec: Execution,
}

impl Default for EigenSearch {
    fn default() -> Self {
        Self {
            seed: 0,
            field: Field::Complex,
            starts: 16,
            max_sweeps: 500,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenReport {
    /// Distinct converged tuples, ascending by `lambda`.
    pub tuples: Vec<EigenTuple>,
    /// Runs (start and direction) that hit the sweep cap.
    pub failed_runs: usize,
    pub total_runs: usize,
}

impl EigenReport {
    /// Smallest eigenvalue found; a valid upper bound on the minimum of
    /// `h` over unit vectors, never a certificate.
    pub fn best_min(&self) -> Option<&EigenTuple> {
        self.tuples.first()
    }

    pub fn best_max(&self) -> Option<&EigenTuple> {
        self.tuples.last()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Direction {
    Max,
    Min,
}

/// Block-coordinate search for Hermitian eigentuples from `starts` random
/// points, running a maximizing and a minimizing pass from each.
pub fn herm_eigenpairs(h: &HermitianTensor, search: &EigenSearch, tol: &Tolerances) -> EigenReport {
    let jobs: Vec<(usize, Direction)> = (0..search.starts.max(1))
        .flat_map(|s| [(s, Direction::Max), (s, Direction::Min)])
        .collect();
    let total = jobs.len();
    let found = map_jobs(search.exec, jobs, |(start, dir)| {
        let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
        rng.set_stream(start as u64);
        let x0 = VectorTuple::random_unit(h.shape(), &mut rng, search.field == Field::Real);
        block_search(h, x0, dir, search, tol)
    });
    let mut failed = 0;
    let mut tuples: Vec<EigenTuple> = Vec::new();
    for t in found {
        match t {
            None => failed += 1,
            Some(t) => {
                if !tuples.iter().any(|u| same_tuple(u, &t)) {
                    tuples.push(t);
                }
            }
        }
    }
    tuples.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    EigenReport {
        tuples,
        failed_runs: failed,
        total_runs: total,
    }
}

fn same_tuple(a: &EigenTuple, b: &EigenTuple) -> bool {
    (a.lambda - b.lambda).abs() <= 1e-6
        && a.vectors
            .vectors()
            .iter()
            .zip(b.vectors.vectors())
            .all(|(u, v)| vdot(u, v).norm() >= 1.0 - 1e-6)
}

fn block_search(
    h: &HermitianTensor,
    x0: VectorTuple,
    dir: Direction,
    search: &EigenSearch,
    tol: &Tolerances,
) -> Option<EigenTuple> {
    let m = h.shape().order();
    let real = search.field == Field::Real;
    let mut x = x0.into_vectors();
    let local = |x: &[Vec<C64>], k: usize| {
        let hk = mode_matrix(h, x, k);
        if real {
            hk.real_part()
        } else {
            hk
        }
    };
    for _ in 0..search.max_sweeps {
        for k in 0..m {
            let hk = local(&x, k);
            let e = herm_eig(&hk).ok()?;
            let col = match dir {
                Direction::Max => hk.rows() - 1,
                Direction::Min => 0,
            };
            let mut v = e.vector(col);
            if real {
                for z in v.iter_mut() {
                    *z = C64::new(z.re, 0.0);
                }
                let nv = vec_norm(&v);
                v.iter_mut().for_each(|z| *z /= nv);
            }
            x[k] = v;
        }
        let t = VectorTuple::new(x.clone());
        let lambda = h.eval_poly(&t).ok()?;
        let residuals: Vec<f64> = (0..m)
            .map(|k| {
                let r = local(&x, k).mul_vec(&x[k]);
                r.iter()
                    .zip(&x[k])
                    .map(|(a, b)| (a - b * lambda).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        if residuals.iter().all(|&r| r <= tol.eig_tuple_tol) {
            return Some(EigenTuple {
                lambda,
                vectors: t,
                residuals,
            });
        }
    }
    None
}

/// One term of the spectral decomposition of the flattening.
#[derive(Clone, Debug)]
pub struct OrthoTerm {
    pub lambda: f64,
    /// Unit eigenvector reshaped to `n1 x ... x nm`.
    pub tensor: DenseTensor,
    /// Relative residual of the best rank-1 approximation of `tensor`.
    pub rank1_residual: f64,
    /// Rank-1 factors of `tensor` (scale in the first vector).
    pub factors: Vec<Vec<C64>>,
}

#[derive(Clone, Debug)]
pub struct OrthoDecomp {
    pub terms: Vec<OrthoTerm>,
}

impl OrthoDecomp {
    pub fn reconstruct(&self, h: &HermitianTensor) -> HermitianTensor {
        let n = h.size();
        let mut data = vec![ZERO; n * n];
        for t in &self.terms {
            let q = t.tensor.data();
            for a in 0..n {
                for b in 0..n {
                    data[a * n + b] += q[a] * q[b].conj() * t.lambda;
                }
            }
        }
        HermitianTensor::symmetrized(h.shape().clone(), data)
    }

    pub fn unit_rank1(&self, tol: &Tolerances) -> Vec<bool> {
        self.terms.iter().map(|t| t.rank1_residual <= tol.r1_tol).collect()
    }
}

/// Spectral decomposition of the flattening, eigenvectors reshaped as tensors.
/// Eigenvalues with `|lambda| <= rankTol * max|lambda|` are dropped; terms are
/// ordered by decreasing `|lambda|`.
pub fn orthogonal_decompose(h: &HermitianTensor, tol: &Tolerances) -> Result<OrthoDecomp> {
    let e = herm_eig(&h.to_matrix())?;
    let cut = tol.rank_tol * e.spectral_radius();
    let mut idx: Vec<usize> = (0..e.values.len()).filter(|&k| e.values[k].abs() > cut).collect();
    idx.sort_by(|&a, &b| e.values[b].abs().total_cmp(&e.values[a].abs()));
    let mut terms = Vec::with_capacity(idx.len());
    for k in idx {
        let tensor = DenseTensor::new(h.dims().to_vec(), e.vector(k))?;
        let (factors, rank1_residual) = rank1_factor(&tensor)?;
        terms.push(OrthoTerm {
            lambda: e.values[k],
            tensor,
            rank1_residual,
            factors,
        });
    }
    Ok(OrthoDecomp { terms })
}

#[derive(Clone, Debug)]
pub enum UnitaryVerdict {
    Yes(HermitianDecomposition),
    /// 1-based index of the first term whose eigenvector is not rank-1.
    No {
        term: usize,
        residual: f64,
    },
    Inconclusive(String),
}

/// Decides whether `h` has a decomposition with orthonormal rank-1 terms,
/// which is decidable from the flattening when its nonzero spectrum is simple.
pub fn unitary_decomposable(h: &HermitianTensor, tol: &Tolerances) -> Result<UnitaryVerdict> {
    let od = orthogonal_decompose(h, tol)?;
    let scale = od.terms.iter().map(|t| t.lambda.abs()).fold(0.0, f64::max);
    for i in 0..od.terms.len() {
        for j in i + 1..od.terms.len() {
            if (od.terms[i].lambda - od.terms[j].lambda).abs() <= tol.eig_gap_tol * scale {
                return Ok(UnitaryVerdict::Inconclusive(format!(
                    "repeated eigenvalue {} of the flattening",
                    od.terms[i].lambda
                )));
            }
        }
    }
    let mut terms = Vec::with_capacity(od.terms.len());
    for (i, t) in od.terms.iter().enumerate() {
        if t.rank1_residual > tol.r1_tol {
            return Ok(UnitaryVerdict::No {
                term: i + 1,
                residual: t.rank1_residual,
            });
        }
        terms.push(Term::new(t.lambda, VectorTuple::new(t.factors.clone())));
    }
    let d = HermitianDecomposition::new(h.shape().clone(), terms)?.normalize();
    Ok(UnitaryVerdict::Yes(d))
}
