//! Separability: positive decompositions, Kronecker psd forms, dual witnesses
//! and a heuristic search.

use std::collections::HashMap;

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::decomposition::{fit_weights, HermitianDecomposition, Term, DEGENERATE_NORM};
use crate::error::{Error, Result};
use crate::exec::{map_jobs, Execution};
use crate::linalg::{herm_eig, CMat};
use crate::psd_sos::{hsos_test, GramCertificate, HsosOutcome};
use crate::real_herm::is_real_decomposable;
use crate::spectral::{mode_matrix, Field};
use crate::tensor::{vdot, HermitianTensor, Shape, VectorTuple};
use crate::tol::Tolerances;

/// Clamp applied to fitted weights each sweep.
const LAMBDA_FLOOR: f64 = 1e-12;

/// `true` iff all weights are positive, the residual is within
/// `sepTol * ||a||`, and (for the real field) all vectors are real.
pub fn verify_positive_decomposition(
    d: &HermitianDecomposition,
    a: &HermitianTensor,
    field: Field,
    tol: &Tolerances,
) -> Result<bool> {
    if d.shape() != a.shape() {
        return Err(Error::ShapeMismatch(format!("{} vs {}", d.shape(), a.shape())));
    }
    if !d.is_positive() {
        return Ok(false);
    }
    if field == Field::Real && !d.is_real(tol.sym_tol) {
        return Ok(false);
    }
    let res = d.residual(a)?;
    Ok(res <= tol.sep_tol * a.norm().max(DEGENERATE_NORM))
}

/// `m(A) = sum_i B_i1 [x] ... [x] B_im` with psd blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct PsdKronDecomp {
    pub terms: Vec<Vec<CMat>>,
}

impl PsdKronDecomp {
    pub fn new(terms: Vec<Vec<CMat>>) -> Self {
        Self { terms }
    }

    fn check_blocks(&self, shape: &Shape, tol: &Tolerances) -> Result<()> {
        for (t, blocks) in self.terms.iter().enumerate() {
            if blocks.len() != shape.order() {
                return Err(Error::ShapeMismatch(format!(
                    "term {} has {} blocks for order {}",
                    t + 1,
                    blocks.len(),
                    shape.order()
                )));
            }
            for (k, (b, &n)) in blocks.iter().zip(shape.dims()).enumerate() {
                if b.rows() != n || b.cols() != n {
                    return Err(Error::ShapeMismatch(format!(
                        "block ({}, {}) is {}x{}, expected {n}x{n}",
                        t + 1,
                        k + 1,
                        b.rows(),
                        b.cols()
                    )));
                }
                if b.hermitian_deviation() > tol.sym_tol * (1.0 + b.max_abs()) {
                    return Err(Error::BlockNotPsd {
                        term: t + 1,
                        mode: k + 1,
                    });
                }
                let e = herm_eig(&b.hermitian_part())?;
                if e.min() < -tol.eig_tol * e.spectral_radius().max(1.0) {
                    return Err(Error::BlockNotPsd {
                        term: t + 1,
                        mode: k + 1,
                    });
                }
            }
        }
        Ok(())
    }

    /// `sum_i B_i1 [x] ... [x] B_im`.
    pub fn kron_sum(&self, shape: &Shape) -> CMat {
        let n = shape.size();
        let mut sum = CMat::zeros(n, n);
        for blocks in &self.terms {
            let mut k = CMat::identity(1);
            for b in blocks {
                k = k.kron(b);
            }
            sum = sum.add(&k);
        }
        sum
    }

    /// Checks psd blocks and that the Kronecker sum equals `m(a)` within
    /// `sepTol * ||a||`.
    pub fn verify(&self, a: &HermitianTensor, tol: &Tolerances) -> Result<bool> {
        self.check_blocks(a.shape(), tol)?;
        let diff = self.kron_sum(a.shape()).sub(&a.to_matrix()).frob_norm();
        Ok(diff <= tol.sep_tol * a.norm().max(DEGENERATE_NORM))
    }

    /// Splits every block spectrally and expands the product into positive
    /// rank-1 terms.
    pub fn to_decomposition(&self, shape: &Shape, tol: &Tolerances) -> Result<HermitianDecomposition> {
        self.check_blocks(shape, tol)?;
        let mut terms = Vec::new();
        for blocks in &self.terms {
            let mut parts: Vec<Vec<(f64, Vec<C64>)>> = Vec::with_capacity(blocks.len());
            for b in blocks {
                let e = herm_eig(&b.hermitian_part())?;
                let cut = tol.eig_tol * e.spectral_radius();
                let keep: Vec<(f64, Vec<C64>)> = (0..e.values.len())
                    .filter(|&i| e.values[i] > cut)
                    .map(|i| (e.values[i], e.vector(i)))
                    .collect();
                parts.push(keep);
            }
            if parts.iter().any(Vec::is_empty) {
                continue;
            }
            let mut combos: Vec<(f64, Vec<Vec<C64>>)> = vec![(1.0, Vec::new())];
            for mode in &parts {
                let mut next = Vec::with_capacity(combos.len() * mode.len());
                for (lam, vecs) in &combos {
                    for (mu, v) in mode {
                        let mut vs = vecs.clone();
                        vs.push(v.clone());
                        next.push((lam * mu, vs));
                    }
                }
                combos = next;
            }
            for (lam, vecs) in combos {
                terms.push(Term::new(lam, VectorTuple::new(vecs)));
            }
        }
        HermitianDecomposition::new(shape.clone(), terms)
    }
}

#[derive(Clone, Debug)]
pub enum DualCheck {
    Entangled { inner: f64, certificate: GramCertificate },
    Inconclusive { inner: f64, reason: String },
}

/// `b` separates `a` from the separable cone when `b` is a Hermitian sum of
/// squares and `<a, b> < -witTol`.
pub fn dual_witness_check(a: &HermitianTensor, b: &HermitianTensor, tol: &Tolerances) -> Result<DualCheck> {
    let inner = a.inner(b, f64::INFINITY)?;
    match hsos_test(b, tol)? {
        HsosOutcome::Hsos(certificate) if inner < -tol.wit_tol => Ok(DualCheck::Entangled { inner, certificate }),
        HsosOutcome::Hsos(_) => Ok(DualCheck::Inconclusive {
            inner,
            reason: "inner product is not negative".into(),
        }),
        HsosOutcome::NotHsos { .. } => Ok(DualCheck::Inconclusive {
            inner,
            reason: "witness is not a Hermitian sum of squares".into(),
        }),
    }
}

/// `b(x, x) = 0` for all real `x`: the real parts of `b` sum to zero over
/// every class of index pairs that give the same real monomial.
pub fn vanishes_on_reals(b: &HermitianTensor, tol: f64) -> bool {
    let shape = b.shape();
    let n = b.size();
    let mut sums: HashMap<Vec<(usize, usize)>, f64> = HashMap::new();
    for p in 0..n {
        let i = shape.multi0(p);
        for q in 0..n {
            let j = shape.multi0(q);
            let key = i.iter().zip(&j).map(|(&x, &y)| (x.min(y), x.max(y))).collect();
            *sums.entry(key).or_insert(0.0) += b.at(p, q).re;
        }
    }
    sums.values().all(|s| s.abs() <= tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SepStatus {
    SeparableCertified,
    EntangledWitness,
    Unknown,
}

impl SepStatus {
    pub fn name(self) -> &'static str {
        match self {
            SepStatus::SeparableCertified => "SEPARABLE_CERTIFIED",
            SepStatus::EntangledWitness => "ENTANGLED_WITNESS",
            SepStatus::Unknown => "UNKNOWN",
        }
    }
}

#[derive(Clone, Debug)]
pub enum SepEvidence {
    Decomposition(HermitianDecomposition),
    /// A Hermitian sum of squares `b` with `<a, b> < 0`.
    Witness {
        b: HermitianTensor,
        certificate: GramCertificate,
        inner: f64,
    },
    /// A real-field witness: `b` vanishes on real points, so both `b` and
    /// `-b` are real psd, and `<a, b> < 0`.
    RealObstruction {
        b: HermitianTensor,
        inner: f64,
    },
    None,
}

#[derive(Clone, Debug)]
pub struct SepVerdict {
    pub status: SepStatus,
    pub field: Field,
    pub evidence: SepEvidence,
    pub notes: Vec<String>,
}

impl SepVerdict {
    fn unknown(field: Field, notes: Vec<String>) -> Self {
        Self {
            status: SepStatus::Unknown,
            field,
            evidence: SepEvidence::None,
            notes,
        }
    }

    /// Re-checks the evidence against `a` from scratch.
    pub fn reverify(&self, a: &HermitianTensor, tol: &Tolerances) -> Result<bool> {
        match (&self.status, &self.evidence) {
            (SepStatus::SeparableCertified, SepEvidence::Decomposition(d)) => {
                verify_positive_decomposition(d, a, self.field, tol)
            }
            (SepStatus::EntangledWitness, SepEvidence::Witness { b, .. }) => {
                Ok(matches!(dual_witness_check(a, b, tol)?, DualCheck::Entangled { .. }))
            }
            (SepStatus::EntangledWitness, SepEvidence::RealObstruction { b, .. }) => Ok(self.field == Field::Real
                && vanishes_on_reals(b, tol.sym_tol)
                && a.inner(b, f64::INFINITY)? < -tol.wit_tol),
            (SepStatus::Unknown, _) => Ok(true),
            _ => Ok(false),
        }
    }
}

/// Options for [`separable_search`].
#[derive(Clone, Debug)]
pub struct SepSearch {
    pub field: Field,
    pub seed: u64,
    pub starts: usize,
    pub iters: usize,
    pub exec: Execution,
}

impl Default for SepSearch {
    fn default() -> Self {
        Self {
            field: Field::Complex,
            seed: 0,
            starts: 8,
            iters: 500,
            exec: Execution::default(),
        }
    }
}

/// Rotates `v` so its largest entry is real positive, then drops the
/// imaginary parts. Exact for vectors that are real up to a phase.
fn real_phase(v: &[C64]) -> Vec<C64> {
    let lead = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(C64::new(1.0, 0.0));
    let ph = if lead.norm() > 0.0 {
        lead.conj() / lead.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    let w: Vec<C64> = v.iter().map(|z| C64::new((z * ph).re, 0.0)).collect();
    let n = crate::tensor::vec_norm(&w);
    if n > 0.0 {
        w.iter().map(|z| z / n).collect()
    } else {
        w
    }
}

struct AlsState {
    lambda: Vec<f64>,
    /// `vecs[i][k]`: unit vector of term `i` in mode `k`.
    vecs: Vec<Vec<Vec<C64>>>,
}

impl AlsState {
    fn decomposition(&self, shape: &Shape) -> Result<HermitianDecomposition> {
        let terms = self
            .lambda
            .iter()
            .zip(&self.vecs)
            .map(|(&l, v)| Term::new(l, VectorTuple::new(v.clone())))
            .collect();
        HermitianDecomposition::new(shape.clone(), terms)
    }
}

fn als_sweep(a: &HermitianTensor, st: &mut AlsState, field: Field) -> Result<()> {
    let r = st.lambda.len();
    let m = a.shape().order();
    for k in 0..m {
        // Normal equations G X = R with G_pq = prod_{l != k} |u_pl* u_ql|^2.
        let mut g = vec![0.0; r * r];
        for p in 0..r {
            for q in 0..r {
                g[p * r + q] = (0..m)
                    .filter(|&l| l != k)
                    .map(|l| vdot(&st.vecs[p][l], &st.vecs[q][l]).norm_sqr())
                    .product();
            }
        }
        let rhs: Vec<CMat> = (0..r).map(|p| mode_matrix(a, &st.vecs[p], k)).collect();
        let nk = a.dims()[k];
        let mut blocks = vec![CMat::zeros(nk, nk); r];
        for e in 0..nk * nk {
            let (x, y) = (e / nk, e % nk);
            let re: Vec<f64> = rhs.iter().map(|m| m[(x, y)].re).collect();
            let im: Vec<f64> = rhs.iter().map(|m| m[(x, y)].im).collect();
            let sre = crate::linalg::solve_real_sym(&g, &re)?;
            let sim = crate::linalg::solve_real_sym(&g, &im)?;
            for p in 0..r {
                blocks[p][(x, y)] = C64::new(sre[p], sim[p]);
            }
        }
        for (p, b) in blocks.into_iter().enumerate() {
            let b = match field {
                Field::Complex => b.hermitian_part(),
                Field::Real => b.hermitian_part().real_part(),
            };
            let e = herm_eig(&b)?;
            let top = e.vector(nk - 1);
            st.vecs[p][k] = match field {
                Field::Complex => top,
                Field::Real => real_phase(&top),
            };
            st.lambda[p] = e.max().max(LAMBDA_FLOOR);
        }
    }
    let tuples: Vec<VectorTuple> = st.vecs.iter().map(|v| VectorTuple::new(v.clone())).collect();
    let w = fit_weights(a, &tuples)?;
    if w.iter().all(|&x| x > 0.0) {
        st.lambda = w;
    }
    Ok(())
}

/// Levenberg-Marquardt on the unnormalized vectors `w_ik`, with term `i`
/// equal to `[w_i1, ..., w_im]` so the weights `prod_k |w_ik|^2` stay
/// positive. Moves off fixed points of the block update such as the
/// identity tensor.
fn lm_polish(a: &HermitianTensor, st: &AlsState, field: Field, iters: usize) -> Result<AlsState> {
    let shape = a.shape();
    let dims = shape.dims().to_vec();
    let m = dims.len();
    let r = st.lambda.len();
    let n = a.size();
    let cplx = field == Field::Complex;
    let per = if cplx { 2 } else { 1 };
    let mut w: Vec<Vec<Vec<C64>>> = st
        .vecs
        .iter()
        .zip(&st.lambda)
        .map(|(v, &l)| {
            let s = l.max(LAMBDA_FLOOR).powf(0.5 / m as f64);
            v.iter().map(|u| u.iter().map(|z| z * s).collect()).collect()
        })
        .collect();
    let target = a.to_matrix();
    let idx: Vec<Vec<usize>> = (0..n).map(|f| shape.multi0(f)).collect();
    let kron_of = |t: &Vec<Vec<C64>>| -> Vec<C64> {
        idx.iter()
            .map(|ix| ix.iter().enumerate().map(|(k, &i)| t[k][i]).product())
            .collect()
    };
    let residual = |w: &Vec<Vec<Vec<C64>>>| -> Vec<f64> {
        let zs: Vec<Vec<C64>> = w.iter().map(&kron_of).collect();
        let mut out = Vec::with_capacity(2 * n * n);
        for p in 0..n {
            for q in 0..n {
                let v: C64 = zs.iter().map(|z| z[p] * z[q].conj()).sum::<C64>() - target[(p, q)];
                out.push(v.re);
                out.push(v.im);
            }
        }
        out
    };
    let cost = |res: &[f64]| res.iter().map(|x| x * x).sum::<f64>();
    let nparams = r * dims.iter().sum::<usize>() * per;
    let goal = (1e-10 * a.norm().max(DEGENERATE_NORM)).powi(2);
    let mut res = residual(&w);
    let mut c = cost(&res);
    let mut mu = -1.0;
    for _ in 0..iters {
        if c <= goal {
            break;
        }
        let mut jac = vec![0.0; 2 * n * n * nparams];
        let mut col = 0;
        for wi in &w {
            let z = kron_of(wi);
            for k in 0..m {
                for aa in 0..dims[k] {
                    let g: Vec<C64> = idx
                        .iter()
                        .map(|ix| {
                            if ix[k] != aa {
                                return C64::new(0.0, 0.0);
                            }
                            ix.iter()
                                .enumerate()
                                .filter(|&(l, _)| l != k)
                                .map(|(l, &j)| wi[l][j])
                                .product()
                        })
                        .collect();
                    for part in 0..per {
                        let d = if part == 0 {
                            C64::new(1.0, 0.0)
                        } else {
                            C64::new(0.0, 1.0)
                        };
                        for p in 0..n {
                            for q in 0..n {
                                let v = d * g[p] * z[q].conj() + z[p] * (d * g[q]).conj();
                                let row = 2 * (p * n + q);
                                jac[row * nparams + col] = v.re;
                                jac[(row + 1) * nparams + col] = v.im;
                            }
                        }
                        col += 1;
                    }
                }
            }
        }
        let rows = 2 * n * n;
        let mut jtj = vec![0.0; nparams * nparams];
        let mut jtr = vec![0.0; nparams];
        for row in 0..rows {
            let jr = &jac[row * nparams..(row + 1) * nparams];
            for x in 0..nparams {
                if jr[x] == 0.0 {
                    continue;
                }
                jtr[x] -= jr[x] * res[row];
                for y in 0..nparams {
                    jtj[x * nparams + y] += jr[x] * jr[y];
                }
            }
        }
        if mu < 0.0 {
            let dmax = (0..nparams).map(|x| jtj[x * nparams + x]).fold(0.0, f64::max);
            mu = 1e-3 * dmax.max(1e-12);
        }
        let mut improved = false;
        for _ in 0..20 {
            let mut sys = jtj.clone();
            for x in 0..nparams {
                sys[x * nparams + x] += mu;
            }
            let step = crate::linalg::solve_real_sym(&sys, &jtr)?;
            let mut trial = w.clone();
            let mut col = 0;
            for ti in trial.iter_mut() {
                for v in ti.iter_mut() {
                    for z in v.iter_mut() {
                        z.re += step[col];
                        col += 1;
                        if cplx {
                            z.im += step[col];
                            col += 1;
                        }
                    }
                }
            }
            let tres = residual(&trial);
            let tc = cost(&tres);
            if tc < c {
                w = trial;
                res = tres;
                c = tc;
                mu = (mu / 3.0).max(1e-300);
                improved = true;
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    let mut lambda = Vec::with_capacity(r);
    let mut vecs = Vec::with_capacity(r);
    for wi in w {
        let norms: Vec<f64> = wi.iter().map(|v| crate::tensor::vec_norm(v)).collect();
        lambda.push(norms.iter().map(|x| x * x).product::<f64>().max(LAMBDA_FLOOR));
        vecs.push(
            wi.iter()
                .zip(&norms)
                .map(|(v, &nv)| {
                    if nv > 0.0 {
                        v.iter().map(|z| z / nv).collect()
                    } else {
                        let mut e = vec![C64::new(0.0, 0.0); v.len()];
                        e[0] = C64::new(1.0, 0.0);
                        e
                    }
                })
                .collect(),
        );
    }
    Ok(AlsState { lambda, vecs })
}

fn als_run(a: &HermitianTensor, r: usize, opts: &SepSearch, start: u64) -> Result<(HermitianDecomposition, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(start);
    let real = opts.field == Field::Real;
    let mut st = AlsState {
        lambda: vec![1.0; r],
        vecs: (0..r)
            .map(|_| VectorTuple::random_unit(a.shape(), &mut rng, real).into_vectors())
            .collect(),
    };
    let init = AlsState {
        lambda: st.lambda.clone(),
        vecs: st.vecs.clone(),
    };
    let scale = a.norm().max(DEGENERATE_NORM);
    let mut prev = f64::INFINITY;
    let mut best = (st.decomposition(a.shape())?, f64::INFINITY);
    for _ in 0..opts.iters {
        als_sweep(a, &mut st, opts.field)?;
        let d = st.decomposition(a.shape())?;
        let res = d.residual(a)? / scale;
        if res < best.1 {
            best = (d, res);
        }
        if res < 1e-10 || (prev.is_finite() && (prev - res).abs() <= 1e-12 * prev) {
            break;
        }
        prev = res;
    }
    // The block update can stall with all terms collapsed onto one; the
    // polish then restarts from the random initial point.
    for from in [&st, &init] {
        if best.1 <= 1e-10 {
            break;
        }
        let polished = lm_polish(a, from, opts.field, 200)?;
        let d = polished.decomposition(a.shape())?;
        let res = d.residual(a)? / scale;
        if res < best.1 {
            best = (d, res);
        }
    }
    Ok(best)
}

/// Alternating fitting of `r` positive rank-1 terms from several random
/// starts. Returns a certified decomposition or `UNKNOWN`.
pub fn separable_search(a: &HermitianTensor, r: usize, opts: &SepSearch, tol: &Tolerances) -> Result<SepVerdict> {
    let field = opts.field;
    if a.norm() <= DEGENERATE_NORM {
        return Ok(SepVerdict {
            status: SepStatus::SeparableCertified,
            field,
            evidence: SepEvidence::Decomposition(HermitianDecomposition::empty(a.shape().clone())),
            notes: vec!["zero tensor".into()],
        });
    }
    if r == 0 {
        return Err(Error::InvalidShape("search rank must be at least 1".into()));
    }
    let runs = map_jobs(opts.exec, (0..opts.starts as u64).collect(), |s| als_run(a, r, opts, s));
    let mut best: Option<(HermitianDecomposition, f64)> = None;
    for run in runs.into_iter().flatten() {
        if best.as_ref().is_none_or(|b| run.1 < b.1) {
            best = Some(run);
        }
    }
    let Some((d, res)) = best else {
        return Ok(SepVerdict::unknown(field, vec!["all starts failed".into()]));
    };
    if verify_positive_decomposition(&d, a, field, tol)? {
        return Ok(SepVerdict {
            status: SepStatus::SeparableCertified,
            field,
            evidence: SepEvidence::Decomposition(d),
            notes: vec![format!("rank {r}, relative residual {res:e}")],
        });
    }
    Ok(SepVerdict::unknown(
        field,
        vec![format!("best rank-{r} relative residual {res:e}")],
    ))
}

fn real_obstruction(a: &HermitianTensor, tol: &Tolerances) -> Result<Option<HermitianTensor>> {
    let shape = a.shape().clone();
    let n = a.size();
    // A non-real entry is detected by E^{IJ}(i).
    for p in 0..n {
        for q in 0..n {
            if p != q && a.at(p, q).im.abs() > tol.sym_tol {
                let i: Vec<usize> = shape.multi0(p).iter().map(|x| x + 1).collect();
                let j: Vec<usize> = shape.multi0(q).iter().map(|x| x + 1).collect();
                let x = HermitianTensor::basis(shape.clone(), &i, &j, C64::new(0.0, 1.0))?;
                return Ok(Some(oriented(a, x)?));
            }
        }
    }
    let check = is_real_decomposable(a, tol)?;
    let Some(w) = check.witness else {
        return Ok(None);
    };
    let one = C64::new(1.0, 0.0);
    let x = if w.i == w.j {
        HermitianTensor::basis(shape.clone(), &w.i, &w.j, one)?.scale(2.0)
    } else {
        HermitianTensor::basis(shape.clone(), &w.i, &w.j, one)?
    };
    let y = if w.k == w.l {
        HermitianTensor::basis(shape.clone(), &w.k, &w.l, one)?.scale(2.0)
    } else {
        HermitianTensor::basis(shape.clone(), &w.k, &w.l, one)?
    };
    Ok(Some(oriented(a, x.sub(&y)?)?))
}

fn oriented(a: &HermitianTensor, x: HermitianTensor) -> Result<HermitianTensor> {
    let ip = a.inner(&x, f64::INFINITY)?;
    Ok(x.scale(-ip.signum() / 2.0))
}

/// Options for [`separability_pipeline`].
#[derive(Clone, Debug)]
pub struct SepPipeline {
    pub field: Field,
    /// Largest search rank; the search also uses `8 * effort` starts.
    pub effort: usize,
    pub seed: u64,
    pub iters: usize,
    pub exec: Execution,
}

impl Default for SepPipeline {
    fn default() -> Self {
        Self {
            field: Field::Complex,
            effort: 4,
            seed: 0,
            iters: 500,
            exec: Execution::default(),
        }
    }
}

/// Necessary conditions first (HSOS flattening, and real decomposability for
/// the real field), then the positive-decomposition search at increasing
/// rank.
pub fn separability_pipeline(a: &HermitianTensor, opts: &SepPipeline, tol: &Tolerances) -> Result<SepVerdict> {
    let field = opts.field;
    let mut notes = Vec::new();
    if a.norm() <= DEGENERATE_NORM {
        return separable_search(a, 1, &SepSearch::default(), tol);
    }
    if let HsosOutcome::NotHsos { min_eig, eigvec } = hsos_test(a, tol)? {
        notes.push(format!("flattening has eigenvalue {min_eig}"));
        let q = match field {
            Field::Complex => eigvec,
            Field::Real if a.is_real(tol.sym_tol) => real_phase(&eigvec),
            Field::Real => eigvec,
        };
        let b = HermitianTensor::from_matrix(a.shape().clone(), &CMat::outer(&q), tol.sym_tol)?;
        let b = if field == Field::Real {
            HermitianTensor::from_matrix(a.shape().clone(), &b.to_matrix().real_part(), tol.sym_tol)?
        } else {
            b
        };
        match dual_witness_check(a, &b, tol)? {
            DualCheck::Entangled { inner, certificate } => {
                return Ok(SepVerdict {
                    status: SepStatus::EntangledWitness,
                    field,
                    evidence: SepEvidence::Witness { b, certificate, inner },
                    notes,
                });
            }
            DualCheck::Inconclusive { reason, .. } => {
                notes.push(format!("eigenvector witness failed: {reason}"));
                return Ok(SepVerdict::unknown(field, notes));
            }
        }
    }
    if field == Field::Real {
        if let Some(b) = real_obstruction(a, tol)? {
            let inner = a.inner(&b, f64::INFINITY)?;
            notes.push("not real decomposable".into());
            if inner < -tol.wit_tol && vanishes_on_reals(&b, tol.sym_tol) {
                return Ok(SepVerdict {
                    status: SepStatus::EntangledWitness,
                    field,
                    evidence: SepEvidence::RealObstruction { b, inner },
                    notes,
                });
            }
            return Ok(SepVerdict::unknown(field, notes));
        }
    }
    for r in 1..=opts.effort.max(1) {
        let search = SepSearch {
            field,
            seed: opts.seed,
            starts: 8 * opts.effort.max(1),
            iters: opts.iters,
            exec: opts.exec,
        };
        let v = separable_search(a, r, &search, tol)?;
        if v.status == SepStatus::SeparableCertified {
            notes.extend(v.notes);
            return Ok(SepVerdict { notes, ..v });
        }
        notes.extend(v.notes);
    }
    Ok(SepVerdict::unknown(field, notes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn rmat(n: usize, v: &[f64]) -> CMat {
        CMat::from_real(n, n, v).unwrap()
    }

    fn kron_separable() -> (HermitianTensor, PsdKronDecomp) {
        let m = rmat(
            4,
            &[
                5.0, -4.0, 1.0, -5.0, -4.0, 21.0, -5.0, 7.0, 1.0, -5.0, 3.0, -3.0, -5.0, 7.0, -3.0, 13.0,
            ],
        );
        let a = HermitianTensor::from_matrix(Shape::new(vec![2, 2]).unwrap(), &m, 1e-12).unwrap();
        let pk = PsdKronDecomp::new(vec![
            vec![rmat(2, &[2.0, -1.0, -1.0, 1.0]), rmat(2, &[1.0, 1.0, 1.0, 3.0])],
            vec![rmat(2, &[3.0, 2.0, 2.0, 2.0]), rmat(2, &[1.0, -2.0, -2.0, 5.0])],
        ]);
        (a, pk)
    }

    fn hankel() -> HermitianTensor {
        let s = Shape::new(vec![2, 2]).unwrap();
        let data = (0..16)
            .map(|f| {
                let (p, q) = (f / 4, f % 4);
                c((p / 2 + p % 2 + q / 2 + q % 2 + 4) as f64)
            })
            .collect();
        HermitianTensor::new(s, data, 1e-12).unwrap()
    }

    #[test]
    fn psd_kron_example() {
        let tol = Tolerances::default();
        let (a, pk) = kron_separable();
        assert!(pk.verify(&a, &tol).unwrap());
        let d = pk.to_decomposition(a.shape(), &tol).unwrap();
        assert!(d.len() <= 8 && d.is_positive());
        assert!(d.residual(&a).unwrap() <= 1e-9);
        assert!(verify_positive_decomposition(&d, &a, Field::Real, &tol).unwrap());
    }

    #[test]
    fn non_psd_block_rejected() {
        let (a, mut pk) = kron_separable();
        pk.terms[1][0] = rmat(2, &[1.0, 2.0, 2.0, 1.0]);
        assert_eq!(
            pk.verify(&a, &Tolerances::default()),
            Err(Error::BlockNotPsd { term: 2, mode: 1 })
        );
    }

    #[test]
    fn hankel_dual_witness() {
        let a = hankel();
        let s = a.shape().clone();
        let q = vec![c(1.0), c(-5.0 / 6.0), c(0.0), c(0.0)];
        let b = HermitianTensor::from_matrix(s, &CMat::outer(&q), 1e-12).unwrap();
        let tol = Tolerances::default();
        match dual_witness_check(&a, &b, &tol).unwrap() {
            DualCheck::Entangled { inner, .. } => assert!((inner + 1.0 / 6.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let id = HermitianTensor::identity(a.shape().clone());
        assert!(matches!(
            dual_witness_check(&id, &id, &tol).unwrap(),
            DualCheck::Inconclusive { .. }
        ));
    }

    #[test]
    fn pipeline_verdicts() {
        let tol = Tolerances::default();
        let v = separability_pipeline(&hankel(), &SepPipeline::default(), &tol).unwrap();
        assert_eq!(v.status, SepStatus::EntangledWitness);
        assert!(v.reverify(&hankel(), &tol).unwrap());
        let id = HermitianTensor::identity(Shape::new(vec![2, 2]).unwrap());
        let v = separability_pipeline(&id, &SepPipeline::default(), &tol).unwrap();
        assert_eq!(v.status, SepStatus::SeparableCertified, "{:?}", v.notes);
        assert!(v.reverify(&id, &tol).unwrap());
    }

    #[test]
    fn search_two_positive_terms() {
        let tol = Tolerances::default();
        let s = Shape::new(vec![2, 3]).unwrap();
        let mut hits = 0;
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let mut a = HermitianTensor::zeros(s.clone());
            for _ in 0..2 {
                let t = VectorTuple::random_unit(&s, &mut rng, false);
                a = a.add(&HermitianTensor::rank1(1.0, &t).unwrap()).unwrap();
            }
            let opts = SepSearch {
                seed,
                ..SepSearch::default()
            };
            let v = separable_search(&a, 2, &opts, &tol).unwrap();
            if v.status == SepStatus::SeparableCertified {
                assert!(v.reverify(&a, &tol).unwrap());
                hits += 1;
            }
        }
        assert!(hits >= 8, "{hits}/10");
    }

    #[test]
    fn real_obstruction_for_e1122() {
        let s = Shape::new(vec![2, 2]).unwrap();
        let e = HermitianTensor::basis(s.clone(), &[1, 1], &[2, 2], c(1.0)).unwrap();
        let a = e.add(&HermitianTensor::identity(s).scale(3.0)).unwrap();
        let opts = SepPipeline {
            field: Field::Real,
            ..SepPipeline::default()
        };
        let tol = Tolerances::default();
        let v = separability_pipeline(&a, &opts, &tol).unwrap();
        assert_eq!(v.status, SepStatus::EntangledWitness);
        assert!(matches!(v.evidence, SepEvidence::RealObstruction { .. }));
        assert!(v.reverify(&a, &tol).unwrap());
        // Over the complex field the same tensor is separable.
        let v = separability_pipeline(&a, &SepPipeline::default(), &tol).unwrap();
        assert_ne!(v.status, SepStatus::EntangledWitness);
    }

    #[test]
    fn kron_separable_pipeline_real() {
        let tol = Tolerances::default();
        let (a, _) = kron_separable();
        let opts = SepPipeline {
            field: Field::Real,
            ..SepPipeline::default()
        };
        let v = separability_pipeline(&a, &opts, &tol).unwrap();
        assert_eq!(v.status, SepStatus::SeparableCertified, "{:?}", v.notes);
        assert!(v.reverify(&a, &tol).unwrap());
    }

    #[test]
    fn zero_is_separable() {
        let z = HermitianTensor::zeros(Shape::new(vec![2, 2]).unwrap());
        let v = separable_search(&z, 1, &SepSearch::default(), &Tolerances::default()).unwrap();
        assert_eq!(v.status, SepStatus::SeparableCertified);
    }
}
