//! Positivity: Hermitian and conjugate sum-of-squares certificates, the
//! multiplier hierarchy and a combined psd verdict.
//!
//! Every certificate is a Gram matrix `W` over a monomial basis `b`, with
//! `h(x, conj x) = b* W b` coefficientwise. [`GramCertificate::verify`]
//! re-expands `b* W b` from scratch, independent of how `W` was found.

use std::collections::HashMap;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{herm_eig, psd_project, CMat};
use crate::real_herm::is_real_decomposable;
use crate::spectral::{herm_eigenpairs, EigenSearch, Field};
use crate::tensor::{HermitianTensor, Shape, VectorTuple};
use crate::tol::Tolerances;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Default cap on the size of a Gram basis.
pub const BASIS_CAP: usize = 64;

/// A monomial `x^holo conj(x)^conj`, exponents listed per mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub holo: Vec<Vec<u32>>,
    pub conj: Vec<Vec<u32>>,
}

impl Monomial {
    fn conjugate(&self) -> Self {
        Self {
            holo: self.conj.clone(),
            conj: self.holo.clone(),
        }
    }

    fn times(&self, other: &Self) -> Self {
        let add = |a: &Vec<Vec<u32>>, b: &Vec<Vec<u32>>| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect())
                .collect()
        };
        Self {
            holo: add(&self.holo, &other.holo),
            conj: add(&self.conj, &other.conj),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GramKind {
    /// Holomorphic basis `x1 x ... x xm`.
    Hsos,
    /// Basis `(x1, conj x1) x ... x (xm, conj xm)`.
    Csos,
    /// Holomorphic basis of multidegree `k + 1`, certifying
    /// `|x1|^{2 k1} ... |xm|^{2 km} h`.
    Omega(Vec<u32>),
}

/// Gram matrix certificate for a conjugate polynomial.
#[derive(Clone, Debug)]
pub struct GramCertificate {
    pub kind: GramKind,
    pub shape: Shape,
    pub basis: Vec<Monomial>,
    pub w: CMat,
    /// Largest coefficient mismatch between `b* W b` and the target.
    pub residual: f64,
    pub min_eig: f64,
}

type Poly = HashMap<Monomial, C64>;

fn unit(n: usize, i: usize) -> Vec<u32> {
    let mut e = vec![0; n];
    e[i] = 1;
    e
}

/// The conjugate polynomial `sum H_IJ conj(x_I) x_J`.
fn tensor_poly(h: &HermitianTensor) -> Poly {
    let shape = h.shape();
    let dims = shape.dims();
    let n = h.size();
    let mut p = Poly::new();
    for a in 0..n {
        let i = shape.multi0(a);
        for b in 0..n {
            let v = h.at(a, b);
            if v == ZERO {
                continue;
            }
            let j = shape.multi0(b);
            let mono = Monomial {
                holo: dims.iter().zip(&j).map(|(&d, &jj)| unit(d, jj)).collect(),
                conj: dims.iter().zip(&i).map(|(&d, &ii)| unit(d, ii)).collect(),
            };
            *p.entry(mono).or_insert(ZERO) += v;
        }
    }
    p
}

fn target_poly(h: &HermitianTensor, kind: &GramKind) -> Poly {
    let base = tensor_poly(h);
    let GramKind::Omega(k) = kind else {
        return base;
    };
    let dims = h.dims();
    let mut cur = base;
    for (mode, &kk) in k.iter().enumerate() {
        let n = dims[mode];
        for _ in 0..kk {
            let mut next = Poly::new();
            for (mono, v) in &cur {
                for i in 0..n {
                    let mut m2 = mono.clone();
                    m2.holo[mode][i] += 1;
                    m2.conj[mode][i] += 1;
                    *next.entry(m2).or_insert(ZERO) += v;
                }
            }
            cur = next;
        }
    }
    cur
}

fn gram_poly(basis: &[Monomial], w: &CMat) -> Poly {
    let mut p = Poly::new();
    for (a, ba) in basis.iter().enumerate() {
        let ca = ba.conjugate();
        for (b, bb) in basis.iter().enumerate() {
            let v = w[(a, b)];
            if v == ZERO {
                continue;
            }
            *p.entry(ca.times(bb)).or_insert(ZERO) += v;
        }
    }
    p
}

fn poly_distance(p: &Poly, q: &Poly) -> f64 {
    let mut worst: f64 = 0.0;
    for (m, v) in p {
        worst = worst.max((v - q.get(m).copied().unwrap_or(ZERO)).norm());
    }
    for (m, v) in q {
        if !p.contains_key(m) {
            worst = worst.max(v.norm());
        }
    }
    worst
}

impl GramCertificate {
    /// Recomputes `(coefficient residual, min eigenvalue of W)` against `h`.
    pub fn verify(&self, h: &HermitianTensor) -> Result<(f64, f64)> {
        if h.shape() != &self.shape {
            return Err(Error::ShapeMismatch(format!("{} vs {}", h.shape(), self.shape)));
        }
        if self.w.rows() != self.basis.len() || !self.w.is_square() {
            return Err(Error::ShapeMismatch("Gram matrix does not match its basis".into()));
        }
        let res = poly_distance(&gram_poly(&self.basis, &self.w), &target_poly(h, &self.kind));
        let e = herm_eig(&self.w)?;
        Ok((res, e.min()))
    }

    /// True when the residual is within `gramTol` (scaled by the tensor's
    /// magnitude) and `W` is psd within `eigTol`.
    pub fn is_valid(&self, h: &HermitianTensor, tol: &Tolerances) -> Result<bool> {
        let (res, min_eig) = self.verify(h)?;
        Ok(res <= tol.gram_tol * h.max_abs().max(1.0) && min_eig >= -tol.eig_tol * (1.0 + self.w.max_abs()))
    }
}

fn holomorphic_unit_basis(shape: &Shape) -> Vec<Monomial> {
    let dims = shape.dims();
    (0..shape.size())
        .map(|f| {
            let idx = shape.multi0(f);
            Monomial {
                holo: dims.iter().zip(&idx).map(|(&d, &i)| unit(d, i)).collect(),
                conj: dims.iter().map(|&d| vec![0; d]).collect(),
            }
        })
        .collect()
}

fn certificate(kind: GramKind, h: &HermitianTensor, basis: Vec<Monomial>, w: CMat) -> Result<GramCertificate> {
    let mut cert = GramCertificate {
        kind,
        shape: h.shape().clone(),
        basis,
        w,
        residual: 0.0,
        min_eig: 0.0,
    };
    let (res, min_eig) = cert.verify(h)?;
    cert.residual = res;
    cert.min_eig = min_eig;
    Ok(cert)
}

#[derive(Clone, Debug)]
pub enum HsosOutcome {
    Hsos(GramCertificate),
    NotHsos { min_eig: f64, eigvec: Vec<C64> },
}

/// `h` is a Hermitian sum of squares exactly when its flattening is psd.
pub fn hsos_test(h: &HermitianTensor, tol: &Tolerances) -> Result<HsosOutcome> {
    let m = h.to_matrix();
    let e = herm_eig(&m)?;
    if e.min() >= -tol.eig_tol * e.spectral_radius() {
        let w = psd_project(&m)?;
        let cert = certificate(GramKind::Hsos, h, holomorphic_unit_basis(h.shape()), w)?;
        return Ok(HsosOutcome::Hsos(cert));
    }
    Ok(HsosOutcome::NotHsos {
        min_eig: e.min(),
        eigvec: e.vector(0),
    })
}

#[derive(Clone, Debug)]
pub enum CsosOutcome {
    Feasible(GramCertificate),
    /// The alternating iterates stalled at this distance; not a proof.
    InfeasibleHint {
        distance: f64,
        iterations: usize,
    },
    Unknown {
        distance: f64,
        iterations: usize,
    },
}

/// The affine coefficient-matching constraints for a Gram matrix: entries are
/// partitioned into groups that produce the same monomial, and each group
/// must sum to its target coefficient.
struct AffineGroups {
    groups: Vec<Vec<usize>>,
    targets: Vec<C64>,
}

impl AffineGroups {
    fn project(&self, w: &mut [C64]) {
        for (g, t) in self.groups.iter().zip(&self.targets) {
            let s: C64 = g.iter().map(|&e| w[e]).sum();
            let shift = (t - s) / g.len() as f64;
            for &e in g {
                w[e] += shift;
            }
        }
    }

    fn residual(&self, w: &[C64]) -> f64 {
        self.groups
            .iter()
            .zip(&self.targets)
            .map(|(g, t)| (g.iter().map(|&e| w[e]).sum::<C64>() - t).norm())
            .fold(0.0, f64::max)
    }
}

fn csos_basis(shape: &Shape) -> Vec<Monomial> {
    let dims = shape.dims();
    let sizes: Vec<usize> = dims.iter().map(|d| 2 * d).collect();
    let total: usize = sizes.iter().product();
    (0..total)
        .map(|mut f| {
            let mut choice = vec![0; dims.len()];
            for k in (0..dims.len()).rev() {
                choice[k] = f % sizes[k];
                f /= sizes[k];
            }
            let mut holo = Vec::with_capacity(dims.len());
            let mut conj = Vec::with_capacity(dims.len());
            for (k, &c) in choice.iter().enumerate() {
                let n = dims[k];
                if c < n {
                    holo.push(unit(n, c));
                    conj.push(vec![0; n]);
                } else {
                    holo.push(vec![0; n]);
                    conj.push(unit(n, c - n));
                }
            }
            Monomial { holo, conj }
        })
        .collect()
}

fn affine_groups(basis: &[Monomial], target: &Poly) -> AffineGroups {
    let b = basis.len();
    let mut index: HashMap<Monomial, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut targets = Vec::new();
    for (a, ba) in basis.iter().enumerate() {
        let ca = ba.conjugate();
        for (c, bc) in basis.iter().enumerate() {
            let mono = ca.times(bc);
            let g = *index.entry(mono.clone()).or_insert_with(|| {
                groups.push(Vec::new());
                targets.push(target.get(&mono).copied().unwrap_or(ZERO));
                groups.len() - 1
            });
            groups[g].push(a * b + c);
        }
    }
    AffineGroups { groups, targets }
}

/// Alternating projections between the psd cone and the affine set.
fn gram_feasibility(b: usize, aff: &AffineGroups, iters: usize, goal: f64) -> Result<(Option<CMat>, f64, usize, bool)> {
    let mut w = CMat::zeros(b, b);
    let mut data = w.clone().into_data();
    aff.project(&mut data);
    w = CMat::from_vec(b, b, data)?;
    let mut history: Vec<f64> = Vec::new();
    let mut dist = f64::INFINITY;
    for it in 0..iters {
        let z = psd_project(&w)?;
        let zres = aff.residual(z.data());
        if zres <= goal {
            return Ok((Some(z), 0.0, it + 1, false));
        }
        let mut data = z.clone().into_data();
        aff.project(&mut data);
        let next = CMat::from_vec(b, b, data)?.hermitian_part();
        dist = next.sub(&z).frob_norm();
        history.push(dist);
        if it >= 1000 && it % 500 == 0 {
            let old = history[it - 500];
            if dist > 1e-3 * (1.0 + w.max_abs()) && old - dist < 1e-4 * old {
                return Ok((None, dist, it + 1, true));
            }
        }
        w = next;
    }
    Ok((None, dist, iters, false))
}

/// Searches for a psd Gram matrix over the conjugate basis
/// `(x1, conj x1) x ... x (xm, conj xm)`.
pub fn csos_test(h: &HermitianTensor, iters: usize, tol: &Tolerances) -> Result<CsosOutcome> {
    let basis = csos_basis(h.shape());
    if basis.len() > BASIS_CAP {
        return Err(Error::BasisTooLarge {
            size: basis.len(),
            cap: BASIS_CAP,
        });
    }
    let kind = GramKind::Csos;
    let target = target_poly(h, &kind);
    let aff = affine_groups(&basis, &target);
    let goal = 0.1 * tol.gram_tol * h.max_abs().max(1.0);
    let (w, dist, it, stalled) = gram_feasibility(basis.len(), &aff, iters, goal)?;
    match w {
        Some(w) => Ok(CsosOutcome::Feasible(certificate(kind, h, basis, w)?)),
        None if stalled => Ok(CsosOutcome::InfeasibleHint {
            distance: dist,
            iterations: it,
        }),
        None => Ok(CsosOutcome::Unknown {
            distance: dist,
            iterations: it,
        }),
    }
}

fn compositions_desc(n: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == n - 1 {
            prefix.push(d);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=d).rev() {
            prefix.push(first);
            rec(n, d - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, d, &mut Vec::new(), &mut out);
    out
}

fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of holomorphic monomials of multidegree `k + 1`.
pub fn multiplier_basis_size(shape: &Shape, k: &[u32]) -> usize {
    shape
        .dims()
        .iter()
        .zip(k)
        .map(|(&n, &kk)| binom(n as u64 + kk as u64, kk as u64 + 1) as usize)
        .product()
}

fn multiplier_basis(shape: &Shape, k: &[u32]) -> Vec<Monomial> {
    let dims = shape.dims();
    let per_mode: Vec<Vec<Vec<u32>>> = dims
        .iter()
        .zip(k)
        .map(|(&n, &kk)| compositions_desc(n, kk + 1))
        .collect();
    let mut out = vec![Vec::new()];
    for mode in &per_mode {
        let mut next = Vec::with_capacity(out.len() * mode.len());
        for prefix in &out {
            for e in mode {
                let mut p: Vec<Vec<u32>> = prefix.clone();
                p.push(e.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out.into_iter()
        .map(|holo| Monomial {
            conj: dims.iter().map(|&d| vec![0; d]).collect(),
            holo,
        })
        .collect()
}

#[derive(Clone, Debug)]
pub enum MultiplierOutcome {
    Member(GramCertificate),
    Unknown { min_eig: f64 },
}

/// Tests whether `|x1|^{2 k1} ... |xm|^{2 km} h` is a Hermitian sum of
/// squares. Over a holomorphic basis every monomial `conj(x)^a x^b` comes
/// from exactly one Gram entry, so the Gram matrix is determined by the
/// coefficients and the test reduces to one eigenvalue check.
pub fn multiplier_hsos_test(h: &HermitianTensor, k: &[u32], cap: usize, tol: &Tolerances) -> Result<MultiplierOutcome> {
    let shape = h.shape();
    if k.len() != shape.order() {
        return Err(Error::ShapeMismatch(format!(
            "{} multiplier exponents for order {}",
            k.len(),
            shape.order()
        )));
    }
    let size = multiplier_basis_size(shape, k);
    if size > cap {
        return Err(Error::BasisTooLarge { size, cap });
    }
    let basis = multiplier_basis(shape, k);
    let kind = GramKind::Omega(k.to_vec());
    let target = target_poly(h, &kind);
    let g = CMat::from_fn(basis.len(), basis.len(), |a, b| {
        let mono = basis[a].conjugate().times(&basis[b]);
        target.get(&mono).copied().unwrap_or(ZERO)
    });
    let e = herm_eig(&g)?;
    if e.min() >= -tol.eig_tol * e.spectral_radius() {
        let w = psd_project(&g)?;
        return Ok(MultiplierOutcome::Member(certificate(kind, h, basis, w)?));
    }
    Ok(MultiplierOutcome::Unknown { min_eig: e.min() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsdStatus {
    PsdCertified,
    NotPsdWitness,
    Unknown,
}

impl PsdStatus {
    pub fn name(self) -> &'static str {
        match self {
            PsdStatus::PsdCertified => "PSD_CERTIFIED",
            PsdStatus::NotPsdWitness => "NOT_PSD_WITNESS",
            PsdStatus::Unknown => "UNKNOWN",
        }
    }
}

#[derive(Clone, Debug)]
pub struct PsdVerdict {
    pub status: PsdStatus,
    pub field: Field,
    pub certificate: Option<GramCertificate>,
    /// Unit vectors with `h(x, conj x) < -witTol`, and that value.
    pub witness: Option<(VectorTuple, f64)>,
    pub notes: Vec<String>,
}

/// Options for [`psd_verdict`].
#[derive(Clone, Debug)]
pub struct PsdOptions {
    pub field: Field,
    /// Largest total multiplier degree tried.
    pub effort: u32,
    pub seed: u64,
    pub starts: usize,
    pub cap: usize,
    pub exec: Execution,
}

impl Default for PsdOptions {
    fn default() -> Self {
        Self {
            field: Field::Complex,
            effort: 2,
            seed: 0,
            starts: 16,
            cap: BASIS_CAP,
            exec: Execution::default(),
        }
    }
}

fn exponent_vectors(m: usize, total: u32) -> Vec<Vec<u32>> {
    if m == 0 {
        return vec![Vec::new()];
    }
    compositions_desc(m, total)
}

/// Splits `x + i y` into the `2^m` real tuples `(x_k or y_k)` and returns the
/// most negative one, normalized.
fn best_real_split(h: &HermitianTensor, v: &VectorTuple) -> Option<(VectorTuple, f64)> {
    let m = v.order();
    let mut best: Option<(VectorTuple, f64)> = None;
    for mask in 0..(1usize << m) {
        let parts: Vec<Vec<f64>> = v
            .vectors()
            .iter()
            .enumerate()
            .map(|(k, u)| u.iter().map(|z| if mask >> k & 1 == 0 { z.re } else { z.im }).collect())
            .collect();
        if parts.iter().any(|p| p.iter().all(|&x| x == 0.0)) {
            continue;
        }
        let t = VectorTuple::from_real(&parts).normalized();
        let val = h.eval_poly(&t).ok()?;
        if best.as_ref().is_none_or(|(_, b)| val < *b) {
            best = Some((t, val));
        }
    }
    best
}

/// Decides positive semidefiniteness over `field` as far as the budget allows.
///
/// Order: negativity witness from the eigentuple search; then HSOS; then the
/// multiplier hierarchy up to `effort`. Real-field certificates from the
/// complex tests are used only when `h` is real decomposable, where real and
/// complex psd coincide.
pub fn psd_verdict(h: &HermitianTensor, opts: &PsdOptions, tol: &Tolerances) -> Result<PsdVerdict> {
    let field = opts.field;
    let mut notes = Vec::new();
    let verdict = |status, certificate, witness, notes| PsdVerdict {
        status,
        field,
        certificate,
        witness,
        notes,
    };
    let search = EigenSearch {
        seed: opts.seed,
        field,
        starts: opts.starts,
        exec: opts.exec,
        ..EigenSearch::default()
    };
    let rep = herm_eigenpairs(h, &search, tol);
    if let Some(t) = rep.best_min() {
        notes.push(format!("smallest eigenvalue found {}", t.lambda));
        if t.lambda < -tol.wit_tol {
            let val = h.eval_poly(&t.vectors)?;
            return Ok(verdict(
                PsdStatus::NotPsdWitness,
                None,
                Some((t.vectors.clone(), val)),
                notes,
            ));
        }
    }
    let in_rd = match field {
        Field::Complex => false,
        Field::Real => match is_real_decomposable(h, tol) {
            Ok(c) => c.decomposable,
            Err(_) => false,
        },
    };
    if field == Field::Real && in_rd {
        // Real and complex psd agree here, so a complex witness splits into a real one.
        let csearch = EigenSearch {
            field: Field::Complex,
            ..search.clone()
        };
        let crep = herm_eigenpairs(h, &csearch, tol);
        if let Some(t) = crep.best_min() {
            if t.lambda < -tol.wit_tol {
                if let Some((x, val)) = best_real_split(h, &t.vectors) {
                    if val < -tol.wit_tol {
                        notes.push("real witness split from a complex one".into());
                        return Ok(verdict(PsdStatus::NotPsdWitness, None, Some((x, val)), notes));
                    }
                }
            }
        }
    }
    if let HsosOutcome::Hsos(cert) = hsos_test(h, tol)? {
        notes.push("flattening is psd".into());
        return Ok(verdict(PsdStatus::PsdCertified, Some(cert), None, notes));
    }
    if field == Field::Complex || in_rd {
        let m = h.shape().order();
        for total in 1..=opts.effort {
            for k in exponent_vectors(m, total) {
                if multiplier_basis_size(h.shape(), &k) > opts.cap {
                    continue;
                }
                if let MultiplierOutcome::Member(cert) = multiplier_hsos_test(h, &k, opts.cap, tol)? {
                    notes.push(format!("multiplier exponents {k:?}"));
                    if field == Field::Real {
                        notes.push("complex certificate transferred to the real field".into());
                    }
                    return Ok(verdict(PsdStatus::PsdCertified, Some(cert), None, notes));
                }
            }
        }
    }
    Ok(verdict(PsdStatus::Unknown, None, None, notes))
}
