#![allow(dead_code)]

use hermitia::{CMat, HermitianDecomposition, HermitianTensor, Shape, Term, VectorTuple, C64};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn rv(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| r(x)).collect()
}

pub fn shape(d: &[usize]) -> Shape {
    Shape::new(d.to_vec()).unwrap()
}

pub fn rmat(n: usize, v: &[f64]) -> CMat {
    CMat::from_real(n, n, v).unwrap()
}

pub fn sum_basis(s: &Shape, entries: &[(&[usize], &[usize], f64)]) -> HermitianTensor {
    let mut h = HermitianTensor::zeros(s.clone());
    for (i, j, v) in entries {
        h = h.add(&HermitianTensor::basis(s.clone(), i, j, r(*v)).unwrap()).unwrap();
    }
    h
}

/// Entries 1111 = 2222 = 1221 = 2112 = 1.
pub fn csos_not_hsos() -> HermitianTensor {
    sum_basis(
        &shape(&[2, 2]),
        &[
            (&[1, 1], &[1, 1], 1.0),
            (&[2, 2], &[2, 2], 1.0),
            (&[1, 2], &[2, 1], 1.0),
        ],
    )
}

/// Real psd but not complex psd.
pub fn real_psd_not_complex() -> HermitianTensor {
    sum_basis(
        &shape(&[2, 2]),
        &[
            (&[1, 1], &[1, 1], 1.0),
            (&[1, 1], &[2, 2], 1.0),
            (&[1, 2], &[2, 1], -1.0),
        ],
    )
}

pub fn complex_psd_quartic() -> HermitianTensor {
    let s = shape(&[3, 3]);
    let mut h = sum_basis(
        &s,
        &[
            (&[1, 1], &[1, 1], 1.0),
            (&[2, 2], &[2, 2], 1.0),
            (&[3, 3], &[3, 3], 1.0),
            (&[1, 2], &[1, 2], 2.0),
            (&[2, 3], &[2, 3], 2.0),
            (&[3, 1], &[3, 1], 2.0),
        ],
    );
    for (i, j) in [([1, 1], [2, 2]), ([1, 1], [3, 3]), ([2, 2], [3, 3])] {
        h = h
            .add(&HermitianTensor::basis(s.clone(), &i, &j, r(-1.0)).unwrap())
            .unwrap();
    }
    h
}

/// `A_{ijkl} = i + j + k + l` in `[2,2]`.
pub fn hankel() -> HermitianTensor {
    let s = shape(&[2, 2]);
    let n = s.size();
    let mut data = Vec::with_capacity(n * n);
    for f in 0..n {
        for g in 0..n {
            let (i, j) = (s.multi(f), s.multi(g));
            data.push(r((i[0] + i[1] + j[0] + j[1]) as f64));
        }
    }
    HermitianTensor::new(s, data, 1e-12).unwrap()
}

/// The Hermitian square `|x11 x21 - (5/6) x11 x22|^2`.
pub fn hankel_witness() -> HermitianTensor {
    let q = vec![r(1.0), r(-5.0 / 6.0), r(0.0), r(0.0)];
    HermitianTensor::from_matrix(shape(&[2, 2]), &CMat::outer(&q), 1e-12).unwrap()
}

pub fn hankel_real_decomposition() -> HermitianDecomposition {
    let r10 = 10f64.sqrt();
    let u1 = rv(&[(-r10 - 1.0) / 3.0, 1.0]);
    let u2 = rv(&[(r10 - 1.0) / 3.0, 1.0]);
    let e = rv(&[1.0, 1.0]);
    let l1 = (40.0 - 13.0 * r10) / 20.0;
    let l2 = (40.0 + 13.0 * r10) / 20.0;
    let mk = |l: f64, a: &Vec<C64>, b: &Vec<C64>| Term::new(l, VectorTuple::new(vec![a.clone(), b.clone()]));
    HermitianDecomposition::new(
        shape(&[2, 2]),
        vec![mk(l1, &u1, &e), mk(l1, &e, &u1), mk(l2, &u2, &e), mk(l2, &e, &u2)],
    )
    .unwrap()
}

pub fn e1122() -> HermitianTensor {
    HermitianTensor::basis(shape(&[2, 2]), &[1, 1], &[2, 2], r(1.0)).unwrap()
}

/// `sum_{i,j} e_i x e_i x e_j x e_j` in `[n,n]`.
pub fn diag_pairs(n: usize) -> HermitianTensor {
    let s = shape(&[n, n]);
    let mut h = HermitianTensor::zeros(s.clone());
    for i in 1..=n {
        for j in i..=n {
            h = h
                .add(&HermitianTensor::basis(s.clone(), &[i, i], &[j, j], r(1.0)).unwrap())
                .unwrap();
        }
    }
    h
}

/// Five terms reproducing `diag_pairs(2)`.
pub fn five_term() -> HermitianDecomposition {
    let cc = (1.0 + 2f64.sqrt()).sqrt();
    let scale = 1.0 / (2.0 * cc.powi(4) - 2.0);
    let i = c(0.0, 1.0);
    let vs = [
        (scale, vec![r(cc), r(1.0)]),
        (scale, vec![r(cc), r(-1.0)]),
        (-scale, vec![r(1.0), i * cc]),
        (-scale, vec![r(1.0), -i * cc]),
    ];
    let mut terms: Vec<Term> = vs
        .iter()
        .map(|(l, v)| Term::new(*l, VectorTuple::new(vec![v.clone(), v.clone()])))
        .collect();
    terms.push(Term::new(2.0, VectorTuple::new(vec![rv(&[0.0, 1.0]), rv(&[0.0, 1.0])])));
    HermitianDecomposition::new(shape(&[2, 2]), terms).unwrap()
}

/// `A = [(1,2,3),(1,1,1)] + [(1,1,1),(1,2,3)]`, entries `i1 j1 + i2 j2`.
pub fn kruskal_pair() -> HermitianDecomposition {
    let a = rv(&[1.0, 2.0, 3.0]);
    let b = rv(&[1.0, 1.0, 1.0]);
    HermitianDecomposition::new(
        shape(&[3, 3]),
        vec![
            Term::new(1.0, VectorTuple::new(vec![a.clone(), b.clone()])),
            Term::new(1.0, VectorTuple::new(vec![b, a])),
        ],
    )
    .unwrap()
}

/// `sum_i [u_i, u_i, u_i]` with the four vectors of Kruskal rank 3.
pub fn kruskal_four() -> HermitianDecomposition {
    let us = [[1.0, 1.0, 1.0], [1.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]];
    let terms = us
        .iter()
        .map(|u| Term::new(1.0, VectorTuple::new(vec![rv(u), rv(u), rv(u)])))
        .collect();
    HermitianDecomposition::new(shape(&[3, 3, 3]), terms).unwrap()
}

pub fn kron_separable_matrix() -> CMat {
    rmat(
        4,
        &[
            5.0, -4.0, 1.0, -5.0, -4.0, 21.0, -5.0, 7.0, 1.0, -5.0, 3.0, -3.0, -5.0, 7.0, -3.0, 13.0,
        ],
    )
}

pub fn kron_separable() -> HermitianTensor {
    HermitianTensor::from_matrix(shape(&[2, 2]), &kron_separable_matrix(), 1e-12).unwrap()
}

pub fn kron_separable_blocks() -> hermitia::separability::PsdKronDecomp {
    hermitia::separability::PsdKronDecomp::new(vec![
        vec![rmat(2, &[2.0, -1.0, -1.0, 1.0]), rmat(2, &[1.0, 1.0, 1.0, 3.0])],
        vec![rmat(2, &[3.0, 2.0, 2.0, 2.0]), rmat(2, &[1.0, -2.0, -2.0, 5.0])],
    ])
}

pub fn max_diff(a: &HermitianTensor, b: &HermitianTensor) -> f64 {
    a.sub(b).unwrap().max_abs()
}

/// Random real decomposition with `terms` real rank-1 terms.
pub fn random_real_decomposition(s: &Shape, terms: usize, rng: &mut impl rand::Rng) -> HermitianDecomposition {
    let ts = (0..terms)
        .map(|_| {
            let vs: Vec<Vec<f64>> = s
                .dims()
                .iter()
                .map(|&n| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let lam = rng.random_range(-2.0..2.0);
            Term::new(lam, VectorTuple::from_real(&vs))
        })
        .collect();
    HermitianDecomposition::new(s.clone(), ts).unwrap()
}
