//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Run with `cargo test -p hermitia --test acceptance`.

mod common;

use std::time::{Duration, Instant};

use common::*;
use hermitia::decomposition::basis_decomposition;
use hermitia::flatten::{hermitian_flatten, hermitian_unflatten, hrank_lower_bound, kronecker_flatten};
use hermitia::linalg::{herm_eig, matrix_rank};
use hermitia::psd_sos::{csos_test, hsos_test, psd_verdict, CsosOutcome, HsosOutcome, PsdOptions, PsdStatus};
use hermitia::real_herm::{is_real_decomposable, real_decompose};
use hermitia::separability::{dual_witness_check, separability_pipeline, DualCheck, SepPipeline, SepStatus};
use hermitia::spectral::{herm_eigenpairs, EigenSearch};
use hermitia::{CMat, Field, HermitianTensor, Tolerances, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;
type Suite = fn(&mut ChaCha8Rng) -> Result<(), String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn basis_ranks() -> Outcome {
    let start = Instant::now();
    let mut count = 0;
    for dims in [vec![2, 2], vec![3, 3], vec![2, 2, 2]] {
        let s = shape(&dims);
        for a in 0..s.size() {
            for b in 0..s.size() {
                let (i, j) = (s.multi(a), s.multi(b));
                for cval in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                    if a == b && cval.im != 0.0 {
                        continue;
                    }
                    let d = basis_decomposition(&i, &j, cval, &s).map_err(|e| e.to_string())?;
                    let differ = i.iter().zip(&j).filter(|(p, q)| p != q).count();
                    let want = if a == b { 1 } else { 2 * differ };
                    check(d.len() == want, format!("{i:?},{j:?}: {} terms, want {want}", d.len()))?;
                    let e = HermitianTensor::basis(s.clone(), &i, &j, cval).unwrap();
                    let err = max_diff(&d.assemble(), &e);
                    check(err <= 1e-10, format!("{i:?},{j:?}: error {err:e}"))?;
                    count += 1;
                }
            }
        }
    }
    let el = start.elapsed();
    check(el < Duration::from_secs(5), format!("took {el:?}"))?;
    Ok(format!("{count} basis tensors in {el:.2?}"))
}

fn basis_4x4_display() -> Outcome {
    let s = shape(&[4, 4]);
    let i = C64::new(0.0, 1.0);
    let (one, zero) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    for cval in [one, C64::new(2.0, -1.0), C64::new(0.0, 3.0)] {
        let d = basis_decomposition(&[1, 2], &[3, 4], cval, &s).map_err(|e| e.to_string())?;
        check(d.len() == 4, format!("{} terms", d.len()))?;
        let shown = [
            (0.25, [cval, zero, one, zero], [zero, one, zero, one]),
            (0.25, [cval, zero, -one, zero], [zero, one, zero, -one]),
            (-0.25, [cval, zero, i, zero], [zero, one, zero, i]),
            (-0.25, [cval, zero, -i, zero], [zero, one, zero, -i]),
        ];
        // Compare normalized terms so per-term scaling does not matter.
        let norm = d.normalize();
        for (lam, u, v) in shown {
            let want = hermitia::HermitianDecomposition::new(
                s.clone(),
                vec![hermitia::Term::new(
                    lam,
                    hermitia::VectorTuple::new(vec![u.to_vec(), v.to_vec()]),
                )],
            )
            .unwrap()
            .normalize();
            let w = &want.terms()[0];
            let hit = norm.terms().iter().any(|t| {
                (t.lambda - w.lambda).abs() < 1e-12
                    && t.vectors
                        .vectors()
                        .iter()
                        .zip(w.vectors.vectors())
                        .all(|(a, b)| a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-12))
            });
            check(hit, format!("c={cval}: displayed term {lam} {u:?} {v:?} missing"))?;
        }
        let e = HermitianTensor::basis(s.clone(), &[1, 2], &[3, 4], cval).unwrap();
        let err = max_diff(&d.assemble(), &e);
        check(err <= 1e-14, format!("assembly error {err:e}"))?;
    }
    Ok("4 displayed terms matched for c in {1, 2-i, 3i}".into())
}

fn hankel_real() -> Outcome {
    let a = hankel();
    check(
        is_real_decomposable(&a, &tol()).unwrap().decomposable,
        "not real decomposable",
    )?;
    let d = hankel_real_decomposition();
    let err = max_diff(&d.assemble(), &a);
    check(err <= 1e-9, format!("4-term assembly error {err:e}"))?;
    let b = hrank_lower_bound(&a, &tol()).map_err(|e| e.to_string())?;
    check(b.bound <= 4, format!("lower bound {}", b.bound))?;
    let rd = real_decompose(&a, &tol()).map_err(|e| e.to_string())?;
    check(
        rd.is_real(1e-12) && rd.residual(&a).unwrap() <= 1e-9,
        "constructive decomposition failed",
    )?;
    Ok(format!("assembly error {err:.1e}, lower bound {}", b.bound))
}

fn flattening_bounds() -> Outcome {
    let m = matrix_rank(&hermitian_flatten(&e1122()).matrix, tol().rank_tol).unwrap();
    check(m == 2, format!("m-rank of E1122 is {m}"))?;
    let mut ks = Vec::new();
    for n in [2, 3] {
        let k = kronecker_flatten(&diag_pairs(n)).unwrap().matrix;
        check(
            k.sub(&CMat::identity(n * n)).max_abs() == 0.0,
            "kappa flattening is not the identity",
        )?;
        let rk = matrix_rank(&k, tol().rank_tol).unwrap();
        check(rk == n * n, format!("kappa rank {rk} for n={n}"))?;
        ks.push(rk);
    }
    let err = max_diff(&five_term().assemble(), &diag_pairs(2));
    check(err <= 1e-9, format!("five-term error {err:e}"))?;
    Ok(format!("m-rank 2, kappa ranks {ks:?}, five-term error {err:.1e}"))
}

fn kruskal() -> Outcome {
    let rep = kruskal_four().kruskal_certify(&tol()).map_err(|e| e.to_string())?;
    check(
        rep.certified && rep.rank == 4 && rep.margin == 2,
        format!("four-vector: {rep:?}"),
    )?;
    let rep2 = kruskal_pair().kruskal_certify(&tol()).map_err(|e| e.to_string())?;
    check(rep2.certified && rep2.rank == 2, format!("pair: {rep2:?}"))?;
    Ok(format!("r=4 margin {}, r=2 margin {}", rep.margin, rep2.margin))
}

fn psd() -> Outcome {
    let start = Instant::now();
    let h = real_psd_not_complex();
    let v = psd_verdict(&h, &PsdOptions::default(), &tol()).map_err(|e| e.to_string())?;
    check(
        v.status == PsdStatus::NotPsdWitness,
        format!("complex verdict {}", v.status.name()),
    )?;
    let (x, val) = v.witness.clone().unwrap();
    // -3 at the unnormalized point (i,1),(i,1); each unit sphere scales by 1/2.
    check(val <= -3.0 / 4.0 + 1e-9, format!("witness value {val}"))?;
    check(
        (h.eval_poly(&x).unwrap() - val).abs() < 1e-10,
        "witness value does not re-evaluate",
    )?;
    for seed in 0..5 {
        let opts = PsdOptions {
            field: Field::Real,
            seed,
            ..PsdOptions::default()
        };
        let rv = psd_verdict(&h, &opts, &tol()).map_err(|e| e.to_string())?;
        check(rv.status != PsdStatus::NotPsdWitness, "real NOT_PSD_WITNESS")?;
    }
    let e = csos_not_hsos();
    check(
        matches!(hsos_test(&e, &tol()).unwrap(), HsosOutcome::NotHsos { .. }),
        "CSOS-only tensor passed HSOS",
    )?;
    match csos_test(&e, 5000, &tol()).map_err(|e| e.to_string())? {
        CsosOutcome::Feasible(cert) => check(cert.is_valid(&e, &tol()).unwrap(), "CSOS certificate invalid")?,
        other => return Err(format!("csos: {other:?}")),
    }
    let el = start.elapsed();
    check(el < Duration::from_secs(30), format!("took {el:?}"))?;
    Ok(format!("complex witness {val:.4}, CSOS but not HSOS, {el:.2?}"))
}

fn separability() -> Outcome {
    let a = kron_separable();
    let pk = kron_separable_blocks();
    check(
        pk.verify(&a, &tol()).map_err(|e| e.to_string())?,
        "kron decomposition does not verify",
    )?;
    let d = pk.to_decomposition(a.shape(), &tol()).map_err(|e| e.to_string())?;
    let res = max_diff(&d.assemble(), &a);
    check(
        d.is_positive() && res <= 1e-9,
        format!("positive decomposition error {res:e}"),
    )?;
    let inner = hankel().inner(&hankel_witness(), 1e-12).unwrap();
    check((inner + 1.0 / 6.0).abs() <= 1e-12, format!("inner {inner}"))?;
    match dual_witness_check(&hankel(), &hankel_witness(), &tol()).unwrap() {
        DualCheck::Entangled { .. } => {}
        other => return Err(format!("dual check {other:?}")),
    }
    let v = separability_pipeline(&hankel(), &SepPipeline::default(), &tol()).map_err(|e| e.to_string())?;
    check(
        v.status == SepStatus::EntangledWitness,
        format!("pipeline {}", v.status.name()),
    )?;
    Ok(format!(
        "{} positive terms, error {res:.1e}; inner {inner:.15}",
        d.len()
    ))
}

fn congruence_norms(rng: &mut ChaCha8Rng) -> Result<(), String> {
    use rand::Rng;
    let shapes = [vec![2, 2], vec![2, 3], vec![3, 3], vec![2, 2, 2]];
    for k in 0..200 {
        let s = shape(&shapes[k % shapes.len()]);
        let h = HermitianTensor::random(s.clone(), rng.random());
        let qs: Vec<CMat> = s
            .dims()
            .iter()
            .map(|&n| {
                herm_eig(&HermitianTensor::random(shape(&[n]), rng.random()).to_matrix())
                    .unwrap()
                    .vectors
            })
            .collect();
        let g = h.congruent(&qs).unwrap();
        let err = (g.norm() - h.norm()).abs() / h.norm();
        check(err <= 1e-10, format!("congruence norm error {err:e}"))?;
    }
    Ok(())
}

fn roundtrips(rng: &mut ChaCha8Rng) -> Result<(), String> {
    use rand::Rng;
    let shapes = [vec![3], vec![2, 2], vec![2, 3], vec![3, 3], vec![2, 2, 2]];
    for k in 0..200 {
        let s = shape(&shapes[k % shapes.len()]);
        let h = HermitianTensor::random(s.clone(), rng.random());
        let back = hermitian_unflatten(&hermitian_flatten(&h).matrix, &s, &tol()).map_err(|e| e.to_string())?;
        check(back == h, "roundtrip not exact")?;
    }
    Ok(())
}

fn real_decompositions(rng: &mut ChaCha8Rng) -> Result<(), String> {
    use rand::Rng;
    let shapes = [vec![2, 2], vec![2, 3], vec![2, 2, 2]];
    for k in 0..100 {
        let s = shape(&shapes[k % shapes.len()]);
        let terms = rng.random_range(1..=4);
        let h = random_real_decomposition(&s, terms, rng).assemble();
        let d = real_decompose(&h, &tol()).map_err(|e| e.to_string())?;
        let res = d.residual(&h).unwrap();
        check(res <= 1e-8, format!("real_decompose residual {res:e}"))?;
        check(d.is_real(0.0), "non-real output")?;
    }
    Ok(())
}

fn eigentuples(rng: &mut ChaCha8Rng) -> Result<(), String> {
    use rand::Rng;
    let shapes = [vec![2, 2], vec![2, 3], vec![3, 3], vec![2, 2, 2]];
    let mut seen = 0;
    let mut k = 0;
    while seen < 100 {
        let s = shape(&shapes[k % shapes.len()]);
        let real = k % 3 == 0;
        let seed = rng.random();
        let h = if real {
            HermitianTensor::random_real(s, seed)
        } else {
            HermitianTensor::random(s, seed)
        };
        let search = EigenSearch {
            seed,
            field: if real { Field::Real } else { Field::Complex },
            starts: 4,
            ..EigenSearch::default()
        };
        for t in herm_eigenpairs(&h, &search, &tol()).tuples {
            check(t.max_residual() <= 1e-8, format!("KKT residual {:e}", t.max_residual()))?;
            seen += 1;
        }
        k += 1;
        check(k < 1000, "too few eigentuples emitted")?;
    }
    Ok(())
}

/// Characteristic polynomial by Faddeev-LeVerrier, roots by Durand-Kerner.
fn charpoly_eigenvalues(a: &CMat) -> Vec<f64> {
    let n = a.rows();
    let mut coef = vec![C64::new(0.0, 0.0); n + 1];
    coef[n] = C64::new(1.0, 0.0);
    let mut m = CMat::zeros(n, n);
    for k in 1..=n {
        m = a.matmul(&m).add(&CMat::identity(n).scale(coef[n - k + 1]));
        coef[n - k] = -a.matmul(&m).trace() / k as f64;
    }
    let p = |z: C64| coef.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c);
    let bound = 1.0 + coef.iter().take(n).map(|c| c.norm()).fold(0.0, f64::max);
    let mut roots: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(bound, 0.4 + k as f64 * 2.0 * std::f64::consts::PI / n as f64))
        .collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let den: C64 = (0..n).filter(|&j| j != i).map(|j| roots[i] - roots[j]).product();
            let step = p(roots[i]) / den;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    let mut re: Vec<f64> = roots.iter().map(|z| z.re).collect();
    re.sort_by(f64::total_cmp);
    re
}

fn eig_oracle(rng: &mut ChaCha8Rng) -> Result<(), String> {
    use rand::Rng;
    for k in 0..50 {
        let n = 3 + k % 2;
        let a = HermitianTensor::random(shape(&[n]), rng.random()).to_matrix();
        let got = herm_eig(&a).map_err(|e| e.to_string())?.values;
        let want = charpoly_eigenvalues(&a);
        for (g, w) in got.iter().zip(&want) {
            check((g - w).abs() <= 1e-8, format!("eigenvalue {g} vs oracle {w}"))?;
        }
    }
    Ok(())
}

fn property_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let parts: [(&str, Suite); 5] = [
        ("congruence", congruence_norms),
        ("roundtrip", roundtrips),
        ("real_decompose", real_decompositions),
        ("eigentuples", eigentuples),
        ("herm_eig oracle", eig_oracle),
    ];
    for (name, f) in parts {
        f(&mut rng).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok("congruence 200, roundtrip 200, real_decompose 100, eigentuples 100, eig oracle 50".into())
}

fn bracketing() -> Outcome {
    // (tensor, a known Hermitian length) pairs; the bound must bracket it.
    let cases: Vec<(&str, HermitianTensor, usize)> = vec![
        ("E1122", e1122(), 4),
        ("diag pairs", diag_pairs(2), 5),
        ("Hankel", hankel(), 4),
        ("pair", kruskal_pair().assemble(), 2),
        ("four", kruskal_four().assemble(), 4),
    ];
    let mut out = Vec::new();
    for (name, h, known) in cases {
        let b = hrank_lower_bound(&h, &tol()).map_err(|e| e.to_string())?;
        let n = h.size();
        check(
            b.bound <= known && known <= n * n,
            format!("{name}: {} <= {known} <= {}", b.bound, n * n),
        )?;
        out.push(format!("{name} {}..{}", b.bound, n * n));
    }
    Ok(out.join(", "))
}

fn main() {
    let start = Instant::now();
    let criteria: [(&str, Criterion); 9] = [
        ("basis-tensor ranks", basis_ranks),
        ("[4,4] displayed decomposition", basis_4x4_display),
        ("Hankel real decomposition", hankel_real),
        ("flattening bounds", flattening_bounds),
        ("Kruskal certification", kruskal),
        ("psd verdicts", psd),
        ("separability", separability),
        ("property suites", property_suites),
        ("rank bracketing only", bracketing),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        match f() {
            Ok(msg) => println!("PASS {} {name}: {msg} ({:.2?})", k + 1, t.elapsed()),
            Err(msg) => {
                failed += 1;
                println!("FAIL {} {name}: {msg}", k + 1);
            }
        }
    }
    let total = start.elapsed();
    if total >= Duration::from_secs(180) {
        failed += 1;
        println!("FAIL suite time {total:.2?}");
    }
    println!(
        "{} of {} criteria passed in {total:.2?}",
        criteria.len() - failed.min(criteria.len()),
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
