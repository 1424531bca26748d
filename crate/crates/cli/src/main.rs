mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hermitia::decomposition::{basis_decomposition, expected_hrank, jennrich_decompose, JennrichOutcome};
use hermitia::flatten::{cubic_flatten, hermitian_flatten, hrank_lower_bound, kronecker_flatten};
use hermitia::io;
use hermitia::linalg::matrix_rank;
use hermitia::psd_sos::{
    csos_test, hsos_test, multiplier_basis_size, multiplier_hsos_test, psd_verdict, CsosOutcome, GramKind, HsosOutcome,
    MultiplierOutcome, PsdOptions, PsdStatus, BASIS_CAP,
};
use hermitia::real_herm::{dim_r, dim_rd, is_real_decomposable, normal_form_22, real_decompose, real_decompose_22};
use hermitia::separability::{
    dual_witness_check, separability_pipeline, separable_search, verify_positive_decomposition, DualCheck, SepEvidence,
    SepPipeline, SepSearch, SepStatus,
};
use hermitia::spectral::{herm_eigenpairs, orthogonal_decompose, unitary_decomposable, EigenSearch, UnitaryVerdict};
use hermitia::{Error, Field, HermitianDecomposition, HermitianTensor, Shape, Tolerances, C64};
use report::{float, Report, DATA, NEGATIVE, OK, UNKNOWN, USAGE};
use serde_json::Value;

#[derive(Parser)]
#[command(name = "hermitia", version, about = "Hermitian tensor analysis")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Override a named tolerance, e.g. `--tol eigTol=1e-12`. Repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Machine-readable report.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Input {
    /// HTEN tensor file.
    file: PathBuf,
}

#[derive(Args)]
struct Out {
    /// Write the payload (HTEN, HDEC, MTXC, GRAM or SEPV) here instead of stdout.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Complex,
    Real,
}

impl From<FieldArg> for Field {
    fn from(f: FieldArg) -> Self {
        match f {
            FieldArg::Complex => Field::Complex,
            FieldArg::Real => Field::Real,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FlatKind {
    /// Hermitian flattening m(H).
    M,
    /// Kronecker flattening.
    Kappa,
    /// Frontal slices of the cubic flattening.
    Cubic,
}

/// Comma-separated values parsed as one argument. The alias keeps clap from
/// treating the field as a repeated flag.
type List<T> = Vec<T>;

fn list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(|p| p.trim().parse().map_err(|_| format!("bad list entry '{p}'")))
        .collect()
}

fn shape_arg(s: &str) -> Result<Shape, String> {
    Shape::new(list(s)?).map_err(|e| e.to_string())
}

fn complex_arg(s: &str) -> Result<C64, String> {
    let v: Vec<f64> = list(s)?;
    match v[..] {
        [re] => Ok(C64::new(re, 0.0)),
        [re, im] => Ok(C64::new(re, im)),
        _ => Err("expected `re` or `re,im`".into()),
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Shape, norm and structural facts.
    Info(Input),
    /// Parse and check Hermitian symmetry.
    Validate(Input),
    /// Export a flattening as MTXC.
    Flatten {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "m")]
        kind: FlatKind,
        #[command(flatten)]
        out: Out,
    },
    /// Flattening lower bounds on the Hermitian rank.
    Bounds(Input),
    /// Hermitian decomposition of a basis tensor E^{IJ}(c).
    BasisDecompose {
        #[arg(long, value_parser = shape_arg)]
        shape: Shape,
        /// Row multi-index, 1-based, comma separated.
        #[arg(long, value_parser = list::<usize>)]
        i: List<usize>,
        #[arg(long, value_parser = list::<usize>)]
        j: List<usize>,
        /// Coefficient as `re` or `re,im`.
        #[arg(long, value_parser = complex_arg, default_value = "1")]
        c: C64,
        #[command(flatten)]
        out: Out,
    },
    /// Kruskal uniqueness test on an HDEC file.
    Kruskal {
        /// HDEC decomposition file.
        file: PathBuf,
    },
    /// Simultaneous-diagonalization decomposition.
    Jennrich {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        rmax: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Test membership in the real-decomposable subspace.
    RealCheck(Input),
    /// Real Hermitian decomposition.
    RealDecompose {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        out: Out,
    },
    /// Normal form and real decomposition for shape [2,2].
    RealDecompose22 {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        out: Out,
    },
    /// Multistart search for Hermitian eigentuples.
    Eig {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "complex")]
        field: FieldArg,
        #[arg(long, default_value_t = 16)]
        starts: usize,
    },
    /// Spectral decomposition of the flattening as tensors.
    Ortho(Input),
    /// Decide unitary decomposability.
    UnitaryCheck {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        out: Out,
    },
    /// Hermitian sum-of-squares test.
    Hsos {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        out: Out,
    },
    /// Conjugate sum-of-squares feasibility search.
    Csos {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 5000)]
        iters: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Multiplier hierarchy test with exponents k.
    Omega {
        #[command(flatten)]
        input: Input,
        /// Per-mode exponents, comma separated.
        #[arg(long, value_parser = list::<u32>)]
        k: List<u32>,
        #[command(flatten)]
        out: Out,
    },
    /// Positive semidefiniteness verdict.
    Psd {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "complex")]
        field: FieldArg,
        #[arg(long, default_value_t = 2)]
        effort: u32,
        #[command(flatten)]
        out: Out,
    },
    /// Verify a positive decomposition (HDEC) of the tensor.
    SepVerify {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        dec: PathBuf,
        #[arg(long, value_enum, default_value = "complex")]
        field: FieldArg,
    },
    /// Check a dual witness (HTEN) against the tensor.
    SepWitness {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        witness: PathBuf,
    },
    /// Search for a positive decomposition of a given length.
    SepSearch {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        rank: usize,
        #[arg(long, value_enum, default_value = "complex")]
        field: FieldArg,
        #[arg(long, default_value_t = 8)]
        starts: usize,
        #[arg(long, default_value_t = 500)]
        iters: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Full separability pipeline.
    SepPipeline {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "complex")]
        field: FieldArg,
        #[arg(long, default_value_t = 4)]
        effort: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Random Hermitian tensor with Gaussian entries.
    Random {
        #[arg(long, value_parser = shape_arg)]
        shape: Shape,
        /// Real entries only.
        #[arg(long)]
        real: bool,
        #[command(flatten)]
        out: Out,
    },
    /// Expected generic Hermitian rank and subspace dimensions.
    ExpectedRank {
        #[arg(long, value_parser = shape_arg)]
        shape: Shape,
    },
}

/// A failure with its exit code.
struct Fail(i32, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. }
            | Error::SymmetryViolation { .. }
            | Error::NonFinite
            | Error::NonRealDiagonal
            | Error::NotHermitian(_) => DATA,
            Error::NoConvergence(_)
            | Error::DegenerateSlices(_)
            | Error::ZeroTensor
            | Error::DegenerateTerm(_)
            | Error::NonRealInner(_) => UNKNOWN,
            _ => USAGE,
        };
        Fail(code, e.to_string())
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Fail(USAGE, e.to_string())
    }
}

type Res<T> = std::result::Result<T, Fail>;

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| Fail(USAGE, format!("{}: {e}", path.display())))
}

fn load(path: &Path, tol: &Tolerances) -> Res<HermitianTensor> {
    io::read_hten(&read(path)?, tol.sym_tol).map_err(|e| {
        let f = Fail::from(e);
        Fail(DATA, format!("{}: {}", path.display(), f.1))
    })
}

fn load_hdec(path: &Path) -> Res<HermitianDecomposition> {
    io::read_hdec(&read(path)?).map_err(|e| {
        let f = Fail::from(e);
        Fail(DATA, format!("{}: {}", path.display(), f.1))
    })
}

fn cstr(z: C64) -> String {
    let (re, im) = (io::fmt_f64(z.re), io::fmt_f64(z.im.abs()));
    if z.im < 0.0 || (z.im == 0.0 && z.im.is_sign_negative()) {
        format!("{re}-{im}i")
    } else {
        format!("{re}+{im}i")
    }
}

fn vectors(vs: &[Vec<C64>]) -> Value {
    Value::Array(
        vs.iter()
            .map(|v| Value::from(v.iter().map(|&z| cstr(z)).collect::<Vec<_>>().join(" ")))
            .collect(),
    )
}

fn index_str(i: &[usize], j: &[usize]) -> String {
    let wide = i.iter().chain(j).any(|&x| x > 9);
    let sep = if wide { "," } else { "" };
    let f = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep);
    if wide {
        format!("({}),({})", f(i), f(j))
    } else {
        format!("{}{}", f(i), f(j))
    }
}

fn gram_kind(k: &GramKind) -> String {
    match k {
        GramKind::Hsos => "hsos".into(),
        GramKind::Csos => "csos".into(),
        GramKind::Omega(k) => format!("omega {k:?}"),
    }
}

fn decomposition_report(r: &mut Report, d: &HermitianDecomposition, h: &HermitianTensor) -> Res<()> {
    r.set("terms", d.len());
    r.num("residual", d.residual(h)?);
    r.payload(io::write_hdec(d));
    Ok(())
}

fn run(cli: Cli) -> Res<(Report, Option<PathBuf>)> {
    let mut tol = Tolerances::default();
    for t in &cli.tol {
        let (name, value) = t
            .split_once('=')
            .ok_or_else(|| Fail(USAGE, format!("--tol expects NAME=VALUE, got '{t}'")))?;
        let v: f64 = value
            .parse()
            .map_err(|_| Fail(USAGE, format!("bad tolerance value '{value}'")))?;
        if !tol.set(name, v) {
            return Err(Fail(
                USAGE,
                format!(
                    "unknown tolerance '{name}' or non-positive value (names: {})",
                    Tolerances::NAMES.join(", ")
                ),
            ));
        }
    }
    let seed = cli.seed;
    let mut r = Report::new(OK);
    let out = match cli.cmd {
        Cmd::Info(inp) => {
            let h = load(&inp.file, &tol)?;
            r.set("shape", h.shape().to_string());
            r.set("order", h.shape().order());
            r.set("size", h.size());
            r.num("norm", h.norm());
            r.num("max_abs", h.max_abs());
            let real = h.is_real(tol.sym_tol);
            r.set("real", real);
            if real {
                r.set("real_decomposable", is_real_decomposable(&h, &tol)?.decomposable);
            }
            r.set("hsos", matches!(hsos_test(&h, &tol)?, HsosOutcome::Hsos(_)));
            None
        }
        Cmd::Validate(inp) => {
            let h = load(&inp.file, &tol)?;
            r.set("valid", true);
            r.set("shape", h.shape().to_string());
            None
        }
        Cmd::Flatten { input, kind, out } => {
            let h = load(&input.file, &tol)?;
            match kind {
                FlatKind::M | FlatKind::Kappa => {
                    let f = match kind {
                        FlatKind::M => hermitian_flatten(&h),
                        _ => kronecker_flatten(&h)?,
                    };
                    r.set("kind", if matches!(kind, FlatKind::M) { "m" } else { "kappa" });
                    r.set("rows", f.matrix.rows());
                    r.set("cols", f.matrix.cols());
                    r.set("rank", matrix_rank(&f.matrix, tol.rank_tol)?);
                    r.payload(io::write_mtxc(&f.matrix));
                }
                FlatKind::Cubic => {
                    let c = cubic_flatten(&h);
                    let (n1, n2, n3) = c.dims();
                    r.set("kind", "cubic");
                    r.set("dims", vec![n1, n2, n3]);
                    r.set("mode_order", c.mode_order.iter().map(|k| k + 1).collect::<Vec<_>>());
                    let text: String = (0..n3).map(|l| io::write_mtxc(&c.slice(l))).collect();
                    r.payload(text);
                }
            }
            out.out
        }
        Cmd::Bounds(inp) => {
            let h = load(&inp.file, &tol)?;
            let b = hrank_lower_bound(&h, &tol)?;
            r.set("m_rank", b.m_rank);
            r.set("kappa_rank", b.kappa_rank);
            r.set("lower_bound", b.bound);
            r.set("upper_bound", h.size() * h.size());
            r.set("exact", false);
            None
        }
        Cmd::BasisDecompose { shape, i, j, c, out } => {
            let d = basis_decomposition(&i, &j, c, &shape)?;
            let e = HermitianTensor::basis(shape.clone(), &i, &j, c)?;
            r.set("shape", shape.to_string());
            r.set("entry", index_str(&i, &j));
            decomposition_report(&mut r, &d, &e)?;
            out.out
        }
        Cmd::Kruskal { file } => {
            let d = load_hdec(&file)?;
            let k = d.kruskal_certify(&tol)?;
            r.set("k_ranks", k.k_ranks.clone());
            r.set("rank", k.rank);
            r.set("margin", k.margin);
            r.set("certified", k.certified);
            r.code = if k.certified { OK } else { UNKNOWN };
            None
        }
        Cmd::Jennrich { input, rmax, out } => {
            let h = load(&input.file, &tol)?;
            r.set("seed", seed);
            match jennrich_decompose(&h, rmax, seed, &tol)? {
                JennrichOutcome::Decomposed(d) => {
                    r.set("status", "DECOMPOSED");
                    decomposition_report(&mut r, &d, &h)?;
                }
                JennrichOutcome::Unknown(why) => {
                    r.set("status", "UNKNOWN");
                    r.set("reason", why);
                    r.code = UNKNOWN;
                }
            }
            out.out
        }
        Cmd::RealCheck(inp) => {
            let h = load(&inp.file, &tol)?;
            match is_real_decomposable(&h, &tol) {
                Ok(c) => {
                    r.set("decomposable", c.decomposable);
                    if let Some(w) = c.witness {
                        r.set(
                            "witness",
                            format!("{} vs {}", index_str(&w.i, &w.j), index_str(&w.k, &w.l)),
                        );
                        r.num("left", w.left);
                        r.num("right", w.right);
                        r.code = NEGATIVE;
                    }
                }
                Err(Error::RealityViolation(msg)) => {
                    r.set("decomposable", false);
                    r.set("reason", msg);
                    r.code = NEGATIVE;
                }
                Err(e) => return Err(e.into()),
            }
            None
        }
        Cmd::RealDecompose { input, out } => {
            let h = load(&input.file, &tol)?;
            match real_decompose(&h, &tol) {
                Ok(d) => decomposition_report(&mut r, &d, &h)?,
                Err(e @ (Error::NotRealDecomposable(_) | Error::RealityViolation(_))) => {
                    r.set("decomposable", false);
                    r.set("reason", e.to_string());
                    r.code = NEGATIVE;
                }
                Err(e) => return Err(e.into()),
            }
            out.out
        }
        Cmd::RealDecompose22 { input, out } => {
            let h = load(&input.file, &tol)?;
            match normal_form_22(&h, &tol) {
                Ok(nf) => {
                    r.set("s", nf.s as i64);
                    r.set("d", vec![float(nf.d[0]), float(nf.d[1])]);
                    r.set("u", vec![float(nf.u[0]), float(nf.u[1])]);
                    r.num("normal_form_residual", nf.residual(&h)?);
                    let d = real_decompose_22(&h, &tol)?;
                    decomposition_report(&mut r, &d, &h)?;
                }
                Err(e @ (Error::NotRealDecomposable(_) | Error::RealityViolation(_))) => {
                    r.set("decomposable", false);
                    r.set("reason", e.to_string());
                    r.code = NEGATIVE;
                }
                Err(e) => return Err(e.into()),
            }
            out.out
        }
        Cmd::Eig { input, field, starts } => {
            let h = load(&input.file, &tol)?;
            let search = EigenSearch {
                seed,
                field: field.into(),
                starts,
                ..EigenSearch::default()
            };
            let rep = herm_eigenpairs(&h, &search, &tol);
            r.set("seed", seed);
            r.set("field", Field::from(field).name());
            r.set("runs", rep.total_runs);
            r.set("failed_runs", rep.failed_runs);
            if let (Some(lo), Some(hi)) = (rep.best_min(), rep.best_max()) {
                r.num("min_lambda", lo.lambda);
                r.num("max_lambda", hi.lambda);
            }
            let tuples: Vec<Value> = rep
                .tuples
                .iter()
                .map(|t| {
                    serde_json::json!({
                        "lambda": float(t.lambda),
                        "max_residual": float(t.max_residual()),
                        "vectors": vectors(t.vectors.vectors()),
                    })
                })
                .collect();
            if tuples.is_empty() {
                r.code = UNKNOWN;
            }
            r.set("tuples", tuples);
            None
        }
        Cmd::Ortho(inp) => {
            let h = load(&inp.file, &tol)?;
            let od = orthogonal_decompose(&h, &tol)?;
            let flags = od.unit_rank1(&tol);
            r.set("terms", od.terms.len());
            r.set("unit_rank1", flags.iter().filter(|&&f| f).count());
            let rows: Vec<Value> = od
                .terms
                .iter()
                .zip(&flags)
                .map(|(t, &f)| {
                    serde_json::json!({
                        "lambda": float(t.lambda),
                        "rank1_residual": float(t.rank1_residual),
                        "rank1": f,
                    })
                })
                .collect();
            r.set("spectrum", rows);
            r.num("reconstruction_error", od.reconstruct(&h).sub(&h)?.norm());
            None
        }
        Cmd::UnitaryCheck { input, out } => {
            let h = load(&input.file, &tol)?;
            match unitary_decomposable(&h, &tol)? {
                UnitaryVerdict::Yes(d) => {
                    r.set("verdict", "YES");
                    decomposition_report(&mut r, &d, &h)?;
                }
                UnitaryVerdict::No { term, residual } => {
                    r.set("verdict", "NO");
                    r.set("term", term);
                    r.num("rank1_residual", residual);
                    r.code = NEGATIVE;
                }
                UnitaryVerdict::Inconclusive(why) => {
                    r.set("verdict", "INCONCLUSIVE");
                    r.set("reason", why);
                    r.code = UNKNOWN;
                }
            }
            out.out
        }
        Cmd::Hsos { input, out } => {
            let h = load(&input.file, &tol)?;
            match hsos_test(&h, &tol)? {
                HsosOutcome::Hsos(c) => {
                    r.set("hsos", true);
                    r.num("min_eig", c.min_eig);
                    r.num("residual", c.residual);
                    r.payload(io::write_gram(&c));
                }
                HsosOutcome::NotHsos { min_eig, eigvec } => {
                    r.set("hsos", false);
                    r.num("min_eig", min_eig);
                    r.set("eigvec", vectors(&[eigvec]));
                    r.code = NEGATIVE;
                }
            }
            out.out
        }
        Cmd::Csos { input, iters, out } => {
            let h = load(&input.file, &tol)?;
            match csos_test(&h, iters, &tol)? {
                CsosOutcome::Feasible(c) => {
                    r.set("status", "FEASIBLE");
                    r.num("residual", c.residual);
                    r.num("min_eig", c.min_eig);
                    r.payload(io::write_gram(&c));
                }
                CsosOutcome::InfeasibleHint { distance, iterations } => {
                    r.set("status", "INFEASIBLE_HINT");
                    r.num("distance", distance);
                    r.set("iterations", iterations);
                    r.code = UNKNOWN;
                }
                CsosOutcome::Unknown { distance, iterations } => {
                    r.set("status", "UNKNOWN");
                    r.num("distance", distance);
                    r.set("iterations", iterations);
                    r.code = UNKNOWN;
                }
            }
            out.out
        }
        Cmd::Omega { input, k, out } => {
            let h = load(&input.file, &tol)?;
            if k.len() == h.shape().order() {
                r.set("basis_size", multiplier_basis_size(h.shape(), &k));
            }
            match multiplier_hsos_test(&h, &k, BASIS_CAP, &tol)? {
                MultiplierOutcome::Member(c) => {
                    r.set("status", "MEMBER");
                    r.num("min_eig", c.min_eig);
                    r.num("residual", c.residual);
                    r.payload(io::write_gram(&c));
                }
                MultiplierOutcome::Unknown { min_eig } => {
                    r.set("status", "UNKNOWN");
                    r.num("min_eig", min_eig);
                    r.code = UNKNOWN;
                }
            }
            out.out
        }
        Cmd::Psd {
            input,
            field,
            effort,
            out,
        } => {
            let h = load(&input.file, &tol)?;
            let opts = PsdOptions {
                field: field.into(),
                effort,
                seed,
                ..PsdOptions::default()
            };
            let v = psd_verdict(&h, &opts, &tol)?;
            r.set("seed", seed);
            r.set("field", v.field.name());
            r.set("status", v.status.name());
            if let Some((x, val)) = &v.witness {
                r.num("witness_value", *val);
                r.set("witness", vectors(x.vectors()));
            }
            if let Some(c) = &v.certificate {
                r.set("certificate", gram_kind(&c.kind));
                r.num("residual", c.residual);
                r.payload(io::write_gram(c));
            }
            r.set("notes", v.notes.clone());
            r.code = match v.status {
                PsdStatus::PsdCertified => OK,
                PsdStatus::NotPsdWitness => NEGATIVE,
                PsdStatus::Unknown => UNKNOWN,
            };
            out.out
        }
        Cmd::SepVerify { input, dec, field } => {
            let h = load(&input.file, &tol)?;
            let d = load_hdec(&dec)?;
            let ok = verify_positive_decomposition(&d, &h, field.into(), &tol)?;
            r.set("verified", ok);
            r.set("positive", d.is_positive());
            r.set("terms", d.len());
            r.num("residual", d.residual(&h)?);
            r.code = if ok { OK } else { NEGATIVE };
            None
        }
        Cmd::SepWitness { input, witness } => {
            let a = load(&input.file, &tol)?;
            let b = load(&witness, &tol)?;
            match dual_witness_check(&a, &b, &tol)? {
                DualCheck::Entangled { inner, .. } => {
                    r.set("status", "ENTANGLED_WITNESS");
                    r.num("inner", inner);
                    r.code = NEGATIVE;
                }
                DualCheck::Inconclusive { inner, reason } => {
                    r.set("status", "INCONCLUSIVE");
                    r.num("inner", inner);
                    r.set("reason", reason);
                    r.code = UNKNOWN;
                }
            }
            None
        }
        Cmd::SepSearch {
            input,
            rank,
            field,
            starts,
            iters,
            out,
        } => {
            let h = load(&input.file, &tol)?;
            let opts = SepSearch {
                field: field.into(),
                seed,
                starts,
                iters,
                ..SepSearch::default()
            };
            let v = separable_search(&h, rank, &opts, &tol)?;
            r.set("seed", seed);
            sep_report(&mut r, &v);
            out.out
        }
        Cmd::SepPipeline {
            input,
            field,
            effort,
            out,
        } => {
            let h = load(&input.file, &tol)?;
            let opts = SepPipeline {
                field: field.into(),
                effort,
                seed,
                ..SepPipeline::default()
            };
            let v = separability_pipeline(&h, &opts, &tol)?;
            r.set("seed", seed);
            sep_report(&mut r, &v);
            out.out
        }
        Cmd::Random { shape, real, out } => {
            let h = if real {
                HermitianTensor::random_real(shape.clone(), seed)
            } else {
                HermitianTensor::random(shape.clone(), seed)
            };
            r.set("seed", seed);
            r.set("shape", shape.to_string());
            r.payload(io::write_hten(&h));
            out.out
        }
        Cmd::ExpectedRank { shape } => {
            r.set("shape", shape.to_string());
            r.set("expected_rank", expected_hrank(&shape));
            r.set("dim_hermitian", (shape.size() * shape.size()) as u64);
            r.set("dim_real", dim_r(&shape));
            r.set("dim_real_decomposable", dim_rd(&shape));
            None
        }
    };
    Ok((r, out))
}

fn sep_report(r: &mut Report, v: &hermitia::separability::SepVerdict) {
    r.set("field", v.field.name());
    r.set("status", v.status.name());
    match &v.evidence {
        SepEvidence::Decomposition(d) => {
            r.set("evidence", "decomposition");
            r.set("terms", d.len());
        }
        SepEvidence::Witness { inner, .. } => {
            r.set("evidence", "witness");
            r.num("inner", *inner);
        }
        SepEvidence::RealObstruction { inner, .. } => {
            r.set("evidence", "real-obstruction");
            r.num("inner", *inner);
        }
        SepEvidence::None => {
            r.set("evidence", "none");
        }
    }
    r.set("notes", v.notes.clone());
    r.code = match v.status {
        SepStatus::SeparableCertified => OK,
        SepStatus::EntangledWitness => NEGATIVE,
        SepStatus::Unknown => UNKNOWN,
    };
    r.payload(io::write_sepv(v));
}

fn threads_from_env() -> Result<(), String> {
    match std::env::var("HERMITIA_THREADS") {
        Ok(s) => {
            let n: usize = s
                .trim()
                .parse()
                .map_err(|_| format!("HERMITIA_THREADS must be a positive integer, got '{s}'"))?;
            if n == 0 {
                return Err("HERMITIA_THREADS must be at least 1".into());
            }
            hermitia::exec::set_max_threads(n);
            Ok(())
        }
        Err(_) => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => OK,
                _ => USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    if let Err(msg) = threads_from_env() {
        eprintln!("error: {msg}");
        return ExitCode::from(USAGE as u8);
    }
    let json = cli.json;
    let code = match run(cli) {
        Ok((report, out)) => match report.emit(json, out.as_ref()) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                USAGE
            }
        },
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    };
    ExitCode::from(code as u8)
}
