//! Text formats: HTEN (tensors), HDEC (decompositions), MTXC (matrices),
//! GRAM (certificates) and SEPV (separability verdicts).
//!
//! Floats use Rust's shortest round-trip formatting, so save/load is exact.

use std::fmt::Write as _;

use num_complex::Complex64 as C64;

use crate::decomposition::{HermitianDecomposition, Term};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::psd_sos::{GramCertificate, GramKind, Monomial};
use crate::separability::{SepEvidence, SepVerdict};
use crate::spectral::Field;
use crate::tensor::{HermitianTensor, Shape, VectorTuple};

/// Plain decimal for moderate magnitudes, exponent form otherwise.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Line cursor that skips blank lines and `#` comments.
struct Lines<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        Self { lines, pos: 0 }
    }

    fn line_no(&self) -> usize {
        self.lines.get(self.pos).or(self.lines.last()).map(|l| l.0).unwrap_or(0)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            line: self.line_no(),
            msg: msg.into(),
        })
    }

    fn next(&mut self) -> Result<(usize, Vec<&'a str>)> {
        match self.lines.get(self.pos) {
            Some(&(n, l)) => {
                self.pos += 1;
                Ok((n, l.split_whitespace().collect()))
            }
            None => self.err("unexpected end of input"),
        }
    }

    fn peek_word(&self) -> Option<&'a str> {
        self.lines.get(self.pos).and_then(|l| l.1.split_whitespace().next())
    }

    fn done(&self) -> bool {
        self.pos >= self.lines.len()
    }

    /// Next line, which must start with `key`; returns the remaining words.
    fn keyed(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let (n, words) = self.next()?;
        if words.first() != Some(&key) {
            return Err(Error::Parse {
                line: n,
                msg: format!("expected `{key}`"),
            });
        }
        Ok((n, words[1..].to_vec()))
    }

    fn header(&mut self, magic: &str) -> Result<()> {
        let (n, w) = self.keyed(magic)?;
        if w != ["1"] {
            return Err(Error::Parse {
                line: n,
                msg: format!("unsupported {magic} version"),
            });
        }
        Ok(())
    }
}

fn num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad number `{s}`"),
    })
}

fn finite(line: usize, s: &str) -> Result<f64> {
    let x: f64 = num(line, s)?;
    if !x.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("non-finite value `{s}`"),
        });
    }
    Ok(x)
}

fn read_dims(lines: &mut Lines) -> Result<Shape> {
    let (n, w) = lines.keyed("dims")?;
    let dims = w.iter().map(|s| num::<usize>(n, s)).collect::<Result<Vec<_>>>()?;
    Shape::new(dims).map_err(|e| Error::Parse {
        line: n,
        msg: e.to_string(),
    })
}

fn dims_line(shape: &Shape) -> String {
    let d: Vec<String> = shape.dims().iter().map(|x| x.to_string()).collect();
    format!("dims {}\n", d.join(" "))
}

pub fn write_hten(h: &HermitianTensor) -> String {
    let shape = h.shape();
    let mut out = String::from("HTEN 1\n");
    out.push_str(&dims_line(shape));
    let n = h.size();
    for a in 0..n {
        for b in a..n {
            let v = h.at(a, b);
            if v.re == 0.0 && v.im == 0.0 {
                continue;
            }
            let idx: Vec<String> = shape
                .multi0(a)
                .into_iter()
                .chain(shape.multi0(b))
                .map(|i| (i + 1).to_string())
                .collect();
            let _ = writeln!(out, "{} {} {}", idx.join(" "), fmt_f64(v.re), fmt_f64(v.im));
        }
    }
    out
}

fn read_hten_lines(lines: &mut Lines, sym_tol: f64) -> Result<HermitianTensor> {
    lines.header("HTEN")?;
    let shape = read_dims(lines)?;
    let m = shape.order();
    let n = shape.size();
    let mut data = vec![C64::new(0.0, 0.0); n * n];
    let mut seen = vec![false; n * n];
    while !lines.done() && lines.peek_word().is_some_and(|w| w.chars().all(|c| c.is_ascii_digit())) {
        let (ln, w) = lines.next()?;
        if w.len() != 2 * m + 2 {
            return Err(Error::Parse {
                line: ln,
                msg: format!("expected {} fields", 2 * m + 2),
            });
        }
        let mut idx = Vec::with_capacity(2 * m);
        for (pos, s) in w[..2 * m].iter().enumerate() {
            let i: usize = num(ln, s)?;
            let k = pos % m;
            if i == 0 || i > shape.dims()[k] {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("index {i} out of range for mode {}", k + 1),
                });
            }
            idx.push(i - 1);
        }
        let a = shape.flat0(&idx[..m]);
        let b = shape.flat0(&idx[m..]);
        if a > b {
            return Err(Error::Parse {
                line: ln,
                msg: "entries must have I <= J".into(),
            });
        }
        if seen[a * n + b] {
            return Err(Error::Parse {
                line: ln,
                msg: "duplicate entry".into(),
            });
        }
        let v = C64::new(finite(ln, w[2 * m])?, finite(ln, w[2 * m + 1])?);
        if a == b && v.im.abs() > sym_tol {
            return Err(Error::Parse {
                line: ln,
                msg: "diagonal entry must be real".into(),
            });
        }
        seen[a * n + b] = true;
        data[a * n + b] = v;
        data[b * n + a] = v.conj();
    }
    for i in 0..n {
        data[i * n + i].im = 0.0;
    }
    HermitianTensor::new(shape, data, sym_tol)
}

pub fn read_hten(text: &str, sym_tol: f64) -> Result<HermitianTensor> {
    let mut lines = Lines::new(text);
    let h = read_hten_lines(&mut lines, sym_tol)?;
    if !lines.done() {
        return lines.err("trailing content");
    }
    Ok(h)
}

pub fn write_hdec(d: &HermitianDecomposition) -> String {
    let mut out = String::from("HDEC 1\n");
    out.push_str(&dims_line(d.shape()));
    let _ = writeln!(out, "terms {}", d.len());
    for t in d.terms() {
        let _ = writeln!(out, "lambda {}", fmt_f64(t.lambda));
        for (k, v) in t.vectors.vectors().iter().enumerate() {
            let parts: Vec<String> = v
                .iter()
                .map(|z| format!("{} {}", fmt_f64(z.re), fmt_f64(z.im)))
                .collect();
            let _ = writeln!(out, "v{} {}", k + 1, parts.join(" "));
        }
    }
    out
}

fn read_hdec_lines(lines: &mut Lines) -> Result<HermitianDecomposition> {
    lines.header("HDEC")?;
    let shape = read_dims(lines)?;
    let (ln, w) = lines.keyed("terms")?;
    if w.len() != 1 {
        return lines.err("expected `terms r`");
    }
    let r: usize = num(ln, w[0])?;
    let mut terms = Vec::with_capacity(r);
    for _ in 0..r {
        let (ln, w) = lines.keyed("lambda")?;
        if w.len() != 1 {
            return Err(Error::Parse {
                line: ln,
                msg: "expected `lambda <re>`".into(),
            });
        }
        let lambda = finite(ln, w[0])?;
        let mut vecs = Vec::with_capacity(shape.order());
        for (k, &nk) in shape.dims().iter().enumerate() {
            let (ln, w) = lines.keyed(&format!("v{}", k + 1))?;
            if w.len() != 2 * nk {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("expected {nk} complex entries"),
                });
            }
            let v = w
                .chunks(2)
                .map(|p| Ok(C64::new(finite(ln, p[0])?, finite(ln, p[1])?)))
                .collect::<Result<Vec<_>>>()?;
            vecs.push(v);
        }
        terms.push(Term::new(lambda, VectorTuple::new(vecs)));
    }
    HermitianDecomposition::new(shape, terms)
}

pub fn read_hdec(text: &str) -> Result<HermitianDecomposition> {
    let mut lines = Lines::new(text);
    let d = read_hdec_lines(&mut lines)?;
    if !lines.done() {
        return lines.err("trailing content");
    }
    Ok(d)
}

pub fn write_mtxc(m: &CMat) -> String {
    let mut out = String::from("MTXC 1\n");
    let _ = writeln!(out, "size {} {}", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols())
            .map(|j| format!("{} {}", fmt_f64(m[(i, j)].re), fmt_f64(m[(i, j)].im)))
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

fn read_mtxc_lines(lines: &mut Lines) -> Result<CMat> {
    lines.header("MTXC")?;
    let (ln, w) = lines.keyed("size")?;
    if w.len() != 2 {
        return lines.err("expected `size r c`");
    }
    let (r, c): (usize, usize) = (num(ln, w[0])?, num(ln, w[1])?);
    let mut data = Vec::with_capacity(r * c);
    for _ in 0..r {
        let (ln, w) = lines.next()?;
        if w.len() != 2 * c {
            return Err(Error::Parse {
                line: ln,
                msg: format!("expected {c} complex entries"),
            });
        }
        for p in w.chunks(2) {
            data.push(C64::new(finite(ln, p[0])?, finite(ln, p[1])?));
        }
    }
    CMat::from_vec(r, c, data)
}

pub fn read_mtxc(text: &str) -> Result<CMat> {
    let mut lines = Lines::new(text);
    let m = read_mtxc_lines(&mut lines)?;
    if !lines.done() {
        return lines.err("trailing content");
    }
    Ok(m)
}

/// GRAM layout: header, kind, dims, basis table (one monomial per line, per
/// mode the holomorphic then the conjugate exponents), the MTXC block of
/// `W`, then the residual and smallest eigenvalue.
pub fn write_gram(c: &GramCertificate) -> String {
    let mut out = String::from("GRAM 1\n");
    match &c.kind {
        GramKind::Hsos => out.push_str("kind hsos\n"),
        GramKind::Csos => out.push_str("kind csos\n"),
        GramKind::Omega(k) => {
            let ks: Vec<String> = k.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "kind omega {}", ks.join(" "));
        }
    }
    out.push_str(&dims_line(&c.shape));
    let _ = writeln!(out, "basis {}", c.basis.len());
    for b in &c.basis {
        let mut words = Vec::new();
        for (h, cj) in b.holo.iter().zip(&b.conj) {
            words.extend(h.iter().map(|x| x.to_string()));
            words.extend(cj.iter().map(|x| x.to_string()));
        }
        let _ = writeln!(out, "b {}", words.join(" "));
    }
    out.push_str(&write_mtxc(&c.w));
    let _ = writeln!(out, "residual {}", fmt_f64(c.residual));
    let _ = writeln!(out, "min_eig {}", fmt_f64(c.min_eig));
    out
}

fn read_gram_lines(lines: &mut Lines) -> Result<GramCertificate> {
    lines.header("GRAM")?;
    let (ln, w) = lines.keyed("kind")?;
    let kind = match w.first().copied() {
        Some("hsos") => GramKind::Hsos,
        Some("csos") => GramKind::Csos,
        Some("omega") => GramKind::Omega(w[1..].iter().map(|s| num(ln, s)).collect::<Result<_>>()?),
        _ => {
            return Err(Error::Parse {
                line: ln,
                msg: "unknown certificate kind".into(),
            })
        }
    };
    let shape = read_dims(lines)?;
    let (ln, w) = lines.keyed("basis")?;
    if w.len() != 1 {
        return lines.err("expected `basis B`");
    }
    let size: usize = num(ln, w[0])?;
    let width: usize = shape.dims().iter().map(|d| 2 * d).sum();
    let mut basis = Vec::with_capacity(size);
    for _ in 0..size {
        let (ln, w) = lines.keyed("b")?;
        if w.len() != width {
            return Err(Error::Parse {
                line: ln,
                msg: format!("expected {width} exponents"),
            });
        }
        let e = w.iter().map(|s| num::<u32>(ln, s)).collect::<Result<Vec<_>>>()?;
        let mut holo = Vec::new();
        let mut conj = Vec::new();
        let mut at = 0;
        for &d in shape.dims() {
            holo.push(e[at..at + d].to_vec());
            conj.push(e[at + d..at + 2 * d].to_vec());
            at += 2 * d;
        }
        basis.push(Monomial { holo, conj });
    }
    let w = read_mtxc_lines(lines)?;
    let (ln, r) = lines.keyed("residual")?;
    let residual = finite(ln, r.first().copied().unwrap_or(""))?;
    let (ln, r) = lines.keyed("min_eig")?;
    let min_eig = finite(ln, r.first().copied().unwrap_or(""))?;
    Ok(GramCertificate {
        kind,
        shape,
        basis,
        w,
        residual,
        min_eig,
    })
}

pub fn read_gram(text: &str) -> Result<GramCertificate> {
    let mut lines = Lines::new(text);
    let g = read_gram_lines(&mut lines)?;
    if !lines.done() {
        return lines.err("trailing content");
    }
    Ok(g)
}

/// SEPV layout: header, status, field, evidence kind with its payload
/// (HDEC; or the inner product, the witness as HTEN and its GRAM), then
/// the notes.
pub fn write_sepv(v: &SepVerdict) -> String {
    let mut out = String::from("SEPV 1\n");
    let _ = writeln!(out, "status {}", v.status.name());
    let _ = writeln!(out, "field {}", v.field.name());
    match &v.evidence {
        SepEvidence::Decomposition(d) => {
            out.push_str("evidence decomposition\n");
            out.push_str(&write_hdec(d));
        }
        SepEvidence::Witness { b, certificate, inner } => {
            out.push_str("evidence witness\n");
            let _ = writeln!(out, "inner {}", fmt_f64(*inner));
            out.push_str(&write_hten(b));
            out.push_str(&write_gram(certificate));
        }
        SepEvidence::RealObstruction { b, inner } => {
            out.push_str("evidence real-obstruction\n");
            let _ = writeln!(out, "inner {}", fmt_f64(*inner));
            out.push_str(&write_hten(b));
        }
        SepEvidence::None => out.push_str("evidence none\n"),
    }
    let _ = writeln!(out, "notes {}", v.notes.len());
    for n in &v.notes {
        let _ = writeln!(out, "note {n}");
    }
    out
}

/// Parsed SEPV record: verdict status and field names plus the evidence.
#[derive(Clone, Debug)]
pub struct SepRecord {
    pub status: String,
    pub field: Field,
    pub evidence: SepEvidence,
    pub notes: Vec<String>,
}

pub fn read_sepv(text: &str, sym_tol: f64) -> Result<SepRecord> {
    let mut lines = Lines::new(text);
    lines.header("SEPV")?;
    let (_, w) = lines.keyed("status")?;
    let status = w.first().copied().unwrap_or("").to_string();
    let (ln, w) = lines.keyed("field")?;
    let field: Field = w.first().copied().unwrap_or("").parse().map_err(|_| Error::Parse {
        line: ln,
        msg: "unknown field".into(),
    })?;
    let (ln, w) = lines.keyed("evidence")?;
    let evidence = match w.first().copied() {
        Some("decomposition") => SepEvidence::Decomposition(read_hdec_lines(&mut lines)?),
        Some("witness") => {
            let (ln, w) = lines.keyed("inner")?;
            let inner = finite(ln, w.first().copied().unwrap_or(""))?;
            let b = read_hten_lines(&mut lines, sym_tol)?;
            let certificate = read_gram_lines(&mut lines)?;
            SepEvidence::Witness { b, certificate, inner }
        }
        Some("real-obstruction") => {
            let (ln, w) = lines.keyed("inner")?;
            let inner = finite(ln, w.first().copied().unwrap_or(""))?;
            let b = read_hten_lines(&mut lines, sym_tol)?;
            SepEvidence::RealObstruction { b, inner }
        }
        Some("none") => SepEvidence::None,
        _ => {
            return Err(Error::Parse {
                line: ln,
                msg: "unknown evidence kind".into(),
            })
        }
    };
    let (ln, w) = lines.keyed("notes")?;
    let count: usize = num(ln, w.first().copied().unwrap_or(""))?;
    let mut notes = Vec::with_capacity(count);
    for _ in 0..count {
        let (_, w) = lines.keyed("note")?;
        notes.push(w.join(" "));
    }
    if !lines.done() {
        return lines.err("trailing content");
    }
    Ok(SepRecord {
        status,
        field,
        evidence,
        notes,
    })
}
