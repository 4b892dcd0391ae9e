//! System files, the expression grammar and the `qcurv` command line.

use std::collections::BTreeMap;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::{Coeff, FieldElem, Matrix, RatFunc, Scalar, XFunction};
use crate::birkhoff::{ellipticity_and_constancy, prepare, specialize, DoubleDouble, Real};
use crate::curvature::{curvature_scan, CurvatureStatus, ScanMode};
use crate::error::{Error, Result};
use crate::frobenius::{
    default_exponent_bound, default_window, exponents, shear_to_zero, system_at_infinity, triviality_test,
    ExponentReport, TrivialityVerdict,
};
use crate::qdiff::QDiffSystem;
use crate::rootdyn::lemma_scan;

// ---------------------------------------------------------------------------
// expressions

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Q,
    X,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

/// Maps byte offsets of the whole input to 1-based line and column.
struct Positions {
    line_starts: Vec<usize>,
    text: String,
}

impl Positions {
    fn new(text: &str) -> Self {
        let mut line_starts = vec![0];
        line_starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        Positions { line_starts, text: text.to_string() }
    }

    fn at(&self, offset: usize) -> (usize, usize) {
        let line = self.line_starts.partition_point(|&s| s <= offset);
        let start = self.line_starts[line - 1];
        let col = self.text[start..offset.min(self.text.len())].chars().count() + 1;
        (line, col)
    }

    fn error(&self, offset: usize, msg: impl Into<String>) -> Error {
        let (line, col) = self.at(offset);
        Error::Syntax { line, col, msg: msg.into() }
    }
}

fn tokenize(src: &str, base: usize, pos: &Positions) -> Result<Vec<(Tok, usize)>> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let at = base + i;
        let tok = match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((Tok::Int(src[start..i].parse().unwrap()), at));
                continue;
            }
            b'q' => Tok::Q,
            b'x' => Tok::X,
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            _ => {
                let ch = src[i..].chars().next().unwrap();
                return Err(pos.error(at, format!("unexpected character '{ch}'")));
            }
        };
        out.push((tok, at));
        i += 1;
    }
    Ok(out)
}

struct ExprParser<'a> {
    toks: Vec<(Tok, usize)>,
    i: usize,
    end: usize,
    pos: &'a Positions,
    characteristic: Option<u64>,
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.0)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.i).map_or(self.end, |t| t.1)
    }

    fn constant(&self, n: &BigInt) -> XFunction {
        let s = match self.characteristic {
            Some(p) => Scalar::Mod { value: n.mod_floor(&BigInt::from(p)).to_u64().unwrap(), modulus: p },
            None => Scalar::from_bigint(n.clone()),
        };
        RatFunc::constant(FieldElem::constant(s))
    }

    // expr := ['+'|'-'] term (('+'|'-') term)*
    fn expr(&mut self) -> Result<XFunction> {
        let negate = match self.peek() {
            Some(Tok::Minus) => {
                self.i += 1;
                true
            }
            Some(Tok::Plus) => {
                self.i += 1;
                false
            }
            _ => false,
        };
        let mut acc = self.term()?;
        if negate {
            acc = -&acc;
        }
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.i += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.i += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    // term := factor (('*'|'/') factor)*
    fn term(&mut self) -> Result<XFunction> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.i += 1;
                    acc = &acc * &self.factor()?;
                }
                Some(Tok::Slash) => {
                    self.i += 1;
                    let at = self.offset();
                    let d = self.factor()?;
                    if d.is_zero() {
                        return Err(self.pos.error(at, "division by zero"));
                    }
                    acc = &acc / &d;
                }
                _ => return Ok(acc),
            }
        }
    }

    // factor := base ('^' ['-'] integer)?
    fn factor(&mut self) -> Result<XFunction> {
        let base = self.base()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.i += 1;
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.i += 1;
            true
        } else {
            false
        };
        let at = self.offset();
        let Some(Tok::Int(n)) = self.peek().cloned() else {
            return Err(self.pos.error(at, "expected integer exponent"));
        };
        self.i += 1;
        let e = n.to_i64().filter(|e| *e <= 100_000).ok_or_else(|| self.pos.error(at, "exponent too large"))?;
        let e = if neg { -e } else { e };
        base.pow_i(e).ok_or_else(|| self.pos.error(at, "negative power of zero"))
    }

    // base := 'q' | 'x' | integer | '(' expr ')'
    fn base(&mut self) -> Result<XFunction> {
        let at = self.offset();
        let tok = self.peek().cloned().ok_or_else(|| self.pos.error(at, "unexpected end of expression"))?;
        self.i += 1;
        match tok {
            Tok::Q => Ok(&RatFunc::constant(crate::arith::q()) * &self.constant(&BigInt::from(1))),
            Tok::X => Ok(&crate::qdiff::xvar() * &self.constant(&BigInt::from(1))),
            Tok::Int(n) => Ok(self.constant(&n)),
            Tok::LParen => {
                let inner = self.expr()?;
                let close = self.offset();
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.pos.error(close, "expected ')'"));
                }
                self.i += 1;
                Ok(inner)
            }
            other => Err(self.pos.error(at, format!("unexpected {}", describe(&other)))),
        }
    }
}

fn describe(t: &Tok) -> &'static str {
    match t {
        Tok::Int(_) => "integer",
        Tok::Q => "'q'",
        Tok::X => "'x'",
        Tok::Plus => "'+'",
        Tok::Minus => "'-'",
        Tok::Star => "'*'",
        Tok::Slash => "'/'",
        Tok::Caret => "'^'",
        Tok::LParen => "'('",
        Tok::RParen => "')'",
    }
}

fn parse_expr_at(src: &str, base: usize, pos: &Positions, characteristic: Option<u64>) -> Result<XFunction> {
    let toks = tokenize(src, base, pos)?;
    let end = base + src.trim_end().len();
    if toks.is_empty() {
        return Err(pos.error(base + src.len() - src.trim_start().len(), "empty expression"));
    }
    let mut p = ExprParser { toks, i: 0, end, pos, characteristic };
    let value = p.expr()?;
    if p.i < p.toks.len() {
        let (tok, at) = &p.toks[p.i];
        return Err(pos.error(*at, format!("unexpected {}", describe(tok))));
    }
    Ok(value)
}

/// Parse an expression in `q` and `x`.
pub fn parse_expr(src: &str, characteristic: Option<u64>) -> Result<XFunction> {
    parse_expr_at(src, 0, &Positions::new(src), characteristic)
}

/// Parse an expression in `q` alone.
pub fn parse_qfunction(src: &str, characteristic: Option<u64>) -> Result<FieldElem> {
    let f = parse_expr(src, characteristic)?;
    if !f.num().is_constant() || !f.den().is_constant() {
        return Err(Error::Invalid(format!("'{src}' depends on x")));
    }
    Ok(f.num().coeff(0).div(&f.den().coeff(0)))
}

trait FieldDiv {
    fn div(&self, rhs: &Self) -> Self;
}

impl FieldDiv for FieldElem {
    fn div(&self, rhs: &Self) -> Self {
        self.mul(&rhs.inv().expect("nonzero"))
    }
}

// ---------------------------------------------------------------------------
// system files

/// A statement `key = value` with the byte offsets of both parts.
struct Statement<'a> {
    key: &'a str,
    key_at: usize,
    value: &'a str,
    value_at: usize,
}

/// Blank out comments, keeping offsets.
fn strip_comments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_comment = false;
    for ch in text.chars() {
        if ch == '\n' {
            in_comment = false;
        } else if ch == '#' {
            in_comment = true;
        }
        if in_comment {
            out.extend(std::iter::repeat(' ').take(ch.len_utf8()));
        } else {
            out.push(ch);
        }
    }
    out
}

/// Split at newlines, `;` and `,` outside brackets and parentheses.
fn statements<'a>(text: &'a str, pos: &Positions) -> Result<Vec<Statement<'a>>> {
    let mut out = Vec::new();
    let mut open: Vec<(usize, char)> = Vec::new();
    let mut start = 0;
    let push = |s: usize, e: usize, out: &mut Vec<Statement<'a>>| -> Result<()> {
        let chunk = &text[s..e];
        if chunk.trim().is_empty() {
            return Ok(());
        }
        let lead = chunk.len() - chunk.trim_start().len();
        let Some(eq) = chunk.find('=') else {
            return Err(pos.error(s + lead, "expected key=value"));
        };
        let key = chunk[..eq].trim();
        let value = &chunk[eq + 1..];
        let vlead = value.len() - value.trim_start().len();
        out.push(Statement { key, key_at: s + lead, value: value.trim(), value_at: s + eq + 1 + vlead });
        Ok(())
    };
    for (i, ch) in text.char_indices() {
        match ch {
            '[' | '(' => open.push((i, ch)),
            ']' | ')' => {
                let want = if ch == ']' { '[' } else { '(' };
                if open.pop().map(|o| o.1) != Some(want) {
                    return Err(pos.error(i, format!("unbalanced '{ch}'")));
                }
            }
            '\n' | ';' | ',' if open.is_empty() => {
                push(start, i, &mut out)?;
                start = i + ch.len_utf8();
            }
            _ => {}
        }
    }
    if let Some(&(at, ch)) = open.last() {
        return Err(pos.error(at, format!("unclosed '{ch}'")));
    }
    push(start, text.len(), &mut out)?;
    Ok(out)
}

/// Split `s` at top-level commas, returning pieces with their offsets.
fn split_top(s: &str, base: usize) -> Vec<(&str, usize)> {
    let mut out = Vec::new();
    let mut depth = 0i64;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push((&s[start..i], base + start));
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push((&s[start..], base + start));
    out
}

/// `[...]` with its inner text and offset.
fn bracketed<'a>(s: &'a str, at: usize, pos: &Positions) -> Result<(&'a str, usize)> {
    let lead = s.len() - s.trim_start().len();
    let t = s.trim();
    if !t.starts_with('[') {
        return Err(pos.error(at + lead, "expected '['"));
    }
    if !t.ends_with(']') {
        return Err(pos.error(at + lead + t.len().saturating_sub(1), "expected ']'"));
    }
    Ok((&t[1..t.len() - 1], at + lead + 1))
}

fn parse_matrix(value: &str, at: usize, pos: &Positions, ch: Option<u64>) -> Result<Matrix<XFunction>> {
    let (inner, inner_at) = bracketed(value, at, pos)?;
    let mut rows = Vec::new();
    for (row, row_at) in split_top(inner, inner_at) {
        let (cells, cells_at) = bracketed(row, row_at, pos)?;
        let entries = split_top(cells, cells_at)
            .into_iter()
            .map(|(e, e_at)| parse_expr_at(e, e_at, pos, ch))
            .collect::<Result<Vec<_>>>()?;
        rows.push(entries);
    }
    let n = rows.len();
    if let Some(bad) = rows.iter().position(|r| r.len() != n) {
        return Err(Error::RankMismatch(format!("row {} has {} entries, expected {n}", bad + 1, rows[bad].len())));
    }
    Ok(Matrix::from_rows(&(), rows))
}

/// Companion system of `a_ν y(q^ν x) + … + a₀ y(x) = 0` for `Y = (y, σy, …, σ^{ν−1}y)`.
pub fn companion(coeffs: &[XFunction]) -> Result<QDiffSystem> {
    let nu = coeffs.len().checked_sub(1).filter(|&n| n >= 1).ok_or_else(|| {
        Error::Invalid("a scalar equation needs at least a0 and a1".into())
    })?;
    let lead = &coeffs[nu];
    if lead.is_zero() {
        return Err(Error::ZeroLeadingCoefficient);
    }
    if coeffs[0].is_zero() {
        return Err(Error::ZeroDeterminant);
    }
    let zero = XFunction::zero_in(&());
    let one = XFunction::one_in(&());
    let m = Matrix::from_fn(&(), nu, nu, |i, j| {
        if i + 1 < nu {
            if j == i + 1 {
                one.clone()
            } else {
                zero.clone()
            }
        } else {
            -&(&coeffs[j] / lead)
        }
    });
    QDiffSystem::new(m)
}

fn in_characteristic(m: Matrix<XFunction>, ch: Option<u64>) -> Matrix<XFunction> {
    match ch {
        Some(p) => {
            let unit = RatFunc::constant(FieldElem::constant(Scalar::Mod { value: 1, modulus: p }));
            m.map(&(), |f| f * &unit)
        }
        None => m,
    }
}

/// Parse a system file: `rank`, optional `char`, and either `A1=[[…],…]` or
/// the coefficients `a0, a1, …` of a scalar equation.
pub fn parse_system(text: &str) -> Result<QDiffSystem> {
    parse_system_with(text, None)
}

/// As [`parse_system`], with the characteristic forced when `ch` is given.
pub fn parse_system_with(text: &str, ch: Option<u64>) -> Result<QDiffSystem> {
    let clean = strip_comments(text);
    let pos = Positions::new(text);
    let stmts = statements(&clean, &pos)?;
    let mut characteristic = ch;
    let mut rank: Option<(usize, usize)> = None;
    for st in &stmts {
        match st.key {
            "char" => {
                let p: u64 = st.value.parse().map_err(|_| pos.error(st.value_at, "expected a prime"))?;
                if !crate::curvature::is_prime(p) {
                    return Err(pos.error(st.value_at, format!("{p} is not prime")));
                }
                if ch.is_none() {
                    characteristic = Some(p);
                }
            }
            "rank" => {
                let r = st.value.parse().map_err(|_| pos.error(st.value_at, "expected a positive integer"))?;
                rank = Some((r, st.value_at));
            }
            _ => {}
        }
    }
    let mut a1: Option<Matrix<XFunction>> = None;
    let mut scalar: BTreeMap<usize, XFunction> = BTreeMap::new();
    for st in &stmts {
        match st.key {
            "char" | "rank" => {}
            "A1" => {
                if a1.is_some() {
                    return Err(pos.error(st.key_at, "A1 given twice"));
                }
                a1 = Some(parse_matrix(st.value, st.value_at, &pos, characteristic)?);
            }
            k if k.len() > 1 && k.starts_with('a') && k[1..].chars().all(|c| c.is_ascii_digit()) => {
                let idx: usize = k[1..].parse().map_err(|_| pos.error(st.key_at, "bad coefficient index"))?;
                if scalar.insert(idx, parse_expr_at(st.value, st.value_at, &pos, characteristic)?).is_some() {
                    return Err(pos.error(st.key_at, format!("{k} given twice")));
                }
            }
            other => return Err(pos.error(st.key_at, format!("unknown key '{other}'"))),
        }
    }
    let sys = match (a1, scalar.is_empty()) {
        (Some(_), false) => return Err(Error::Invalid("give either A1 or scalar coefficients, not both".into())),
        (Some(m), true) => QDiffSystem::new(in_characteristic(m, characteristic))?,
        (None, false) => {
            let nu = *scalar.keys().last().unwrap();
            let coeffs: Vec<XFunction> = (0..=nu)
                .map(|k| scalar.get(&k).cloned().unwrap_or_else(|| XFunction::zero_in(&())))
                .collect();
            let coeffs = in_characteristic(Matrix::from_rows(&(), vec![coeffs]), characteristic);
            companion(coeffs.row(0))?
        }
        (None, true) => return Err(Error::Invalid("no system given (A1 or a0, a1, ...)".into())),
    };
    if let Some((r, at)) = rank {
        if r != sys.rank() {
            return Err(pos.error(at, format!("rank {r} does not match the system (rank {})", sys.rank())));
        }
    }
    Ok(sys)
}

/// Canonical text form, accepted by [`parse_system`].
pub fn serialize_system(sys: &QDiffSystem) -> String {
    let mut out = format!("rank={}\n", sys.rank());
    if let Some(p) = sys.characteristic() {
        out.push_str(&format!("char={p}\n"));
    }
    let rows: Vec<String> = sys
        .a1()
        .to_rows()
        .iter()
        .map(|r| format!("[{}]", r.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ")))
        .collect();
    out.push_str(&format!("A1=[{}]\n", rows.join(", ")));
    out
}

// ---------------------------------------------------------------------------
// command line

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    Double,
    DoubleDouble,
}

#[derive(Debug, Parser)]
#[command(name = "qcurv", version, about = "Cyclotomic curvatures of linear q-difference systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Work over F_p instead of Q.
    #[arg(long = "char", global = true)]
    pub characteristic: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 2)]
    pub lmin: u64,
    #[arg(long, default_value_t = 23)]
    pub lmax: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Curvature verdicts at every order in lmin..=lmax.
    Curvatures {
        #[command(flatten)]
        scan: ScanArgs,
        file: String,
    },
    /// Curvature scan followed by a search for a rational fundamental solution.
    Triviality {
        #[arg(long, default_value_t = 23)]
        lmax: u64,
        #[arg(long = "series-order")]
        series_order: Option<usize>,
        #[arg(long, default_value_t = 8)]
        degree: usize,
        file: String,
    },
    /// Exponents at 0 and at infinity, before and after shearing.
    Exponents { file: String },
    /// Multiplicative orders of the curvatures.
    GaloisOrder {
        #[command(flatten)]
        scan: ScanArgs,
        #[arg(long, default_value_t = 8)]
        rmax: u64,
        file: String,
    },
    /// Stability of roots of unity under f(q).
    Rootdyn {
        #[arg(long)]
        f: String,
        #[arg(long, default_value_t = 100)]
        lmax: u64,
    },
    /// Birkhoff connection matrix on an annulus.
    Birkhoff {
        #[arg(long = "q-val", default_value = "2")]
        q_val: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, value_enum, default_value = "double")]
        precision: Precision,
        #[arg(long, default_value_t = 16)]
        samples: usize,
        file: String,
    },
}

/// Outcome of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Exit code for a library error: `1` for bad input, `2` for a limit hit.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ShearingFailed(_)
        | Error::NotPrepared(_)
        | Error::NoConvergence(_)
        | Error::NearPole
        | Error::SingularLinearSolve(_)
        | Error::Resonant(_)
        | Error::NotNormalized
        | Error::SingularAtZero => 2,
        _ => 1,
    }
}

struct Report {
    command: &'static str,
    flags: BTreeMap<&'static str, Value>,
    system: Value,
    verdicts: Vec<Value>,
    summary: Value,
    text: Vec<String>,
}

fn system_json(sys: &QDiffSystem) -> Value {
    let a1: Vec<Vec<String>> =
        sys.a1().to_rows().iter().map(|r| r.iter().map(|e| e.to_string()).collect()).collect();
    json!({ "rank": sys.rank(), "characteristic": sys.characteristic(), "a1": a1 })
}

fn load(file: &str, ch: Option<u64>) -> Result<QDiffSystem> {
    let text = std::fs::read_to_string(file).map_err(|e| Error::Invalid(format!("cannot read {file}: {e}")))?;
    parse_system_with(&text, ch)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn run_command(cli: &Cli) -> Result<Report> {
    let ch = cli.characteristic;
    if let Some(p) = ch {
        if !crate::curvature::is_prime(p) {
            return Err(Error::Invalid(format!("--char {p} is not prime")));
        }
    }
    let mut flags: BTreeMap<&'static str, Value> = BTreeMap::new();
    flags.insert("format", to_value(&cli.format));
    flags.insert("char", to_value(&ch));
    match &cli.command {
        Command::Curvatures { scan, file } => {
            let sys = load(file, ch)?;
            flags.insert("lmin", json!(scan.lmin));
            flags.insert("lmax", json!(scan.lmax));
            let rep = curvature_scan(&sys, scan.lmin, scan.lmax, ScanMode::Nilpotent, false)?;
            let text = rep.verdicts.iter().map(|v| format!("l={} {}", v.order, status_text(&v.status))).collect();
            Ok(Report {
                command: "curvatures",
                flags,
                system: system_json(&sys),
                verdicts: rep.verdicts.iter().map(to_value).collect(),
                summary: to_value(&rep.summary),
                text,
            })
        }
        Command::Triviality { lmax, series_order, degree, file } => {
            let sys = load(file, ch)?;
            flags.insert("lmax", json!(lmax));
            flags.insert("series_order", json!(series_order));
            flags.insert("degree", json!(degree));
            let v = triviality_test(&sys, *lmax, *series_order, *degree);
            let detail = triviality_value(&v);
            let text = vec![v.label().to_string()];
            Ok(Report {
                command: "triviality",
                flags,
                system: system_json(&sys),
                verdicts: vec![detail],
                summary: json!({ "verdict": v.label() }),
                text,
            })
        }
        Command::Exponents { file } => {
            let sys = load(file, ch)?;
            let at_inf = system_at_infinity(&sys)?;
            let mut verdicts = Vec::new();
            let mut text = Vec::new();
            for (point, s) in [("0", &sys), ("infinity", &at_inf)] {
                let raw = point_exponents(s);
                let sheared = shear_to_zero(s, default_window(s))
                    .map(|sh| point_exponents(&sh.system))
                    .map_err(|e| e.to_string());
                text.push(format!("{point}: {}", exponent_text(&raw)));
                verdicts.push(json!({
                    "point": point,
                    "exponents": to_value(&raw),
                    "after_shearing": match &sheared {
                        Ok(r) => to_value(r),
                        Err(e) => json!({ "error": e }),
                    },
                }));
            }
            let regular = verdicts.iter().all(|v| v["after_shearing"].get("error").is_none());
            Ok(Report {
                command: "exponents",
                flags,
                system: system_json(&sys),
                verdicts,
                summary: json!({ "regular_singular_after_shearing": regular }),
                text,
            })
        }
        Command::GaloisOrder { scan, rmax, file } => {
            let sys = load(file, ch)?;
            flags.insert("lmin", json!(scan.lmin));
            flags.insert("lmax", json!(scan.lmax));
            flags.insert("rmax", json!(rmax));
            if *rmax == 0 {
                return Err(Error::Invalid("--rmax must be at least 1".into()));
            }
            let rep = curvature_scan(&sys, scan.lmin, scan.lmax, ScanMode::Order(*rmax), false)?;
            // lcm of the orders when every good curvature has finite order
            let order = rep.verdicts.iter().try_fold(1u64, |acc, v| match v.status {
                CurvatureStatus::Zero => Some(acc),
                CurvatureStatus::FiniteOrder(r) => Some(acc.lcm(&r)),
                CurvatureStatus::BadPlace(_) => Some(acc),
                _ => None,
            });
            let order = order.filter(|_| rep.summary.good_places > 0);
            let mut summary = to_value(&rep.summary);
            summary["galois_order"] = json!(order);
            let mut text: Vec<String> =
                rep.verdicts.iter().map(|v| format!("l={} {}", v.order, status_text(&v.status))).collect();
            text.push(match order {
                Some(r) => format!("order {r}"),
                None => "order not finite within rmax".into(),
            });
            Ok(Report {
                command: "galois-order",
                flags,
                system: system_json(&sys),
                verdicts: rep.verdicts.iter().map(to_value).collect(),
                summary,
                text,
            })
        }
        Command::Rootdyn { f, lmax } => {
            flags.insert("f", json!(f));
            flags.insert("lmax", json!(lmax));
            let fe = parse_qfunction(f, ch)?;
            let rep = lemma_scan(&fe, *lmax)?;
            let witness = rep.unstable_witness().map(|o| o.prime);
            let mut text: Vec<String> = Vec::new();
            text.push(match rep.decided {
                Some(d) => format!("decided d={d}"),
                None => "not a power of q".into(),
            });
            if let Some(l) = witness {
                text.push(format!("unstable at l={l}"));
            }
            Ok(Report {
                command: "rootdyn",
                flags,
                system: json!({ "f": fe.to_string() }),
                verdicts: rep.outcomes.iter().map(to_value).collect(),
                summary: json!({
                    "decided": rep.decided,
                    "first_unstable_sized_prime": witness,
                    "consistency_checked": rep.consistency_checked,
                    "inconsistent": rep.inconsistent,
                }),
                text,
            })
        }
        Command::Birkhoff { q_val, tol, precision, samples, file } => {
            let sys = load(file, ch)?;
            flags.insert("q_val", json!(q_val));
            flags.insert("tol", json!(tol));
            flags.insert("precision", to_value(precision));
            flags.insert("samples", json!(samples));
            let qv = Complex64::from_str(q_val).map_err(|_| Error::Invalid(format!("cannot parse --q-val {q_val}")))?;
            let prep = prepare(&sys)?;
            let sample = match precision {
                Precision::Double => birkhoff_run::<f64>(&prep, qv, *samples, *tol)?,
                Precision::DoubleDouble => birkhoff_run::<DoubleDouble>(&prep, qv, *samples, *tol)?,
            };
            let verdicts = sample
                .points
                .iter()
                .zip(&sample.values)
                .map(|(p, b)| json!({ "x": p, "b": b }))
                .collect();
            let text = vec![
                format!("ellipticity residual {:e}", sample.ellipticity_residual),
                format!("constancy residual {:e}", sample.constancy_residual),
                format!("truncation residual {:e}", sample.truncation_residual),
            ];
            Ok(Report {
                command: "birkhoff",
                flags,
                system: system_json(&sys),
                verdicts,
                summary: json!({
                    "ellipticity_residual": sample.ellipticity_residual,
                    "constancy_residual": sample.constancy_residual,
                    "truncation_residual": sample.truncation_residual,
                    "max_factors": sample.max_factors,
                }),
                text,
            })
        }
    }
}

/// JSON form of a triviality verdict.
pub fn triviality_value(v: &TrivialityVerdict) -> Value {
    match v {
        TrivialityVerdict::CertifiedTrivial { solution, degree } => {
            let rows: Vec<Vec<String>> =
                solution.to_rows().iter().map(|r| r.iter().map(|e| e.to_string()).collect()).collect();
            json!({ "kind": v.label(), "degree": degree, "solution": rows })
        }
        TrivialityVerdict::EvidenceTrivial { summary, reason } => {
            json!({ "kind": v.label(), "reason": reason, "scan": to_value(summary) })
        }
        TrivialityVerdict::NonTrivial { order, witness } => {
            json!({ "kind": v.label(), "order": order, "witness": to_value(witness) })
        }
        TrivialityVerdict::Inconclusive { reason } => json!({ "kind": v.label(), "reason": reason }),
    }
}

/// JSON form of a system: rank, characteristic and the entries of `A₁`.
pub fn system_value(sys: &QDiffSystem) -> Value {
    system_json(sys)
}

fn birkhoff_run<T: Real>(
    prep: &crate::birkhoff::Preparation,
    q: Complex64,
    samples: usize,
    tol: f64,
) -> Result<crate::birkhoff::BirkhoffSample> {
    let ns = specialize::<T>(Some(prep), q)?;
    ellipticity_and_constancy(&ns, samples, tol)
}

fn point_exponents(sys: &QDiffSystem) -> Option<ExponentReport> {
    exponents(sys, default_exponent_bound(sys)).ok()
}

fn exponent_text(r: &Option<ExponentReport>) -> String {
    match r {
        None => "A(0) undefined or singular".into(),
        Some(ExponentReport { exponents: Some(e), semisimple, .. }) => {
            format!("{e:?}{}", if *semisimple { "" } else { " (not semisimple)" })
        }
        Some(_) => "eigenvalues outside q^Z".into(),
    }
}

fn status_text(s: &CurvatureStatus) -> String {
    match s {
        CurvatureStatus::Zero => "zero".into(),
        CurvatureStatus::Nilpotent(j) => format!("nilpotent({j})"),
        CurvatureStatus::FiniteOrder(r) => format!("order({r})"),
        CurvatureStatus::Generic => "generic".into(),
        CurvatureStatus::BadPlace(reason) => format!("bad({reason:?})"),
    }
}

/// Run `qcurv` with the given arguments (the first being the program name).
pub fn run<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match run_command(&cli) {
        Ok(rep) => {
            let stdout = match cli.format {
                Format::Json => {
                    let doc = json!({
                        "tool": "qcurv",
                        "version": env!("CARGO_PKG_VERSION"),
                        "command": rep.command,
                        "flags": to_value(&rep.flags),
                        "system": rep.system,
                        "verdicts": rep.verdicts,
                        "summary": rep.summary,
                    });
                    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
                }
                Format::Text => rep.text.join("\n") + "\n",
            };
            Outcome { code: 0, stdout, stderr: String::new() }
        }
        Err(e) => {
            let code = exit_code(&e);
            let stderr = match cli.format {
                Format::Json => {
                    serde_json::to_string(&json!({ "tool": "qcurv", "error": e.to_string(), "exit_code": code }))
                        .expect("serializable")
                        + "\n"
                }
                Format::Text => format!("error: {e}\n"),
            };
            Outcome { code, stdout: String::new(), stderr }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::q;
    use crate::qdiff::{xconst, xint, xvar};

    #[test]
    fn expressions() {
        let f = parse_expr("(1-x)/(1-q*x)", None).unwrap();
        let want = &(&xint(1) - &xvar()) / &(&xint(1) - &(&xconst(q()) * &xvar()));
        assert_eq!(f, want);
        assert_eq!(parse_expr("q^2*x^-1 - -3", None).unwrap_err(), Error::Syntax { line: 1, col: 12, msg: "unexpected '-'".into() });
        assert_eq!(parse_expr("2x", None).unwrap_err(), Error::Syntax { line: 1, col: 2, msg: "unexpected 'x'".into() });
        assert_eq!(parse_expr("-(q+1)^2", None).unwrap(), -&(&(&xconst(q()) + &xint(1)) * &(&xconst(q()) + &xint(1))));
        assert!(matches!(parse_expr("1/(q-q)", None), Err(Error::Syntax { col: 3, .. })));
        assert!(matches!(parse_expr("(1+x", None), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expr("x^q", None), Err(Error::Syntax { col: 3, .. })));
        assert_eq!(parse_qfunction("q^3/q^7", None).unwrap(), q().pow_i(-4).unwrap());
        assert!(parse_qfunction("q*x", None).is_err());
    }

    #[test]
    fn system_files() {
        let s = parse_system("rank=1; A1=[[ (1-x)/(1-q*x) ]]").unwrap();
        assert_eq!(s.rank(), 1);
        let c = parse_system("a2=1, a1=0, a0=-q").unwrap();
        let want = Matrix::from_rows(&(), vec![vec![xint(0), xint(1)], vec![xconst(q()), xint(0)]]);
        assert_eq!(c.a1(), &want);
        assert_eq!(parse_system("A1=[[0]]").unwrap_err(), Error::ZeroDeterminant);
        assert_eq!(parse_system("a2=0\na1=1\na0=1").unwrap_err(), Error::ZeroLeadingCoefficient);
        let multi = "# a comment\nrank=2\nA1=[[1, x],   # trailing\n    [0, q]]\n";
        assert_eq!(parse_system(multi).unwrap().rank(), 2);
        assert_eq!(
            parse_system("rank=1\nA1=[[1 + ]]").unwrap_err(),
            Error::Syntax { line: 2, col: 9, msg: "unexpected end of expression".into() }
        );
        assert_eq!(
            parse_system("rank=1\nA1=[[ (1-x)/(1-q*x ]]").unwrap_err(),
            Error::Syntax { line: 2, col: 20, msg: "unbalanced ']'".into() }
        );
        assert_eq!(
            parse_system("rank=1\nA1=[[ (1-x)/(1-q*x)]").unwrap_err(),
            Error::Syntax { line: 2, col: 4, msg: "unclosed '['".into() }
        );
        assert!(matches!(parse_system("rank=1\nB=[[1]]"), Err(Error::Syntax { line: 2, col: 1, .. })));
        assert!(matches!(parse_system("rank=2\nA1=[[1]]"), Err(Error::Syntax { line: 1, .. })));
        let p = parse_system("char=5\nA1=[[x]]").unwrap();
        assert_eq!(p.characteristic(), Some(5));
        assert_eq!(parse_system("char=5\nA1=[[5]]").unwrap_err(), Error::ZeroDeterminant);
    }

    #[test]
    fn round_trip() {
        for text in [
            "A1=[[(1-x)/(1-q*x)]]",
            "A1=[[1, x/(q^2+3)], [(2/3)*q - x^2, -q]]",
            "char=7\nA1=[[3*x + q, 1], [0, 2/(1+q*x)]]",
            "a3=x, a1=q-1, a0=-1",
        ] {
            let s = parse_system(text).unwrap();
            let t = serialize_system(&s);
            assert_eq!(parse_system(&t).unwrap(), s, "{t}");
            assert_eq!(serialize_system(&parse_system(&t).unwrap()), t);
        }
    }

    #[test]
    fn rootdyn_command() {
        let out = run(["qcurv", "rootdyn", "--f", "q^3", "--lmax", "100"]);
        assert_eq!(out.code, 0);
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["summary"]["decided"], json!(3));
        assert_eq!(v["command"], json!("rootdyn"));
        let bad = run(["qcurv", "rootdyn", "--f", "q^"]);
        assert_eq!(bad.code, 1);
        assert_eq!(run(["qcurv", "--version"]).code, 0);
        assert_eq!(run(["qcurv", "frobnicate"]).code, 1);
    }
}
