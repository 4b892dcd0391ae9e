//! Regular singularity at `0` (and at `∞` by inversion), exponents, formal
//! solutions and exact certification of triviality.

use crate::arith::cyclo::eval_mod_prime;
use crate::arith::mgcd::{eval, recover_qfunctions, residues};
use crate::arith::{q, Coeff, FieldElem, Matrix, Poly, QPoly, RatFunc, Scalar, XFunction};
use crate::curvature::{curvature_scan, CurvatureStatus, ScanMode, ScanSummary, Witness};
use crate::error::{Error, Result};
use crate::qdiff::{twist_matrix, xconst, xint, QDiffSystem};

/// Truncated power series `Σ_{n≤N} Y_n xⁿ` with constant matrix coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMatrix {
    coeffs: Vec<Matrix<FieldElem>>,
}

impl SeriesMatrix {
    pub fn new(coeffs: Vec<Matrix<FieldElem>>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least one coefficient");
        SeriesMatrix { coeffs }
    }

    /// Expansion at `x = 0` up to `x^n`.
    pub fn of_matrix(m: &Matrix<XFunction>, n: usize) -> Result<Self> {
        let entries: Vec<Vec<FieldElem>> =
            m.entries().iter().map(|f| f.series(n).ok_or(Error::SingularAtZero)).collect::<Result<_>>()?;
        let coeffs = (0..=n)
            .map(|k| Matrix::from_fn(&(), m.rows(), m.cols(), |i, j| entries[i * m.cols() + j][k].clone()))
            .collect();
        Ok(SeriesMatrix { coeffs })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &Matrix<FieldElem> {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[Matrix<FieldElem>] {
        &self.coeffs
    }

    pub fn size(&self) -> usize {
        self.coeffs[0].rows()
    }

    pub fn entry_series(&self, i: usize, j: usize) -> Vec<FieldElem> {
        self.coeffs.iter().map(|c| c.get(i, j).clone()).collect()
    }

    /// Product truncated to the shorter order.
    pub fn mul(&self, rhs: &Self) -> Self {
        let n = self.order().min(rhs.order());
        let coeffs = (0..=n)
            .map(|k| {
                (0..=k).fold(Matrix::zeros(&(), self.size(), rhs.coeffs[0].cols()), |acc, i| {
                    acc.add(&self.coeffs[i].mul(&rhs.coeffs[k - i]))
                })
            })
            .collect();
        SeriesMatrix { coeffs }
    }

    /// `Y(qx)`.
    pub fn twist(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c.scale(&q().pow_i(n as i64).unwrap()))
            .collect();
        SeriesMatrix { coeffs }
    }

    /// `σ_q(Y) ≡ A·Y mod x^{N+1}`.
    pub fn satisfies(&self, a: &Matrix<XFunction>) -> bool {
        match SeriesMatrix::of_matrix(a, self.order()) {
            Ok(sa) => self.twist() == sa.mul(self),
            Err(_) => false,
        }
    }
}

/// One factor of a shearing gauge.
#[derive(Debug, Clone, PartialEq)]
pub enum ShearFactor {
    Constant(Matrix<FieldElem>),
    /// `diag(x^{e_1}, …, x^{e_ν})`.
    Diagonal(Vec<i64>),
}

impl ShearFactor {
    pub fn to_matrix(&self) -> Matrix<XFunction> {
        match self {
            ShearFactor::Constant(c) => c.map(&(), |e| xconst(e.clone())),
            ShearFactor::Diagonal(es) => Matrix::diagonal(&(), es.iter().map(|&e| xint(1).mul_var_pow(e)).collect()),
        }
    }
}

/// Product of the factors, in order of application.
pub fn shear_matrix(factors: &[ShearFactor], nu: usize) -> Matrix<XFunction> {
    factors.iter().fold(Matrix::identity(&(), nu), |acc, f| acc.mul(&f.to_matrix()))
}

#[derive(Debug, Clone)]
pub struct Shearing {
    pub system: QDiffSystem,
    pub factors: Vec<ShearFactor>,
}

impl Shearing {
    pub fn matrix(&self) -> Matrix<XFunction> {
        shear_matrix(&self.factors, self.system.rank())
    }
}

/// Lowest Laurent order at `0` and the matrix of coefficients at that order.
pub fn laurent_lead(m: &Matrix<XFunction>) -> Option<(i64, Matrix<FieldElem>)> {
    let v = m.entries().iter().filter_map(|f| f.order_at_zero()).min()?;
    let lead = m.map(&(), |f| match f.order_at_zero() {
        Some(o) if o == v => {
            let n = f.num().coeff(f.num().low_order().unwrap());
            let d = f.den().coeff(f.den().low_order().unwrap());
            &n / &d
        }
        _ => FieldElem::zero_in(&()),
    });
    Some((v, lead))
}

fn pole_order(m: &Matrix<XFunction>) -> i64 {
    laurent_lead(m).map_or(0, |(v, _)| (-v).max(0))
}

/// Constant matrix whose first columns span the column space of `m`.
fn adapted_basis(m: &Matrix<FieldElem>) -> (Matrix<FieldElem>, usize) {
    let n = m.rows();
    let (_, pivots) = m.rref();
    let mut cols: Vec<Vec<FieldElem>> = pivots.iter().map(|&c| (0..n).map(|i| m.get(i, c).clone()).collect()).collect();
    let r = cols.len();
    complete_basis(&mut cols, n);
    (columns_to_matrix(&cols, n), r)
}

fn complete_basis(cols: &mut Vec<Vec<FieldElem>>, n: usize) {
    for k in 0..n {
        if cols.len() == n {
            break;
        }
        let mut e = vec![FieldElem::zero_in(&()); n];
        e[k] = FieldElem::one_in(&());
        cols.push(e);
        if columns_to_matrix(cols, n).rank() < cols.len() {
            cols.pop();
        }
    }
}

fn columns_to_matrix(cols: &[Vec<FieldElem>], n: usize) -> Matrix<FieldElem> {
    Matrix::from_fn(&(), n, cols.len(), |i, j| cols[j][i].clone())
}

pub fn default_window(sys: &QDiffSystem) -> usize {
    let a = sys.a1();
    let inv = a.inverse().expect("invertible system");
    sys.rank() * (pole_order(a).max(pole_order(&inv)).max(1) as usize)
}

/// Gauge by constant matrices and diagonal `x`-powers until `A₁` is regular
/// at `0` with `A₁(0)` invertible.
///
/// Each step enlarges the standard lattice by `x⁻¹` times the image of the
/// polar part of `A₁⁻¹`; for a regular singular system the enlargements stay
/// inside the smallest stable lattice and stop after at most `ν·W` steps.
pub fn shear_to_zero(sys: &QDiffSystem, window: usize) -> Result<Shearing> {
    let nu = sys.rank();
    if sys.a1().det().order_at_zero() != Some(0) {
        return Err(Error::ShearingFailed(window as u32));
    }
    let mut cur = sys.clone();
    let mut factors = Vec::new();
    for step in 0..=nu * window {
        let inv = cur.a1().inverse().expect("invertible system");
        let (v, lead) = laurent_lead(&inv).expect("nonzero inverse");
        if v >= 0 {
            return Ok(Shearing { system: cur, factors });
        }
        if step == nu * window {
            break;
        }
        let (c, r) = adapted_basis(&lead);
        let diag: Vec<i64> = (0..nu).map(|i| if i < r { -1 } else { 0 }).collect();
        let step_factors = [ShearFactor::Constant(c), ShearFactor::Diagonal(diag)];
        cur = cur.gauge(&shear_matrix(&step_factors, nu))?;
        factors.extend(step_factors);
    }
    Err(Error::ShearingFailed(window as u32))
}

/// `A(0)` when `A` is regular at `0` and `A(0)` invertible.
pub fn value_at_zero(a: &Matrix<XFunction>) -> Result<Matrix<FieldElem>> {
    let m = a.try_map(&(), |f| f.value_at_zero().ok_or(Error::SingularAtZero))?;
    if m.det().is_zero() {
        return Err(Error::SingularAtZero);
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ExponentReport {
    pub defined_at_zero: bool,
    /// Sorted multiset of `d` with `q^d` an eigenvalue of `A₁(0)`; absent
    /// when some eigenvalue lies outside `q^{[−D, D]}`.
    pub exponents: Option<Vec<i64>>,
    /// Whether `A₁(0)` is semisimple; only meaningful when exponents are present.
    pub semisimple: bool,
}

fn q_pow(d: i64) -> FieldElem {
    q().pow_i(d).unwrap()
}

fn shifted(a0: &Matrix<FieldElem>, d: i64) -> Matrix<FieldElem> {
    a0.sub(&Matrix::scalar(&(), a0.rows(), q_pow(d)))
}

/// Generalized eigenspace dimensions of `A₁(0)` at `q^d`, `|d| ≤ D`.
fn exponent_multiplicities(a0: &Matrix<FieldElem>, bound: i64) -> Vec<(i64, usize, usize)> {
    let nu = a0.rows();
    (-bound..=bound)
        .filter_map(|d| {
            let m = shifted(a0, d);
            if !m.det().is_zero() {
                return None;
            }
            let alg = nu - m.pow(nu as u64).rank();
            let geo = nu - m.rank();
            Some((d, alg, geo))
        })
        .collect()
}

pub fn exponents_of_matrix(a0: &Matrix<FieldElem>, bound: i64) -> ExponentReport {
    let mult = exponent_multiplicities(a0, bound);
    let total: usize = mult.iter().map(|m| m.1).sum();
    if total != a0.rows() {
        return ExponentReport { defined_at_zero: true, exponents: None, semisimple: false };
    }
    let exps = mult.iter().flat_map(|&(d, alg, _)| std::iter::repeat(d).take(alg)).collect();
    let semisimple = mult.iter().all(|&(_, alg, geo)| alg == geo);
    ExponentReport { defined_at_zero: true, exponents: Some(exps), semisimple }
}

/// Exponents at `0` by the annihilation test against `∏_{|d|≤D} (T − q^d)^ν`.
pub fn exponents(sys: &QDiffSystem, bound: i64) -> Result<ExponentReport> {
    Ok(exponents_of_matrix(&value_at_zero(sys.a1())?, bound))
}

pub fn default_exponent_bound(sys: &QDiffSystem) -> i64 {
    (sys.x_degree() + sys.rank()) as i64
}

/// Shift all exponents to `0` by diagonal shears; requires semisimple
/// `A₁(0)` with eigenvalues in `q^ℤ`. Afterwards `A₁(0) = I`.
pub fn normalize_exponents(sys: &QDiffSystem, bound: i64) -> Result<Shearing> {
    let nu = sys.rank();
    let mut cur = sys.clone();
    let mut factors = Vec::new();
    loop {
        let a0 = value_at_zero(cur.a1())?;
        let rep = exponents_of_matrix(&a0, bound);
        let exps = rep.exponents.ok_or(Error::NotNormalized)?;
        if !rep.semisimple {
            return Err(Error::NotNormalized);
        }
        let (&lo, &hi) = (exps.first().unwrap(), exps.last().unwrap());
        if lo == 0 && hi == 0 {
            return Ok(Shearing { system: cur, factors });
        }
        let target = if hi > 0 { hi } else { lo };
        let m = shifted(&a0, target).pow(nu as u64);
        let mut cols = m.nullspace();
        let r = cols.len();
        let rest = exps.iter().filter(|&&d| d != target).fold(Matrix::identity(&(), nu), |acc, &d| {
            acc.mul(&shifted(&a0, d))
        });
        cols.extend(rest.nullspace());
        let c = columns_to_matrix(&cols, nu);
        let e = if target > 0 { 1 } else { -1 };
        let diag = (0..nu).map(|i| if i < r { e } else { 0 }).collect();
        let step = [ShearFactor::Constant(c), ShearFactor::Diagonal(diag)];
        cur = cur.gauge(&shear_matrix(&step, nu))?;
        factors.extend(step);
    }
}

/// Fundamental solution `Y` with `Y(0) = I` of a system with `A₁(0) = I`.
pub fn formal_solution(sys: &QDiffSystem, n: usize) -> Result<SeriesMatrix> {
    let a0 = value_at_zero(sys.a1())?;
    if !a0.is_identity() {
        return Err(Error::NotNormalized);
    }
    // With A₁ = N/d: d₀(qⁿ − 1) Yₙ = Σ_{j≥1} (N_j − d_j q^{n−j}) Y_{n−j}.
    // Each Yₙ is kept as a polynomial matrix over one reduced denominator.
    let nu = sys.rank();
    let lat = sys.lattice();
    let width = lat.num.entries().iter().chain([&lat.den]).filter_map(|p| p.degree()).max().unwrap_or(0);
    let nj: Vec<Matrix<QPoly>> = (0..=width).map(|j| lat.num.map(&(), |p| p.coeff(j))).collect();
    let dj: Vec<QPoly> = (0..=width).map(|j| lat.den.coeff(j)).collect();
    let one = QPoly::one(&());
    let mut ys: Vec<(Matrix<QPoly>, QPoly)> = vec![(Matrix::identity(&(), nu), one.clone())];
    for m in 1..=n {
        let terms: Vec<(Matrix<QPoly>, &QPoly)> = (1..=width.min(m))
            .filter_map(|j| {
                let shift = Matrix::scalar(&(), nu, &dj[j] * &QPoly::monomial(Scalar::int(1), m - j));
                let c = nj[j].sub(&shift);
                (!c.is_zero() && !ys[m - j].0.is_zero()).then(|| (c.mul(&ys[m - j].0), &ys[m - j].1))
            })
            .collect();
        let lcm = terms.iter().fold(one.clone(), |acc, (_, d)| lcm_q(&acc, d));
        let mut num = Matrix::zeros(&(), nu, nu);
        for (t, d) in &terms {
            num = num.add(&t.scale(&lcm.exact_div(d).expect("divides lcm")));
        }
        let den = &(&lcm * &dj[0]) * &(&QPoly::monomial(Scalar::int(1), m) - &one);
        ys.push(reduce_common(num, den));
    }
    let coeffs = ys
        .into_iter()
        .map(|(num, den)| num.map(&(), |p| FieldElem::new(p.clone(), den.clone())))
        .collect();
    Ok(SeriesMatrix::new(coeffs))
}

/// Coefficients of the formal solution with `q` specialized to `q0` modulo
/// the check prime; `None` if the specialization is degenerate.
fn formal_solution_mod(sys: &QDiffSystem, n: usize, q0: u64) -> Option<Vec<Matrix<Scalar>>> {
    let nu = sys.rank();
    let lat = sys.lattice();
    let ev = |p: &QPoly| eval_mod_prime(&FieldElem::from_poly(p.clone()), q0);
    let width = lat.num.entries().iter().chain([&lat.den]).filter_map(|p| p.degree()).max().unwrap_or(0);
    let nj: Vec<Matrix<Scalar>> =
        (0..=width).map(|j| lat.num.try_map(&(), |p| ev(&p.coeff(j)).ok_or(()))).collect::<std::result::Result<_, _>>().ok()?;
    let dj: Vec<Scalar> = (0..=width).map(|j| ev(&lat.den.coeff(j))).collect::<Option<_>>()?;
    let qv = ev(&QPoly::monomial(Scalar::int(1), 1))?;
    let one = qv.exact_div(&qv)?;
    let mut ys = vec![Matrix::identity(&(), nu).map(&(), |c: &Scalar| c.mul(&one))];
    for m in 1..=n {
        let mut rhs = Matrix::zeros(&(), nu, nu).map(&(), |c: &Scalar| c.mul(&one));
        for j in 1..=width.min(m) {
            let shift = Matrix::scalar(&(), nu, dj[j].mul(&qv.pow((m - j) as u32)));
            rhs = rhs.add(&nj[j].sub(&shift).mul(&ys[m - j]));
        }
        let scale = dj[0].mul(&qv.pow(m as u32).sub(&one)).inv()?;
        ys.push(rhs.scale(&scale));
    }
    Some(ys)
}

/// Smallest `d ≤ D` such that every entry of the specialized formal
/// solution admits a type-`(d, d)` approximant over `4d + 4` terms.
fn candidate_degree(sys: &QDiffSystem, degree: usize) -> Option<usize> {
    let n = 4 * degree + 4;
    let images: Vec<Vec<Matrix<Scalar>>> =
        PREFILTER_POINTS.iter().filter_map(|&q0| formal_solution_mod(sys, n, q0)).collect();
    if images.is_empty() {
        return Some(1);
    }
    let nu = sys.rank();
    (1..=degree).find(|&d| {
        images.iter().any(|ys| {
            (0..nu * nu).all(|k| {
                let s: Vec<Scalar> = ys[..=4 * d + 4].iter().map(|m| m.get(k / nu, k % nu).clone()).collect();
                pade_parts(&s, d, d, &()).is_some_and(|(p, t)| matches_series(&p, &t, &s))
            })
        })
    })
}

fn lcm_q(a: &QPoly, b: &QPoly) -> QPoly {
    if a.is_constant() {
        return b.clone();
    }
    if b.is_constant() || a == b {
        return a.clone();
    }
    // denominators along a series usually divide one another
    if a.degree() >= b.degree() && a.exact_div(b).is_some() {
        return a.clone();
    }
    if b.degree() > a.degree() && b.exact_div(a).is_some() {
        return b.clone();
    }
    let g = a.gcd(b).expect("nonzero");
    (a * &b.exact_div(&g).expect("gcd divides")).monic().expect("nonzero")
}

/// Divide a polynomial matrix and its denominator by their common factor.
fn reduce_common(num: Matrix<QPoly>, den: QPoly) -> (Matrix<QPoly>, QPoly) {
    if num.is_zero() {
        return (num, QPoly::one(&()));
    }
    let mut g = den.monic().expect("nonzero denominator");
    for e in num.entries().iter().filter(|e| !e.is_zero()) {
        if g.is_constant() {
            break;
        }
        g = g.gcd(e).expect("nonzero");
    }
    let den = den.exact_div(&g).expect("gcd divides");
    let num = num.map(&(), |p| p.exact_div(&g).expect("gcd divides"));
    (num, den)
}

/// `F` with `F(0) = I` and `F(qx)·A₁(0) = A₁(x)·F(x)` up to `x^N`.
pub fn frobenius_normalize(sys: &QDiffSystem, n: usize) -> Result<SeriesMatrix> {
    let nu = sys.rank();
    let sa = SeriesMatrix::of_matrix(sys.a1(), n)?;
    let a0 = value_at_zero(sys.a1())?;
    if let Some(exps) = exponents_of_matrix(&a0, default_exponent_bound(sys)).exponents {
        if exps.first() != exps.last() {
            return Err(Error::Resonant(format!("exponents {exps:?} differ by powers of q")));
        }
    }
    let id = Matrix::identity(&(), nu);
    let left = a0.transpose().kron(&id);
    let right = id.kron(&a0);
    let mut fs = vec![id.clone()];
    for m in 1..=n {
        // qᵐ Fₘ A₀ − A₀ Fₘ = Σ_{k≥1} A_k F_{m−k}, column-major vectorized
        let rhs = (1..=m).fold(Matrix::zeros(&(), nu, nu), |acc, k| acc.add(&sa.coeff(k).mul(&fs[m - k])));
        let op = left.scale(&q_pow(m as i64)).sub(&right);
        let vec_rhs = Matrix::from_fn(&(), nu * nu, 1, |k, _| rhs.get(k % nu, k / nu).clone());
        let sol = op.solve(&vec_rhs).ok_or(Error::SingularLinearSolve(m))?;
        fs.push(Matrix::from_fn(&(), nu, nu, |i, j| sol.get(j * nu + i, 0).clone()));
    }
    Ok(SeriesMatrix::new(fs))
}

/// Numerator and denominator of the type-`(m, n)` Padé approximant of the
/// first `m + n + 1` coefficients, by the extended Euclidean algorithm.
fn pade_parts<C: Coeff>(series: &[C], m: usize, n: usize, ctx: &C::Ctx) -> Option<(Poly<C>, Poly<C>)> {
    let k = m + n + 1;
    if series.len() < k {
        return None;
    }
    let mut r0: Poly<C> = Poly::monomial(C::one_in(ctx), k);
    let mut r1 = Poly::new(series[..k].to_vec(), ctx.clone());
    let mut t0: Poly<C> = Poly::zero(ctx);
    let mut t1: Poly<C> = Poly::one(ctx);
    while !r1.is_zero() && r1.degree().unwrap() > m {
        let (qt, r) = r0.div_rem(&r1)?;
        let t = &t0 - &(&qt * &t1);
        r0 = std::mem::replace(&mut r1, r);
        t0 = std::mem::replace(&mut t1, t);
    }
    if t1.degree().unwrap_or(0) > n || t1.coeff(0).is_zero() {
        return None;
    }
    Some((r1, t1))
}

/// Expansion of `p/t` agrees with every coefficient of `series`.
fn matches_series<C: Coeff>(p: &Poly<C>, t: &Poly<C>, series: &[C]) -> bool {
    let t0inv = match t.coeff(0).inv() {
        Some(v) => v,
        None => return false,
    };
    let mut out: Vec<C> = Vec::with_capacity(series.len());
    for k in 0..series.len() {
        let mut acc = p.coeff(k);
        for j in 1..=k.min(t.degree().unwrap_or(0)) {
            acc = acc.sub(&t.coeff(j).mul(&out[k - j]));
        }
        let c = acc.mul(&t0inv);
        if c != series[k] {
            return false;
        }
        out.push(c);
    }
    true
}

/// `Σ aᵢ/bᵢ = 0`, tested over a common denominator.
fn sums_to_zero(terms: &[(QPoly, QPoly)]) -> bool {
    let terms: Vec<&(QPoly, QPoly)> = terms.iter().filter(|(a, _)| !a.is_zero()).collect();
    let lcm = terms.iter().fold(QPoly::one(&()), |acc, (_, b)| lcm_q(&acc, b));
    let total = terms
        .iter()
        .fold(QPoly::zero(&()), |acc, (a, b)| &acc + &(a * &lcm.exact_div(b).expect("divides lcm")));
    total.is_zero()
}

/// Sample points for the modular prefilter.
const PREFILTER_POINTS: [u64; 2] = [1_000_003, 7_919];

/// Degrees `(deg p, deg t)` of a type-`(m, n)` approximant reproducing the
/// series after specializing `q`; `None` when no such approximant exists
/// at either sample point.
fn pade_degrees_mod(series: &[FieldElem], m: usize, n: usize) -> Option<(usize, usize)> {
    PREFILTER_POINTS.iter().find_map(|&q0| {
        let image: Vec<Scalar> = series.iter().map(|c| eval_mod_prime(c, q0)).collect::<Option<_>>()?;
        let (p, t) = pade_parts(&image, m, n, &())?;
        matches_series(&p, &t, &image).then(|| (p.degree().unwrap_or(0), t.degree().unwrap_or(0)))
    })
}

fn coeff_at(series: &[FieldElem], k: isize) -> FieldElem {
    if k < 0 {
        FieldElem::zero_in(&())
    } else {
        series[k as usize].clone()
    }
}

/// Solve `H·t = b` for the denominator `t = 1 + t₁x + … + tₙxⁿ` of a type
/// `(m, n)` approximant, fraction-free over `k[q]`.
fn pade_denominator(series: &[FieldElem], m: usize, n: usize) -> Option<Vec<FieldElem>> {
    if n == 0 {
        return Some(vec![FieldElem::one_in(&())]);
    }
    let mut rows: Vec<Vec<QPoly>> = Vec::with_capacity(n);
    for r in 0..n {
        let k = (m + 1 + r) as isize;
        let mut row: Vec<FieldElem> = (1..=n).map(|c| coeff_at(series, k - c as isize)).collect();
        row.push(-&coeff_at(series, k));
        let lcm = row.iter().fold(QPoly::one(&()), |acc, e| lcm_q(&acc, e.den()));
        rows.push(row.iter().map(|e| &e.num().clone() * &lcm.exact_div(e.den()).expect("divides lcm")).collect());
    }
    // Bareiss elimination to upper triangular form
    let mut prev = QPoly::one(&());
    for col in 0..n {
        let piv = (col..n).find(|&r| !rows[r][col].is_zero())?;
        rows.swap(col, piv);
        for r in col + 1..n {
            for c in col + 1..=n {
                let v = &(&rows[col][col] * &rows[r][c]) - &(&rows[r][col] * &rows[col][c]);
                rows[r][c] = v.exact_div(&prev).expect("Bareiss division is exact");
            }
            rows[r][col] = QPoly::zero(&());
        }
        prev = rows[col][col].clone();
    }
    // det·t_r by fraction-free back substitution, det = last pivot up to sign
    let det = rows[n - 1][n - 1].clone();
    let mut scaled: Vec<QPoly> = vec![QPoly::zero(&()); n];
    for r in (0..n).rev() {
        let mut acc = &det * &rows[r][n];
        for c in r + 1..n {
            acc = &acc - &(&rows[r][c] * &scaled[c]);
        }
        scaled[r] = acc.exact_div(&rows[r][r]).expect("fraction-free back substitution");
    }
    let t: Vec<FieldElem> = scaled.into_iter().map(|v| FieldElem::new(v, det.clone())).collect();
    let mut out = vec![FieldElem::one_in(&())];
    out.extend(t);
    Some(out)
}

/// Padé approximant of type `(m, n)`, returned only if its expansion
/// reproduces every given coefficient.
///
/// The exact degrees are read off an approximant computed with `q`
/// specialized modulo a prime. The denominator is first recovered from
/// modular images; failing that, it solves a small Hankel system over `k(q)`.
pub fn pade(series: &[FieldElem], m: usize, n: usize) -> Option<XFunction> {
    let (dm, dn) = pade_degrees_mod(series, m, n)?;
    if let Some(f) = pade_denominator_modular(series, dm, dn).and_then(|t| pade_with_denominator(series, dm, t)) {
        return Some(f);
    }
    pade_with_denominator(series, dm, pade_denominator(series, dm, dn)?)
}

/// Denominator normalized by `t(0) = 1`, recovered from approximants with
/// `q` specialized at integers modulo several primes.
fn pade_denominator_modular(series: &[FieldElem], m: usize, n: usize) -> Option<Vec<FieldElem>> {
    if n == 0 {
        return Some(vec![FieldElem::one_in(&())]);
    }
    let recovered = recover_qfunctions(n, |prime| {
        let parts: Vec<(Vec<u64>, Vec<u64>)> = series
            .iter()
            .map(|c| Some((residues(c.num(), prime)?, residues(c.den(), prime)?)))
            .collect::<Option<_>>()?;
        Some(move |t: u64| {
            let image: Vec<Scalar> = parts
                .iter()
                .map(|(a, b)| {
                    let d = Scalar::Mod { value: eval(b, t, prime), modulus: prime };
                    Some(Scalar::Mod { value: eval(a, t, prime), modulus: prime }.mul(&d.inv()?))
                })
                .collect::<Option<_>>()?;
            let (p, tt) = pade_parts(&image, m, n, &())?;
            if p.degree().unwrap_or(0) > m || tt.degree() != Some(n) {
                return None;
            }
            let inv = tt.coeff(0).inv()?;
            (1..=n)
                .map(|j| match tt.coeff(j).mul(&inv) {
                    Scalar::Mod { value, .. } => Some(value),
                    _ => None,
                })
                .collect()
        })
    })?;
    let mut out = vec![FieldElem::one_in(&())];
    out.extend(recovered.into_iter().map(|(a, b)| FieldElem::new(a, b)));
    Some(out)
}

/// The approximant with denominator `t`, if its expansion reproduces the series.
fn pade_with_denominator(series: &[FieldElem], dm: usize, t: Vec<FieldElem>) -> Option<XFunction> {
    let dn = t.len() - 1;
    let p: Vec<FieldElem> = (0..=dm)
        .map(|k| {
            (0..=dn.min(k)).fold(FieldElem::zero_in(&()), |acc, j| &acc + &(&t[j] * &series[k - j]))
        })
        .collect();
    // T·t and T·p are polynomial in q for T the common denominator of t
    let tden = t.iter().fold(QPoly::one(&()), |acc, e| lcm_q(&acc, e.den()));
    let tn: Vec<QPoly> = t.iter().map(|e| e.num() * &tden.exact_div(e.den()).expect("divides lcm")).collect();
    let agrees = (0..series.len()).all(|k| {
        let mut terms: Vec<(QPoly, QPoly)> =
            (0..=dn.min(k)).map(|j| (&tn[j] * series[k - j].num(), series[k - j].den().clone())).collect();
        if k <= dm {
            terms.push((-&(&tden * p[k].num()), p[k].den().clone()));
        }
        sums_to_zero(&terms)
    });
    agrees.then(|| RatFunc::new(Poly::from_coeffs(p), Poly::from_coeffs(t)))
}

/// Entrywise Padé reconstruction of type `(Dnum, Dden)`.
pub fn rational_reconstruct(series: &SeriesMatrix, dnum: usize, dden: usize) -> Option<Matrix<XFunction>> {
    let nu = series.size();
    let cols = series.coeff(0).cols();
    let mut out = Vec::with_capacity(nu * cols);
    for i in 0..nu {
        for j in 0..cols {
            out.push(pade(&series.entry_series(i, j), dnum, dden)?);
        }
    }
    Some(Matrix::from_fn(&(), nu, cols, |i, j| out[i * cols + j].clone()))
}

#[derive(Debug, Clone)]
pub enum TrivialityVerdict {
    /// `σ_q(Y) = A₁·Y` holds exactly with `det Y ≠ 0`.
    CertifiedTrivial { solution: Matrix<XFunction>, degree: usize },
    /// Every good curvature vanished but no rational solution was found within the bounds.
    EvidenceTrivial { summary: ScanSummary, reason: String },
    NonTrivial { order: u64, witness: Option<Witness> },
    Inconclusive { reason: String },
}

impl TrivialityVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            TrivialityVerdict::CertifiedTrivial { .. } => "certified_trivial",
            TrivialityVerdict::EvidenceTrivial { .. } => "evidence_trivial",
            TrivialityVerdict::NonTrivial { .. } => "non_trivial",
            TrivialityVerdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// Exact check that `Y` is a fundamental solution.
pub fn is_fundamental_solution(sys: &QDiffSystem, y: &Matrix<XFunction>) -> bool {
    !y.det().is_zero() && twist_matrix(y, 1) == sys.a1().mul(y)
}

/// Curvature scan over `2..=ℓ_max`, then shearing, a formal solution to
/// order `N` (default `4D + 4`) and Padé reconstruction of type `(d, d)`
/// for `d = 1..=D`, each candidate verified exactly.
pub fn triviality_test(sys: &QDiffSystem, lmax: u64, n: Option<usize>, degree: usize) -> TrivialityVerdict {
    let mut summary = None;
    if lmax >= 2 {
        match curvature_scan(sys, 2, lmax, ScanMode::Zero, false) {
            Ok(report) => {
                if let Some(v) = report
                    .verdicts
                    .iter()
                    .find(|v| !matches!(v.status, CurvatureStatus::Zero | CurvatureStatus::BadPlace(_)))
                {
                    return TrivialityVerdict::NonTrivial { order: v.order, witness: v.witness.clone() };
                }
                summary = Some(report.summary);
            }
            Err(e) => return TrivialityVerdict::Inconclusive { reason: e.to_string() },
        }
    }
    let evidence = |reason: String| match &summary {
        Some(s) => TrivialityVerdict::EvidenceTrivial { summary: s.clone(), reason },
        None => TrivialityVerdict::Inconclusive { reason },
    };
    let sheared = match shear_to_zero(sys, default_window(sys)) {
        Ok(s) => s,
        Err(e) => return TrivialityVerdict::Inconclusive { reason: e.to_string() },
    };
    let normal = match normalize_exponents(&sheared.system, default_exponent_bound(&sheared.system)) {
        Ok(s) => s,
        Err(_) => return evidence("exponents are not all in q^Z with semisimple A(0)".into()),
    };
    let start = match candidate_degree(&normal.system, degree) {
        Some(d) => d,
        None => return evidence(format!("no rational solution of degree <= {degree} modulo a prime")),
    };
    let s = sheared.matrix().mul(&normal.matrix());
    let mut y: Option<SeriesMatrix> = None;
    for d in start..=degree {
        let order = n.unwrap_or(4 * d + 4);
        if 2 * d + 1 > order + 1 {
            break;
        }
        if y.as_ref().map_or(true, |y| y.order() != order) {
            y = match formal_solution(&normal.system, order) {
                Ok(y) => Some(y),
                Err(e) => return TrivialityVerdict::Inconclusive { reason: e.to_string() },
            };
        }
        if let Some(r) = rational_reconstruct(y.as_ref().unwrap(), d, d) {
            let candidate = s.mul(&r);
            if is_fundamental_solution(sys, &candidate) {
                return TrivialityVerdict::CertifiedTrivial { solution: candidate, degree: d };
            }
        }
    }
    let order = n.unwrap_or(4 * degree + 4);
    evidence(format!("no rational solution of degree <= {degree} from {order} series terms"))
}

/// The system seen from `∞` in the variable `t = 1/x`: `σ_q(W) = A₁(1/(qt))⁻¹ W`.
pub fn system_at_infinity(sys: &QDiffSystem) -> Result<QDiffSystem> {
    let inv = sys.a1().inverse().ok_or(Error::ZeroDeterminant)?;
    QDiffSystem::new(inv.map(&(), |f| f.invert_var().twist(1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::fe_int;
    use crate::qdiff::xvar;

    fn tele() -> QDiffSystem {
        QDiffSystem::scalar(&(&xint(1) - &xvar()) / &(&xint(1) - &(&xconst(q()) * &xvar()))).unwrap()
    }

    fn geometric() -> XFunction {
        &xint(1) / &(&xint(1) - &xvar())
    }

    #[test]
    fn shear_examples() {
        let s = shear_to_zero(&tele(), 1).unwrap();
        assert!(s.factors.is_empty());
        assert_eq!(
            shear_to_zero(&QDiffSystem::scalar(xvar().inv().unwrap()).unwrap(), 1).unwrap_err(),
            Error::ShearingFailed(1)
        );
        // A₁ = diag(1/x, x)·(constant) is irregular; det has order 0 but no stable lattice
        let a = Matrix::from_rows(&(), vec![vec![xvar().inv().unwrap(), xint(0)], vec![xint(0), xvar()]]);
        assert!(shear_to_zero(&QDiffSystem::new(a).unwrap(), 3).is_err());
        // gauge of a regular system by diag(1, x⁻²) is sheared back
        let base = Matrix::from_rows(&(), vec![vec![xint(1), xvar()], vec![xint(0), xconst(q())]]);
        let g = Matrix::diagonal(&(), vec![xint(1), xint(1).mul_var_pow(-2)]);
        let gs = QDiffSystem::new(base).unwrap().gauge(&g).unwrap();
        let sh = shear_to_zero(&gs, 4).unwrap();
        value_at_zero(sh.system.a1()).unwrap();
        assert_eq!(gs.gauge(&sh.matrix()).unwrap(), sh.system);
    }

    #[test]
    fn exponent_examples() {
        let d = Matrix::diagonal(&(), vec![xconst(q()), xconst(q().inv().unwrap())]);
        let rep = exponents(&QDiffSystem::new(d).unwrap(), 3).unwrap();
        assert_eq!(rep.exponents, Some(vec![-1, 1]));
        assert!(rep.semisimple);
        assert_eq!(exponents(&QDiffSystem::scalar(xint(2)).unwrap(), 5).unwrap().exponents, None);
        let rep = exponents(&QDiffSystem::identity(3), 2).unwrap();
        assert_eq!(rep.exponents, Some(vec![0, 0, 0]));
        let j = Matrix::from_rows(&(), vec![vec![xint(1), xint(1)], vec![xint(0), xint(1)]]);
        let rep = exponents(&QDiffSystem::new(j).unwrap(), 2).unwrap();
        assert_eq!(rep.exponents, Some(vec![0, 0]));
        assert!(!rep.semisimple);
        assert_eq!(exponents(&QDiffSystem::scalar(xvar()).unwrap(), 2), Err(Error::SingularAtZero));
    }

    #[test]
    fn formal_solutions() {
        let y = formal_solution(&QDiffSystem::identity(2), 5).unwrap();
        assert!(y.coeffs().iter().skip(1).all(|c| c.is_zero()));
        let y = formal_solution(&tele(), 8).unwrap();
        assert!(y.coeffs().iter().all(|c| c.get(0, 0) == &fe_int(1)));
        let g = QDiffSystem::scalar(geometric()).unwrap();
        let y = formal_solution(&g, 10).unwrap();
        assert!(y.satisfies(g.a1()));
        assert_eq!(formal_solution(&QDiffSystem::scalar(xint(2)).unwrap(), 3), Err(Error::NotNormalized));
    }

    #[test]
    fn formal_solution_matches_divided_iterates() {
        // Y = Σ G_[n](0) xⁿ
        let a = Matrix::from_rows(
            &(),
            vec![vec![&xint(1) + &xvar(), xvar()], vec![&xvar() * &xvar(), &xint(1) / &(&xint(1) - &xvar())]],
        );
        let s = QDiffSystem::new(a).unwrap();
        let y = formal_solution(&s, 4).unwrap();
        let it = s.iterate(4);
        for n in 1..=4 {
            let g0 = it.g_divided(n).map(&(), |f| f.value_at_zero().unwrap());
            assert_eq!(&g0, y.coeff(n), "n = {n}");
        }
    }

    #[test]
    fn frobenius_examples() {
        let c = Matrix::from_rows(&(), vec![vec![xint(2), xint(1)], vec![xint(0), xint(3)]]);
        let f = frobenius_normalize(&QDiffSystem::new(c).unwrap(), 4).unwrap();
        assert!(f.coeff(0).is_identity() && f.coeffs()[1..].iter().all(|m| m.is_zero()));
        let f = frobenius_normalize(&tele(), 6).unwrap();
        assert!(f.coeffs().iter().all(|m| m.get(0, 0) == &fe_int(1)));
        let r = Matrix::from_rows(&(), vec![vec![xint(1), xvar()], vec![xint(0), xconst(q())]]);
        assert!(matches!(frobenius_normalize(&QDiffSystem::new(r).unwrap(), 3), Err(Error::Resonant(_))));
    }

    #[test]
    fn frobenius_conjugates_to_constant() {
        let a = Matrix::from_rows(
            &(),
            vec![vec![&xint(2) + &xvar(), xvar()], vec![&xvar() * &xvar(), &xint(3) / &(&xint(1) - &xvar())]],
        );
        let s = QDiffSystem::new(a).unwrap();
        let f = frobenius_normalize(&s, 5).unwrap();
        let a0 = value_at_zero(s.a1()).unwrap();
        let lhs = SeriesMatrix::new(f.twist().coeffs().iter().map(|c| c.mul(&a0)).collect());
        let rhs = SeriesMatrix::of_matrix(s.a1(), 5).unwrap().mul(&f);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn pade_examples() {
        let one = fe_int(1);
        let geo = vec![one.clone(); 6];
        assert_eq!(pade(&geo, 1, 1).unwrap(), geometric());
        let lin = vec![one.clone(), one.clone(), fe_int(0), fe_int(0)];
        assert_eq!(pade(&lin, 1, 0).unwrap(), &xint(1) + &xvar());
        let g = QDiffSystem::scalar(geometric()).unwrap();
        let y = formal_solution(&g, 12).unwrap();
        for d in 1..=5 {
            assert!(rational_reconstruct(&y, d, d).is_none());
        }
    }

    #[test]
    fn triviality_examples() {
        match triviality_test(&tele(), 12, None, 3) {
            TrivialityVerdict::CertifiedTrivial { solution, .. } => {
                let ratio = &solution.get(0, 0).clone() / &geometric();
                assert!(ratio.is_polynomial() && ratio.num().is_constant());
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            triviality_test(&QDiffSystem::scalar(geometric()).unwrap(), 10, None, 3),
            TrivialityVerdict::NonTrivial { order: 2, .. }
        ));
        match triviality_test(&QDiffSystem::scalar(xconst(q())).unwrap(), 10, None, 2) {
            TrivialityVerdict::CertifiedTrivial { solution, .. } => assert_eq!(solution.get(0, 0), &xvar()),
            other => panic!("{other:?}"),
        }
    }
}
