//! Numeric canonical solutions at `0` and `∞` for complex `q` with `|q| > 1`,
//! and the Birkhoff matrix `B = Y₀⁻¹ Y_∞`.

use std::fmt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_traits::{Num, One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use twofloat::TwoFloat;

use crate::arith::{FieldElem, Matrix, Scalar, XFunction};
use crate::error::{Error, Result};
use crate::frobenius::{
    default_exponent_bound, default_window, normalize_exponents, shear_to_zero, system_at_infinity,
};
use crate::qdiff::QDiffSystem;

/// Floating point type used for evaluation.
pub trait Real: Copy + Num + Neg<Output = Self> + PartialOrd + Send + Sync + fmt::Debug + 'static {
    fn of(v: f64) -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn approx(self) -> f64;
    fn sqrt(self) -> Self;
}

impl Real for f64 {
    fn of(v: f64) -> Self {
        v
    }

    fn from_rational(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }

    fn approx(self) -> f64 {
        self
    }

    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

/// Double-double arithmetic on top of `TwoFloat`, with quotients refined
/// through divisions by `f64` only.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DoubleDouble(pub TwoFloat);

impl DoubleDouble {
    pub fn hi(self) -> f64 {
        self.0.hi()
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        DoubleDouble(self.0 + rhs.0)
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        DoubleDouble(self.0 - rhs.0)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        DoubleDouble(self.0 * rhs.0)
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let b = rhs.0;
        let q1 = self.0.hi() / b.hi();
        let r = self.0 - b * q1;
        let q2 = r.hi() / b.hi();
        let r = r - b * q2;
        let q3 = r.hi() / b.hi();
        DoubleDouble(TwoFloat::new_add(q1, q2) + q3)
    }
}

impl Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        let quotient = DoubleDouble((self / rhs).0.trunc());
        self - quotient * rhs
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleDouble(-self.0)
    }
}

impl Zero for DoubleDouble {
    fn zero() -> Self {
        DoubleDouble(TwoFloat::from(0.0))
    }

    fn is_zero(&self) -> bool {
        self.0.hi() == 0.0 && self.0.lo() == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        DoubleDouble(TwoFloat::from(1.0))
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = std::num::ParseFloatError;

    fn from_str_radix(s: &str, _radix: u32) -> std::result::Result<Self, Self::FromStrRadixErr> {
        Ok(DoubleDouble(TwoFloat::from(s.parse::<f64>()?)))
    }
}

impl Real for DoubleDouble {
    fn of(v: f64) -> Self {
        DoubleDouble(TwoFloat::from(v))
    }

    fn from_rational(r: &BigRational) -> Self {
        let hi = r.to_f64().unwrap_or(f64::NAN);
        let lo = BigRational::from_float(hi).map_or(0.0, |h| (r - h).to_f64().unwrap_or(0.0));
        DoubleDouble(TwoFloat::new_add(hi, lo))
    }

    fn approx(self) -> f64 {
        self.0.hi() + self.0.lo()
    }

    fn sqrt(self) -> Self {
        if self.0.hi() <= 0.0 {
            return Self::zero();
        }
        let s = Self::of(self.0.hi().sqrt());
        s + (self - s * s) / (Self::of(2.0) * s)
    }
}

pub type C<T> = Complex<T>;

/// Dense complex matrix, row major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T: Real> {
    n: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![C::new(T::zero(), T::zero()); n * n];
        for i in 0..n {
            data[i * n + i] = C::new(T::one(), T::zero());
        }
        CMatrix { n, data }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> C<T>) -> Self {
        CMatrix { n, data: (0..n * n).map(|k| f(k / n, k % n)).collect() }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> C<T> {
        self.data[i * self.n + j]
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let n = self.n;
        CMatrix::from_fn(n, |i, j| (0..n).fold(C::zero(), |acc, k| acc + self.get(i, k) * rhs.get(k, j)))
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        CMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        CMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, c: T) -> Self {
        CMatrix { n: self.n, data: self.data.iter().map(|a| a * c).collect() }
    }

    /// Largest entry modulus.
    pub fn norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &z| m.max(modulus(z).approx()))
    }

    /// Gauss–Jordan with partial pivoting; `None` if a pivot vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = CMatrix::identity(n);
        for col in 0..n {
            let piv = (col..n).max_by(|&r, &s| modulus(a.get(r, col)).partial_cmp(&modulus(a.get(s, col))).unwrap())?;
            if a.get(piv, col).is_zero() {
                return None;
            }
            for j in 0..n {
                a.data.swap(col * n + j, piv * n + j);
                inv.data.swap(col * n + j, piv * n + j);
            }
            let p = a.get(col, col);
            for j in 0..n {
                a.data[col * n + j] = a.data[col * n + j] / p;
                inv.data[col * n + j] = inv.data[col * n + j] / p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col);
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    a.data[r * n + j] = a.data[r * n + j] - f * a.data[col * n + j];
                    inv.data[r * n + j] = inv.data[r * n + j] - f * inv.data[col * n + j];
                }
            }
        }
        Some(inv)
    }

    pub fn to_c64(&self) -> Vec<Complex64> {
        self.data.iter().map(|&z| c64(z)).collect()
    }
}

/// `|z|`.
pub fn modulus<T: Real>(z: C<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}

fn horner<T: Real>(coeffs: &[C<T>], x: C<T>) -> C<T> {
    coeffs.iter().rev().fold(C::zero(), |acc, c| acc * x + c)
}

fn scalar_value<T: Real>(s: &Scalar) -> Result<T> {
    if s.characteristic().is_some() {
        return Err(Error::NotPrepared("numeric evaluation needs characteristic zero".into()));
    }
    Ok(T::from_rational(&s.to_big()))
}

fn field_value<T: Real>(f: &FieldElem, q: C<T>) -> Result<C<T>> {
    let eval = |p: &crate::arith::QPoly| -> Result<C<T>> {
        let cs: Vec<C<T>> =
            p.coeffs().iter().map(|c| Ok(C::new(scalar_value(c)?, T::zero()))).collect::<Result<_>>()?;
        Ok(horner(&cs, q))
    };
    let d = eval(f.den())?;
    if d.is_zero() {
        return Err(Error::Invalid("q value is a pole of a coefficient".into()));
    }
    Ok(eval(f.num())? / d)
}

/// A rational function of `x` with complex coefficients.
#[derive(Debug, Clone)]
pub struct CRational<T: Real> {
    num: Vec<C<T>>,
    den: Vec<C<T>>,
}

impl<T: Real> CRational<T> {
    fn specialize(f: &XFunction, q: C<T>) -> Result<Self> {
        let conv = |p: &crate::arith::Poly<FieldElem>| -> Result<Vec<C<T>>> {
            p.coeffs().iter().map(|c| field_value(c, q)).collect()
        };
        Ok(CRational { num: conv(f.num())?, den: conv(f.den())? })
    }

    pub fn eval(&self, x: C<T>) -> C<T> {
        horner(&self.num, x) / horner(&self.den, x)
    }

    fn den_f64(&self) -> Vec<Complex64> {
        self.den.iter().map(|&z| c64(z)).collect()
    }
}

/// Entrywise specialized matrix of rational functions.
#[derive(Debug, Clone)]
pub struct CRationalMatrix<T: Real> {
    n: usize,
    entries: Vec<CRational<T>>,
}

impl<T: Real> CRationalMatrix<T> {
    fn specialize(m: &Matrix<XFunction>, q: C<T>) -> Result<Self> {
        let entries = m.entries().iter().map(|f| CRational::specialize(f, q)).collect::<Result<_>>()?;
        Ok(CRationalMatrix { n: m.rows(), entries })
    }

    pub fn eval(&self, x: C<T>) -> CMatrix<T> {
        CMatrix::from_fn(self.n, |i, j| self.entries[i * self.n + j].eval(x))
    }

    /// Numerical roots of every entry denominator.
    fn poles(&self) -> Vec<Complex64> {
        let mut out = Vec::new();
        for e in &self.entries {
            out.extend(poly_roots(&e.den_f64()));
        }
        dedup_roots(out)
    }
}

/// Roots by Durand–Kerner iteration.
pub fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.last().is_some_and(|z| z.norm() == 0.0) {
        c.pop();
    }
    let deg = c.len().saturating_sub(1);
    if deg == 0 {
        return Vec::new();
    }
    let lead = c[deg];
    let c: Vec<Complex64> = c.iter().map(|z| z / lead).collect();
    let bound = 1.0 + c[..deg].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32) * bound).collect();
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let num = horner(&c, roots[i]);
            let den = (0..deg).filter(|&j| j != i).fold(Complex64::new(1.0, 0.0), |acc, j| acc * (roots[i] - roots[j]));
            if den.norm() == 0.0 {
                continue;
            }
            let step = num / den;
            roots[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-15 * bound {
            break;
        }
    }
    roots
}

fn dedup_roots(mut roots: Vec<Complex64>) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::new();
    roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    for r in roots {
        if !out.iter().any(|s| (s - r).norm() < 1e-9 * (1.0 + r.norm())) {
            out.push(r);
        }
    }
    out
}

/// Exact shearing data at `0` and at `∞`: `Y₀ = S₀ Z₀` and `Y_∞(x) = S_∞(1/x) Z_∞(1/x)`,
/// where `Z₀`, `Z_∞` solve systems with value `I` at their base point.
#[derive(Debug, Clone)]
pub struct Preparation {
    pub system: QDiffSystem,
    pub s0: Matrix<XFunction>,
    pub a0: QDiffSystem,
    /// `S_∞` in the variable `t = 1/x`.
    pub sinf: Matrix<XFunction>,
    /// Normalized system at `∞`, in `t`.
    pub ainf: QDiffSystem,
}

fn normalize_at_zero(sys: &QDiffSystem) -> Result<(Matrix<XFunction>, QDiffSystem)> {
    let not_prepared = |e: Error| Error::NotPrepared(e.to_string());
    let sheared = shear_to_zero(sys, default_window(sys)).map_err(not_prepared)?;
    let normal =
        normalize_exponents(&sheared.system, default_exponent_bound(&sheared.system)).map_err(not_prepared)?;
    Ok((sheared.matrix().mul(&normal.matrix()), normal.system))
}

pub fn prepare(sys: &QDiffSystem) -> Result<Preparation> {
    let (s0, a0) = normalize_at_zero(sys)?;
    let at_inf = system_at_infinity(sys).map_err(|e| Error::NotPrepared(e.to_string()))?;
    let (sinf, ainf) = normalize_at_zero(&at_inf)?;
    Ok(Preparation { system: sys.clone(), s0, a0, sinf, ainf })
}

#[derive(Debug, Clone)]
pub struct NumericSystem<T: Real> {
    pub rank: usize,
    pub q: C<T>,
    a1: CRationalMatrix<T>,
    a0: CRationalMatrix<T>,
    ainf: CRationalMatrix<T>,
    s0: CRationalMatrix<T>,
    sinf: CRationalMatrix<T>,
    poles0: Vec<Complex64>,
    polesinf: Vec<Complex64>,
    /// Points whose `q`-orbits must be avoided by sample points, in `x`.
    singular_orbits: Vec<Complex64>,
}

pub fn specialize<T: Real>(prep: Option<&Preparation>, q_val: Complex64) -> Result<NumericSystem<T>> {
    let prep = prep.ok_or_else(|| Error::NotPrepared("shearing data missing".into()))?;
    if q_val.norm() <= 1.0 {
        return Err(Error::UnitModulus(q_val.norm()));
    }
    let q = C::new(T::of(q_val.re), T::of(q_val.im));
    let spec = |m: &Matrix<XFunction>| CRationalMatrix::specialize(m, q);
    let a0 = spec(prep.a0.a1())?;
    let ainf = spec(prep.ainf.a1())?;
    let a0_inv = spec(&prep.a0.a1().inverse().expect("invertible system"))?;
    let ainf_inv = spec(&prep.ainf.a1().inverse().expect("invertible system"))?;
    let poles0 = a0.poles();
    let polesinf = ainf.poles();
    let mut singular_orbits: Vec<Complex64> = poles0.iter().chain(&a0_inv.poles()).copied().collect();
    singular_orbits.extend(polesinf.iter().chain(&ainf_inv.poles()).filter(|t| t.norm() > 1e-12).map(|t| t.inv()));
    Ok(NumericSystem {
        rank: prep.system.rank(),
        q,
        a1: spec(prep.system.a1())?,
        a0,
        ainf,
        s0: spec(&prep.s0)?,
        sinf: spec(&prep.sinf)?,
        poles0,
        polesinf,
        singular_orbits: dedup_roots(singular_orbits),
    })
}

fn c64<T: Real>(z: C<T>) -> Complex64 {
    Complex64::new(z.re.approx(), z.im.approx())
}

impl<T: Real> NumericSystem<T> {
    pub fn eval_a1(&self, x: C<T>) -> CMatrix<T> {
        self.a1.eval(x)
    }

    /// The normalized system at `0`, with value `I` at `x = 0`.
    pub fn a0fun(&self, x: C<T>) -> CMatrix<T> {
        self.a0.eval(x)
    }

    /// The normalized factor at `∞`, `Y_∞ = (A_∞(x) A_∞(qx) ⋯) S_∞`, with value `I` at `x = ∞`.
    pub fn ainffun(&self, x: C<T>) -> CMatrix<T> {
        self.ainf.eval(C::new(T::one(), T::zero()) / (self.q * x))
    }

    pub fn s0(&self, x: C<T>) -> CMatrix<T> {
        self.s0.eval(x)
    }

    pub fn sinf(&self, x: C<T>) -> CMatrix<T> {
        self.sinf.eval(x.inv())
    }

    /// Whether `x` lies within `1e-6` (relative) of a `q^ℤ`-orbit of a singular point.
    pub fn near_singular_orbit(&self, x: Complex64) -> bool {
        let q = c64(self.q);
        self.singular_orbits.iter().any(|&r| {
            let mut p = r * q.powi(-64);
            (-64..=64).any(|_| {
                let hit = (x - p).norm() < 1e-6 * x.norm().max(1.0);
                p *= q;
                hit
            })
        })
    }
}

/// A truncated product together with the factor count used.
#[derive(Debug, Clone)]
pub struct CanonicalSolution<T: Real> {
    /// The product of normalized factors.
    pub z: CMatrix<T>,
    /// `Y = S·Z`, a solution of the original system.
    pub y: CMatrix<T>,
    pub factors: usize,
}

pub const MAX_FACTORS: usize = 200_000;

/// `F(u/q) F(u/q²) ⋯` with `F(0) = I`, stopping once the tail is below `tol`
/// or after exactly `fixed` factors.
fn product<T: Real>(
    f: &CRationalMatrix<T>,
    poles: &[Complex64],
    q: C<T>,
    u: C<T>,
    tol: f64,
    fixed: Option<usize>,
) -> Result<(CMatrix<T>, usize)> {
    let n = f.n;
    let r = 1.0 / c64(q).norm();
    let mut acc = CMatrix::identity(n);
    let mut point = u;
    let limit = fixed.unwrap_or(MAX_FACTORS);
    for k in 1..=limit {
        point = point / q;
        let p64 = c64(point);
        if poles.iter().any(|&s| (p64 - s).norm() < 1e-6 * s.norm().max(1.0)) {
            return Err(Error::NearPole);
        }
        let factor = f.eval(point);
        let dev = factor.sub(&CMatrix::identity(n)).norm();
        if !dev.is_finite() {
            return Err(Error::NearPole);
        }
        acc = acc.mul(&factor);
        if fixed.is_none() && dev * r / (1.0 - r) <= tol / 16.0 {
            return Ok((acc, k));
        }
    }
    match fixed {
        Some(k) => Ok((acc, k)),
        None => Err(Error::NoConvergence(MAX_FACTORS)),
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("tolerance must be positive, got {tol}")))
    }
}

/// `Z₀(x) = A₀(x/q) A₀(x/q²) ⋯` and `Y₀ = S₀ Z₀`.
pub fn canonical_zero<T: Real>(ns: &NumericSystem<T>, x: C<T>, tol: f64) -> Result<CanonicalSolution<T>> {
    check_tol(tol)?;
    canonical_zero_fixed(ns, x, tol, None)
}

fn canonical_zero_fixed<T: Real>(
    ns: &NumericSystem<T>,
    x: C<T>,
    tol: f64,
    fixed: Option<usize>,
) -> Result<CanonicalSolution<T>> {
    let (z, factors) = product(&ns.a0, &ns.poles0, ns.q, x, tol, fixed)?;
    Ok(CanonicalSolution { y: ns.s0(x).mul(&z), z, factors })
}

/// `Z_∞(x) = A_∞(x) A_∞(qx) ⋯` and `Y_∞ = S_∞ Z_∞`.
pub fn canonical_infinity<T: Real>(ns: &NumericSystem<T>, x: C<T>, tol: f64) -> Result<CanonicalSolution<T>> {
    check_tol(tol)?;
    canonical_infinity_fixed(ns, x, tol, None)
}

fn canonical_infinity_fixed<T: Real>(
    ns: &NumericSystem<T>,
    x: C<T>,
    tol: f64,
    fixed: Option<usize>,
) -> Result<CanonicalSolution<T>> {
    if x.is_zero() {
        return Err(Error::NearPole);
    }
    let (z, factors) = product(&ns.ainf, &ns.polesinf, ns.q, x.inv(), tol, fixed)?;
    Ok(CanonicalSolution { y: ns.sinf(x).mul(&z), z, factors })
}

fn connection<T: Real>(y0: &CanonicalSolution<T>, yinf: &CanonicalSolution<T>) -> Result<CMatrix<T>> {
    Ok(y0.y.inverse().ok_or(Error::NearPole)?.mul(&yinf.y))
}

/// `B(x) = Y₀(x)⁻¹ Y_∞(x)`.
pub fn birkhoff_matrix<T: Real>(ns: &NumericSystem<T>, x: C<T>, tol: f64) -> Result<CMatrix<T>> {
    connection(&canonical_zero(ns, x, tol)?, &canonical_infinity(ns, x, tol)?)
}

/// `B(x)` from the adaptive products and from products with twice as many factors.
pub fn birkhoff_truncation_pair<T: Real>(ns: &NumericSystem<T>, x: C<T>, tol: f64) -> Result<(CMatrix<T>, CMatrix<T>)> {
    let y0 = canonical_zero(ns, x, tol)?;
    let yinf = canonical_infinity(ns, x, tol)?;
    let b = connection(&y0, &yinf)?;
    let y0d = canonical_zero_fixed(ns, x, tol, Some(2 * y0.factors))?;
    let yinfd = canonical_infinity_fixed(ns, x, tol, Some(2 * yinf.factors))?;
    Ok((b, connection(&y0d, &yinfd)?))
}

/// Sample points on the annulus `ρ ≤ |x| < ρ|q|`, moved off singular orbits.
pub fn annulus_samples<T: Real>(ns: &NumericSystem<T>, count: usize, radius: f64) -> Vec<C<T>> {
    let golden = 0.618_033_988_749_894_9_f64;
    let qn = c64(ns.q).norm();
    (0..count)
        .map(|k| {
            let modulus = radius * qn.powf((k as f64 + 0.5) / count as f64);
            let mut angle = std::f64::consts::TAU * ((k as f64 * golden + 0.1) % 1.0);
            let mut x = Complex64::from_polar(modulus, angle);
            while ns.near_singular_orbit(x) {
                angle += 1e-3;
                x = Complex64::from_polar(modulus, angle);
            }
            C::new(T::of(x.re), T::of(x.im))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct BirkhoffSample {
    /// Sample points as `[re, im]`.
    pub points: Vec<[f64; 2]>,
    /// `B(x_i)` row major, entries as `[re, im]`.
    pub values: Vec<Vec<[f64; 2]>>,
    /// `max_i ‖B(q x_i) − B(x_i)‖ / max(1, ‖B(x_i)‖)`.
    pub ellipticity_residual: f64,
    /// `max_i ‖B(x_i) − mean‖`.
    pub constancy_residual: f64,
    /// `max_i ‖B(x_i) − B_2(x_i)‖` with `B_2` from twice as many factors.
    pub truncation_residual: f64,
    pub max_factors: usize,
}

pub const MIN_SAMPLES: usize = 8;

/// Residuals of `B` over `samples` points of the annulus through `|x| = 1`.
pub fn ellipticity_and_constancy<T: Real>(ns: &NumericSystem<T>, samples: usize, tol: f64) -> Result<BirkhoffSample> {
    check_tol(tol)?;
    if samples < MIN_SAMPLES {
        return Err(Error::Invalid(format!("need at least {MIN_SAMPLES} sample points, got {samples}")));
    }
    let points = annulus_samples(ns, samples, 1.0);
    let rows: Vec<(CMatrix<T>, f64, f64, usize)> = points
        .par_iter()
        .map(|&x| {
            let y0 = canonical_zero(ns, x, tol)?;
            let yinf = canonical_infinity(ns, x, tol)?;
            let b = connection(&y0, &yinf)?;
            let bq = birkhoff_matrix(ns, ns.q * x, tol)?;
            let scale = b.norm().max(1.0);
            let ell = bq.sub(&b).norm() / scale;
            let y0d = canonical_zero_fixed(ns, x, tol, Some(2 * y0.factors))?;
            let yinfd = canonical_infinity_fixed(ns, x, tol, Some(2 * yinf.factors))?;
            let trunc = connection(&y0d, &yinfd)?.sub(&b).norm();
            Ok((b, ell, trunc, y0.factors.max(yinf.factors)))
        })
        .collect::<Result<_>>()?;
    let n = ns.rank;
    let mean = rows
        .iter()
        .fold(CMatrix::from_fn(n, |_, _| C::zero()), |acc, r| acc.add(&r.0))
        .scale(T::one() / T::of(samples as f64));
    Ok(BirkhoffSample {
        points: points.iter().map(|&z| [z.re.approx(), z.im.approx()]).collect(),
        values: rows.iter().map(|r| r.0.to_c64().iter().map(|z| [z.re, z.im]).collect()).collect(),
        ellipticity_residual: rows.iter().map(|r| r.1).fold(0.0, f64::max),
        constancy_residual: rows.iter().map(|r| r.0.sub(&mean).norm()).fold(0.0, f64::max),
        truncation_residual: rows.iter().map(|r| r.2).fold(0.0, f64::max),
        max_factors: rows.iter().map(|r| r.3).max().unwrap_or(0),
    })
}
