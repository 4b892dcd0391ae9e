//! `k[q]`, `K = k(q)`, cyclotomic polynomials and the quotients `k[q]/(Φ_ℓ)`.

use std::fmt;
use std::sync::Arc;

use super::poly::{Poly, VarName};
use super::ratfunc::RatFunc;
use super::ring::{Coeff, QAlgebra};
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Polynomial in `q` over the base field.
pub type QPoly = Poly<Scalar>;

/// Element of `K = k(q)`.
pub type FieldElem = RatFunc<Scalar>;

impl VarName for Scalar {
    const VAR: &'static str = "q";
}

impl VarName for QPoly {
    const VAR: &'static str = "x";
}

impl VarName for FieldElem {
    const VAR: &'static str = "x";
}

impl QAlgebra for QPoly {
    fn q_pow(_: &(), m: i64) -> Self {
        assert!(m >= 0, "q is not a unit in k[q]");
        Poly::monomial(Scalar::int(1), m as usize)
    }
}

impl QAlgebra for FieldElem {
    fn q_pow(_: &(), m: i64) -> Self {
        let mono = Poly::monomial(Scalar::int(1), m.unsigned_abs() as usize);
        if m >= 0 {
            RatFunc::from_poly(mono)
        } else {
            RatFunc::new_raw(Poly::one(&()), mono)
        }
    }
}

/// Shorthand constructors for elements of `k(q)`.
pub fn q() -> FieldElem {
    FieldElem::var(&())
}

pub fn fe_int(n: i64) -> FieldElem {
    FieldElem::constant(Scalar::int(n))
}

pub fn qpoly(coeffs: &[i64]) -> QPoly {
    Poly::new(coeffs.iter().map(|&c| Scalar::int(c)).collect(), ())
}

/// Apply one of `+ − × ÷` in `k(q)`.
pub fn field_arith(a: &FieldElem, b: &FieldElem, op: char) -> Result<FieldElem> {
    Ok(match op {
        '+' => a + b,
        '-' => a - b,
        '*' => a * b,
        '/' => {
            let inv = b.inv().ok_or(Error::DivisionByZero)?;
            a * &inv
        }
        other => return Err(Error::Invalid(format!("unknown operator {other:?}"))),
    })
}

fn lcm_monic(a: &QPoly, b: &QPoly) -> QPoly {
    if b.is_one() {
        return a.clone();
    }
    let g = a.gcd(b).expect("field coefficients");
    (a * b).div_rem(&g).unwrap().0.monic().unwrap()
}

/// Clear `q`-denominators of a polynomial in `x` over `k(q)`.
pub fn clear_q_denominators(p: &Poly<FieldElem>) -> Poly<QPoly> {
    let l = p.coeffs().iter().fold(qpoly(&[1]), |acc, c| lcm_monic(&acc, c.den()));
    p.map(&(), |c| (c.num() * &l).div_rem(c.den()).unwrap().0)
}

/// Primitive part of a polynomial in `x` over `k[q]`.
pub fn primitive_part(p: &Poly<QPoly>) -> Poly<QPoly> {
    let mut content: Option<QPoly> = None;
    for c in p.coeffs().iter().filter(|c| !c.is_zero()) {
        let g = match &content {
            None => c.monic().unwrap(),
            Some(g) => g.gcd(c).unwrap(),
        };
        let done = g.is_one();
        content = Some(g);
        if done {
            break;
        }
    }
    match content {
        Some(g) if !g.is_one() => p.map(&(), |c| c.div_rem(&g).unwrap().0),
        _ => p.clone(),
    }
}

/// Prime used for modular coprimality checks.
const CHECK_PRIME: u64 = 2_147_483_629;

fn qpoly_mod(p: &QPoly, prime: u64) -> Option<QPoly> {
    if p.coeffs().first().is_some_and(|c| c.characteristic().is_some()) {
        return None;
    }
    p.try_map(&(), |c| c.to_modp(prime).ok_or(())).ok()
}

/// Sufficient test for `gcd(a, b) = 1` over `ℚ`: the images modulo a large
/// prime keep their degrees and are coprime.
pub fn coprime_mod_prime(a: &QPoly, b: &QPoly) -> bool {
    if a.is_constant() || b.is_constant() {
        return false;
    }
    let (Some(am), Some(bm)) = (qpoly_mod(a, CHECK_PRIME), qpoly_mod(b, CHECK_PRIME)) else {
        return false;
    };
    if am.degree() != a.degree() || bm.degree() != b.degree() {
        return false;
    }
    am.euclid_gcd(&bm).is_some_and(|g| g.is_one())
}

/// `f(q0)` modulo the check prime, absent if the denominator vanishes there.
pub fn eval_mod_prime(f: &FieldElem, q0: u64) -> Option<Scalar> {
    let at = Scalar::Mod { value: q0, modulus: CHECK_PRIME };
    let n = qpoly_mod(f.num(), CHECK_PRIME)?.eval(&at);
    let d = qpoly_mod(f.den(), CHECK_PRIME)?.eval(&at);
    Some(n.mul(&d.inv()?))
}

/// Image of `p(q0, x)` modulo the check prime, if degrees are preserved.
fn specialize_mod(p: &Poly<QPoly>, q0: u64) -> Option<Poly<Scalar>> {
    let at = Scalar::Mod { value: q0, modulus: CHECK_PRIME };
    let coeffs: Option<Vec<Scalar>> = p.coeffs().iter().map(|c| Some(qpoly_mod(c, CHECK_PRIME)?.eval(&at))).collect();
    let image = Poly::new(coeffs?, ());
    (image.degree() == p.degree()).then_some(image)
}

fn full_pseudo_rem(u: &Poly<QPoly>, v: &Poly<QPoly>) -> Poly<QPoly> {
    let delta = u.degree().unwrap() - v.degree().unwrap();
    let lv = v.lead().unwrap().clone();
    let mut r = u.clone();
    let mut steps = 0;
    while let Some(dr) = r.degree() {
        if dr < v.degree().unwrap() {
            break;
        }
        let lr = r.lead().unwrap().clone();
        r = &r.scale(&lv) - &v.scale(&lr).shift(dr - v.degree().unwrap());
        steps += 1;
    }
    if steps < delta + 1 && !r.is_zero() {
        r = r.scale(&lv.pow((delta + 1 - steps) as u32));
    }
    r
}

/// Monic gcd in `k(q)[x]`: a modular coprimality check, then the
/// subresultant remainder sequence over `k[q]`.
pub fn bivariate_gcd(a: &Poly<FieldElem>, b: &Poly<FieldElem>) -> Poly<FieldElem> {
    if a.is_zero() {
        return b.monic().expect("field coefficients");
    }
    if b.is_zero() {
        return a.monic().expect("field coefficients");
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one(&());
    }
    let mut u = primitive_part(&clear_q_denominators(a));
    let mut v = primitive_part(&clear_q_denominators(b));
    for q0 in [3u64, 1_000_003] {
        if let (Some(us), Some(vs)) = (specialize_mod(&u, q0), specialize_mod(&v, q0)) {
            if us.euclid_gcd(&vs).is_some_and(|g| g.is_one()) {
                return Poly::one(&());
            }
            break;
        }
    }
    if let Some(g) = super::mgcd::modular_gcd(&u, &v) {
        let g: Poly<FieldElem> = g.map(&(), |c| FieldElem::from_poly(c.clone()));
        return g.monic().expect("field coefficients");
    }
    if u.degree() < v.degree() {
        std::mem::swap(&mut u, &mut v);
    }
    let mut g = qpoly(&[1]);
    let mut h = qpoly(&[1]);
    while !v.is_zero() {
        if v.degree() == Some(0) {
            return Poly::one(&());
        }
        let delta = (u.degree().unwrap() - v.degree().unwrap()) as u32;
        let r = full_pseudo_rem(&u, &v);
        if r.is_zero() {
            break;
        }
        let divisor = &g * &h.pow(delta);
        u = v;
        v = r.map(&(), |c| c.exact_div(&divisor).expect("subresultant division is exact"));
        g = u.lead().unwrap().clone();
        h = if delta == 0 {
            h
        } else {
            g.pow(delta).exact_div(&h.pow(delta - 1)).expect("subresultant division is exact")
        };
    }
    let gcd: Poly<FieldElem> = primitive_part(&v_or(u, v)).map(&(), |c| FieldElem::from_poly(c.clone()));
    gcd.monic().expect("field coefficients")
}

fn v_or(u: Poly<QPoly>, v: Poly<QPoly>) -> Poly<QPoly> {
    if v.is_zero() {
        u
    } else {
        v
    }
}

/// The cyclotomic polynomial `Φ_ℓ(q)` over `ℤ`.
pub fn cyclotomic_poly(order: u64) -> QPoly {
    assert!(order >= 1, "cyclotomic order must be positive");
    let ctx = ();
    let mut p = &Poly::monomial(Scalar::int(1), order as usize) - &Poly::one(&ctx);
    for d in 1..order {
        if order % d == 0 {
            p = p.div_rem(&cyclotomic_poly(d)).expect("monic divisor").0;
        }
    }
    p
}

pub fn euler_phi(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Map a polynomial with rational coefficients into characteristic `p`.
pub fn qpoly_to_char(p: &QPoly, characteristic: Option<u64>) -> Option<QPoly> {
    match characteristic {
        None => Some(p.clone()),
        Some(ch) => p.try_map(&(), |c| c.to_modp(ch).ok_or(())).ok(),
    }
}

/// Multiplicity of `Φ_ℓ` in a nonzero polynomial.
pub fn ord_cyclotomic(p: &QPoly, phi: &QPoly) -> u32 {
    assert!(!p.is_zero());
    let mut p = p.clone();
    let mut k = 0;
    while let Some((quo, r)) = p.div_rem(phi) {
        if !r.is_zero() || p.degree() < phi.degree() {
            break;
        }
        p = quo;
        k += 1;
    }
    k
}

/// `ord_{Φ_ℓ}(num) − ord_{Φ_ℓ}(den)`.
///
/// The place norm is `d^{deg Φ_ℓ · value}`; only the integer is stored.
pub fn valuation_at(f: &FieldElem, order: u64) -> Result<i64> {
    if f.num().is_zero() {
        return Err(Error::ZeroArgument);
    }
    let phi = match f.num().coeffs().first().and_then(|c| c.characteristic()) {
        Some(ch) => qpoly_to_char(&cyclotomic_poly(order), Some(ch)).unwrap(),
        None => cyclotomic_poly(order),
    };
    Ok(ord_cyclotomic(f.num(), &phi) as i64 - ord_cyclotomic(f.den(), &phi) as i64)
}

/// The ring `k[q]/(Φ_ℓ)`, with `q` mapped to a primitive `ℓ`-th root of unity.
#[derive(Debug)]
pub struct CycRing {
    order: u64,
    modulus: QPoly,
    characteristic: Option<u64>,
    powers: Vec<QPoly>,
}

impl PartialEq for CycRing {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.characteristic == other.characteristic
    }
}

impl CycRing {
    pub fn new(order: u64, characteristic: Option<u64>) -> Arc<Self> {
        let modulus = qpoly_to_char(&cyclotomic_poly(order), characteristic)
            .expect("integer polynomial");
        let mut powers = Vec::with_capacity(order as usize);
        let mut cur = Poly::one(&());
        let qv = Poly::var(&());
        for _ in 0..order {
            let c = cur.rem(&modulus).unwrap();
            powers.push(c.clone());
            cur = &c * &qv;
        }
        Arc::new(CycRing { order, modulus, characteristic, powers })
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn modulus(&self) -> &QPoly {
        &self.modulus
    }

    pub fn characteristic(&self) -> Option<u64> {
        self.characteristic
    }
}

/// Residue class in `k[q]/(Φ_ℓ)`.
#[derive(Clone)]
pub struct CycScalar {
    ring: Arc<CycRing>,
    residue: QPoly,
}

impl CycScalar {
    pub fn from_qpoly(ring: &Arc<CycRing>, p: &QPoly) -> Self {
        let p = match ring.characteristic {
            Some(ch) => qpoly_to_char(p, Some(ch)).expect("integral residue"),
            None => p.clone(),
        };
        let residue = if p.degree() < ring.modulus.degree() {
            p
        } else {
            p.rem(&ring.modulus).unwrap()
        };
        CycScalar { ring: ring.clone(), residue }
    }

    pub fn residue(&self) -> &QPoly {
        &self.residue
    }

    pub fn ring(&self) -> &Arc<CycRing> {
        &self.ring
    }

    pub fn order(&self) -> u64 {
        self.ring.order
    }

    /// Multiplicative order of this residue, if it is at most `bound`.
    pub fn multiplicative_order(&self, bound: u64) -> Option<u64> {
        let mut acc = self.clone();
        for k in 1..=bound {
            if acc.is_one() {
                return Some(k);
            }
            acc = acc.mul(self);
        }
        None
    }
}

/// Image of `f ∈ k(q)` in `k[q]/(Φ_ℓ)`.
pub fn reduce_mod(f: &FieldElem, ring: &Arc<CycRing>) -> Result<CycScalar> {
    let num = CycScalar::from_qpoly(ring, &convert_char(f.num(), ring)?);
    let den = CycScalar::from_qpoly(ring, &convert_char(f.den(), ring)?);
    let inv = den.inv().ok_or(Error::BadDenominator(ring.order))?;
    Ok(num.mul(&inv))
}

fn convert_char(p: &QPoly, ring: &CycRing) -> Result<QPoly> {
    qpoly_to_char(p, ring.characteristic).ok_or(Error::BadDenominator(ring.order))
}

impl PartialEq for CycScalar {
    fn eq(&self, other: &Self) -> bool {
        self.ring.order == other.ring.order && self.residue == other.residue
    }
}

impl fmt::Display for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.residue, f)
    }
}

impl fmt::Debug for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod Φ_{}", self.residue, self.ring.order)
    }
}

impl VarName for CycScalar {
    const VAR: &'static str = "x";
}

impl Coeff for CycScalar {
    type Ctx = Arc<CycRing>;

    fn ctx(&self) -> Arc<CycRing> {
        self.ring.clone()
    }
    fn zero_in(ctx: &Arc<CycRing>) -> Self {
        CycScalar { ring: ctx.clone(), residue: Poly::zero(&()) }
    }
    fn one_in(ctx: &Arc<CycRing>) -> Self {
        CycScalar { ring: ctx.clone(), residue: ctx.powers[0].clone() }
    }
    fn from_i64_in(ctx: &Arc<CycRing>, n: i64) -> Self {
        Self::from_qpoly(ctx, &Poly::constant(Scalar::int(n)))
    }
    fn is_zero(&self) -> bool {
        self.residue.is_zero()
    }
    fn is_one(&self) -> bool {
        self.residue.is_one()
    }
    fn add(&self, rhs: &Self) -> Self {
        CycScalar { ring: self.ring.clone(), residue: &self.residue + &rhs.residue }
    }
    fn sub(&self, rhs: &Self) -> Self {
        CycScalar { ring: self.ring.clone(), residue: &self.residue - &rhs.residue }
    }
    fn mul(&self, rhs: &Self) -> Self {
        if self.residue.is_zero() || rhs.residue.is_zero() {
            return Self::zero_in(&self.ring);
        }
        if self.residue.is_constant() {
            return CycScalar { ring: self.ring.clone(), residue: rhs.residue.scale(&self.residue.coeffs()[0]) };
        }
        if rhs.residue.is_constant() {
            return CycScalar { ring: self.ring.clone(), residue: self.residue.scale(&rhs.residue.coeffs()[0]) };
        }
        let prod = &self.residue * &rhs.residue;
        CycScalar { ring: self.ring.clone(), residue: prod.rem(&self.ring.modulus).unwrap() }
    }
    fn neg(&self) -> Self {
        CycScalar { ring: self.ring.clone(), residue: -&self.residue }
    }
    fn inv(&self) -> Option<Self> {
        if self.residue.is_zero() {
            return None;
        }
        if self.residue.is_constant() {
            let c = self.residue.coeffs()[0].inv()?;
            return Some(CycScalar { ring: self.ring.clone(), residue: Poly::constant(c) });
        }
        let (g, s, _) = self.residue.ext_gcd(&self.ring.modulus)?;
        if !g.is_one() {
            return None;
        }
        Some(CycScalar { ring: self.ring.clone(), residue: s.rem(&self.ring.modulus).unwrap() })
    }
    fn is_field(ctx: &Arc<CycRing>) -> bool {
        ctx.characteristic.is_none()
    }
}

impl QAlgebra for CycScalar {
    fn q_pow(ctx: &Arc<CycRing>, m: i64) -> Self {
        let r = m.rem_euclid(ctx.order as i64) as usize;
        CycScalar { ring: ctx.clone(), residue: ctx.powers[r].clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_examples() {
        assert_eq!(cyclotomic_poly(1), qpoly(&[-1, 1]));
        assert_eq!(cyclotomic_poly(3), qpoly(&[1, 1, 1]));
        assert_eq!(cyclotomic_poly(6), qpoly(&[1, -1, 1]));
        assert_eq!(cyclotomic_poly(12), qpoly(&[1, 0, -1, 0, 1]));
    }

    #[test]
    fn field_arith_examples() {
        let qm1 = &q() - &fe_int(1);
        let qp1 = &q() + &fe_int(1);
        assert_eq!(field_arith(&qm1, &qp1, '*').unwrap(), FieldElem::from_poly(qpoly(&[-1, 0, 1])));
        let q2m1 = FieldElem::from_poly(qpoly(&[-1, 0, 1]));
        assert_eq!(field_arith(&q2m1, &qm1, '/').unwrap(), qp1);
        let inv_q = q().inv().unwrap();
        let two_over_q = FieldElem::new(qpoly(&[2]), qpoly(&[0, 1]));
        assert_eq!(field_arith(&inv_q, &inv_q, '+').unwrap(), two_over_q);
        assert_eq!(field_arith(&q(), &fe_int(0), '/'), Err(Error::DivisionByZero));
    }

    #[test]
    fn reduce_mod_examples() {
        let r3 = CycRing::new(3, None);
        let q3 = FieldElem::from_poly(qpoly(&[0, 0, 0, 1]));
        assert!(reduce_mod(&q3, &r3).unwrap().is_one());
        let inv = FieldElem::new(qpoly(&[1]), qpoly(&[-1, 1]));
        let got = reduce_mod(&inv, &r3).unwrap();
        let expect = Poly::new(vec![Scalar::ratio(-2, 3), Scalar::ratio(-1, 3)], ());
        assert_eq!(got.residue(), &expect);
        let bad = FieldElem::new(qpoly(&[1]), qpoly(&[1, 1, 1]));
        assert_eq!(reduce_mod(&bad, &r3), Err(Error::BadDenominator(3)));
    }

    #[test]
    fn valuation_examples() {
        let q3 = FieldElem::from_poly(qpoly(&[1, 1, 1]));
        assert_eq!(valuation_at(&q3, 3).unwrap(), 1);
        assert_eq!(valuation_at(&q(), 3).unwrap(), 0);
        let inv_sq = FieldElem::new(qpoly(&[1]), qpoly(&[1, 1, 1]).pow(2));
        assert_eq!(valuation_at(&inv_sq, 3).unwrap(), -2);
        assert_eq!(valuation_at(&fe_int(0), 3), Err(Error::ZeroArgument));
    }

    #[test]
    fn q_has_exact_order() {
        for l in 2..=30 {
            let ring = CycRing::new(l, None);
            let qr = CycScalar::q_pow(&ring, 1);
            assert_eq!(qr.multiplicative_order(l + 5), Some(l), "order {l}");
        }
    }

    #[test]
    fn modular_cyclotomic_ring() {
        // Φ_3 splits mod 7; q still has order 3 in the quotient ring.
        let ring = CycRing::new(3, Some(7));
        let qr = CycScalar::q_pow(&ring, 1);
        assert_eq!(qr.multiplicative_order(10), Some(3));
        assert!(!CycScalar::is_field(&ring));
        // q - 2 is a zero divisor mod (q^2 + q + 1) over F_7 since 2 is a cube root of 1.
        let z = CycScalar::from_qpoly(&ring, &qpoly(&[-2, 1]));
        assert!(z.inv().is_none());
    }
}
