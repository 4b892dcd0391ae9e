//! Base field scalars: rationals (with an `i64` fast path) or residues mod a prime.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ring::Coeff;

/// An element of the perfect base field `k`: `ℚ` or `𝔽_p`.
///
/// Rational values are kept canonical (reduced, positive denominator) and
/// demoted to the small representation whenever they fit. Integers and
/// rationals act as universal constants: mixing them with a residue mod `p`
/// coerces them into `𝔽_p`.
#[derive(Clone)]
pub enum Scalar {
    Small(i64, i64),
    Big(BigRational),
    Mod { value: u64, modulus: u64 },
}

impl Scalar {
    pub fn int(n: i64) -> Self {
        Scalar::Small(n, 1)
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        Self::from_i128(n as i128, d as i128)
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Self::from_big(BigRational::from_integer(n))
    }

    pub fn from_big(r: BigRational) -> Self {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) if n != i64::MIN && d != i64::MIN => Scalar::Small(n, d),
            _ => Scalar::Big(r),
        }
    }

    /// Residue of `n` in `𝔽_p`.
    pub fn modp(n: i64, p: u64) -> Self {
        Scalar::Mod {
            value: n.rem_euclid(p as i64) as u64,
            modulus: p,
        }
    }

    fn from_i128(n: i128, d: i128) -> Self {
        let (mut n, mut d) = (n, d);
        if d < 0 {
            n = -n;
            d = -d;
        }
        let g = gcd_i128(n, d);
        if g > 1 {
            n /= g;
            d /= g;
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(a), Ok(b)) if a != i64::MIN => Scalar::Small(a, b),
            _ => Scalar::Big(BigRational::new_raw(BigInt::from(n), BigInt::from(d))),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match self {
            Scalar::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Scalar::Big(r) => r.clone(),
            Scalar::Mod { .. } => panic!("residue mod p has no rational value"),
        }
    }

    /// `Some(p)` in characteristic `p`, `None` for rationals.
    pub fn characteristic(&self) -> Option<u64> {
        match self {
            Scalar::Mod { modulus, .. } => Some(*modulus),
            _ => None,
        }
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Scalar::Small(_, d) => *d == 1,
            Scalar::Big(r) => r.is_integer(),
            Scalar::Mod { .. } => true,
        }
    }

    /// Map a rational into `𝔽_p`; `None` when `p` divides the denominator.
    pub fn to_modp(&self, p: u64) -> Option<Scalar> {
        match self {
            Scalar::Mod { modulus, .. } => {
                assert_eq!(*modulus, p, "mixed characteristics");
                Some(self.clone())
            }
            Scalar::Small(n, d) => {
                let pi = p as i128;
                let nm = (*n as i128).rem_euclid(pi) as u64;
                let dm = (*d as i128).rem_euclid(pi) as u64;
                let dinv = mod_inv(dm, p)?;
                Some(Scalar::Mod { value: mul_mod(nm, dinv, p), modulus: p })
            }
            _ => {
                let r = self.to_big();
                let pb = BigInt::from(p);
                let n = r.numer().mod_floor(&pb).to_u64().unwrap();
                let d = r.denom().mod_floor(&pb).to_u64().unwrap();
                if d == 0 {
                    return None;
                }
                let dinv = mod_inv(d, p)?;
                Some(Scalar::Mod {
                    value: mul_mod(n, dinv, p),
                    modulus: p,
                })
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Small(n, d) => *n as f64 / *d as f64,
            Scalar::Big(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Mod { value, .. } => *value as f64,
        }
    }

    /// Numerator and denominator as integers (residues are returned as `value/1`).
    pub fn parts(&self) -> (BigInt, BigInt) {
        match self {
            Scalar::Small(n, d) => (BigInt::from(*n), BigInt::from(*d)),
            Scalar::Big(r) => (r.numer().clone(), r.denom().clone()),
            Scalar::Mod { value, .. } => (BigInt::from(*value), BigInt::one()),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Scalar::Small(n, _) => *n < 0,
            Scalar::Big(r) => r.is_negative(),
            Scalar::Mod { .. } => false,
        }
    }

    fn coerce_pair(a: &Scalar, b: &Scalar) -> Option<(Scalar, Scalar)> {
        match (a, b) {
            (Scalar::Mod { modulus: p, .. }, Scalar::Mod { modulus: r, .. }) => {
                assert_eq!(p, r, "mixed characteristics");
                None
            }
            (Scalar::Mod { modulus, .. }, other) => Some((
                a.clone(),
                other
                    .to_modp(*modulus)
                    .expect("rational constant not defined mod p"),
            )),
            (other, Scalar::Mod { modulus, .. }) => Some((
                other
                    .to_modp(*modulus)
                    .expect("rational constant not defined mod p"),
                b.clone(),
            )),
            _ => None,
        }
    }

    fn binop(
        &self,
        rhs: &Scalar,
        small: fn(i128, i128, i128, i128) -> Option<(i128, i128)>,
        big: fn(&BigRational, &BigRational) -> BigRational,
        modp: fn(u64, u64, u64) -> u64,
    ) -> Scalar {
        if let Some((a, b)) = Self::coerce_pair(self, rhs) {
            return a.binop(&b, small, big, modp);
        }
        match (self, rhs) {
            (Scalar::Small(a, b), Scalar::Small(c, d)) => {
                if let Some((n, m)) = small(*a as i128, *b as i128, *c as i128, *d as i128) {
                    return Scalar::from_i128(n, m);
                }
                Scalar::from_big(big(&self.to_big(), &rhs.to_big()))
            }
            (
                Scalar::Mod { value: a, modulus },
                Scalar::Mod { value: b, .. },
            ) => Scalar::Mod {
                value: modp(*a, *b, *modulus),
                modulus: *modulus,
            },
            _ => Scalar::from_big(big(&self.to_big(), &rhs.to_big())),
        }
    }

    pub fn inv(&self) -> Option<Scalar> {
        match self {
            Scalar::Small(0, _) => None,
            Scalar::Small(n, d) => Some(Scalar::from_i128(*d as i128, *n as i128)),
            Scalar::Big(r) => {
                if r.is_zero() {
                    None
                } else {
                    Some(Scalar::from_big(r.recip()))
                }
            }
            Scalar::Mod { value, modulus } => mod_inv(*value, *modulus).map(|v| Scalar::Mod {
                value: v,
                modulus: *modulus,
            }),
        }
    }

    pub fn pow(&self, e: u32) -> Scalar {
        let mut acc = Scalar::int(1);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i128
}

pub(crate) fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn mod_inv(a: u64, p: u64) -> Option<u64> {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (p as i128, (a % p) as i128);
    while new_r != 0 {
        let quo = r / new_r;
        (t, new_t) = (new_t, t - quo * new_t);
        (r, new_r) = (new_r, r - quo * new_r);
    }
    if r != 1 {
        return None;
    }
    Some(t.rem_euclid(p as i128) as u64)
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        if let Some((a, b)) = Scalar::coerce_pair(self, other) {
            return a == b;
        }
        match (self, other) {
            (Scalar::Small(a, b), Scalar::Small(c, d)) => a == c && b == d,
            (Scalar::Mod { value: a, .. }, Scalar::Mod { value: b, .. }) => a == b,
            (Scalar::Big(a), Scalar::Big(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Scalar {}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Mod { .. }, _) | (_, Scalar::Mod { .. }) => None,
            (Scalar::Small(a, b), Scalar::Small(c, d)) => {
                Some((*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128)))
            }
            _ => Some(self.to_big().cmp(&other.to_big())),
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Small(n, 1) => write!(f, "{n}"),
            Scalar::Small(n, d) => write!(f, "{n}/{d}"),
            Scalar::Big(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Mod { value, .. } => write!(f, "{value}"),
        }
    }
}

impl Coeff for Scalar {
    type Ctx = ();

    fn fraction_poly_gcd(
        a: &super::poly::Poly<super::cyclo::FieldElem>,
        b: &super::poly::Poly<super::cyclo::FieldElem>,
    ) -> Option<super::poly::Poly<super::cyclo::FieldElem>> {
        let modular = |p: &super::poly::Poly<super::cyclo::FieldElem>| {
            p.coeffs().iter().any(|c| c.num().coeffs().iter().any(|s| s.characteristic().is_some()))
        };
        if modular(a) || modular(b) {
            return a.euclid_gcd(b);
        }
        Some(super::cyclo::bivariate_gcd(a, b))
    }

    fn poly_gcd(a: &super::poly::Poly<Self>, b: &super::poly::Poly<Self>) -> Option<super::poly::Poly<Self>> {
        if a.coeffs().iter().chain(b.coeffs()).any(|c| c.characteristic().is_some()) {
            return a.euclid_gcd(b);
        }
        if super::cyclo::coprime_mod_prime(a, b) {
            return Some(super::poly::Poly::one(&()));
        }
        super::mgcd::univariate_gcd(a, b).or_else(|| a.euclid_gcd(b))
    }

    fn ctx(&self) {}

    fn zero_in(_: &()) -> Self {
        Scalar::Small(0, 1)
    }

    fn one_in(_: &()) -> Self {
        Scalar::Small(1, 1)
    }

    fn from_i64_in(_: &(), n: i64) -> Self {
        Scalar::int(n)
    }

    fn is_zero(&self) -> bool {
        match self {
            Scalar::Small(n, _) => *n == 0,
            Scalar::Big(r) => r.is_zero(),
            Scalar::Mod { value, .. } => *value == 0,
        }
    }

    fn is_one(&self) -> bool {
        match self {
            Scalar::Small(n, d) => *n == 1 && *d == 1,
            Scalar::Big(r) => r.is_one(),
            Scalar::Mod { value, .. } => *value == 1,
        }
    }

    fn add(&self, rhs: &Self) -> Self {
        self.binop(
            rhs,
            |a, b, c, d| {
                if b == 1 && d == 1 {
                    return Some((a + c, 1));
                }
                Some((a * d + c * b, b * d))
            },
            |x, y| x + y,
            |a, b, p| ((a as u128 + b as u128) % p as u128) as u64,
        )
    }

    fn sub(&self, rhs: &Self) -> Self {
        self.binop(
            rhs,
            |a, b, c, d| {
                if b == 1 && d == 1 {
                    return Some((a - c, 1));
                }
                Some((a * d - c * b, b * d))
            },
            |x, y| x - y,
            |a, b, p| ((a as u128 + p as u128 - b as u128) % p as u128) as u64,
        )
    }

    fn mul(&self, rhs: &Self) -> Self {
        self.binop(
            rhs,
            |a, b, c, d| Some((a * c, b * d)),
            |x, y| x * y,
            mul_mod,
        )
    }

    fn neg(&self) -> Self {
        match self {
            Scalar::Small(n, d) => Scalar::from_i128(-(*n as i128), *d as i128),
            Scalar::Big(r) => Scalar::from_big(-r),
            Scalar::Mod { value, modulus } => Scalar::Mod {
                value: (modulus - value) % modulus,
                modulus: *modulus,
            },
        }
    }

    fn inv(&self) -> Option<Self> {
        Scalar::inv(self)
    }
}
