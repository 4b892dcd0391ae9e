use std::fmt;

use super::poly::{Poly, VarName};
use super::ratfunc::RatFunc;

/// Commutative ring element carried by polynomials and matrices.
///
/// `Ctx` is whatever a zero element needs to know about its ring (the
/// cyclotomic modulus for residues, nothing for rationals).
pub trait Coeff: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync {
    type Ctx: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn ctx(&self) -> Self::Ctx;
    fn zero_in(ctx: &Self::Ctx) -> Self;
    fn one_in(ctx: &Self::Ctx) -> Self;
    fn from_i64_in(ctx: &Self::Ctx, n: i64) -> Self;

    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool {
        *self == Self::one_in(&self.ctx())
    }

    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;

    /// Multiplicative inverse, `None` for zero and for non-units.
    fn inv(&self) -> Option<Self>;

    /// `self / rhs` when the quotient exists in the ring.
    fn exact_div(&self, rhs: &Self) -> Option<Self> {
        rhs.inv().map(|i| self.mul(&i))
    }

    /// Whether every nonzero element is invertible.
    fn is_field(_ctx: &Self::Ctx) -> bool {
        true
    }

    /// Monic gcd in `Self[x]`.
    fn poly_gcd(a: &Poly<Self>, b: &Poly<Self>) -> Option<Poly<Self>> {
        a.euclid_gcd(b)
    }

    /// Monic gcd in `Frac(Self[q])[x]`; the default is plain Euclid.
    fn fraction_poly_gcd(a: &Poly<RatFunc<Self>>, b: &Poly<RatFunc<Self>>) -> Option<Poly<RatFunc<Self>>>
    where
        Self: VarName,
    {
        a.euclid_gcd(b)
    }

    fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::one_in(&self.ctx());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

/// A coefficient ring that receives `k[q]`, so `q^m` has an image.
///
/// This is what `σ_q` needs to act on polynomials in `x`.
pub trait QAlgebra: Coeff {
    /// Image of `q^m`. Rings where `q` is not a unit accept only `m ≥ 0`.
    fn q_pow(ctx: &Self::Ctx, m: i64) -> Self;
}
