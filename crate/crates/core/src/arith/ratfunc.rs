//! Rational functions `num/den` over a coefficient ring.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::poly::{Poly, VarName};
use super::ring::{Coeff, QAlgebra};

/// Reduced fraction of polynomials with a monic denominator.
///
/// Over coefficient rings that are not fields (cyclotomic quotients in
/// positive characteristic) reduction is best effort; equality is always
/// decided by cross multiplication there.
#[derive(Clone)]
pub struct RatFunc<C: Coeff> {
    num: Poly<C>,
    den: Poly<C>,
}

impl<C: Coeff> RatFunc<C> {
    pub fn new(num: Poly<C>, den: Poly<C>) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let ctx = num.ctx().clone();
        if num.is_zero() {
            return RatFunc { num, den: Poly::one(&ctx) };
        }
        let (mut num, mut den) = (num, den);
        if !den.is_constant() && !num.is_one() {
            if let Some(g) = num.gcd(&den) {
                if !g.is_one() {
                    num = num.div_rem(&g).expect("monic gcd").0;
                    den = den.div_rem(&g).expect("monic gcd").0;
                }
            }
        }
        if let Some(li) = den.lead().and_then(|l| if l.is_one() { None } else { l.inv() }) {
            num = num.scale(&li);
            den = den.scale(&li);
        }
        RatFunc { num, den }
    }

    /// Build without attempting any reduction.
    pub fn new_raw(num: Poly<C>, den: Poly<C>) -> Self {
        RatFunc { num, den }
    }

    pub fn from_poly(p: Poly<C>) -> Self {
        let ctx = p.ctx().clone();
        RatFunc { num: p, den: Poly::one(&ctx) }
    }

    pub fn constant(c: C) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn var(ctx: &C::Ctx) -> Self {
        Self::from_poly(Poly::var(ctx))
    }

    pub fn num(&self) -> &Poly<C> {
        &self.num
    }

    pub fn den(&self) -> &Poly<C> {
        &self.den
    }

    pub fn ctx(&self) -> &C::Ctx {
        self.num.ctx()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    /// Value at the origin when defined (denominator nonvanishing there).
    pub fn value_at_zero(&self) -> Option<C> {
        let d0 = self.den.coeff(0);
        if d0.is_zero() {
            return None;
        }
        self.num.coeff(0).exact_div(&d0)
    }

    /// Order at `x = 0` (`None` for zero).
    pub fn order_at_zero(&self) -> Option<i64> {
        let n = self.num.low_order()? as i64;
        let d = self.den.low_order().expect("nonzero denominator") as i64;
        Some(n - d)
    }

    /// Order at `x = ∞`, i.e. `deg den − deg num` (`None` for zero).
    pub fn order_at_infinity(&self) -> Option<i64> {
        let n = self.num.degree()? as i64;
        let d = self.den.degree().expect("nonzero denominator") as i64;
        Some(d - n)
    }

    /// Substitute `x ↦ 1/x`.
    pub fn invert_var(&self) -> Self {
        let dn = self.num.degree().unwrap_or(0);
        let dd = self.den.degree().unwrap_or(0);
        let d = dn.max(dd);
        Self::new(self.num.reverse(d), self.den.reverse(d))
    }

    /// Multiply by `x^k` for any integer `k`.
    pub fn mul_var_pow(&self, k: i64) -> Self {
        if k >= 0 {
            Self::new(self.num.shift(k as usize), self.den.clone())
        } else {
            Self::new(self.num.clone(), self.den.shift((-k) as usize))
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::new(self.num.scale(c), self.den.clone())
    }

    pub fn map<D: Coeff>(&self, ctx: &D::Ctx, f: impl Fn(&C) -> D) -> RatFunc<D> {
        RatFunc::new(self.num.map(ctx, &f), self.den.map(ctx, &f))
    }

    /// Series coefficients at `x = 0`, up to and including `x^n`.
    pub fn series(&self, n: usize) -> Option<Vec<C>> {
        let ctx = self.ctx().clone();
        let d0 = self.den.coeff(0);
        let d0_inv = d0.inv()?;
        let mut out: Vec<C> = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut acc = self.num.coeff(k);
            for j in 1..=k.min(self.den.degree().unwrap_or(0)) {
                acc = acc.sub(&self.den.coeff(j).mul(&out[k - j]));
            }
            out.push(acc.mul(&d0_inv));
        }
        let _ = ctx;
        Some(out)
    }

    fn add_impl(&self, rhs: &Self, negate: bool) -> Self {
        let rnum = if negate { -&rhs.num } else { rhs.num.clone() };
        if self.den == rhs.den {
            return Self::new(&self.num + &rnum, self.den.clone());
        }
        if rhs.den.is_one() {
            return Self::new(&self.num + &(&rnum * &self.den), self.den.clone());
        }
        if self.den.is_one() {
            return Self::new(&(&self.num * &rhs.den) + &rnum, rhs.den.clone());
        }
        Self::new(
            &(&self.num * &rhs.den) + &(&rnum * &self.den),
            &self.den * &rhs.den,
        )
    }

    fn mul_impl(&self, rhs: &Self) -> Self {
        if self.num.is_zero() || rhs.num.is_zero() {
            return Self::from_poly(Poly::zero(self.ctx()));
        }
        if self.den.is_one() && rhs.den.is_one() {
            return Self::from_poly(&self.num * &rhs.num);
        }
        // cross-cancel before multiplying
        let (a, d) = cancel(&self.num, &rhs.den);
        let (c, b) = cancel(&rhs.num, &self.den);
        Self::new(&a * &c, &b * &d)
    }

    pub fn inv(&self) -> Option<Self> {
        if self.num.is_zero() {
            return None;
        }
        Some(Self::new(self.den.clone(), self.num.clone()))
    }

    pub fn pow_i(&self, e: i64) -> Option<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        Some(Self::new(base.num.pow(e.unsigned_abs() as u32), base.den.pow(e.unsigned_abs() as u32)))
    }
}

fn cancel<C: Coeff>(a: &Poly<C>, b: &Poly<C>) -> (Poly<C>, Poly<C>) {
    if a.is_constant() || b.is_constant() {
        return (a.clone(), b.clone());
    }
    match a.gcd(b) {
        Some(g) if !g.is_one() => (a.div_rem(&g).unwrap().0, b.div_rem(&g).unwrap().0),
        _ => (a.clone(), b.clone()),
    }
}

impl<C: QAlgebra> RatFunc<C> {
    /// `σ_q^m`: `f(x) ↦ f(q^m x)`.
    pub fn twist(&self, m: i64) -> Self {
        Self::new(self.num.twist(m), self.den.twist(m))
    }
}

impl<C: Coeff> PartialEq for RatFunc<C> {
    fn eq(&self, other: &Self) -> bool {
        if C::is_field(self.ctx()) {
            self.num == other.num && self.den == other.den
        } else {
            &self.num * &other.den == &other.num * &self.den
        }
    }
}

impl<C: Coeff + VarName> Coeff for RatFunc<C> {
    type Ctx = C::Ctx;

    fn ctx(&self) -> C::Ctx {
        self.num.ctx().clone()
    }
    fn zero_in(ctx: &C::Ctx) -> Self {
        Self::from_poly(Poly::zero(ctx))
    }
    fn one_in(ctx: &C::Ctx) -> Self {
        Self::from_poly(Poly::one(ctx))
    }
    fn from_i64_in(ctx: &C::Ctx, n: i64) -> Self {
        Self::constant(C::from_i64_in(ctx, n))
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    fn is_one(&self) -> bool {
        if C::is_field(self.ctx()) {
            self.num.is_one() && self.den.is_one()
        } else {
            self.num == self.den
        }
    }
    fn add(&self, rhs: &Self) -> Self {
        self.add_impl(rhs, false)
    }
    fn sub(&self, rhs: &Self) -> Self {
        self.add_impl(rhs, true)
    }
    fn mul(&self, rhs: &Self) -> Self {
        self.mul_impl(rhs)
    }
    fn neg(&self) -> Self {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }
    fn inv(&self) -> Option<Self> {
        RatFunc::inv(self)
    }
    fn is_field(ctx: &C::Ctx) -> bool {
        C::is_field(ctx)
    }
    fn poly_gcd(a: &Poly<Self>, b: &Poly<Self>) -> Option<Poly<Self>> {
        C::fraction_poly_gcd(a, b)
    }
}

impl<C: QAlgebra + VarName> QAlgebra for RatFunc<C> {
    fn q_pow(ctx: &C::Ctx, m: i64) -> Self {
        Self::constant(C::q_pow(ctx, m))
    }
}

impl<C: Coeff + VarName> fmt::Display for RatFunc<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.num.render(C::VAR);
        if self.den.is_one() {
            return f.write_str(&n);
        }
        let d = self.den.render(C::VAR);
        let wrap = |s: String| {
            if s.chars().all(|c| c.is_alphanumeric() || c == '^') {
                s
            } else {
                format!("({s})")
            }
        };
        write!(f, "{}/{}", wrap(n), wrap(d))
    }
}

impl<C: Coeff + VarName> fmt::Debug for RatFunc<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $imp:expr) => {
        impl<'a, C: Coeff + VarName> $tr<&'a RatFunc<C>> for &'a RatFunc<C> {
            type Output = RatFunc<C>;
            fn $method(self, rhs: &'a RatFunc<C>) -> RatFunc<C> {
                $imp(self, rhs)
            }
        }
        impl<C: Coeff + VarName> $tr<RatFunc<C>> for RatFunc<C> {
            type Output = RatFunc<C>;
            fn $method(self, rhs: RatFunc<C>) -> RatFunc<C> {
                $imp(&self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a: &RatFunc<C>, b: &RatFunc<C>| a.add_impl(b, false));
forward_binop!(Sub, sub, |a: &RatFunc<C>, b: &RatFunc<C>| a.add_impl(b, true));
forward_binop!(Mul, mul, |a: &RatFunc<C>, b: &RatFunc<C>| a.mul_impl(b));
forward_binop!(Div, div, |a: &RatFunc<C>, b: &RatFunc<C>| a
    .mul_impl(&b.inv().expect("division by zero")));

impl<C: Coeff + VarName> Neg for &RatFunc<C> {
    type Output = RatFunc<C>;
    fn neg(self) -> RatFunc<C> {
        Coeff::neg(self)
    }
}

impl<C: Coeff + VarName> Neg for RatFunc<C> {
    type Output = RatFunc<C>;
    fn neg(self) -> RatFunc<C> {
        Coeff::neg(&self)
    }
}
