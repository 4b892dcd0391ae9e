//! Dense univariate polynomials over a [`Coeff`] ring.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::ring::{Coeff, QAlgebra};

/// Dense polynomial, ascending degree, no trailing zeros.
#[derive(Clone, PartialEq)]
pub struct Poly<C: Coeff> {
    coeffs: Vec<C>,
    ctx: C::Ctx,
}

impl<C: Coeff> Poly<C> {
    pub fn new(mut coeffs: Vec<C>, ctx: C::Ctx) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs, ctx }
    }

    pub fn from_coeffs(coeffs: Vec<C>) -> Self {
        let ctx = coeffs.first().expect("empty coefficient list").ctx();
        Self::new(coeffs, ctx)
    }

    pub fn zero(ctx: &C::Ctx) -> Self {
        Poly { coeffs: Vec::new(), ctx: ctx.clone() }
    }

    pub fn one(ctx: &C::Ctx) -> Self {
        Self::constant(C::one_in(ctx))
    }

    pub fn constant(c: C) -> Self {
        let ctx = c.ctx();
        Self::new(vec![c], ctx)
    }

    pub fn monomial(c: C, k: usize) -> Self {
        let ctx = c.ctx();
        let mut coeffs = vec![C::zero_in(&ctx); k];
        coeffs.push(c);
        Self::new(coeffs, ctx)
    }

    /// The variable itself.
    pub fn var(ctx: &C::Ctx) -> Self {
        Self::monomial(C::one_in(ctx), 1)
    }

    pub fn ctx(&self) -> &C::Ctx {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    pub fn coeff(&self, i: usize) -> C {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(|| C::zero_in(&self.ctx))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&C> {
        self.coeffs.last()
    }

    /// Order of vanishing at the origin; `None` for zero.
    pub fn low_order(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ctx);
        }
        Self::new(self.coeffs.iter().map(|a| a.mul(c)).collect(), self.ctx.clone())
    }

    /// Multiply by `x^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![C::zero_in(&self.ctx); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Poly { coeffs, ctx: self.ctx.clone() }
    }

    /// Drop the first `k` coefficients (exact division by `x^k` when they vanish).
    pub fn unshift(&self, k: usize) -> Self {
        Self::new(self.coeffs.iter().skip(k).cloned().collect(), self.ctx.clone())
    }

    /// Keep terms of degree `< n`.
    pub fn truncate(&self, n: usize) -> Self {
        Self::new(self.coeffs.iter().take(n).cloned().collect(), self.ctx.clone())
    }

    /// `x^d p(1/x)` with `d` the given degree bound.
    pub fn reverse(&self, d: usize) -> Self {
        let mut coeffs: Vec<C> = (0..=d).map(|i| self.coeff(i)).collect();
        coeffs.reverse();
        Self::new(coeffs, self.ctx.clone())
    }

    /// Substitute `x ↦ c·x`.
    pub fn scale_var(&self, c: &C) -> Self {
        let mut pw = C::one_in(&self.ctx);
        let mut out = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            out.push(a.mul(&pw));
            pw = pw.mul(c);
        }
        Self::new(out, self.ctx.clone())
    }

    pub fn eval(&self, at: &C) -> C {
        let mut acc = C::zero_in(&self.ctx);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(at).add(c);
        }
        acc
    }

    pub fn map<D: Coeff>(&self, ctx: &D::Ctx, f: impl Fn(&C) -> D) -> Poly<D> {
        Poly::new(self.coeffs.iter().map(f).collect(), ctx.clone())
    }

    pub fn try_map<D: Coeff, E>(
        &self,
        ctx: &D::Ctx,
        f: impl Fn(&C) -> Result<D, E>,
    ) -> Result<Poly<D>, E> {
        let coeffs = self.coeffs.iter().map(f).collect::<Result<Vec<_>, E>>()?;
        Ok(Poly::new(coeffs, ctx.clone()))
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut acc = Self::one(&self.ctx);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Make the leading coefficient one; `None` if it is not a unit.
    pub fn monic(&self) -> Option<Self> {
        match self.lead() {
            None => Some(self.clone()),
            Some(l) if l.is_one() => Some(self.clone()),
            Some(l) => l.inv().map(|i| self.scale(&i)),
        }
    }

    /// Euclidean division; requires an invertible leading coefficient in `divisor`.
    pub fn div_rem(&self, divisor: &Self) -> Option<(Self, Self)> {
        let dl_inv = divisor.lead()?.inv()?;
        self.div_rem_with(divisor, |c| Some(c.mul(&dl_inv)))
    }

    /// Division where every partial quotient must be exact in the coefficient ring.
    pub fn exact_div(&self, divisor: &Self) -> Option<Self> {
        let dl = divisor.lead()?.clone();
        let (q, r) = self.div_rem_with(divisor, |c| c.exact_div(&dl))?;
        r.is_zero().then_some(q)
    }

    fn div_rem_with(&self, divisor: &Self, lead_quot: impl Fn(&C) -> Option<C>) -> Option<(Self, Self)> {
        let dd = divisor.degree()?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Some((Self::zero(&self.ctx), self.clone()));
        }
        let mut quot = vec![C::zero_in(&self.ctx); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd];
            if c.is_zero() {
                continue;
            }
            let t = lead_quot(c)?;
            for (j, d) in divisor.coeffs.iter().enumerate() {
                if !d.is_zero() {
                    rem[i + j] = rem[i + j].sub(&t.mul(d));
                }
            }
            quot[i] = t;
        }
        rem.truncate(dd);
        Some((Self::new(quot, self.ctx.clone()), Self::new(rem, self.ctx.clone())))
    }

    /// `lc(b)^k · self mod b` for the least `k` that keeps the division in the ring.
    pub fn pseudo_rem(&self, b: &Self) -> Self {
        let db = b.degree().expect("nonzero divisor");
        let lb = b.lead().unwrap().clone();
        let mut r = self.clone();
        while let Some(dr) = r.degree() {
            if dr < db {
                break;
            }
            let lr = r.lead().unwrap().clone();
            r = &r.scale(&lb) - &b.scale(&lr).shift(dr - db);
        }
        r
    }

    pub fn rem(&self, divisor: &Self) -> Option<Self> {
        self.div_rem(divisor).map(|(_, r)| r)
    }

    /// Monic gcd; `None` if a non-unit leading coefficient is met.
    pub fn gcd(&self, other: &Self) -> Option<Self> {
        C::poly_gcd(self, other)
    }

    /// Monic gcd by the Euclidean algorithm.
    pub fn euclid_gcd(&self, other: &Self) -> Option<Self> {
        let (mut a, mut b) = (self.clone(), other.clone());
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            if b.is_constant() {
                return b.coeffs[0].inv().map(|_| Self::one(&self.ctx));
            }
            let b_monic = b.monic()?;
            let r = a.rem(&b_monic)?;
            a = b_monic;
            b = r;
        }
        a.monic()
    }

    /// `(g, s, t)` with `s·self + t·other = g`, `g` monic.
    pub fn ext_gcd(&self, other: &Self) -> Option<(Self, Self, Self)> {
        let ctx = &self.ctx;
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (Self::one(ctx), Self::zero(ctx));
        let (mut t0, mut t1) = (Self::zero(ctx), Self::one(ctx));
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1)?;
            let s = &s0 - &(&q * &s1);
            let t = &t0 - &(&q * &t1);
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s);
            t0 = std::mem::replace(&mut t1, t);
        }
        match r0.lead() {
            None => Some((r0, s0, t0)),
            Some(l) => {
                let li = l.inv()?;
                Some((r0.scale(&li), s0.scale(&li), t0.scale(&li)))
            }
        }
    }

    fn add_impl(&self, rhs: &Self, neg: bool) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let c = match (self.coeffs.get(i), rhs.coeffs.get(i)) {
                (Some(a), Some(b)) => {
                    if neg {
                        a.sub(b)
                    } else {
                        a.add(b)
                    }
                }
                (Some(a), None) => a.clone(),
                (None, Some(b)) => {
                    if neg {
                        b.neg()
                    } else {
                        b.clone()
                    }
                }
                (None, None) => unreachable!(),
            };
            out.push(c);
        }
        Self::new(out, self.ctx.clone())
    }

    fn mul_impl(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero(&self.ctx);
        }
        let mut out = vec![C::zero_in(&self.ctx); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Self::new(out, self.ctx.clone())
    }
}

impl<C: QAlgebra> Poly<C> {
    /// `σ_q^m`: substitute `x ↦ q^m x`.
    pub fn twist(&self, m: i64) -> Self {
        if m == 0 {
            return self.clone();
        }
        let out = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if c.is_zero() {
                    c.clone()
                } else {
                    c.mul(&C::q_pow(&self.ctx, m * i as i64))
                }
            })
            .collect();
        Self::new(out, self.ctx.clone())
    }
}

impl<C: Coeff + VarName> Coeff for Poly<C> {
    type Ctx = C::Ctx;

    fn ctx(&self) -> C::Ctx {
        self.ctx.clone()
    }
    fn zero_in(ctx: &C::Ctx) -> Self {
        Self::zero(ctx)
    }
    fn one_in(ctx: &C::Ctx) -> Self {
        Self::one(ctx)
    }
    fn from_i64_in(ctx: &C::Ctx, n: i64) -> Self {
        Self::constant(C::from_i64_in(ctx, n))
    }
    fn is_zero(&self) -> bool {
        Poly::is_zero(self)
    }
    fn is_one(&self) -> bool {
        Poly::is_one(self)
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
        self.neg_impl()
    }
    fn inv(&self) -> Option<Self> {
        if self.coeffs.len() == 1 {
            self.coeffs[0].inv().map(Self::constant)
        } else {
            None
        }
    }
    fn exact_div(&self, rhs: &Self) -> Option<Self> {
        Poly::exact_div(self, rhs)
    }
    fn is_field(_ctx: &C::Ctx) -> bool {
        false
    }
}

impl<C: QAlgebra + VarName> QAlgebra for Poly<C> {
    fn q_pow(ctx: &C::Ctx, m: i64) -> Self {
        Self::constant(C::q_pow(ctx, m))
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $imp:expr) => {
        impl<'a, C: Coeff> $tr<&'a Poly<C>> for &'a Poly<C> {
            type Output = Poly<C>;
            fn $method(self, rhs: &'a Poly<C>) -> Poly<C> {
                $imp(self, rhs)
            }
        }
        impl<C: Coeff> $tr<Poly<C>> for Poly<C> {
            type Output = Poly<C>;
            fn $method(self, rhs: Poly<C>) -> Poly<C> {
                $imp(&self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a: &Poly<C>, b: &Poly<C>| a.add_impl(b, false));
forward_binop!(Sub, sub, |a: &Poly<C>, b: &Poly<C>| a.add_impl(b, true));
forward_binop!(Mul, mul, |a: &Poly<C>, b: &Poly<C>| a.mul_impl(b));

impl<C: Coeff> Poly<C> {
    fn neg_impl(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.neg()).collect(), self.ctx.clone())
    }
}

impl<C: Coeff> Neg for &Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        self.neg_impl()
    }
}

impl<C: Coeff> Neg for Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        self.neg_impl()
    }
}

/// Variable name used when printing polynomials over `C`.
pub trait VarName {
    const VAR: &'static str;
}

impl<C: Coeff> Poly<C> {
    /// Render as a sum of terms in `var`, highest degree first, in the input
    /// grammar of the system files.
    pub fn render(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let s = c.to_string();
            let (neg, body) = match s.strip_prefix('-') {
                Some(rest) if !rest.contains(" + ") && !rest.contains(" - ") => (true, rest.to_string()),
                _ => (false, s.clone()),
            };
            let body = if needs_parens(&body) { format!("({body})") } else { body };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            if i == 0 {
                out.push_str(&body);
            } else if body == "1" {
                out.push_str(&mono);
            } else {
                out.push_str(&body);
                out.push('*');
                out.push_str(&mono);
            }
        }
        out
    }
}

fn needs_parens(s: &str) -> bool {
    s.chars().skip(1).any(|ch| matches!(ch, '+' | '-' | '/' | ' ' | '*'))
        || s.starts_with('-')
}

impl<C: Coeff + VarName> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(C::VAR))
    }
}

impl<C: Coeff + VarName> fmt::Debug for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::scalar::Scalar;

    fn p(c: &[i64]) -> Poly<Scalar> {
        Poly::new(c.iter().map(|&v| Scalar::int(v)).collect(), ())
    }

    #[test]
    fn division_and_gcd() {
        let a = p(&[-1, 0, 1]); // q^2 - 1
        let b = p(&[-1, 1]); // q - 1
        let (quo, r) = a.div_rem(&b).unwrap();
        assert_eq!(quo, p(&[1, 1]));
        assert!(r.is_zero());
        assert_eq!(a.gcd(&p(&[1, 2, 1])).unwrap(), p(&[1, 1]));
        assert_eq!(p(&[1, 1]).gcd(&p(&[2])).unwrap(), p(&[1]));
    }

    #[test]
    fn ext_gcd_inverts_mod_cyclotomic() {
        let phi3 = p(&[1, 1, 1]);
        let (g, s, _) = p(&[-1, 1]).ext_gcd(&phi3).unwrap();
        assert!(g.is_one());
        // (q - 1)^{-1} = (-q - 2)/3 mod q^2 + q + 1
        let expect = Poly::new(vec![Scalar::ratio(-2, 3), Scalar::ratio(-1, 3)], ());
        assert_eq!(s.rem(&phi3).unwrap(), expect);
    }

    #[test]
    fn render_round_trip_shapes() {
        assert_eq!(p(&[1, -1, 0, 3]).to_string(), "3*q^3 - q + 1");
        assert_eq!(p(&[0, -1]).to_string(), "-q");
        let half = Poly::new(vec![Scalar::ratio(1, 2), Scalar::ratio(-3, 2)], ());
        assert_eq!(half.to_string(), "-(3/2)*q + (1/2)");
    }
}
