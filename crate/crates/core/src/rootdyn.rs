//! Rational dynamics on roots of unity: does `f ∈ k(q)` map `μ_ℓ` into itself,
//! and is `f` a power of `q`.

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::arith::cyclo::reduce_mod;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};

use crate::arith::{Coeff, CycRing, FieldElem, Poly, QPoly, Scalar};
use crate::curvature::is_prime;
use crate::error::{Error, Result};

/// `d` with `f = q^d`, read off the reduced fraction.
pub fn is_q_power(f: &FieldElem) -> Result<Option<i64>> {
    if f.is_zero() {
        return Err(Error::ZeroArgument);
    }
    let monomial = |p: &crate::arith::QPoly| {
        let d = p.degree()?;
        (p.low_order() == Some(d)).then(|| (d as i64, p.coeffs()[d].clone()))
    };
    let (Some((dn, cn)), Some((dd, cd))) = (monomial(f.num()), monomial(f.den())) else {
        return Ok(None);
    };
    Ok((cn == cd).then_some(dn - dd))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "witness", rename_all = "snake_case")]
pub enum DynOutcome {
    Stable,
    /// `f(ζ_ℓ)^ℓ`, which differs from 1.
    Unstable(String),
    BadDenominator,
}

/// Whether `f(ζ_ℓ)` is an `ℓ`-th root of unity, tested in `k[q]/(Φ_ℓ)`.
pub fn mu_stability(f: &FieldElem, ell: u64) -> Result<DynOutcome> {
    if ell < 2 {
        return Err(Error::Invalid(format!("order must be at least 2, got {ell}")));
    }
    let characteristic = f.num().coeffs().first().and_then(|c| c.characteristic());
    let ring = CycRing::new(ell, characteristic);
    let Ok(r) = reduce_mod(f, &ring) else {
        return Ok(DynOutcome::BadDenominator);
    };
    if r.is_zero() {
        return Ok(DynOutcome::Unstable("0".into()));
    }
    let power = match characteristic {
        Some(_) => r.pow(ell).residue().clone(),
        None => integral_power(r.residue(), ell, ring.modulus()),
    };
    Ok(if power.is_one() { DynOutcome::Stable } else { DynOutcome::Unstable(power.render("q")) })
}

/// `r^ℓ mod Φ` over ℚ. The denominators are cleared once, the power is taken
/// in `ℤ[q]/(q^ℓ − 1)` and only the result is reduced by `Φ`.
fn integral_power(r: &QPoly, ell: u64, phi: &QPoly) -> QPoly {
    let parts: Vec<(BigInt, BigInt)> = r.coeffs().iter().map(|c| c.parts()).collect();
    let den = parts.iter().fold(BigInt::one(), |acc, (_, d)| acc.lcm(d));
    let n = ell as usize;
    let mut base = vec![BigInt::zero(); n];
    for (i, (a, d)) in parts.iter().enumerate() {
        base[i % n] += a * (&den / d);
    }
    let cyclic = |a: &[BigInt], b: &[BigInt]| {
        let mut out = vec![BigInt::zero(); n];
        for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, y) in b.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
                out[(i + j) % n] += x * y;
            }
        }
        out
    };
    let mut acc: Option<Vec<BigInt>> = None;
    let mut e = ell;
    while e > 0 {
        if e & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(a) => cyclic(&a, &base),
            });
        }
        e >>= 1;
        if e > 0 {
            base = cyclic(&base, &base);
        }
    }
    let mut num = acc.expect("ell >= 1");
    // Φ is monic with integer coefficients
    let phi_int: Vec<BigInt> = phi.coeffs().iter().map(|c| c.parts().0).collect();
    let dphi = phi_int.len() - 1;
    for top in (dphi..num.len()).rev() {
        let t = std::mem::take(&mut num[top]);
        if t.is_zero() {
            continue;
        }
        for (k, c) in phi_int.iter().enumerate().take(dphi) {
            num[top - dphi + k] -= &t * c;
        }
    }
    num.truncate(dphi);
    let scale = den.pow(ell as u32);
    let coeffs = num.into_iter().map(|a| Scalar::from_big(BigRational::new(a, scale.clone()))).collect();
    Poly::new(coeffs, ())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimeOutcome {
    pub prime: u64,
    pub outcome: DynOutcome,
    /// `2·deg f < ℓ − 1`, the size condition under which stability forces `f ∈ q^ℤ`.
    pub degree_condition: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynReport {
    #[serde(serialize_with = "as_string")]
    pub f: FieldElem,
    pub bound: u64,
    pub outcomes: Vec<PrimeOutcome>,
    pub decided: Option<i64>,
    /// False in positive characteristic, where the check does not apply.
    pub consistency_checked: bool,
    /// Every prime meeting the size condition was stable, yet `f ∉ q^ℤ`.
    pub inconsistent: bool,
}

fn as_string<S: Serializer>(f: &FieldElem, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&f.to_string())
}

impl DynReport {
    /// First unstable prime meeting the size condition.
    pub fn unstable_witness(&self) -> Option<&PrimeOutcome> {
        self.outcomes
            .iter()
            .find(|o| o.degree_condition && matches!(o.outcome, DynOutcome::Unstable(_)))
    }
}

/// `max(deg num, deg den)`.
pub fn height_degree(f: &FieldElem) -> usize {
    f.num().degree().unwrap_or(0).max(f.den().degree().unwrap_or(0))
}

pub fn lemma_scan(f: &FieldElem, bound: u64) -> Result<DynReport> {
    if bound < 3 {
        return Err(Error::Invalid(format!("prime bound must be at least 3, got {bound}")));
    }
    let decided = is_q_power(f)?;
    let deg = height_degree(f) as u64;
    let primes: Vec<u64> = (2..=bound).filter(|&l| is_prime(l)).collect();
    let outcomes: Vec<PrimeOutcome> = primes
        .par_iter()
        .map(|&prime| {
            Ok(PrimeOutcome {
                prime,
                outcome: mu_stability(f, prime)?,
                degree_condition: 2 * deg + 1 < prime,
            })
        })
        .collect::<Result<_>>()?;
    let consistency_checked = f.num().coeffs().first().and_then(|c| c.characteristic()).is_none();
    let sized: Vec<&PrimeOutcome> = outcomes.iter().filter(|o| o.degree_condition).collect();
    let inconsistent = consistency_checked
        && decided.is_none()
        && !sized.is_empty()
        && sized.iter().all(|o| o.outcome == DynOutcome::Stable);
    Ok(DynReport { f: f.clone(), bound, outcomes, decided, consistency_checked, inconsistent })
}
