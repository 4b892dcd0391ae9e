//! Modular gcd for polynomials in `x` with coefficients in `ℚ[q]`.
//!
//! Images modulo word-sized primes are computed by evaluating `q` at small
//! integers, taking univariate gcds in `𝔽_p[x]` and interpolating; the
//! images are combined by CRT, lifted by rational reconstruction and checked
//! by exact division.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::cyclo::QPoly;
use super::poly::Poly;
use super::scalar::{mod_inv, mul_mod, Scalar};

type Dense = Vec<Vec<u64>>;

const MAX_PRIMES: usize = 24;

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, p);
        }
        b = mul_mod(b, b, p);
        e >>= 1;
    }
    acc
}

pub(crate) fn primes() -> impl Iterator<Item = u64> {
    (0..).map(|k| (1u64 << 31) - 1 - 2 * k).filter(|&n| is_prime(n))
}

fn trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

pub(crate) fn eval(v: &[u64], t: u64, p: u64) -> u64 {
    v.iter().rev().fold(0, |acc, &c| (mul_mod(acc, t, p) + c) % p)
}

fn monic_gcd(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> Vec<u64> {
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let inv = mod_inv(*b.last().unwrap(), p).unwrap();
        while a.len() >= b.len() {
            let c = mul_mod(*a.last().unwrap(), inv, p);
            let shift = a.len() - b.len();
            for (i, &bc) in b.iter().enumerate() {
                a[i + shift] = (a[i + shift] + p - mul_mod(c, bc, p)) % p;
            }
            trim(&mut a);
            if a.is_empty() {
                break;
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    if let Some(&l) = a.last() {
        let inv = mod_inv(l, p).unwrap();
        for c in a.iter_mut() {
            *c = mul_mod(*c, inv, p);
        }
    }
    a
}

/// Newton interpolation through `(t_i, v_i)` in `𝔽_p`.
fn interpolate(ts: &[u64], vs: &[u64], p: u64) -> Vec<u64> {
    let n = ts.len();
    let mut coef = vs.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            let num = (coef[i] + p - coef[i - 1]) % p;
            let den = (ts[i] + p - ts[i - j]) % p;
            coef[i] = mul_mod(num, mod_inv(den, p).unwrap(), p);
        }
    }
    let mut poly = vec![0u64; n];
    for i in (0..n).rev() {
        // poly = poly * (q - t_i) + coef[i]
        let mut next = vec![0u64; n];
        for k in 0..n {
            if poly[k] == 0 {
                continue;
            }
            if k + 1 < n {
                next[k + 1] = (next[k + 1] + poly[k]) % p;
            }
            next[k] = (next[k] + p - mul_mod(poly[k], ts[i] % p, p)) % p;
        }
        next[0] = (next[0] + coef[i]) % p;
        poly = next;
    }
    trim(&mut poly);
    poly
}

/// Integer coefficient array `[x-degree][q-degree]` after clearing denominators.
fn integral(a: &Poly<QPoly>) -> Option<Vec<Vec<BigInt>>> {
    let mut l = BigInt::one();
    for c in a.coeffs() {
        for s in c.coeffs() {
            if s.characteristic().is_some() {
                return None;
            }
            l = l.lcm(&s.parts().1);
        }
    }
    Some(
        a.coeffs()
            .iter()
            .map(|c| {
                c.coeffs()
                    .iter()
                    .map(|s| {
                        let (n, d) = s.parts();
                        n * (&l / d)
                    })
                    .collect()
            })
            .collect(),
    )
}

fn reduce(a: &[Vec<BigInt>], p: u64) -> Dense {
    let pb = BigInt::from(p);
    a.iter()
        .map(|row| {
            let mut r: Vec<u64> = row.iter().map(|c| c.mod_floor(&pb).to_u64().unwrap()).collect();
            trim(&mut r);
            r
        })
        .collect()
}

fn rational_reconstruct(u: &BigInt, m: &BigInt) -> Option<(BigInt, BigInt)> {
    let bound = m.sqrt() / BigInt::from(2);
    let (mut r0, mut r1) = (m.clone(), u.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    if t1.is_negative() {
        Some((-r1, -t1))
    } else {
        Some((r1, t1))
    }
}

/// Primitive gcd over `ℚ[q]` of two nonzero polynomials in characteristic zero.
///
/// Returns `None` when the inputs are not over `ℚ` or no answer was certified
/// within the prime budget.
pub fn modular_gcd(a: &Poly<QPoly>, b: &Poly<QPoly>) -> Option<Poly<QPoly>> {
    let ai = integral(a)?;
    let bi = integral(b)?;
    let lca = a.lead()?;
    let lcb = b.lead()?;
    let gamma = lca.gcd(lcb)?;
    let gamma_i = integral(&Poly::constant(gamma.clone()))?.remove(0);
    let qdeg = |m: &[Vec<BigInt>]| m.iter().map(|r| r.len()).max().unwrap_or(1) - 1;
    let need = gamma_i.len() - 1 + qdeg(&ai).min(qdeg(&bi)) + 1;

    let mut acc: Option<(usize, Vec<Vec<BigInt>>, BigInt)> = None;
    let mut last_candidate: Option<Poly<QPoly>> = None;
    for p in primes().take(MAX_PRIMES) {
        let ap = reduce(&ai, p);
        let bp = reduce(&bi, p);
        let gp = {
            let mut g = reduce(std::slice::from_ref(&gamma_i), p).remove(0);
            trim(&mut g);
            g
        };
        let (Some(la), Some(lb)) = (ap.last(), bp.last()) else { continue };
        if la.is_empty() || lb.is_empty() || gp.len() != gamma_i.len() {
            continue;
        }
        let mut dmin = usize::MAX;
        let mut ts = Vec::new();
        let mut images: Vec<Vec<u64>> = Vec::new();
        let mut t = 0u64;
        while ts.len() < need {
            t += 1;
            if t > 4 * need as u64 + 64 {
                break;
            }
            if eval(la, t, p) == 0 || eval(lb, t, p) == 0 {
                continue;
            }
            let at: Vec<u64> = ap.iter().map(|r| eval(r, t, p)).collect();
            let bt: Vec<u64> = bp.iter().map(|r| eval(r, t, p)).collect();
            let g = monic_gcd(at, bt, p);
            let d = g.len() - 1;
            if d == 0 {
                return Some(Poly::one(&()));
            }
            if d < dmin {
                dmin = d;
                ts.clear();
                images.clear();
            } else if d > dmin {
                continue;
            }
            let scale = eval(&gp, t, p);
            images.push(g.iter().map(|&c| mul_mod(c, scale, p)).collect());
            ts.push(t);
        }
        if ts.len() < need {
            continue;
        }
        let hp: Dense = (0..=dmin)
            .map(|k| {
                let vs: Vec<u64> = images.iter().map(|g| g[k]).collect();
                interpolate(&ts, &vs, p)
            })
            .collect();
        let pb = BigInt::from(p);
        acc = match acc {
            Some((d, _, _)) if dmin > d => continue,
            Some((d, coeffs, m)) if d == dmin => {
                let minv = BigInt::from(mod_inv((&m % &pb).to_u64().unwrap(), p).unwrap());
                let width = coeffs.iter().map(|r| r.len()).max().unwrap_or(0).max(need);
                let merged = (0..=dmin)
                    .map(|k| {
                        (0..width)
                            .map(|j| {
                                let c = coeffs[k].get(j).cloned().unwrap_or_default();
                                let v = BigInt::from(hp[k].get(j).copied().unwrap_or(0));
                                let delta = ((v - &c) * &minv).mod_floor(&pb);
                                c + &m * delta
                            })
                            .collect()
                    })
                    .collect();
                Some((dmin, merged, m * pb))
            }
            _ => {
                let coeffs = hp.iter().map(|r| r.iter().map(|&c| BigInt::from(c)).collect()).collect();
                Some((dmin, coeffs, pb))
            }
        };
        let (_, coeffs, m) = acc.as_ref().unwrap();
        let Some(candidate) = lift(coeffs, m) else { continue };
        if last_candidate.as_ref() == Some(&candidate) {
            if a.exact_div(&candidate).is_some() && b.exact_div(&candidate).is_some() {
                return Some(candidate);
            }
        }
        last_candidate = Some(candidate);
    }
    None
}

/// Monic gcd in `ℚ[q]`, through the same machinery with constant coefficients.
pub fn univariate_gcd(a: &QPoly, b: &QPoly) -> Option<QPoly> {
    if a.is_zero() || b.is_zero() || a.is_constant() || b.is_constant() {
        return None;
    }
    let embed = |p: &QPoly| Poly::new(p.coeffs().iter().map(|c| Poly::constant(c.clone())).collect(), ());
    let g = modular_gcd(&embed(a), &embed(b))?;
    let flat = Poly::new(g.coeffs().iter().map(|c| c.coeff(0)).collect(), ());
    flat.monic()
}

/// Coefficients of `p` reduced modulo `prime`, `None` if a denominator vanishes.
pub(crate) fn residues(p: &QPoly, prime: u64) -> Option<Vec<u64>> {
    p.coeffs()
        .iter()
        .map(|c| match c.to_modp(prime)? {
            Scalar::Mod { value, .. } => Some(value),
            _ => None,
        })
        .collect()
}

fn mul_dense(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mul_mod(x, y, p)) % p;
        }
    }
    trim(&mut out);
    out
}

fn sub_dense(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (0..a.len().max(b.len()))
        .map(|i| (a.get(i).copied().unwrap_or(0) + p - b.get(i).copied().unwrap_or(0)) % p)
        .collect();
    trim(&mut out);
    out
}

fn divrem_dense(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let mut r = a.to_vec();
    trim(&mut r);
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let inv = mod_inv(*b.last().unwrap(), p).unwrap();
    let mut quo = vec![0u64; r.len() - b.len() + 1];
    while r.len() >= b.len() {
        let c = mul_mod(*r.last().unwrap(), inv, p);
        let shift = r.len() - b.len();
        quo[shift] = c;
        for (i, &bc) in b.iter().enumerate() {
            r[i + shift] = (r[i + shift] + p - mul_mod(c, bc, p)) % p;
        }
        trim(&mut r);
    }
    trim(&mut quo);
    (quo, r)
}

/// Balanced rational function reconstruction of `f mod ∏(q − tᵢ)`, with a
/// monic denominator nonvanishing at every point.
fn rational_interpolate(ts: &[u64], vs: &[u64], p: u64) -> Option<(Vec<u64>, Vec<u64>)> {
    let n = ts.len();
    let mut r0 = ts.iter().fold(vec![1u64], |acc, &t| mul_dense(&acc, &[(p - t % p) % p, 1], p));
    let mut r1 = interpolate(ts, vs, p);
    let (mut t0, mut t1) = (Vec::new(), vec![1u64]);
    while 2 * r1.len() > n {
        let (quo, r) = divrem_dense(&r0, &r1, p);
        let t = sub_dense(&t0, &mul_dense(&quo, &t1, p), p);
        r0 = std::mem::replace(&mut r1, r);
        t0 = std::mem::replace(&mut t1, t);
    }
    if t1.is_empty() || 2 * (t1.len() - 1) >= n || ts.iter().any(|&t| eval(&t1, t, p) == 0) {
        return None;
    }
    let inv = mod_inv(*t1.last().unwrap(), p).unwrap();
    let scale = |v: &[u64]| v.iter().map(|&c| mul_mod(c, inv, p)).collect::<Vec<u64>>();
    Some((scale(&r1), scale(&t1)))
}

const MAX_POINTS: usize = 400;

/// `k` rational functions of `q` over `ℚ`, recovered from their values at
/// small integer points modulo word-sized primes.
///
/// `image_at(p)` yields an evaluator for the prime `p` (or `None` to skip
/// it); the evaluator returns the `k` values at a point, `None` when that
/// point is unlucky. The answer is a candidate only and must be checked
/// by the caller.
pub fn recover_qfunctions<F, G>(k: usize, mut image_at: F) -> Option<Vec<(QPoly, QPoly)>>
where
    F: FnMut(u64) -> Option<G>,
    G: FnMut(u64) -> Option<Vec<u64>>,
{
    type Shape = Vec<(usize, usize)>;
    let mut acc: Option<(Shape, Vec<BigInt>, BigInt)> = None;
    let mut last: Option<Vec<(QPoly, QPoly)>> = None;
    for p in primes().take(MAX_PRIMES) {
        let Some(mut image) = image_at(p) else { continue };
        let Some(found) = recover_mod(k, p, &mut image) else { continue };
        let shape: Shape = found.iter().map(|(a, b)| (a.len(), b.len())).collect();
        let flat: Vec<u64> = found.iter().flat_map(|(a, b)| a.iter().chain(b.iter()).copied()).collect();
        let pb = BigInt::from(p);
        acc = match acc {
            Some((s, coeffs, m)) if s == shape => {
                let minv = BigInt::from(mod_inv((&m % &pb).to_u64().unwrap(), p).unwrap());
                let merged = coeffs
                    .iter()
                    .zip(&flat)
                    .map(|(c, &v)| c + &m * ((BigInt::from(v) - c) * &minv).mod_floor(&pb))
                    .collect();
                Some((s, merged, m * pb))
            }
            _ => Some((shape, flat.iter().map(|&v| BigInt::from(v)).collect(), pb)),
        };
        let (shape, coeffs, m) = acc.as_ref().unwrap();
        let lifted: Option<Vec<Scalar>> = coeffs
            .iter()
            .map(|c| rational_reconstruct(c, m).map(|(n, d)| Scalar::from_big(num_rational::BigRational::new(n, d))))
            .collect();
        let Some(lifted) = lifted else { continue };
        let mut it = lifted.into_iter();
        let candidate: Vec<(QPoly, QPoly)> = shape
            .iter()
            .map(|&(a, b)| {
                let num: Vec<Scalar> = it.by_ref().take(a).collect();
                let den: Vec<Scalar> = it.by_ref().take(b).collect();
                (Poly::new(num, ()), Poly::new(den, ()))
            })
            .collect();
        if last.as_ref() == Some(&candidate) {
            return last;
        }
        last = Some(candidate);
    }
    None
}

/// Images modulo `p`, accepted once a candidate predicts two further points.
fn recover_mod<G>(k: usize, p: u64, image: &mut G) -> Option<Vec<(Vec<u64>, Vec<u64>)>>
where
    G: FnMut(u64) -> Option<Vec<u64>>,
{
    let mut ts = Vec::new();
    let mut vs: Vec<Vec<u64>> = vec![Vec::new(); k];
    let mut candidate: Option<Vec<(Vec<u64>, Vec<u64>)>> = None;
    let mut confirmed = 0;
    // points where the image is undefined still count against the budget
    for t in 2..2 + 2 * MAX_POINTS as u64 {
        if ts.len() >= MAX_POINTS {
            break;
        }
        let Some(v) = image(t) else { continue };
        if let Some(c) = &candidate {
            let predicts = c.iter().zip(&v).all(|((a, b), &y)| {
                let d = eval(b, t, p);
                d != 0 && mul_mod(eval(a, t, p), mod_inv(d, p).unwrap(), p) == y
            });
            if predicts {
                confirmed += 1;
                if confirmed == 2 {
                    return candidate;
                }
            } else {
                candidate = None;
                confirmed = 0;
            }
        }
        ts.push(t);
        for (col, y) in vs.iter_mut().zip(v) {
            col.push(y);
        }
        if candidate.is_none() {
            candidate = vs.iter().map(|col| rational_interpolate(&ts, col, p)).collect();
        }
    }
    None
}

fn lift(coeffs: &[Vec<BigInt>], m: &BigInt) -> Option<Poly<QPoly>> {
    let mut out = Vec::with_capacity(coeffs.len());
    for row in coeffs {
        let mut qc = Vec::with_capacity(row.len());
        for c in row {
            let (n, d) = rational_reconstruct(c, m)?;
            qc.push(Scalar::from_big(num_rational::BigRational::new(n, d)));
        }
        out.push(Poly::new(qc, ()));
    }
    Some(super::cyclo::primitive_part(&Poly::new(out, ())))
}
