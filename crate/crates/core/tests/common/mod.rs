#![allow(dead_code)]

use qcurv_core::arith::{fe_int, q, Coeff, Matrix, XFunction};
use qcurv_core::qdiff::{xconst, xint, xvar, QDiffSystem};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small coefficient in `ℤ[q]`: an integer, sometimes times `q`.
pub fn coeff(rng: &mut ChaCha8Rng) -> XFunction {
    let c = rng.gen_range(-3i64..=3);
    if rng.gen_bool(0.2) {
        xconst(&fe_int(c) * &q())
    } else {
        xint(c)
    }
}

pub fn poly_in_x(rng: &mut ChaCha8Rng, deg: usize) -> XFunction {
    let mut acc = xint(0);
    let mut xp = xint(1);
    for _ in 0..=deg {
        acc = &acc + &(&coeff(rng) * &xp);
        xp = &xp * &xvar();
    }
    acc
}

/// Invertible matrix with polynomial entries of degree at most `deg`.
pub fn gauge(rng: &mut ChaCha8Rng, nu: usize, deg: usize) -> Matrix<XFunction> {
    loop {
        let m = Matrix::from_fn(&(), nu, nu, |_, _| {
            let d = rng.gen_range(0..=deg);
            poly_in_x(rng, d)
        });
        if !m.det().is_zero() {
            return m;
        }
    }
}

/// Random system with entries `p/r`, `p` of degree ≤ 2 and `r` of degree ≤ 1.
pub fn system(rng: &mut ChaCha8Rng, nu: usize) -> QDiffSystem {
    loop {
        let m = Matrix::from_fn(&(), nu, nu, |_, _| {
            let dn = rng.gen_range(0..=2);
            let num = poly_in_x(rng, dn);
            let dd = rng.gen_range(0..=1);
            let mut den = poly_in_x(rng, dd);
            while den.is_zero() {
                den = poly_in_x(rng, 1);
            }
            &num / &den
        });
        if let Ok(s) = QDiffSystem::new(m) {
            return s;
        }
    }
}

/// Random element of `ℚ(q)` with small coefficients and degrees ≤ 2.
pub fn field_elem(rng: &mut ChaCha8Rng) -> qcurv_core::arith::FieldElem {
    let poly = |rng: &mut ChaCha8Rng| {
        let d = rng.gen_range(0..=2);
        let c: Vec<i64> = (0..=d).map(|_| rng.gen_range(-4i64..=4)).collect();
        qcurv_core::arith::FieldElem::from_poly(qcurv_core::arith::qpoly(&c))
    };
    let num = poly(rng);
    let mut den = poly(rng);
    while den.is_zero() {
        den = poly(rng);
    }
    &num / &den
}

/// Random system with `A₁(0) = I`: `A₁ = I + x·P(x)`, `P` polynomial of degree ≤ 1.
pub fn unipotent_at_zero(rng: &mut ChaCha8Rng, nu: usize) -> QDiffSystem {
    loop {
        let p = Matrix::from_fn(&(), nu, nu, |_, _| poly_in_x(rng, 1));
        let m = Matrix::identity(&(), nu).add(&p.scale(&xvar()));
        if let Ok(s) = QDiffSystem::new(m) {
            return s;
        }
    }
}

/// Gauge of the identity system.
pub fn gauged_identity(rng: &mut ChaCha8Rng, nu: usize, deg: usize) -> (QDiffSystem, Matrix<XFunction>) {
    let s = gauge(rng, nu, deg);
    (QDiffSystem::identity(nu).gauge(&s).expect("invertible gauge"), s)
}

/// Scalar telescoping system `∏ (1 − a_i x)/(1 − q a_i x)`, solved by `∏ 1/(1 − a_i x)`.
pub fn telescoping(a: &[i64]) -> QDiffSystem {
    let mut f = xint(1);
    for &ai in a {
        let ax = &xint(ai) * &xvar();
        f = &f * &(&(&xint(1) - &ax) / &(&xint(1) - &(&xconst(q()) * &ax)));
    }
    QDiffSystem::scalar(f).expect("nonzero")
}
