//! q-integers, q-factorials and Gaussian binomials.

use crate::arith::{qpoly, FieldElem, Poly, QPoly, Scalar};
use crate::error::{Error, Result};

/// `[n]_q = 1 + q + ⋯ + q^{n−1}` as a polynomial.
pub fn q_int_poly(n: u64) -> QPoly {
    Poly::new(vec![Scalar::int(1); n as usize], ())
}

pub fn q_factorial_poly(n: u64) -> QPoly {
    (1..=n).fold(qpoly(&[1]), |acc, k| &acc * &q_int_poly(k))
}

pub fn q_int(n: u64) -> FieldElem {
    FieldElem::from_poly(q_int_poly(n))
}

pub fn q_factorial(n: u64) -> FieldElem {
    FieldElem::from_poly(q_factorial_poly(n))
}

/// Gaussian binomial `[n]_q! / ([i]_q! [n−i]_q!)`, a polynomial in `q`.
pub fn q_binomial(n: u64, i: u64) -> Result<FieldElem> {
    if i > n {
        return Err(Error::IndexOutOfRange(format!("binomial index {i} exceeds {n}")));
    }
    let den = &q_factorial_poly(i) * &q_factorial_poly(n - i);
    let quo = q_factorial_poly(n).exact_div(&den).expect("Gaussian binomials are polynomials");
    Ok(FieldElem::from_poly(quo))
}

/// Coefficients of `∏_{j<n} (T − q^j)`, ascending in `T`.
pub fn shifted_product_coeffs(n: usize) -> Vec<QPoly> {
    let mut e = vec![qpoly(&[1])];
    for j in 0..n {
        let qj = Poly::monomial(Scalar::int(1), j);
        let mut next = vec![qpoly(&[]); e.len() + 1];
        for (k, c) in e.iter().enumerate() {
            next[k + 1] = &next[k + 1] + c;
            next[k] = &next[k] - &(c * &qj);
        }
        e = next;
    }
    e
}
