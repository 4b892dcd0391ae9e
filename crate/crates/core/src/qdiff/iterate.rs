use rayon::prelude::*;

use super::qnum::{q_factorial_poly, shifted_product_coeffs};
use super::{xqpoly_to_xfunction, Lattice};
use crate::arith::{cyclotomic_poly, qpoly, FieldElem, Matrix, Poly, QPoly, RatFunc, Scalar, XFunction, XQPoly};
use crate::arith::cyclo::{ord_cyclotomic, qpoly_to_char};

/// Fraction-free iterates of a system.
///
/// `A_n = N_n / D_n` with `N_{n+1} = σ(N_n) N₁`, `D_{n+1} = σ(D_n) d`, and
/// `G_n = H_n / ((q−1)^n q^{n(n−1)/2} x^n D_n)` where
/// `H_n = Σ_k e_{n,k} N_k σ^k(D_{n−k})` and `e_{n,k}` are the coefficients of
/// `∏_{j<n}(T − q^j)`.
#[derive(Debug, Clone)]
pub struct IteratedData {
    nums: Vec<Matrix<XQPoly>>,
    dens: Vec<XQPoly>,
    hs: Vec<Matrix<XQPoly>>,
}

impl IteratedData {
    pub fn compute(lat: &Lattice, n: usize) -> Self {
        let nu = lat.num.rows();
        let start = IteratedData {
            nums: vec![Matrix::identity(&(), nu)],
            dens: vec![Poly::one(&())],
            hs: vec![Matrix::identity(&(), nu)],
        };
        start.extended(lat, n)
    }

    pub fn extended(&self, lat: &Lattice, n: usize) -> Self {
        let mut nums = self.nums.clone();
        let mut dens = self.dens.clone();
        while nums.len() <= n {
            let last = nums.len() - 1;
            let next = nums[last].map(&(), |p| p.twist(1)).mul(&lat.num);
            let d = &dens[last].twist(1) * &lat.den;
            nums.push(next);
            dens.push(d);
        }
        let first_new = self.hs.len();
        let new_hs: Vec<Matrix<XQPoly>> =
            (first_new..=n).into_par_iter().map(|m| h_matrix(&nums, &dens, m)).collect();
        let mut hs = self.hs.clone();
        hs.extend(new_hs);
        IteratedData { nums, dens, hs }
    }

    /// Largest cached index.
    pub fn len(&self) -> usize {
        self.nums.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn numerator(&self, n: usize) -> &Matrix<XQPoly> {
        &self.nums[n]
    }

    pub fn denominator(&self, n: usize) -> &XQPoly {
        &self.dens[n]
    }

    /// `H_n = (q−1)^n q^{n(n−1)/2} x^n D_n G_n`.
    pub fn h(&self, n: usize) -> &Matrix<XQPoly> {
        &self.hs[n]
    }

    pub fn a(&self, n: usize) -> Matrix<XFunction> {
        let d = xqpoly_to_xfunction(&self.dens[n]).inv().expect("nonzero denominator");
        self.nums[n].map(&(), |p| &xqpoly_to_xfunction(p) * &d)
    }

    pub fn g(&self, n: usize) -> Matrix<XFunction> {
        let c = g_scale(n);
        let den = RatFunc::from_poly(Poly::monomial(c, n)) * xqpoly_to_xfunction(&self.dens[n]);
        let inv = den.inv().expect("nonzero");
        self.hs[n].map(&(), |p| &xqpoly_to_xfunction(p) * &inv)
    }

    /// `G_[n] = G_n / [n]_q!`.
    pub fn g_divided(&self, n: usize) -> Matrix<XFunction> {
        let f = FieldElem::from_poly(q_factorial_poly(n as u64)).inv().expect("nonzero");
        self.g(n).map(&(), |e| e.scale(&f))
    }

    /// Gauss valuation at `Φ_ℓ` of `G_[n]` (minimum over entries), `None` if `G_n = 0`.
    pub fn g_divided_valuation(&self, n: usize, order: u64, characteristic: Option<u64>) -> Option<i64> {
        let phi = qpoly_to_char(&cyclotomic_poly(order), characteristic).expect("integral");
        let vh = self.hs[n].entries().iter().filter_map(|p| xqpoly_valuation(p, &phi)).min()?;
        let vd = xqpoly_valuation(&self.dens[n], &phi).expect("nonzero denominator");
        let fact = qpoly_to_char(&q_factorial_poly(n as u64), characteristic).expect("integral");
        let vf = if fact.is_zero() { 0 } else { ord_cyclotomic(&fact, &phi) as i64 };
        Some(vh - vd - vf)
    }
}

/// `(q−1)^n q^{n(n−1)/2}`.
pub(crate) fn g_scale(n: usize) -> FieldElem {
    let qm1 = qpoly(&[-1, 1]).pow(n as u32);
    let qp = Poly::monomial(Scalar::int(1), n * n.saturating_sub(1) / 2);
    FieldElem::from_poly(&qm1 * &qp)
}

/// Minimum `Φ`-adic order over the coefficients, `None` for zero.
pub fn xqpoly_valuation(p: &XQPoly, phi: &QPoly) -> Option<i64> {
    p.coeffs().iter().filter(|c| !c.is_zero()).map(|c| ord_cyclotomic(c, phi) as i64).min()
}

fn h_matrix(nums: &[Matrix<XQPoly>], dens: &[XQPoly], n: usize) -> Matrix<XQPoly> {
    let e = shifted_product_coeffs(n);
    let nu = nums[0].rows();
    let mut acc = Matrix::zeros(&(), nu, nu);
    for (k, ek) in e.iter().enumerate() {
        if ek.is_zero() {
            continue;
        }
        let factor = dens[n - k].twist(k as i64).scale(ek);
        acc = acc.add(&nums[k].scale(&factor));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::q;
    use crate::qdiff::{d_q, twist_matrix, xconst, xint, xvar, QDiffSystem};

    #[test]
    fn constant_q_system() {
        let s = QDiffSystem::scalar(xconst(q())).unwrap();
        let it = s.iterate(5);
        for n in 0..=5 {
            assert_eq!(it.a(n).get(0, 0), &xconst(q().pow_i(n as i64).unwrap()));
        }
        assert_eq!(it.g(1).get(0, 0), &xvar().inv().unwrap());
    }

    #[test]
    fn identity_system_iterates() {
        let s = QDiffSystem::identity(2);
        let it = s.iterate(4);
        for n in 1..=4 {
            assert!(it.a(n).is_identity());
            assert!(it.g(n).is_zero());
        }
    }

    #[test]
    fn closed_form_matches_recursion() {
        let a = Matrix::from_rows(
            &(),
            vec![
                vec![&xint(1) / &(&xint(1) - &xvar()), xvar()],
                vec![xconst(q()), &xint(2) + &xvar()],
            ],
        );
        let s = QDiffSystem::new(a.clone()).unwrap();
        let it = s.iterate(5);
        let g1 = it.g(1);
        let mut g = g1.clone();
        for n in 1..5 {
            g = twist_matrix(&g, 1).mul(&g1).add(&g.map(&(), d_q));
            assert_eq!(it.g(n + 1), g, "G_{}", n + 1);
        }
        let _ = it.g_divided(3);
    }

    #[test]
    fn cache_is_extended() {
        let s = QDiffSystem::scalar(&xint(1) / &(&xint(1) - &xvar())).unwrap();
        let a = s.iterate(3);
        let b = s.iterate(6);
        assert_eq!(b.len(), 6);
        assert_eq!(a.a(3), b.a(3));
        assert!(std::sync::Arc::ptr_eq(&b, &s.iterate(4)));
    }
}
