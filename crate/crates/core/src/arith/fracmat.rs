//! Matrices `N/δ` with polynomial entries over one common denominator.

use super::matrix::Matrix;
use super::poly::{Poly, VarName};
use super::ratfunc::RatFunc;
use super::ring::{Coeff, QAlgebra};

#[derive(Clone, Debug)]
pub struct FracMatrix<C: Coeff + VarName> {
    num: Matrix<Poly<C>>,
    den: Poly<C>,
}

impl<C: Coeff + VarName> FracMatrix<C> {
    pub fn new(num: Matrix<Poly<C>>, den: Poly<C>) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        FracMatrix { num, den }
    }

    pub fn identity(ctx: &C::Ctx, n: usize) -> Self {
        FracMatrix { num: Matrix::identity(ctx, n), den: Poly::one(ctx) }
    }

    pub fn num(&self) -> &Matrix<Poly<C>> {
        &self.num
    }

    pub fn den(&self) -> &Poly<C> {
        &self.den
    }

    pub fn size(&self) -> usize {
        self.num.rows()
    }

    fn ctx(&self) -> C::Ctx {
        self.den.ctx().clone()
    }

    pub fn is_identity(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| (0..n).all(|j| if i == j { self.num.get(i, j) == &self.den } else { self.num.get(i, j).is_zero() }))
    }

    /// `N − δ·I`, the numerator of `self − I`.
    pub fn minus_identity_num(&self) -> Matrix<Poly<C>> {
        let ctx = self.ctx();
        self.num.sub(&Matrix::scalar(&ctx, self.size(), self.den.clone()))
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        FracMatrix { num: self.num.mul(&rhs.num), den: &self.den * &rhs.den }
    }

    pub fn pow(&self, e: u64) -> Self {
        FracMatrix { num: self.num.pow(e), den: Coeff::pow(&self.den, e) }
    }

    /// Whether both represent the same matrix of rational functions.
    pub fn same_as(&self, other: &Self) -> bool {
        self.num.scale(&other.den) == other.num.scale(&self.den)
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        FracMatrix { num: self.num.kron(&rhs.num), den: &self.den * &rhs.den }
    }

    pub fn block_diag(&self, rhs: &Self) -> Self {
        FracMatrix {
            num: self.num.scale(&rhs.den).block_diag(&rhs.num.scale(&self.den)),
            den: &self.den * &rhs.den,
        }
    }

    pub fn transpose(&self) -> Self {
        FracMatrix { num: self.num.transpose(), den: self.den.clone() }
    }

    /// `(N/δ)⁻¹ = δ·adj(N)/det(N)`; `None` if singular.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.num.det();
        if det.is_zero() {
            return None;
        }
        Some(FracMatrix { num: self.num.adjugate().scale(&self.den), den: det })
    }

    /// Divide numerator and denominator by `f` when it divides all of them.
    pub fn cancel_factor(&mut self, f: &Poly<C>) -> bool {
        if f.is_constant() {
            return false;
        }
        let Some(den) = self.den.exact_div(f) else { return false };
        // try the smallest entries first; they fail fastest
        let mut order: Vec<usize> = (0..self.num.entries().len()).collect();
        order.sort_by_key(|&k| self.num.entries()[k].degree().map_or(0, |d| d + 1));
        let mut quotients = vec![None; order.len()];
        for &k in &order {
            let e = &self.num.entries()[k];
            if e.is_zero() {
                quotients[k] = Some(e.clone());
                continue;
            }
            quotients[k] = Some(match e.exact_div(f) {
                Some(q) => q,
                None => return false,
            });
        }
        let entries: Vec<Poly<C>> = quotients.into_iter().map(Option::unwrap).collect();
        let n = self.size();
        let ctx = self.den.ctx().clone();
        let num = Matrix::from_fn(&ctx, n, n, |i, j| entries[i * n + j].clone());
        self.num = num;
        self.den = den;
        true
    }

    /// Entry as a reduced rational function.
    pub fn entry(&self, i: usize, j: usize) -> RatFunc<C> {
        RatFunc::new(self.num.get(i, j).clone(), self.den.clone())
    }

    pub fn to_matrix(&self) -> Matrix<RatFunc<C>> {
        let n = self.size();
        Matrix::from_fn(&self.ctx(), n, n, |i, j| self.entry(i, j))
    }

    /// Compare against a matrix of rational functions by cross multiplication.
    pub fn equals_matrix(&self, m: &Matrix<RatFunc<C>>) -> bool {
        let n = self.size();
        (0..n).all(|i| {
            (0..n).all(|j| {
                let r = m.get(i, j);
                self.num.get(i, j) * r.den() == &self.den * r.num()
            })
        })
    }
}

impl<C: QAlgebra + VarName> FracMatrix<C> {
    pub fn twist(&self, m: i64) -> Self {
        FracMatrix { num: self.num.map(self.num.ctx(), |p| p.twist(m)), den: self.den.twist(m) }
    }
}
