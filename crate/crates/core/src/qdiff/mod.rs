//! Linear q-difference systems `σ_q(Y) = A₁ Y` over `k(q)(x)`.

mod iterate;
mod qnum;

use std::fmt;
use std::sync::{Arc, Mutex};

use crate::arith::{Coeff, FieldElem, Matrix, Poly, QPoly, RatFunc, Scalar, XFunction, XQPoly};
use crate::error::{Error, Result};

pub use iterate::IteratedData;
pub use qnum::{q_binomial, q_factorial, q_factorial_poly, q_int, q_int_poly, shifted_product_coeffs};

/// `f(x) ↦ f(q^m x)`.
pub fn sigma_q(f: &XFunction, m: i64) -> XFunction {
    f.twist(m)
}

/// `d_q f = (f(qx) − f(x)) / ((q − 1) x)`.
pub fn d_q(f: &XFunction) -> XFunction {
    let diff = &f.twist(1) - f;
    if diff.is_zero() {
        return diff;
    }
    let qm1 = FieldElem::from_poly(crate::arith::qpoly(&[-1, 1]));
    diff.mul_var_pow(-1).scale(&qm1.inv().unwrap())
}

pub fn twist_matrix(m: &Matrix<XFunction>, k: i64) -> Matrix<XFunction> {
    m.map(&(), |f| f.twist(k))
}

/// `x` as an element of `k(q)(x)`.
pub fn xvar() -> XFunction {
    RatFunc::var(&())
}

pub fn xconst(c: FieldElem) -> XFunction {
    RatFunc::constant(c)
}

pub fn xint(n: i64) -> XFunction {
    xconst(FieldElem::constant(Scalar::int(n)))
}

/// `A₁ = N/d` with `N`, `d` polynomial in `x` and `q`, jointly primitive.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    pub num: Matrix<XQPoly>,
    pub den: XQPoly,
}

#[derive(Clone)]
pub struct QDiffSystem {
    a1: Matrix<XFunction>,
    lattice: Lattice,
    characteristic: Option<u64>,
    cache: Arc<Mutex<Option<Arc<IteratedData>>>>,
}

impl PartialEq for QDiffSystem {
    fn eq(&self, other: &Self) -> bool {
        self.a1 == other.a1
    }
}

impl fmt::Debug for QDiffSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QDiffSystem(A1 = {:?})", self.a1)
    }
}

impl QDiffSystem {
    /// Build from `A₁`; the characteristic is read off the coefficients.
    pub fn new(a1: Matrix<XFunction>) -> Result<Self> {
        if !a1.is_square() || a1.rows() == 0 {
            return Err(Error::RankMismatch(format!("A1 is {}x{}", a1.rows(), a1.cols())));
        }
        let characteristic = a1.entries().iter().find_map(xfunction_characteristic);
        let a1 = match characteristic {
            Some(p) => a1.map(&(), |f| xfunction_to_char(f, p)),
            None => a1,
        };
        if a1.det().is_zero() {
            return Err(Error::ZeroDeterminant);
        }
        let lattice = lattice_of(&a1);
        Ok(QDiffSystem { a1, lattice, characteristic, cache: Arc::new(Mutex::new(None)) })
    }

    pub fn identity(rank: usize) -> Self {
        Self::new(Matrix::identity(&(), rank)).expect("identity is invertible")
    }

    /// `1×1` system from a single entry.
    pub fn scalar(f: XFunction) -> Result<Self> {
        Self::new(Matrix::from_rows(&(), vec![vec![f]]))
    }

    pub fn rank(&self) -> usize {
        self.a1.rows()
    }

    pub fn a1(&self) -> &Matrix<XFunction> {
        &self.a1
    }

    /// `A = A₁⁻¹`, the matrix of `Σ_q` on the basis.
    pub fn a(&self) -> Matrix<XFunction> {
        self.a1.inverse().expect("A1 is invertible")
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// Common denominator of the entries, with `q`-denominators cleared.
    pub fn denom_support(&self) -> &XQPoly {
        &self.lattice.den
    }

    pub fn characteristic(&self) -> Option<u64> {
        self.characteristic
    }

    /// Iterates up to `n`, reusing cached prefixes.
    pub fn iterate(&self, n: usize) -> Arc<IteratedData> {
        let mut guard = self.cache.lock().expect("iteration cache poisoned");
        if let Some(data) = guard.as_ref() {
            if data.len() >= n {
                return data.clone();
            }
        }
        let data = match guard.as_ref() {
            Some(prev) => Arc::new(prev.extended(&self.lattice, n)),
            None => Arc::new(IteratedData::compute(&self.lattice, n)),
        };
        *guard = Some(data.clone());
        data
    }

    /// `A₁ ↦ S(qx)⁻¹ A₁ S(x)`.
    pub fn gauge(&self, s: &Matrix<XFunction>) -> Result<Self> {
        if s.rows() != self.rank() || s.cols() != self.rank() {
            return Err(Error::RankMismatch(format!("gauge is {}x{}, system rank {}", s.rows(), s.cols(), self.rank())));
        }
        let sq_inv = twist_matrix(s, 1).inverse().ok_or(Error::SingularGauge)?;
        Self::new(sq_inv.mul(&self.a1).mul(s))
    }

    pub fn dual(&self) -> Self {
        Self::new(self.a().transpose()).expect("dual is invertible")
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self::new(self.a1.kron(&other.a1)).expect("tensor is invertible")
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        Self::new(self.a1.block_diag(&other.a1)).expect("direct sum is invertible")
    }

    pub fn exterior_power(&self, k: usize) -> Result<Self> {
        self.check_power(k)?;
        Self::new(self.a1.compound(k))
    }

    pub fn symmetric_power(&self, k: usize) -> Result<Self> {
        self.check_power(k)?;
        Self::new(self.a1.sym_power(k))
    }

    fn check_power(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.rank() {
            return Err(Error::RankMismatch(format!("power {k} of a rank {} system", self.rank())));
        }
        Ok(())
    }

    /// Largest x-degree among numerators and denominators of `A₁`.
    pub fn x_degree(&self) -> usize {
        self.a1
            .entries()
            .iter()
            .map(|f| f.num().degree().unwrap_or(0).max(f.den().degree().unwrap_or(0)))
            .max()
            .unwrap_or(0)
    }
}

fn xfunction_characteristic(f: &XFunction) -> Option<u64> {
    let scan = |p: &Poly<FieldElem>| {
        p.coeffs().iter().find_map(|c| {
            c.num().coeffs().iter().chain(c.den().coeffs()).find_map(|s| s.characteristic())
        })
    };
    scan(f.num()).or_else(|| scan(f.den()))
}

fn xfunction_to_char(f: &XFunction, p: u64) -> XFunction {
    let conv_q = |c: &QPoly| c.map(&(), |s| s.to_modp(p).expect("denominator prime to characteristic"));
    let conv = |c: &FieldElem| FieldElem::new(conv_q(c.num()), conv_q(c.den()));
    RatFunc::new(f.num().map(&(), conv), f.den().map(&(), conv))
}

fn lcm_x(a: &Poly<FieldElem>, b: &Poly<FieldElem>) -> Poly<FieldElem> {
    let g = a.gcd(b).expect("field coefficients");
    (a * b).div_rem(&g).expect("monic gcd").0.monic().expect("field coefficients")
}

fn lcm_q(a: &QPoly, b: &QPoly) -> QPoly {
    let g = a.gcd(b).expect("field coefficients");
    (a * b).div_rem(&g).expect("monic gcd").0.monic().expect("field coefficients")
}

/// Clear denominators of a matrix over `k(q)(x)` into `N/d`.
pub fn lattice_of(a: &Matrix<XFunction>) -> Lattice {
    let one_x = Poly::one(&());
    let den_x = a.entries().iter().fold(one_x, |acc, f| lcm_x(&acc, f.den()));
    let num_x: Vec<Poly<FieldElem>> = a
        .entries()
        .iter()
        .map(|f| f.num() * &den_x.div_rem(f.den()).expect("monic denominator").0)
        .collect();
    let all_coeffs = num_x.iter().chain(std::iter::once(&den_x)).flat_map(|p| p.coeffs().iter());
    let q_den = all_coeffs.clone().fold(crate::arith::qpoly(&[1]), |acc, c| lcm_q(&acc, c.den()));
    let clear = |p: &Poly<FieldElem>| -> XQPoly {
        p.map(&(), |c| {
            let scaled = c.num() * &q_den;
            scaled.div_rem(c.den()).expect("monic").0
        })
    };
    let num: Vec<XQPoly> = num_x.iter().map(clear).collect();
    let den = clear(&den_x);
    let content = num
        .iter()
        .chain(std::iter::once(&den))
        .flat_map(|p| p.coeffs().iter())
        .fold(QPoly::zero(&()), |acc, c| if acc.is_zero() { c.monic().unwrap() } else { acc.gcd(c).unwrap() });
    let strip = |p: &XQPoly| -> XQPoly {
        if content.is_one() {
            p.clone()
        } else {
            p.map(&(), |c| c.div_rem(&content).unwrap().0)
        }
    };
    let n = a.rows();
    Lattice {
        num: Matrix::from_fn(&(), n, a.cols(), |i, j| strip(&num[i * a.cols() + j])),
        den: strip(&den),
    }
}

/// Convert a polynomial in `x` over `k[q]` into `k(q)(x)`.
pub fn xqpoly_to_xfunction(p: &XQPoly) -> XFunction {
    RatFunc::from_poly(p.map(&(), |c| FieldElem::from_poly(c.clone())))
}
