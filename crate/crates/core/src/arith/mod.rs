//! The coefficient tower `k → k[q] → k(q) → k[q]/(Φ_ℓ)` and rational functions in `x` over it.

pub mod cyclo;
pub mod fracmat;
pub mod matrix;
pub mod mgcd;
pub mod poly;
pub mod ratfunc;
pub mod ring;
pub mod scalar;

pub use cyclo::{
    cyclotomic_poly, euler_phi, fe_int, field_arith, q, qpoly, reduce_mod, valuation_at, CycRing, CycScalar,
    FieldElem, QPoly,
};
pub use fracmat::FracMatrix;
pub use matrix::Matrix;
pub use poly::{Poly, VarName};
pub use ratfunc::RatFunc;
pub use ring::{Coeff, QAlgebra};
pub use scalar::Scalar;

/// Rational function in `x` over `k(q)`.
pub type XFunction = RatFunc<FieldElem>;

/// Rational function in `x` over a cyclotomic quotient.
pub type CycXFunction = RatFunc<CycScalar>;

/// Polynomial in `x` with coefficients in `k[q]`.
pub type XQPoly = Poly<QPoly>;
