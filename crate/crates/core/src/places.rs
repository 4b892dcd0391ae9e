//! Cyclotomic places of `k(q)`: reduction of systems and Gauss valuations.

use std::sync::Arc;

use crate::arith::cyclo::{ord_cyclotomic, qpoly_to_char};
use crate::arith::{
    valuation_at, Coeff, CycRing, CycScalar, CycXFunction, FracMatrix, Matrix, Poly, QPoly, XFunction, XQPoly,
};
use crate::error::{BadPlaceReason, Error, Result};
use crate::qdiff::QDiffSystem;

/// The place `Φ_ℓ` of `k(q)`, `ℓ ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclotomicPlace {
    ring: Arc<CycRing>,
}

impl CyclotomicPlace {
    pub fn new(order: u64, characteristic: Option<u64>) -> Result<Self> {
        if order < 2 {
            return Err(Error::Invalid(format!("cyclotomic order must be at least 2, got {order}")));
        }
        Ok(CyclotomicPlace { ring: CycRing::new(order, characteristic) })
    }

    pub fn order(&self) -> u64 {
        self.ring.order()
    }

    pub fn phi(&self) -> &QPoly {
        self.ring.modulus()
    }

    pub fn ring(&self) -> &Arc<CycRing> {
        &self.ring
    }

    pub fn reduce_qpoly(&self, p: &QPoly) -> CycScalar {
        CycScalar::from_qpoly(&self.ring, p)
    }

    pub fn reduce_xqpoly(&self, p: &XQPoly) -> Poly<CycScalar> {
        p.map(&self.ring, |c| self.reduce_qpoly(c))
    }

    fn bad(&self, reason: BadPlaceReason) -> Error {
        Error::BadPlace { order: self.order(), reason }
    }
}

/// `A₁ mod Φ_ℓ` in the form `N̄ / d̄`.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub place: CyclotomicPlace,
    pub matrix: FracMatrix<CycScalar>,
}

impl ReducedSystem {
    pub fn to_matrix(&self) -> Matrix<CycXFunction> {
        self.matrix.to_matrix()
    }
}

/// Reduce a system at `Φ_ℓ`.
///
/// The place is bad when the common denominator vanishes identically or
/// the reduced matrix is singular.
pub fn reduce_system(sys: &QDiffSystem, order: u64) -> Result<ReducedSystem> {
    let place = CyclotomicPlace::new(order, sys.characteristic())?;
    reduce_system_at(sys, &place)
}

pub fn reduce_system_at(sys: &QDiffSystem, place: &CyclotomicPlace) -> Result<ReducedSystem> {
    let lat = sys.lattice();
    let den = place.reduce_xqpoly(&lat.den);
    if den.is_zero() {
        return Err(place.bad(BadPlaceReason::Denominator));
    }
    let num = lat.num.map(place.ring(), |p| place.reduce_xqpoly(p));
    if num.det().is_zero() {
        return Err(place.bad(BadPlaceReason::Determinant));
    }
    Ok(ReducedSystem { place: place.clone(), matrix: FracMatrix::new(num, den) })
}

/// Reduce an auxiliary matrix (a gauge, say) entry by entry.
pub fn reduce_matrix(m: &Matrix<XFunction>, place: &CyclotomicPlace) -> Result<FracMatrix<CycScalar>> {
    let lat = crate::qdiff::lattice_of(m);
    let den = place.reduce_xqpoly(&lat.den);
    if den.is_zero() {
        return Err(place.bad(BadPlaceReason::Auxiliary));
    }
    Ok(FracMatrix::new(lat.num.map(place.ring(), |p| place.reduce_xqpoly(p)), den))
}

fn poly_valuation(p: &Poly<crate::arith::FieldElem>, order: u64) -> i64 {
    p.coeffs()
        .iter()
        .filter(|c| !c.is_zero())
        .map(|c| valuation_at(c, order).expect("nonzero coefficient"))
        .min()
        .expect("nonzero polynomial")
}

/// Gauss valuation `min ord(numerator coefficients) − min ord(denominator coefficients)`.
pub fn gauss_valuation(f: &XFunction, order: u64) -> Result<i64> {
    if f.is_zero() {
        return Err(Error::ZeroArgument);
    }
    Ok(poly_valuation(f.num(), order) - poly_valuation(f.den(), order))
}

/// Minimum Gauss valuation over the nonzero entries, `None` for the zero matrix.
pub fn gauss_valuation_matrix(m: &Matrix<XFunction>, order: u64) -> Option<i64> {
    m.entries().iter().filter(|f| !f.is_zero()).map(|f| gauss_valuation(f, order).unwrap()).min()
}

/// Gauss valuation of a polynomial in `x` over `k[q]` at `Φ_ℓ` in a given characteristic.
pub fn xqpoly_gauss_valuation(p: &XQPoly, order: u64, characteristic: Option<u64>) -> Option<i64> {
    let phi = qpoly_to_char(&crate::arith::cyclotomic_poly(order), characteristic)?;
    p.coeffs()
        .iter()
        .filter(|c| !c.is_zero())
        .filter_map(|c| qpoly_to_char(c, characteristic))
        .filter(|c| !c.is_zero())
        .map(|c| ord_cyclotomic(&c, &phi) as i64)
        .min()
}
