//! Curvatures `C_ℓ = A_ℓ mod Φ_ℓ` and the verdicts built on them.

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{CycRing, CycScalar, FracMatrix, Matrix, Poly, QAlgebra};
use crate::error::{BadPlaceReason, Error, Result};
use crate::places::{reduce_system_at, CyclotomicPlace, ReducedSystem};
use crate::qdiff::QDiffSystem;

/// `C_ℓ` as a fraction `N/δ` over `k[q]/(Φ_ℓ)`.
pub type Curvature = FracMatrix<CycScalar>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum CurvatureStatus {
    Zero,
    Nilpotent(u32),
    FiniteOrder(u64),
    Generic,
    BadPlace(BadPlaceReason),
}

/// An entry of `C_ℓ` that differs from the identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub row: usize,
    pub col: usize,
    pub entry: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurvatureVerdict {
    pub order: u64,
    pub status: CurvatureStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "r_max", rename_all = "snake_case")]
pub enum ScanMode {
    Zero,
    Nilpotent,
    Order(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "order", rename_all = "snake_case")]
pub enum SummaryKind {
    AllZero,
    AllNilpotent,
    ConstantOrder(u64),
    Mixed,
    NoGoodPlaces,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BadPlaceEntry {
    pub order: u64,
    pub reason: BadPlaceReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanSummary {
    pub kind: SummaryKind,
    pub good_places: usize,
    pub zero: usize,
    pub nilpotent: usize,
    pub finite_order: usize,
    pub generic: usize,
    pub bad_places: Vec<BadPlaceEntry>,
    /// At least ten good places, all zero, and no bad place other than a
    /// vanishing denominator. This is evidence, not a proof.
    pub evidence_of_triviality: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurvatureReport {
    pub lmin: u64,
    pub lmax: u64,
    pub primes_only: bool,
    pub mode: ScanMode,
    pub verdicts: Vec<CurvatureVerdict>,
    pub summary: ScanSummary,
}

/// Product `σ^{ℓ−1}(Ā₁)⋯σ(Ā₁)Ā₁` over `k[q]/(Φ_ℓ)`.
///
/// Twisted copies of the denominator are divided back out as soon as they
/// divide the whole numerator, which keeps gauge-trivial systems small.
pub fn curvature_of_reduced(red: &ReducedSystem, steps: u64) -> Curvature {
    let nu = red.matrix.size();
    let mut acc = FracMatrix::identity(red.place.ring(), nu);
    let mut pending: Vec<Poly<CycScalar>> = Vec::new();
    for n in 0..steps {
        let factor = red.matrix.twist(n as i64);
        acc = factor.mul(&acc);
        if !factor.den().is_constant() {
            pending.push(factor.den().clone());
        }
        let mut failures = 0;
        let mut k = 0;
        while k < pending.len() && failures < 2 {
            if acc.cancel_factor(&pending[k]) {
                pending.remove(k);
            } else {
                failures += 1;
                k += 1;
            }
        }
    }
    acc
}

pub fn curvature(sys: &QDiffSystem, order: u64) -> Result<Curvature> {
    let place = CyclotomicPlace::new(order, sys.characteristic())?;
    let red = reduce_system_at(sys, &place)?;
    Ok(curvature_of_reduced(&red, order))
}

/// `C_ℓ` obtained by reducing the exact iterate `A_ℓ`; slow, kept as a cross-check.
pub fn curvature_from_iterates(sys: &QDiffSystem, order: u64) -> Result<Curvature> {
    let place = CyclotomicPlace::new(order, sys.characteristic())?;
    reduce_system_at(sys, &place)?;
    let it = sys.iterate(order as usize);
    let den = place.reduce_xqpoly(it.denominator(order as usize));
    if den.is_zero() {
        return Err(Error::BadPlace { order, reason: BadPlaceReason::Denominator });
    }
    let num = it.numerator(order as usize).map(place.ring(), |p| place.reduce_xqpoly(p));
    Ok(FracMatrix::new(num, den))
}

fn witness(c: &Curvature) -> Option<Witness> {
    let n = c.size();
    for i in 0..n {
        for j in 0..n {
            let e = c.num().get(i, j);
            let differs = if i == j { e != c.den() } else { !e.is_zero() };
            if differs {
                return Some(Witness { row: i, col: j, entry: render_entry(c, i, j) });
            }
        }
    }
    None
}

fn render_entry(c: &Curvature, i: usize, j: usize) -> String {
    let small = c.num().get(i, j).degree().unwrap_or(0) <= 48 && c.den().degree().unwrap_or(0) <= 48;
    if small {
        c.entry(i, j).to_string()
    } else {
        crate::arith::RatFunc::new_raw(c.num().get(i, j).clone(), c.den().clone()).to_string()
    }
}

/// Smallest `j ≤ ν` with `(C − I)^j = 0`.
pub fn nilpotency_index(c: &Curvature) -> Option<u32> {
    let m = c.minus_identity_num();
    let mut p = m.clone();
    for j in 1..=c.size() as u32 {
        if p.is_zero() {
            return Some(j);
        }
        p = p.mul(&m);
    }
    None
}

/// Smallest `r ≤ r_max` with `C^r = I`.
pub fn multiplicative_order(c: &Curvature, r_max: u64) -> Option<u64> {
    let mut p = c.clone();
    for r in 1..=r_max {
        if p.is_identity() {
            return Some(r);
        }
        if r < r_max {
            p = p.mul(c);
        }
    }
    None
}

fn bad_verdict(order: u64, e: Error) -> CurvatureVerdict {
    let reason = match e {
        Error::BadPlace { reason, .. } => reason,
        _ => BadPlaceReason::Denominator,
    };
    CurvatureVerdict { order, status: CurvatureStatus::BadPlace(reason), witness: None }
}

/// Verdict at one place under a scan mode.
pub fn verdict(sys: &QDiffSystem, order: u64, mode: ScanMode) -> CurvatureVerdict {
    let c = match curvature(sys, order) {
        Ok(c) => c,
        Err(e) => return bad_verdict(order, e),
    };
    verdict_of(&c, order, mode)
}

pub fn verdict_of(c: &Curvature, order: u64, mode: ScanMode) -> CurvatureVerdict {
    if c.is_identity() {
        return CurvatureVerdict { order, status: CurvatureStatus::Zero, witness: None };
    }
    let status = match mode {
        ScanMode::Zero => CurvatureStatus::Generic,
        ScanMode::Nilpotent => nilpotency_index(c).map_or(CurvatureStatus::Generic, CurvatureStatus::Nilpotent),
        ScanMode::Order(r_max) => {
            multiplicative_order(c, r_max).map_or(CurvatureStatus::Generic, CurvatureStatus::FiniteOrder)
        }
    };
    CurvatureVerdict { order, status, witness: witness(c) }
}

pub fn is_zero_curvature(sys: &QDiffSystem, order: u64) -> CurvatureVerdict {
    verdict(sys, order, ScanMode::Zero)
}

pub fn is_nilpotent_curvature(sys: &QDiffSystem, order: u64) -> CurvatureVerdict {
    verdict(sys, order, ScanMode::Nilpotent)
}

pub fn curvature_order(sys: &QDiffSystem, order: u64, r_max: u64) -> Result<Option<u64>> {
    if r_max == 0 {
        return Err(Error::Invalid("r_max must be at least 1".into()));
    }
    Ok(multiplicative_order(&curvature(sys, order)?, r_max))
}

/// `C_ℓ^m`; with `m = p^j` in characteristic `p` this is the operator `Σ^{ℓ p^j}`.
pub fn iterated_curvature(sys: &QDiffSystem, order: u64, m: u64) -> Result<Curvature> {
    if m == 0 {
        return Err(Error::Invalid("power must be at least 1".into()));
    }
    Ok(curvature(sys, order)?.pow(m))
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

pub fn curvature_scan(sys: &QDiffSystem, lmin: u64, lmax: u64, mode: ScanMode, primes_only: bool) -> Result<CurvatureReport> {
    if lmin < 2 || lmin > lmax {
        return Err(Error::Invalid(format!("need 2 <= lmin <= lmax, got {lmin}..{lmax}")));
    }
    let orders: Vec<u64> = (lmin..=lmax).filter(|&l| !primes_only || is_prime(l)).collect();
    let verdicts: Vec<CurvatureVerdict> = orders.par_iter().map(|&l| verdict(sys, l, mode)).collect();
    let summary = summarize(&verdicts);
    Ok(CurvatureReport { lmin, lmax, primes_only, mode, verdicts, summary })
}

pub fn summarize(verdicts: &[CurvatureVerdict]) -> ScanSummary {
    let mut s = ScanSummary {
        kind: SummaryKind::NoGoodPlaces,
        good_places: 0,
        zero: 0,
        nilpotent: 0,
        finite_order: 0,
        generic: 0,
        bad_places: Vec::new(),
        evidence_of_triviality: false,
    };
    let mut orders = Vec::new();
    for v in verdicts {
        match v.status {
            CurvatureStatus::Zero => s.zero += 1,
            CurvatureStatus::Nilpotent(_) => s.nilpotent += 1,
            CurvatureStatus::FiniteOrder(r) => {
                s.finite_order += 1;
                orders.push(r);
            }
            CurvatureStatus::Generic => s.generic += 1,
            CurvatureStatus::BadPlace(reason) => s.bad_places.push(BadPlaceEntry { order: v.order, reason }),
        }
    }
    s.good_places = s.zero + s.nilpotent + s.finite_order + s.generic;
    s.kind = if s.good_places == 0 {
        SummaryKind::NoGoodPlaces
    } else if s.zero == s.good_places {
        SummaryKind::AllZero
    } else if s.zero + s.nilpotent == s.good_places {
        SummaryKind::AllNilpotent
    } else if s.finite_order == s.good_places && orders.iter().all(|&r| r == orders[0]) {
        SummaryKind::ConstantOrder(orders[0])
    } else {
        SummaryKind::Mixed
    };
    s.evidence_of_triviality = s.good_places >= 10
        && s.zero == s.good_places
        && s.bad_places.iter().all(|b| b.reason == BadPlaceReason::Denominator);
    s
}

/// Whether `A_κ = I` over `k(ζ_κ)(x)`, i.e. with `q` specialized to a
/// primitive `κ`-th root of unity.
pub fn root_of_unity_trivial(sys: &QDiffSystem, kappa: u64) -> Result<bool> {
    if kappa == 0 {
        return Err(Error::Invalid("kappa must be positive".into()));
    }
    let ring = CycRing::new(kappa, sys.characteristic());
    let lat = sys.lattice();
    let red = |p: &crate::arith::XQPoly| p.map(&ring, |c| CycScalar::from_qpoly(&ring, c));
    let den = red(&lat.den);
    if den.is_zero() {
        return Err(Error::BadPlace { order: kappa, reason: BadPlaceReason::Denominator });
    }
    let a = FracMatrix::new(lat.num.map(&ring, red), den);
    if a.num().det().is_zero() {
        return Err(Error::BadPlace { order: kappa, reason: BadPlaceReason::Determinant });
    }
    let mut acc = FracMatrix::identity(&ring, sys.rank());
    for n in 0..kappa {
        acc = a.twist(n as i64).mul(&acc);
    }
    Ok(acc.is_identity())
}

fn iterate_residues(sys: &QDiffSystem, order: u64) -> Result<(CyclotomicPlace, Matrix<Poly<CycScalar>>, Poly<CycScalar>, Matrix<Poly<CycScalar>>)> {
    let place = CyclotomicPlace::new(order, sys.characteristic())?;
    reduce_system_at(sys, &place)?;
    let l = order as usize;
    let it = sys.iterate(l);
    let n = it.numerator(l).map(place.ring(), |p| place.reduce_xqpoly(p));
    let d = place.reduce_xqpoly(it.denominator(l));
    let h = it.h(l).map(place.ring(), |p| place.reduce_xqpoly(p));
    Ok((place, n, d, h))
}

/// `A_ℓ ≡ I + (q−1)^ℓ x^ℓ G_ℓ (mod Φ_ℓ)`, tested literally.
pub fn place_identity_holds(sys: &QDiffSystem, order: u64) -> Result<bool> {
    // (q−1)^ℓ x^ℓ G_ℓ = H_ℓ / (q^{ℓ(ℓ−1)/2} D_ℓ)
    let (place, n, d, h) = iterate_residues(sys, order)?;
    let t = CycScalar::q_pow(place.ring(), (order * (order - 1) / 2) as i64);
    let tp = Poly::constant(t);
    let lhs = n.scale(&tp);
    let rhs = Matrix::scalar(place.ring(), sys.rank(), &d * &tp).add(&h);
    Ok(lhs == rhs)
}

/// `A_ℓ ≡ I + q^{ℓ(ℓ−1)/2} (q−1)^ℓ x^ℓ G_ℓ (mod Φ_ℓ)`.
pub fn twisted_place_identity_holds(sys: &QDiffSystem, order: u64) -> Result<bool> {
    let (place, n, d, h) = iterate_residues(sys, order)?;
    let rhs = Matrix::scalar(place.ring(), sys.rank(), d).add(&h);
    Ok(n == rhs)
}

/// Gauss valuations of `G_[n]` at `Φ_ℓ` for `n = 1..=n_max` (`None` where `G_n = 0`).
pub fn divided_valuations(sys: &QDiffSystem, order: u64, n_max: usize) -> Vec<(usize, Option<i64>)> {
    let it = sys.iterate(n_max);
    (1..=n_max).map(|n| (n, it.g_divided_valuation(n, order, sys.characteristic()))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, Coeff, CycXFunction, RatFunc};
    use crate::qdiff::{xconst, xint, xvar};

    fn telescoping() -> QDiffSystem {
        QDiffSystem::scalar(&(&xint(1) - &xvar()) / &(&xint(1) - &(&xconst(q()) * &xvar()))).unwrap()
    }

    #[test]
    fn constant_examples() {
        let sq = QDiffSystem::scalar(xconst(q())).unwrap();
        assert!(curvature(&sq, 5).unwrap().is_identity());
        assert_eq!(is_zero_curvature(&sq, 7).status, CurvatureStatus::Zero);
        let two = QDiffSystem::scalar(xint(2)).unwrap();
        let v = is_zero_curvature(&two, 7);
        assert_eq!(v.status, CurvatureStatus::Generic);
        assert_eq!(v.witness.unwrap().entry, "128");
        let m1 = QDiffSystem::scalar(xint(-1)).unwrap();
        assert_eq!(is_zero_curvature(&m1, 3).witness.unwrap().entry, "-1");
        assert_eq!(curvature_order(&m1, 5, 8).unwrap(), Some(2));
        assert_eq!(curvature_order(&sq, 5, 8).unwrap(), Some(1));
        assert_eq!(curvature_order(&two, 5, 20).unwrap(), None);
        assert!(iterated_curvature(&m1, 5, 2).unwrap().is_identity());
        let c = iterated_curvature(&two, 3, 3).unwrap();
        assert_eq!(c.entry(0, 0).to_string(), "512");
    }

    #[test]
    fn telescoping_and_geometric() {
        let t = telescoping();
        for l in 2..=12 {
            assert!(curvature(&t, l).unwrap().is_identity());
        }
        let g = QDiffSystem::scalar(&xint(1) / &(&xint(1) - &xvar())).unwrap();
        let c = curvature(&g, 3).unwrap();
        let ring = c.den().ctx().clone();
        let one = Poly::one(&ring);
        let expect: CycXFunction = RatFunc::new(one.clone(), &one - &Poly::monomial(CycScalar::one_in(&ring), 3));
        assert!(c.equals_matrix(&Matrix::from_rows(&ring, vec![vec![expect]])));
    }

    #[test]
    fn unipotent_triangular() {
        let a = Matrix::from_rows(&(), vec![vec![xint(1), xvar()], vec![xint(0), xint(1)]]);
        let s = QDiffSystem::new(a).unwrap();
        for l in 2..=7 {
            let v = is_nilpotent_curvature(&s, l);
            assert!(matches!(v.status, CurvatureStatus::Nilpotent(_) | CurvatureStatus::Zero));
        }
    }

    #[test]
    fn reduce_then_multiply_matches_iterates() {
        let a = Matrix::from_rows(
            &(),
            vec![vec![&xint(1) / &(&xint(2) - &xvar()), xvar()], vec![xconst(q()), &xint(1) + &xvar()]],
        );
        let s = QDiffSystem::new(a).unwrap();
        for l in 2..=6 {
            let fast = curvature(&s, l).unwrap();
            let slow = curvature_from_iterates(&s, l).unwrap();
            assert!(fast.same_as(&slow), "order {l}");
        }
    }

    #[test]
    fn scan_summaries() {
        let r = curvature_scan(&telescoping(), 2, 20, ScanMode::Zero, false).unwrap();
        assert_eq!(r.summary.kind, SummaryKind::AllZero);
        assert!(r.summary.evidence_of_triviality);
        let m1 = QDiffSystem::scalar(xint(-1)).unwrap();
        let r = curvature_scan(&m1, 3, 50, ScanMode::Order(8), true).unwrap();
        assert_eq!(r.summary.kind, SummaryKind::ConstantOrder(2));
        assert!(curvature_scan(&m1, 1, 5, ScanMode::Zero, false).is_err());
    }

    #[test]
    fn roots_of_unity() {
        let sq = QDiffSystem::scalar(xconst(q())).unwrap();
        assert!(root_of_unity_trivial(&sq, 3).unwrap());
        assert!(!root_of_unity_trivial(&QDiffSystem::scalar(xint(2)).unwrap(), 3).unwrap());
        assert!(root_of_unity_trivial(&QDiffSystem::identity(2), 4).unwrap());
    }

    #[test]
    fn twisted_identity_holds_at_every_order() {
        let s = QDiffSystem::scalar(&xint(2) / &(&xint(1) - &xvar())).unwrap();
        for l in 2..=8 {
            assert!(twisted_place_identity_holds(&s, l).unwrap(), "order {l}");
            assert_eq!(place_identity_holds(&s, l).unwrap(), l % 2 == 1, "order {l}");
        }
    }
}
