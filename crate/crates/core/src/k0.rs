//! Projective-module calculus and K0 bookkeeping.
//!
//! A class `[P_+] - [P_-]` is stored as two lists of modules. After
//! [`split_k0`] both sides have equal rank. With `m` the ambient rank of the
//! minus side, `M = (+P_+) + complement(+P_-)` has class `sigma + [R^m]`,
//! so sigma vanishes in reduced K0 exactly when `M` is stably free.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::chain::{validate_complex, ChainError, Homotopy, ProjComplex, ProjModule};
use crate::linalg::{image_basis, solve_integer, solve_linear, IntMatrix, LinalgError, Mat};
use crate::report::VerifyReport;
use crate::ring::{RingDescriptor, RingElem, RingError, RingKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum K0Error {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("operation `{op}` is not supported over the {kind} ring")]
    Unsupported { op: &'static str, kind: RingKind },
    #[error("idempotent has an invalid trace {0}")]
    BadTrace(String),
    #[error("{0}")]
    NoWitness(String),
}

impl From<LinalgError> for K0Error {
    fn from(e: LinalgError) -> Self {
        K0Error::Chain(e.into())
    }
}

impl From<RingError> for K0Error {
    fn from(e: RingError) -> Self {
        K0Error::Chain(e.into())
    }
}

pub fn make_projective(e: Mat) -> Result<ProjModule, ChainError> {
    ProjModule::new(e)
}

/// The module cut out by `1 - e`.
pub fn complement(p: &ProjModule) -> ProjModule {
    let one = Mat::identity(p.ring(), p.ambient_rank());
    let e = one.sub(p.idempotent()).expect("same shape");
    ProjModule::new_unchecked(e).expect("square")
}

/// Rank in K0(Z): trace of the idempotent after augmentation for group
/// rings, the rational part of the trace for quadratic orders.
pub fn rank(p: &ProjModule) -> Result<usize, K0Error> {
    let ring = p.ring();
    let e = p.idempotent();
    let mut t = BigInt::zero();
    for i in 0..e.rows() {
        let x = e.get(i, i);
        match (ring, x) {
            (RingDescriptor::Integers, RingElem::Int(n)) => t += n,
            (RingDescriptor::GroupRing(_), _) => t += ring.augment(x)?,
            (RingDescriptor::Quadratic(_), RingElem::Quad(a, b)) => {
                if !b.is_zero() {
                    return Err(K0Error::BadTrace(format!("irrational diagonal entry {x}")));
                }
                t += a;
            }
            (RingDescriptor::Laurent(_), _) => {
                return Err(K0Error::Unsupported { op: "rank", kind: RingKind::Laurent })
            }
            _ => return Err(RingError::Mismatch(ring.kind()).into()),
        }
    }
    if t.is_negative() || t > BigInt::from(e.rows()) {
        return Err(K0Error::BadTrace(t.to_string()));
    }
    Ok(t.to_usize().expect("bounded by the ambient rank"))
}

fn direct_sum_all(ring: &RingDescriptor, ms: &[ProjModule]) -> ProjModule {
    let blocks: Vec<Mat> = ms.iter().map(|m| m.idempotent().clone()).collect();
    ProjModule::new_unchecked(Mat::block_diagonal(ring, &blocks).expect("square blocks")).expect("square")
}

/// Formal difference `sum plus - sum minus`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct K0Class {
    ring: RingDescriptor,
    pub plus: Vec<ProjModule>,
    pub minus: Vec<ProjModule>,
}

impl K0Class {
    pub fn new(ring: &RingDescriptor, plus: Vec<ProjModule>, minus: Vec<ProjModule>) -> Result<Self, K0Error> {
        if plus.iter().chain(&minus).any(|m| m.ring() != ring) {
            return Err(RingError::DescriptorMismatch.into());
        }
        Ok(K0Class { ring: ring.clone(), plus, minus })
    }

    pub fn zero(ring: &RingDescriptor) -> Self {
        K0Class { ring: ring.clone(), plus: Vec::new(), minus: Vec::new() }
    }

    pub fn of_module(p: &ProjModule) -> Self {
        K0Class { ring: p.ring().clone(), plus: vec![p.clone()], minus: Vec::new() }
    }

    pub fn ring(&self) -> &RingDescriptor {
        &self.ring
    }

    pub fn neg(&self) -> Self {
        K0Class { ring: self.ring.clone(), plus: self.minus.clone(), minus: self.plus.clone() }
    }

    pub fn is_empty(&self) -> bool {
        self.plus.is_empty() && self.minus.is_empty()
    }

    pub fn plus_module(&self) -> ProjModule {
        direct_sum_all(&self.ring, &self.plus)
    }

    pub fn minus_module(&self) -> ProjModule {
        direct_sum_all(&self.ring, &self.minus)
    }

    /// `(+plus) + complement(+minus)`; stably free iff the class is a
    /// multiple of the free class.
    pub fn difference_module(&self) -> ProjModule {
        self.plus_module().direct_sum(&complement(&self.minus_module())).expect("same ring")
    }

    pub fn minus_ambient(&self) -> usize {
        self.minus.iter().map(ProjModule::ambient_rank).sum()
    }
}

/// `[X] = sum over n of (-1)^n [X_n]`.
pub fn k0_class_of_complex(x: &ProjComplex) -> Result<K0Class, K0Error> {
    let rep = validate_complex(x);
    if !rep.is_ok() {
        return Err(ChainError::from_report("K0 class of an invalid complex", &rep).into());
    }
    let mut c = K0Class::zero(x.ring());
    for n in x.degrees() {
        let m = x.module(n).expect("in range").clone();
        if n.rem_euclid(2) == 0 {
            c.plus.push(m);
        } else {
            c.minus.push(m);
        }
    }
    Ok(c)
}

/// Exhibits `P + R^a = R^b`: `iso` is `b x (m + a)` and `iso_inverse` is
/// `(m + a) x b`, mutually inverse on `im diag(e, 1)` and `R^b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StableFreenessWitness {
    pub a: usize,
    pub b: usize,
    pub iso: Mat,
    pub iso_inverse: Mat,
}

impl StableFreenessWitness {
    /// Witness for a module whose idempotent is diagonal with 0/1 entries:
    /// `iso` selects the coordinates carrying a 1.
    pub fn coordinate(p: &ProjModule) -> Option<Self> {
        let ring = p.ring();
        let e = p.idempotent();
        let m = e.rows();
        let mut ones = Vec::new();
        for i in 0..m {
            for j in 0..m {
                let x = e.get(i, j);
                if i == j && ring.is_one(x) {
                    ones.push(i);
                } else if !ring.is_zero(x) {
                    return None;
                }
            }
        }
        let iso = Mat::identity(ring, m).select_rows(&ones);
        Some(StableFreenessWitness { a: 0, b: ones.len(), iso_inverse: iso.transpose(), iso })
    }
}

pub fn verify_stable_freeness(p: &ProjModule, w: &StableFreenessWitness) -> VerifyReport {
    let mut rep = VerifyReport::new();
    let ring = p.ring();
    let m = p.ambient_rank();
    if (w.iso.rows(), w.iso.cols()) != (w.b, m + w.a) || (w.iso_inverse.rows(), w.iso_inverse.cols()) != (m + w.a, w.b)
    {
        rep.push(
            "witness_shape",
            None,
            format!(
                "iso {}x{} and inverse {}x{} for m={m}, a={}, b={}",
                w.iso.rows(),
                w.iso.cols(),
                w.iso_inverse.rows(),
                w.iso_inverse.cols(),
                w.a,
                w.b
            ),
        );
        return rep;
    }
    if w.iso.ring() != ring || w.iso_inverse.ring() != ring {
        rep.push("witness_ring", None, "witness is over a different ring");
        return rep;
    }
    let e = Mat::block_diagonal(ring, &[p.idempotent().clone(), Mat::identity(ring, w.a)]).expect("square blocks");
    let check = |rep: &mut VerifyReport, code: &str, lhs: Result<Mat, LinalgError>, rhs: &Mat| match lhs {
        Ok(l) => rep.expect_eq(code, None, &l, rhs),
        Err(err) => rep.push(code, None, err.to_string()),
    };
    check(&mut rep, "iso_not_compatible", w.iso.mul(&e), &w.iso);
    check(&mut rep, "inverse_not_compatible", e.mul(&w.iso_inverse), &w.iso_inverse);
    check(&mut rep, "inverse_after_iso", w.iso_inverse.mul(&w.iso), &e);
    check(&mut rep, "iso_after_inverse", w.iso.mul(&w.iso_inverse), &Mat::identity(ring, w.b));
    rep
}

/// Witness `im(e) = Z^r` for an integer idempotent: `iso_inverse` is a
/// lattice basis `B` of `im(e)` and `iso = L e` with `L B = 1`.
pub fn integer_basis_witness(p: &ProjModule) -> Result<StableFreenessWitness, K0Error> {
    let ring = p.ring();
    if ring.kind() != RingKind::Integers {
        return Err(K0Error::Unsupported { op: "integer_basis_witness", kind: ring.kind() });
    }
    let e = p.idempotent();
    let b = image_basis(&e.flatten()?);
    let r = b.cols();
    let x = solve_integer(&b.transpose(), &IntMatrix::identity(r))
        .ok_or_else(|| K0Error::NoWitness("image of the idempotent is not saturated".into()))?;
    let l = Mat::from_coordinate_columns(ring, r, &x.transpose())?;
    let inv = Mat::from_coordinate_columns(ring, e.rows(), &b)?;
    Ok(StableFreenessWitness { a: 0, b: r, iso: l.mul(e)?, iso_inverse: inv })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObstructionReport {
    pub chi: i64,
    /// Rank-zero normalized: both sides have equal rank.
    pub sigma: K0Class,
    /// Certifies that `sigma.difference_module()` is stably free.
    pub sigma_zero_witness: Option<StableFreenessWitness>,
}

impl ObstructionReport {
    pub fn verify_witness(&self) -> Option<VerifyReport> {
        let w = self.sigma_zero_witness.as_ref()?;
        Some(verify_stable_freeness(&self.sigma.difference_module(), w))
    }
}

impl fmt::Display for ObstructionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chi = {}, sigma: {} plus, {} minus", self.chi, self.sigma.plus.len(), self.sigma.minus.len())?;
        if self.sigma_zero_witness.is_some() {
            write!(f, ", sigma = 0 (witnessed)")?;
        }
        Ok(())
    }
}

fn total_rank(ms: &[ProjModule]) -> Result<i64, K0Error> {
    let mut t = 0i64;
    for m in ms {
        t += rank(m)? as i64;
    }
    Ok(t)
}

/// `(chi, sigma)`: chi is the rank difference and sigma pads the smaller
/// side with one free module so both ranks agree.
pub fn split_k0(c: &K0Class) -> Result<ObstructionReport, K0Error> {
    let ring = c.ring().clone();
    if !matches!(ring.kind(), RingKind::Integers | RingKind::GroupRing | RingKind::Quadratic) {
        return Err(K0Error::Unsupported { op: "split_k0", kind: ring.kind() });
    }
    let chi = total_rank(&c.plus)? - total_rank(&c.minus)?;
    let mut sigma = c.clone();
    let pad = ProjModule::free(&ring, chi.unsigned_abs() as usize);
    if chi > 0 {
        sigma.minus.push(pad);
    } else if chi < 0 {
        sigma.plus.push(pad);
    }
    let witness = StableFreenessWitness::coordinate(&sigma.difference_module());
    Ok(ObstructionReport { chi, sigma, sigma_zero_witness: witness })
}

/// Certifies `[X] = [Y]` via a contraction of `D = cone(X -> Y)`: with
/// `D_n = Y_n + X_{n-1}`, `iso = d + gamma` maps the odd part of `D`
/// isomorphically onto the even part, so `Y_odd + X_even = Y_even + X_odd`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct K0EqualityWitness {
    pub cone: ProjComplex,
    pub contraction: Homotopy,
    pub iso: Mat,
    pub iso_inverse: Mat,
}

/// Degrees of `x` of the given parity, in increasing order.
pub(crate) fn parity_degrees(x: &ProjComplex, odd: bool) -> Vec<i64> {
    x.degrees().filter(|n| (n.rem_euclid(2) == 1) == odd).collect()
}

fn parity_idem(x: &ProjComplex, odd: bool) -> Mat {
    let blocks: Vec<Mat> = parity_degrees(x, odd).into_iter().map(|n| x.idem(n)).collect();
    Mat::block_diagonal(x.ring(), &blocks).expect("square blocks")
}

/// Block matrix from the degrees of one parity to the other, filled by
/// `entry(target_degree, source_degree)`.
fn parity_map(x: &ProjComplex, from_odd: bool, mut entry: impl FnMut(i64, i64) -> Option<Mat>) -> Result<Mat, K0Error> {
    let src = parity_degrees(x, from_odd);
    let dst = parity_degrees(x, !from_odd);
    let rs: Vec<usize> = dst.iter().map(|&n| x.ambient_rank(n)).collect();
    let cs: Vec<usize> = src.iter().map(|&n| x.ambient_rank(n)).collect();
    Ok(Mat::assemble(x.ring(), &rs, &cs, |i, j| entry(dst[i], src[j]))?)
}

/// Contraction `gamma` with `d gamma + gamma d = 1`, solved degree by
/// degree from the bottom.
pub fn contract(x: &ProjComplex) -> Result<Homotopy, K0Error> {
    let ring = x.ring();
    let mut gammas: Vec<(i64, Mat)> = Vec::new();
    for n in x.degrees() {
        let prev = gammas
            .last()
            .map(|(_, g)| g.clone())
            .unwrap_or_else(|| Mat::zero(ring, x.ambient_rank(n), x.ambient_rank(n - 1)));
        let rhs = x.idem(n).sub(&prev.mul(&x.boundary(n))?)?;
        let up = x.boundary(n + 1);
        let sol = solve_linear(&up, &rhs)?
            .ok_or_else(|| K0Error::NoWitness(format!("complex is not contractible at degree {n}")))?;
        let g = x.idem(n + 1).mul(&sol)?.mul(&x.idem(n))?;
        gammas.push((n, g));
    }
    let s = Homotopy::new(x, x, gammas.into_iter().collect())?;
    Ok(s)
}

/// Builds the witness from a chain map whose cone is contractible (a chain
/// equivalence). Fails when no contraction exists over the ring.
pub fn k0_equality_witness(f: &crate::chain::ChainMap) -> Result<K0EqualityWitness, K0Error> {
    let cone = crate::chain::mapping_cone(f)?;
    let gamma = contract(&cone)?;
    let psi_on = |from_odd: bool| {
        parity_map(&cone, from_odd, |t, s| match t - s {
            -1 => Some(cone.boundary(s)),
            1 => Some(gamma.component(s)),
            _ => None,
        })
    };
    let iso = psi_on(true)?;
    let back = psi_on(false)?;
    let e_odd = parity_idem(&cone, true);
    // (d + gamma)^2 = 1 + gamma^2 on the odd part; gamma^2 raises degree by
    // two, so the geometric series terminates.
    let g2 = back.mul(&iso)?.sub(&e_odd)?;
    let mut inv_series = e_odd.clone();
    let mut power = e_odd.clone();
    for _ in 0..cone.len() {
        power = power.mul(&g2)?.neg();
        if power.is_zero() {
            break;
        }
        inv_series = inv_series.add(&power)?;
    }
    let iso_inverse = inv_series.mul(&back)?;
    Ok(K0EqualityWitness { cone, contraction: gamma, iso, iso_inverse })
}

pub fn verify_k0_equality(w: &K0EqualityWitness) -> VerifyReport {
    let mut rep = VerifyReport::new();
    let x = &w.cone;
    let id = crate::chain::ChainMap::identity(x);
    let zero = crate::chain::ChainMap::zero(x, x);
    rep.absorb(crate::chain::verify_homotopy(&w.contraction, &id, &zero).scoped("contraction"));
    let e_odd = parity_idem(x, true);
    let e_even = parity_idem(x, false);
    let mut check = |code: &str, lhs: Result<Mat, LinalgError>, rhs: &Mat| match lhs {
        Ok(l) => rep.expect_eq(code, None, &l, rhs),
        Err(err) => rep.push(code, None, err.to_string()),
    };
    check("iso_not_compatible", e_even.mul(&w.iso).and_then(|m| m.mul(&e_odd)), &w.iso);
    check("inverse_after_iso", w.iso_inverse.mul(&w.iso), &e_odd);
    check("iso_after_inverse", w.iso.mul(&w.iso_inverse), &e_even);
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::ChainMap;
    use crate::ring::GroupTable;
    use std::collections::BTreeMap;

    fn q5() -> RingDescriptor {
        RingDescriptor::quadratic(-5).unwrap()
    }

    /// Outer-product idempotent for the ideal (2, 1 + sqrt(-5)).
    fn ideal_idem() -> Mat {
        let q = q5();
        Mat::from_rows(
            &q,
            vec![
                vec![q.quad(-2, 0).unwrap(), q.quad(-1, -1).unwrap()],
                vec![q.quad(1, -1).unwrap(), q.quad(3, 0).unwrap()],
            ],
        )
        .unwrap()
    }

    #[test]
    fn ideal_idempotent_squares_to_itself() {
        // by hand: row 0 times col 0 is 4 + (-1 - w)(1 - w) = 4 - (1 + 5) = -2
        let q = q5();
        let a = q.quad(-2, 0).unwrap();
        let b = q.quad(-1, -1).unwrap();
        let c = q.quad(1, -1).unwrap();
        let e00 = q.add(&q.mul(&a, &a).unwrap(), &q.mul(&b, &c).unwrap()).unwrap();
        assert_eq!(e00, a);
        assert!(make_projective(ideal_idem()).is_ok());
        assert!(make_projective(Mat::from_ints(&RingDescriptor::Integers, &[&[1, 1], &[0, 1]])).is_err());
    }

    #[test]
    fn complement_examples() {
        let z = RingDescriptor::Integers;
        assert_eq!(complement(&ProjModule::free(&z, 3)), ProjModule::zero(&z, 3));
        assert_eq!(complement(&ProjModule::zero(&z, 2)), ProjModule::free(&z, 2));
        let q = q5();
        let c = complement(&make_projective(ideal_idem()).unwrap());
        let want = Mat::from_rows(
            &q,
            vec![
                vec![q.quad(3, 0).unwrap(), q.quad(1, 1).unwrap()],
                vec![q.quad(-1, 1).unwrap(), q.quad(-2, 0).unwrap()],
            ],
        )
        .unwrap();
        assert_eq!(c.idempotent(), &want);
    }

    #[test]
    fn rank_examples() {
        let z = RingDescriptor::Integers;
        assert_eq!(rank(&ProjModule::free(&z, 3)).unwrap(), 3);
        assert_eq!(rank(&ProjModule::zero(&z, 3)).unwrap(), 0);
        let p = make_projective(ideal_idem()).unwrap();
        assert_eq!(rank(&p).unwrap(), 1);
        // half the Z-rank of the image lattice
        assert_eq!(p.lattice_basis().unwrap().cols(), 2);
        let c2 = RingDescriptor::group_ring(GroupTable::cyclic(2));
        let h = c2.group_elem(&[(1, 0), (1, 1)]).unwrap();
        // (1 + g)/2 is not integral, but diag(1, 0) is
        assert!(make_projective(Mat::scalar(&c2, h)).is_err());
        let e = Mat::from_rows(&c2, vec![vec![c2.one(), c2.zero()], vec![c2.zero(), c2.zero()]]).unwrap();
        assert_eq!(rank(&make_projective(e).unwrap()).unwrap(), 1);
    }

    #[test]
    fn class_of_complex() {
        let z = RingDescriptor::Integers;
        let x = ProjComplex::free(&z, 0, &[1, 1], vec![Mat::from_ints(&z, &[&[0]])]).unwrap();
        let c = k0_class_of_complex(&x).unwrap();
        assert_eq!((c.plus.len(), c.minus.len()), (1, 1));
        assert!(k0_class_of_complex(&ProjComplex::zero(&z)).unwrap().is_empty());
        let p = make_projective(ideal_idem()).unwrap();
        let c = k0_class_of_complex(&ProjComplex::concentrated(p.clone(), 1)).unwrap();
        assert_eq!(c.minus, vec![p]);
    }

    #[test]
    fn split_examples() {
        let z = RingDescriptor::Integers;
        let c = K0Class::new(&z, vec![ProjModule::free(&z, 3)], vec![ProjModule::free(&z, 1)]).unwrap();
        let r = split_k0(&c).unwrap();
        assert_eq!(r.chi, 2);
        assert!(r.verify_witness().unwrap().is_ok());
        let r = split_k0(&K0Class::zero(&z)).unwrap();
        assert_eq!(r.chi, 0);
        assert!(r.verify_witness().unwrap().is_ok());
        let p = make_projective(ideal_idem()).unwrap();
        let r = split_k0(&K0Class::of_module(&p).neg()).unwrap();
        assert_eq!(r.chi, -1);
        assert!(r.sigma_zero_witness.is_none());
        assert_eq!(rank(&r.sigma.plus_module()).unwrap(), rank(&r.sigma.minus_module()).unwrap());
    }

    #[test]
    fn stable_freeness_examples() {
        let z = RingDescriptor::Integers;
        let p = ProjModule::free(&z, 2);
        let w = StableFreenessWitness { a: 0, b: 2, iso: Mat::identity(&z, 2), iso_inverse: Mat::identity(&z, 2) };
        assert!(verify_stable_freeness(&p, &w).is_ok());
        let p0 = ProjModule::zero(&z, 0);
        let one = Mat::identity(&z, 1);
        let w = StableFreenessWitness { a: 1, b: 1, iso: one.clone(), iso_inverse: one };
        assert!(verify_stable_freeness(&p0, &w).is_ok());
        let q = q5();
        let p = make_projective(ideal_idem()).unwrap();
        let wrong = StableFreenessWitness {
            a: 0,
            b: 1,
            iso: Mat::from_rows(&q, vec![vec![q.one(), q.zero()]]).unwrap(),
            iso_inverse: Mat::from_rows(&q, vec![vec![q.one()], vec![q.zero()]]).unwrap(),
        };
        assert!(!verify_stable_freeness(&p, &wrong).is_ok());
    }

    #[test]
    fn contraction_of_cone() {
        let z = RingDescriptor::Integers;
        let x = ProjComplex::free(&z, 0, &[1, 1], vec![Mat::from_ints(&z, &[&[0]])]).unwrap();
        let w = k0_equality_witness(&ChainMap::identity(&x)).unwrap();
        assert!(verify_k0_equality(&w).is_ok());
        let pt = ProjComplex::free(&z, 0, &[1], vec![]).unwrap();
        let two = ChainMap::new(&pt, &pt, BTreeMap::from([(0, Mat::from_ints(&z, &[&[2]]))])).unwrap();
        assert!(matches!(k0_equality_witness(&two), Err(K0Error::NoWitness(_))));
    }
}
