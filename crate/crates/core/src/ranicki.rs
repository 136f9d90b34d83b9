//! The instant finiteness obstruction of a chain domination, the trim
//! lemma and free replacement.
//!
//! For a domination `(A, C, i, r, s)` with `C` free in degrees `0..=n`, put
//! `p = i r` and `h_q = i s^q r : C_k -> C_{k+q}`. On `F = C_0 + ... + C_n`
//! the block matrix with diagonal `p, 1-p, p, ...`, superdiagonal
//! `(-1)^(k-1) d` and entries `(-1)^k h_(j-k)` below the diagonal is an
//! idempotent `P`, and `A` is chain equivalent to
//! `F_n -> ... -> F_1 -> im(P)` with `F_m = C_m + ... + C_n`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::chain::{
    homology, validate_complex, verify_chain_map, verify_equivalence, verify_homotopy, ChainEquivalence, ChainError,
    ChainMap, HomologyResult, Homotopy, ProjComplex, ProjModule,
};
use crate::k0::{
    integer_basis_witness, k0_class_of_complex, k0_equality_witness, parity_degrees, split_k0, verify_k0_equality,
    verify_stable_freeness, K0EqualityWitness, K0Error, ObstructionReport, StableFreenessWitness,
};
use crate::linalg::{solve_linear, LinalgError, Mat};
use crate::quadratic::{class_ideal, decide_ideal, ClassVerdict};
use crate::report::VerifyReport;
use crate::ring::{RingDescriptor, RingKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RanickiError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    K0(#[from] K0Error),
    #[error("invalid domination: {0}")]
    InvalidDomination(VerifyReport),
    #[error("homology does not vanish in degree {degree}: {group}")]
    Precondition { degree: i64, group: String },
    #[error("witness rejected: {0}")]
    Witness(VerifyReport),
    #[error("internal identity failure: {0}")]
    Internal(String),
    #[error("{0}")]
    Unsupported(String),
}

impl From<LinalgError> for RanickiError {
    fn from(e: LinalgError) -> Self {
        RanickiError::Chain(e.into())
    }
}

/// `r . i ~ 1` on `A` via `s`, with `C` finite free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domination {
    pub a: ProjComplex,
    pub c: ProjComplex,
    pub i: ChainMap,
    pub r: ChainMap,
    pub s: Homotopy,
}

pub fn verify_domination(d: &Domination) -> VerifyReport {
    let mut rep = VerifyReport::new();
    rep.absorb(validate_complex(&d.a).scoped("A"));
    rep.absorb(validate_complex(&d.c).scoped("C"));
    if !d.c.is_free() {
        rep.push("C.not_free", None, "the dominating complex must be free");
    }
    if !d.c.is_empty() && d.c.bottom() < 0 {
        rep.push("C.negative_degree", Some(d.c.bottom()), "the dominating complex must start in degree 0");
    }
    if !d.a.is_empty() && d.a.bottom() < 0 {
        rep.push("A.negative_degree", Some(d.a.bottom()), "the dominated complex must start in degree 0");
    }
    if d.i.source() != &d.a || d.i.target() != &d.c {
        rep.push("i.ends", None, "i must map A to C");
    }
    if d.r.source() != &d.c || d.r.target() != &d.a {
        rep.push("r.ends", None, "r must map C to A");
    }
    if d.s.source() != &d.a || d.s.target() != &d.a {
        rep.push("s.ends", None, "s must be a homotopy on A");
    }
    if !rep.is_ok() {
        return rep;
    }
    rep.absorb(verify_chain_map(&d.i).scoped("i"));
    rep.absorb(verify_chain_map(&d.r).scoped("r"));
    if !rep.is_ok() {
        return rep;
    }
    match d.r.compose(&d.i) {
        Ok(ri) => rep.absorb(verify_homotopy(&d.s, &ChainMap::identity(&d.a), &ri).scoped("s")),
        Err(e) => rep.push("s.compose", None, e.to_string()),
    }
    rep
}

/// The data of the construction. Blocks of `F` are ordered `C_0, ..., C_n`;
/// `boundaries[m - 1]` is `F_m -> F_{m-1}`, `i_maps[m]` is `A_m -> F_m`,
/// `r_maps[m]` is `F_m -> A_m` and `ir_homotopy[m]` is `F_m -> F_{m+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstantData {
    ring: RingDescriptor,
    pub c_ranks: Vec<usize>,
    pub f_rank: usize,
    pub p: Mat,
    pub boundaries: Vec<Mat>,
    pub i_maps: Vec<Mat>,
    pub r_maps: Vec<Mat>,
    pub ir_homotopy: Vec<Mat>,
}

impl InstantData {
    pub fn ring(&self) -> &RingDescriptor {
        &self.ring
    }

    /// Top degree `n` of `C`.
    pub fn n(&self) -> usize {
        self.c_ranks.len().saturating_sub(1)
    }

    /// Rank of `F_m = C_m + ... + C_n`.
    pub fn rank_f(&self, m: usize) -> usize {
        self.c_ranks.iter().skip(m).sum()
    }

    /// The tail map `F_0 -> F_{-1}`, which is `1 - P`; the pattern then
    /// alternates `P, 1 - P, ...`.
    pub fn tail(&self) -> Mat {
        Mat::identity(&self.ring, self.f_rank).sub(&self.p).expect("square")
    }
}

struct Blocks<'a> {
    d: &'a Domination,
    n: usize,
    ranks: Vec<usize>,
}

impl Blocks<'_> {
    fn ring(&self) -> &RingDescriptor {
        self.d.c.ring()
    }

    fn one(&self, k: usize) -> Mat {
        Mat::identity(self.ring(), self.ranks[k])
    }

    fn p(&self, k: usize) -> Mat {
        let k = k as i64;
        self.d.i.component(k).mul(&self.d.r.component(k)).expect("conformable")
    }

    fn bd(&self, k: usize) -> Mat {
        self.d.c.boundary(k as i64)
    }

    /// `s^q : A_k -> A_{k+q}`.
    fn s_power(&self, k: usize, q: usize) -> Mat {
        let mut m = self.d.a.idem(k as i64);
        for j in 0..q {
            m = self.d.s.component((k + j) as i64).mul(&m).expect("conformable");
        }
        m
    }

    /// `h_q = i s^q r : C_k -> C_{k+q}`.
    fn h(&self, q: usize, k: usize) -> Mat {
        let i = self.d.i.component((k + q) as i64);
        i.mul(&self.s_power(k, q)).and_then(|m| m.mul(&self.d.r.component(k as i64))).expect("conformable")
    }

    fn signed(m: Mat, negative: bool) -> Mat {
        if negative {
            m.neg()
        } else {
            m
        }
    }

    fn p_block(&self, j: usize, k: usize) -> Option<Mat> {
        if j == k {
            Some(if k.is_multiple_of(2) { self.p(k) } else { self.one(k).sub(&self.p(k)).expect("square") })
        } else if j + 1 == k {
            Some(Self::signed(self.bd(k), (k - 1) % 2 == 1))
        } else if j > k {
            Some(Self::signed(self.h(j - k, k), k % 2 == 1))
        } else {
            None
        }
    }

    /// Block `(j, k)` of `D_m : F_m -> F_{m-1}`, for `j >= m - 1` and
    /// `k >= m`.
    fn d_block(&self, m: usize, j: usize, k: usize) -> Option<Mat> {
        if j + 1 == m {
            return (k == m).then(|| self.bd(k));
        }
        let e = k - m;
        if j == k {
            Some(if e.is_multiple_of(2) { self.one(k).sub(&self.p(k)).expect("square") } else { self.p(k) })
        } else if j + 1 == k {
            Some(Self::signed(self.bd(k), e % 2 == 1))
        } else if j > k {
            Some(Self::signed(self.h(j - k, k), e.is_multiple_of(2)))
        } else {
            None
        }
    }

    fn p_matrix(&self) -> Result<Mat, LinalgError> {
        Mat::assemble(self.ring(), &self.ranks, &self.ranks, |j, k| self.p_block(j, k))
    }

    fn d_matrix(&self, m: usize) -> Result<Mat, LinalgError> {
        let rows = &self.ranks[m - 1..];
        let cols = &self.ranks[m..];
        Mat::assemble(self.ring(), rows, cols, |a, b| self.d_block(m, a + m - 1, b + m))
    }

    fn i_matrix(&self, m: usize) -> Result<Mat, LinalgError> {
        let a_rank = self.d.a.ambient_rank(m as i64);
        Mat::assemble(self.ring(), &self.ranks[m..], &[a_rank], |j, _| {
            let k = j + m;
            Some(self.d.i.component(k as i64).mul(&self.s_power(m, k - m)).expect("conformable"))
        })
    }

    fn r_matrix(&self, m: usize) -> Result<Mat, LinalgError> {
        let a_rank = self.d.a.ambient_rank(m as i64);
        Mat::assemble(self.ring(), &[a_rank], &self.ranks[m..], |_, k| (k == 0).then(|| self.d.r.component(m as i64)))
    }

    /// Projection `F_m -> F_{m+1}` forgetting `C_m`.
    fn k_matrix(&self, m: usize) -> Result<Mat, LinalgError> {
        let rows = if m < self.n { &self.ranks[m + 1..] } else { &[][..] };
        Mat::assemble(self.ring(), rows, &self.ranks[m..], |j, k| (j + 1 == k).then(|| self.one(k + m)))
    }
}

/// Assembles `P`, the boundaries of `F_*`, `I`, `R` and the homotopy
/// `IR ~ 1`, then audits every identity of the construction.
pub fn build_instant(d: &Domination) -> Result<InstantData, RanickiError> {
    let rep = verify_domination(d);
    if !rep.is_ok() {
        return Err(RanickiError::InvalidDomination(rep));
    }
    let n = d.c.top().max(0) as usize;
    let ranks: Vec<usize> = (0..=n).map(|k| d.c.ambient_rank(k as i64)).collect();
    let b = Blocks { d, n, ranks: ranks.clone() };
    let inst = InstantData {
        ring: d.c.ring().clone(),
        f_rank: ranks.iter().sum(),
        p: b.p_matrix()?,
        boundaries: (1..=n).map(|m| b.d_matrix(m)).collect::<Result<_, _>>()?,
        i_maps: (0..=n).map(|m| b.i_matrix(m)).collect::<Result<_, _>>()?,
        r_maps: (0..=n).map(|m| b.r_matrix(m)).collect::<Result<_, _>>()?,
        ir_homotopy: (0..=n).map(|m| b.k_matrix(m)).collect::<Result<_, _>>()?,
        c_ranks: ranks,
    };
    let audit = audit_instant(d, &inst)?;
    if !audit.is_ok() {
        return Err(RanickiError::Internal(audit.to_string()));
    }
    Ok(inst)
}

fn expect(rep: &mut VerifyReport, code: &str, degree: Option<i64>, lhs: Result<Mat, LinalgError>, rhs: &Mat) {
    match lhs {
        Ok(l) => rep.expect_eq(code, degree, &l, rhs),
        Err(e) => rep.push(code, degree, e.to_string()),
    }
}

/// Every identity the construction promises: `P^2 = P`, `d^2 = 0` including
/// the periodic tail, `R I = r i`, and the chain equivalence between `A` and
/// the finite reduction.
pub fn audit_instant(d: &Domination, inst: &InstantData) -> Result<VerifyReport, RanickiError> {
    let mut rep = VerifyReport::new();
    let ring = inst.ring();
    let p = &inst.p;
    expect(&mut rep, "P_idempotent", None, p.mul(p), p);
    let tail = inst.tail();
    let zero_f = Mat::zero(ring, inst.f_rank, inst.f_rank);
    expect(&mut rep, "tail_squared", Some(-1), p.mul(&tail), &zero_f);
    if let Some(d1) = inst.boundaries.first() {
        let z = Mat::zero(ring, inst.f_rank, d1.cols());
        expect(&mut rep, "tail_after_d1", Some(0), tail.mul(d1), &z);
        expect(&mut rep, "d1_in_image", Some(1), p.mul(d1), d1);
    }
    for m in 2..=inst.n() {
        let (lo, hi) = (&inst.boundaries[m - 2], &inst.boundaries[m - 1]);
        expect(&mut rep, "boundary_squared", Some(m as i64), lo.mul(hi), &Mat::zero(ring, lo.rows(), hi.cols()));
    }
    for m in 0..=inst.n() {
        let ri = d.r.component(m as i64).mul(&d.i.component(m as i64))?;
        expect(&mut rep, "RI_equals_ri", Some(m as i64), inst.r_maps[m].mul(&inst.i_maps[m]), &ri);
    }
    let i0 = &inst.i_maps[0];
    expect(&mut rep, "tail_after_I", Some(0), tail.mul(i0), &Mat::zero(ring, inst.f_rank, i0.cols()));
    // degree 0 against the tail: d_1 K_0 + 1 (1 - P) = 1 - I_0 R_0
    let lhs = match inst.boundaries.first() {
        Some(d1) => d1.mul(&inst.ir_homotopy[0]).and_then(|m| m.add(&tail)),
        None => Ok(tail.clone()),
    };
    let rhs = Mat::identity(ring, inst.f_rank).sub(&i0.mul(&inst.r_maps[0])?)?;
    expect(&mut rep, "IR_homotopy", Some(0), lhs, &rhs);
    let g = reduction_complex(inst)?;
    let eq = instant_equivalence(d, inst, &g)?;
    rep.absorb(verify_equivalence(&eq).scoped("equivalence"));
    Ok(rep)
}

/// `F_n -> ... -> F_1 -> im(P)`, with `im(P)` in degree 0.
pub fn finite_projective_reduction(inst: &InstantData) -> Result<ProjComplex, RanickiError> {
    reduction_complex(inst)
}

fn reduction_complex(inst: &InstantData) -> Result<ProjComplex, RanickiError> {
    let ring = inst.ring();
    let mut modules = vec![ProjModule::new_unchecked(inst.p.clone())?];
    modules.extend((1..=inst.n()).map(|m| ProjModule::free(ring, inst.rank_f(m))));
    Ok(ProjComplex::new(ring, 0, modules, inst.boundaries.clone())?)
}

/// `R : G -> A` and `I : A -> G` with homotopies `K` on the reduction `G`
/// and `s` on `A`.
pub fn instant_equivalence(
    d: &Domination,
    inst: &InstantData,
    g: &ProjComplex,
) -> Result<ChainEquivalence, RanickiError> {
    let n = inst.n() as i64;
    let ring = inst.ring();
    let in_range = |m: i64| m >= 0 && m <= n;
    let forward = ChainMap::from_fn(g, &d.a, |m| {
        if !in_range(m) {
            return Ok(Mat::zero(ring, d.a.ambient_rank(m), g.ambient_rank(m)));
        }
        let r = inst.r_maps[m as usize].clone();
        Ok(if m == 0 { r.mul(&inst.p)? } else { r })
    })?;
    let backward = ChainMap::from_fn(&d.a, g, |m| {
        if !in_range(m) {
            return Ok(Mat::zero(ring, g.ambient_rank(m), d.a.ambient_rank(m)));
        }
        Ok(inst.i_maps[m as usize].clone())
    })?;
    let source_homotopy = Homotopy::from_fn(g, g, |m| {
        if !in_range(m) {
            return Ok(Mat::zero(ring, g.ambient_rank(m + 1), g.ambient_rank(m)));
        }
        let k = inst.ir_homotopy[m as usize].clone();
        Ok(if m == 0 { k.mul(&inst.p)? } else { k })
    })?;
    Ok(ChainEquivalence { forward, backward, source_homotopy, target_homotopy: d.s.clone() })
}

/// Status of `sigma` after the obstruction pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SigmaStatus {
    /// A stable-freeness witness was built and verified.
    Witnessed,
    /// The quadratic class oracle decided the Steinitz ideal.
    Oracle(ClassVerdict),
    Unknown(String),
}

impl SigmaStatus {
    pub fn label(&self) -> &'static str {
        match self {
            SigmaStatus::Witnessed => "zero",
            SigmaStatus::Oracle(v) if v.is_principal() => "zero",
            SigmaStatus::Oracle(v) if v.is_non_principal() => "nonzero",
            _ => "unknown",
        }
    }
}

#[derive(Debug, Clone)]
pub struct FinitenessResult {
    pub report: ObstructionReport,
    pub instant: InstantData,
    pub reduction: ProjComplex,
    /// Certifies `[reduction] = [A]` in K0.
    pub equality: K0EqualityWitness,
    pub status: SigmaStatus,
}

/// `build_instant`, the finite reduction, its K0 class and the `(chi, sigma)`
/// split. For free `A` the vanishing witness is transported from the
/// contraction of `cone(R)`; over quadratic rings the class oracle runs with
/// `class_bound` (default: the Minkowski bound).
pub fn finiteness_obstruction(d: &Domination, class_bound: Option<u64>) -> Result<FinitenessResult, RanickiError> {
    let instant = build_instant(d)?;
    let reduction = finite_projective_reduction(&instant)?;
    let class = k0_class_of_complex(&reduction)?;
    let mut report = split_k0(&class)?;
    let eq = instant_equivalence(d, &instant, &reduction)?;
    let equality = k0_equality_witness(&eq.forward)?;
    let check = verify_k0_equality(&equality);
    if !check.is_ok() {
        return Err(RanickiError::Internal(check.to_string()));
    }
    let mut status = SigmaStatus::Unknown("no witness or oracle for this ring".into());
    if report.sigma_zero_witness.is_none() && d.a.is_free() && reduction.modules()[1..].iter().all(ProjModule::is_free)
    {
        let w = transport_witness(&report, &reduction, &d.a, &equality)?;
        let check = verify_stable_freeness(&report.sigma.difference_module(), &w);
        if !check.is_ok() {
            return Err(RanickiError::Internal(check.to_string()));
        }
        report.sigma_zero_witness = Some(w);
    }
    if report.sigma_zero_witness.is_none() && d.a.ring().kind() == RingKind::Integers {
        // every projective over Z is free
        let w = integer_basis_witness(&report.sigma.difference_module())?;
        let check = verify_stable_freeness(&report.sigma.difference_module(), &w);
        if !check.is_ok() {
            return Err(RanickiError::Internal(check.to_string()));
        }
        report.sigma_zero_witness = Some(w);
    }
    if report.sigma_zero_witness.is_some() {
        status = SigmaStatus::Witnessed;
    } else if d.a.ring().kind() == RingKind::Quadratic {
        match class_ideal(&report.sigma) {
            Ok(ideal) => status = SigmaStatus::Oracle(decide_ideal(&ideal, class_bound)?),
            Err(e) => status = SigmaStatus::Unknown(e.to_string()),
        }
    }
    Ok(FinitenessResult { report, instant, reduction, equality, status })
}

/// The domination of `eq.target()` obtained by composing with `eq`:
/// `i' = i . back`, `r' = fwd . r` and `s' = T + fwd . s . back`, where `T`
/// is the target homotopy.
pub fn transport_domination(d: &Domination, eq: &ChainEquivalence) -> Result<Domination, RanickiError> {
    let a = eq.forward.target().clone();
    let i = d.i.compose(&eq.backward)?;
    let r = eq.forward.compose(&d.r)?;
    let s = Homotopy::from_fn(&a, &a, |n| {
        let moved = eq.forward.component(n + 1).mul(&d.s.component(n))?.mul(&eq.backward.component(n))?;
        Ok(eq.target_homotopy.component(n).add(&moved)?)
    })?;
    Ok(Domination { a, c: d.c.clone(), i, r, s })
}

/// `finiteness_obstruction` for a domination whose single non-free module
/// comes with a stable-freeness witness: `A` is first replaced by a free
/// complex and the domination moved across the replacement.
pub fn finiteness_obstruction_with_witness(
    d: &Domination,
    w: &StableFreenessWitness,
    class_bound: Option<u64>,
) -> Result<FinitenessResult, RanickiError> {
    let rep = verify_domination(d);
    if !rep.is_ok() {
        return Err(RanickiError::InvalidDomination(rep));
    }
    let (_, eq) = free_replacement(&d.a, w)?;
    let moved = transport_domination(d, &eq)?;
    let rep = verify_domination(&moved);
    if !rep.is_ok() {
        return Err(RanickiError::Internal(format!("transported domination: {rep}")));
    }
    finiteness_obstruction(&moved, class_bound)
}

/// Turns `iso : A_odd + G_even -> A_even + G_odd` (all of `A` and `G_odd`
/// free) into a stable-freeness witness for `sigma.difference_module()`.
fn transport_witness(
    report: &ObstructionReport,
    g: &ProjComplex,
    a: &ProjComplex,
    w: &K0EqualityWitness,
) -> Result<StableFreenessWitness, RanickiError> {
    let ring = g.ring();
    // coordinates of the difference module: even G blocks, plus padding,
    // then the (zero) complements of the minus side
    let mut pos = 0;
    let mut g_even = BTreeMap::new();
    for n in parity_degrees(g, false) {
        g_even.insert(n, pos);
        pos += g.ambient_rank(n);
    }
    let pad_plus = if report.chi < 0 { report.chi.unsigned_abs() as usize } else { 0 };
    let pad_at = pos;
    let m_total = report.sigma.difference_module().ambient_rank();
    let mut a_odd = BTreeMap::new();
    let mut apos = m_total;
    for n in parity_degrees(a, true) {
        a_odd.insert(n, apos);
        apos += a.ambient_rank(n);
    }
    let a_count = apos - m_total;
    // one row per coordinate of the odd part of the cone, then the padding
    let mut picks: Vec<usize> = Vec::new();
    for n in parity_degrees(&w.cone, true) {
        let start = a_odd.get(&n).copied().unwrap_or(0);
        picks.extend((0..a.ambient_rank(n)).map(|t| start + t));
        let start = g_even.get(&(n - 1)).copied().unwrap_or(0);
        picks.extend((0..g.ambient_rank(n - 1)).map(|t| start + t));
    }
    picks.extend(pad_at..pad_at + pad_plus);
    if picks.len() != w.iso.cols() + pad_plus {
        return Err(RanickiError::Internal("witness transport: coordinate count mismatch".into()));
    }
    let width = m_total + a_count;
    let mut theta = Mat::zero(ring, picks.len(), width);
    for (row, &col) in picks.iter().enumerate() {
        theta.set(row, col, ring.one())?;
    }
    let id = Mat::identity(ring, pad_plus);
    let iso = Mat::block_diagonal(ring, &[w.iso.clone(), id.clone()])?.mul(&theta)?;
    let inv = theta.transpose().mul(&Mat::block_diagonal(ring, &[w.iso_inverse.clone(), id])?)?;
    Ok(StableFreenessWitness { a: a_count, b: iso.rows(), iso, iso_inverse: inv })
}

/// One splitting step of the trim lemma: `section` satisfies
/// `d section = e` on the bottom module, so the next module splits as
/// `im(section d) + ker d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Splitting {
    pub degree: i64,
    pub boundary: Mat,
    pub bottom_idem: Mat,
    pub section: Mat,
}

pub fn verify_splitting(s: &Splitting) -> VerifyReport {
    let mut rep = VerifyReport::new();
    expect(&mut rep, "section", Some(s.degree), s.boundary.mul(&s.section), &s.bottom_idem);
    rep
}

#[derive(Debug, Clone)]
pub struct TrimResult {
    pub complex: ProjComplex,
    pub splittings: Vec<Splitting>,
}

/// Removes the degrees `<= k` of a complex whose homology vanishes there,
/// replacing the new bottom module by the kernel summand.
pub fn trim_below(x: &ProjComplex, k: i64) -> Result<TrimResult, RanickiError> {
    let rep = validate_complex(x);
    if !rep.is_ok() {
        return Err(ChainError::from_report("trim of an invalid complex", &rep).into());
    }
    if x.ring().kind() == RingKind::Laurent {
        return Err(RanickiError::Unsupported("trim_below needs solve_linear, unavailable over Laurent rings".into()));
    }
    let h: HomologyResult = homology(x)?;
    for n in x.degrees().filter(|&n| n <= k) {
        let g = h.at(n);
        if !g.is_zero() {
            return Err(RanickiError::Precondition { degree: n, group: g.to_string() });
        }
    }
    let ring = x.ring().clone();
    let mut cur = x.clone();
    let mut splittings = Vec::new();
    while !cur.is_empty() && cur.bottom() <= k {
        let b = cur.bottom();
        let d = cur.boundary(b + 1);
        let e = cur.idem(b);
        let sol = solve_linear(&d, &e)?
            .ok_or_else(|| RanickiError::Internal(format!("no splitting of the surjection onto degree {b}")))?;
        let section = cur.idem(b + 1).mul(&sol)?.mul(&e)?;
        let q = cur.idem(b + 1).sub(&section.mul(&d)?)?;
        splittings.push(Splitting { degree: b + 1, boundary: d, bottom_idem: e, section });
        let mut modules = cur.modules()[1..].to_vec();
        let boundaries = cur.boundaries().get(1..).map(<[Mat]>::to_vec).unwrap_or_default();
        if modules.is_empty() {
            cur = ProjComplex::zero(&ring);
            break;
        }
        modules[0] = ProjModule::new_unchecked(q)?;
        cur = ProjComplex::new(&ring, b + 1, modules, boundaries)?;
    }
    let complex = compress_bottom(&cur)?;
    let complex =
        if complex.modules().iter().all(|m| m.ambient_rank() == 0) { ProjComplex::zero(&ring) } else { complex };
    Ok(TrimResult { complex, splittings })
}

/// A bottom module cut out by a diagonal 0/1 idempotent is replaced by the
/// free module on the coordinates carrying a 1.
fn compress_bottom(x: &ProjComplex) -> Result<ProjComplex, RanickiError> {
    if x.is_empty() {
        return Ok(x.clone());
    }
    let bottom = x.module(x.bottom()).expect("nonempty");
    let Some(w) = StableFreenessWitness::coordinate(bottom) else { return Ok(x.clone()) };
    if bottom.is_free() {
        return Ok(x.clone());
    }
    let ring = x.ring();
    let mut modules = x.modules().to_vec();
    modules[0] = ProjModule::free(ring, w.b);
    let mut boundaries = x.boundaries().to_vec();
    if let Some(d) = boundaries.first_mut() {
        *d = w.iso.mul(d)?;
    }
    Ok(ProjComplex::new(ring, x.bottom(), modules, boundaries)?)
}

/// Replaces the single non-free module `P` (in degree `k`) using
/// `P + R^a = R^b`: add `R^a -> R^a` in degrees `k+1, k`, then move degree
/// `k` across the isomorphism. Returns the free complex and an equivalence
/// from `x` to it.
pub fn free_replacement(
    x: &ProjComplex,
    w: &StableFreenessWitness,
) -> Result<(ProjComplex, ChainEquivalence), RanickiError> {
    let non_free: Vec<i64> = x.degrees().filter(|&n| !x.module(n).expect("in range").is_free()).collect();
    let k = match non_free.as_slice() {
        [] => {
            let id = ChainMap::identity(x);
            let h = Homotopy::zero(x, x);
            let eq =
                ChainEquivalence { forward: id.clone(), backward: id, source_homotopy: h.clone(), target_homotopy: h };
            return Ok((x.clone(), eq));
        }
        [k] => *k,
        _ => {
            return Err(RanickiError::Unsupported(format!(
                "{} non-free modules; exactly one is supported",
                non_free.len()
            )))
        }
    };
    let p = x.module(k).expect("in range");
    let rep = verify_stable_freeness(p, w);
    if !rep.is_ok() {
        return Err(RanickiError::Witness(rep));
    }
    let ring = x.ring();
    let a = w.a;
    let lo = x.bottom().min(k);
    let hi = x.top().max(k + 1);
    // X' = X + (R^a -> R^a) in degrees k+1, k
    let extra = |n: i64| if n == k || n == k + 1 { a } else { 0 };
    let stab = ProjComplex::from_fn(
        ring,
        lo,
        hi,
        |n| ProjModule::new_unchecked(Mat::block_diagonal(ring, &[x.idem(n), Mat::identity(ring, extra(n))])?),
        |n| {
            let mut m = Mat::block_diagonal(ring, &[x.boundary(n), Mat::zero(ring, extra(n - 1), extra(n))])?;
            if n == k + 1 {
                let rows = [x.ambient_rank(k), a];
                let cols = [x.ambient_rank(k + 1), a];
                m = Mat::assemble(ring, &rows, &cols, |i, j| match (i, j) {
                    (0, 0) => Some(x.boundary(k + 1)),
                    (1, 1) => Some(Mat::identity(ring, a)),
                    _ => None,
                })?;
            }
            Ok(m)
        },
    )?;
    let y = ProjComplex::from_fn(
        ring,
        lo,
        hi,
        |n| Ok(if n == k { ProjModule::free(ring, w.b) } else { stab.module(n).expect("in range").clone() }),
        |n| {
            let d = stab.boundary(n);
            Ok(if n == k + 1 {
                w.iso.mul(&d)?
            } else if n == k {
                d.mul(&w.iso_inverse)?
            } else {
                d
            })
        },
    )?;
    let t = |n: i64| if n == k { w.iso.clone() } else { stab.idem(n) };
    let t_inv = |n: i64| if n == k { w.iso_inverse.clone() } else { stab.idem(n) };
    let incl = |n: i64| -> Result<Mat, LinalgError> {
        Mat::identity(ring, stab.ambient_rank(n))
            .select_cols(&(0..x.ambient_rank(n)).collect::<Vec<_>>())
            .mul(&x.idem(n))
    };
    let forward = ChainMap::from_fn(x, &y, |n| Ok(t(n).mul(&incl(n)?)?))?;
    let proj = |n: i64| -> Result<Mat, LinalgError> {
        x.idem(n)
            .mul(&Mat::identity(ring, stab.ambient_rank(n)).select_rows(&(0..x.ambient_rank(n)).collect::<Vec<_>>()))
    };
    let backward = ChainMap::from_fn(&y, x, |n| Ok(proj(n)?.mul(&t_inv(n))?))?;
    // contraction of the added piece, conjugated into Y
    let target_homotopy = Homotopy::from_fn(&y, &y, |n| {
        if n != k {
            return Ok(Mat::zero(ring, y.ambient_rank(n + 1), y.ambient_rank(n)));
        }
        let rows = [x.ambient_rank(k + 1), a];
        let cols = [x.ambient_rank(k), a];
        let gamma = Mat::assemble(ring, &rows, &cols, |i, j| (i == 1 && j == 1).then(|| Mat::identity(ring, a)))?;
        Ok(gamma.mul(&w.iso_inverse)?)
    })?;
    let eq = ChainEquivalence { forward, backward, source_homotopy: Homotopy::zero(x, x), target_homotopy };
    Ok((y, eq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::HomologyGroup;
    use crate::k0::make_projective;
    use crate::quadratic::quadratic_class_oracle;

    fn z() -> RingDescriptor {
        RingDescriptor::Integers
    }

    fn int(rows: &[&[i64]]) -> Mat {
        Mat::from_ints(&z(), rows)
    }

    fn identity_domination(x: &ProjComplex) -> Domination {
        let id = ChainMap::identity(x);
        Domination { a: x.clone(), c: x.clone(), i: id.clone(), r: id, s: Homotopy::zero(x, x) }
    }

    fn point() -> ProjComplex {
        ProjComplex::free(&z(), 0, &[1], vec![]).unwrap()
    }

    fn cone1() -> ProjComplex {
        ProjComplex::free(&z(), 0, &[1, 1], vec![int(&[&[1]])]).unwrap()
    }

    fn zero_domination() -> Domination {
        let a = ProjComplex::zero(&z());
        let c = cone1();
        Domination { i: ChainMap::zero(&a, &c), r: ChainMap::zero(&c, &a), s: Homotopy::zero(&a, &a), a, c }
    }

    fn ideal_domination() -> Domination {
        let q = RingDescriptor::quadratic(-5).unwrap();
        let e = Mat::from_rows(
            &q,
            vec![
                vec![q.quad(-2, 0).unwrap(), q.quad(-1, -1).unwrap()],
                vec![q.quad(1, -1).unwrap(), q.quad(3, 0).unwrap()],
            ],
        )
        .unwrap();
        crate::constructions::realize(&make_projective(e).unwrap(), 0).unwrap().1
    }

    #[test]
    fn domination_examples() {
        assert!(verify_domination(&identity_domination(&point())).is_ok());
        assert!(verify_domination(&zero_domination()).is_ok());
        let mut d = identity_domination(&cone1());
        d.s = Homotopy::new(&d.a, &d.a, BTreeMap::from([(0, int(&[&[1]]))])).unwrap();
        let rep = verify_domination(&d);
        assert!(rep.violations.iter().any(|v| v.code == "s.homotopy_identity"));
    }

    #[test]
    fn instant_examples() {
        let inst = build_instant(&identity_domination(&point())).unwrap();
        assert_eq!(inst.f_rank, 1);
        assert_eq!(inst.p, int(&[&[1]]));
        assert_eq!(inst.i_maps[0], int(&[&[1]]));
        assert_eq!(inst.r_maps[0], int(&[&[1]]));

        // ir = 0 and d = 1 in the block formula: [[0, 1], [0, 1 - 0]]
        let inst = build_instant(&zero_domination()).unwrap();
        assert_eq!(inst.f_rank, 2);
        assert_eq!(inst.p, int(&[&[0, 1], &[0, 1]]));
        assert_eq!(inst.p.mul(&inst.p).unwrap(), inst.p);
        assert!(inst.i_maps.iter().chain(&inst.r_maps).all(Mat::is_zero));

        let d = ideal_domination();
        let inst = build_instant(&d).unwrap();
        assert_eq!(inst.p, d.a.idem(0));
    }

    #[test]
    fn reduction_examples() {
        let g = finite_projective_reduction(&build_instant(&identity_domination(&point())).unwrap()).unwrap();
        assert_eq!(homology(&g).unwrap(), homology(&point()).unwrap());

        let g = finite_projective_reduction(&build_instant(&zero_domination()).unwrap()).unwrap();
        assert!(homology(&g).unwrap().is_acyclic());
        assert_eq!(g.len(), 2);

        let d = ideal_domination();
        let g = finite_projective_reduction(&build_instant(&d).unwrap()).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.idem(0), d.a.idem(0));
    }

    #[test]
    fn obstruction_examples() {
        let r = finiteness_obstruction(&identity_domination(&point()), None).unwrap();
        assert_eq!(r.report.chi, 1);
        assert_eq!(r.status, SigmaStatus::Witnessed);

        let circle = ProjComplex::free(&z(), 0, &[1, 1], vec![int(&[&[0]])]).unwrap();
        let r = finiteness_obstruction(&identity_domination(&circle), None).unwrap();
        assert_eq!(r.report.chi, 0);
        assert!(r.report.verify_witness().unwrap().is_ok());

        let r = finiteness_obstruction(&ideal_domination(), None).unwrap();
        assert_eq!(r.report.chi, 1);
        match &r.status {
            SigmaStatus::Oracle(v) => assert!(v.is_non_principal()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_domination_obstruction_is_witnessed() {
        let r = finiteness_obstruction(&zero_domination(), None).unwrap();
        assert_eq!(r.report.chi, 0);
        assert!(r.report.verify_witness().unwrap().is_ok());
    }

    /// Generic domination on a free complex of length 4: `i = 1`,
    /// `r = 1 - (d t + t d)`, `s = t` for an arbitrary degree-one map `t`.
    fn generic_domination() -> Domination {
        let x = ProjComplex::free(
            &z(),
            0,
            &[1, 2, 2, 1],
            vec![int(&[&[1, -1]]), int(&[&[1, 2], &[1, 2]]), int(&[&[2], &[-1]])],
        )
        .unwrap();
        assert!(validate_complex(&x).is_ok());
        let t = Homotopy::new(
            &x,
            &x,
            BTreeMap::from([(0, int(&[&[1], &[2]])), (1, int(&[&[1, 0], &[-1, 1]])), (2, int(&[&[3, 1]]))]),
        )
        .unwrap();
        let r = ChainMap::from_fn(&x, &x, |n| {
            let a = x.boundary(n + 1).mul(&t.component(n))?;
            let b = t.component(n - 1).mul(&x.boundary(n))?;
            Ok(x.idem(n).sub(&a.add(&b)?)?)
        })
        .unwrap();
        Domination { a: x.clone(), c: x.clone(), i: ChainMap::identity(&x), r, s: t }
    }

    #[test]
    fn generic_identities_hold() {
        let d = generic_domination();
        assert!(verify_domination(&d).is_ok());
        let inst = build_instant(&d).unwrap();
        let g = finite_projective_reduction(&inst).unwrap();
        assert_eq!(homology(&g).unwrap(), homology(&d.a).unwrap());
    }

    #[test]
    fn displayed_sign_fails_audit() {
        // negating the h_2 entry of d_1 (row C_3, column C_1) as displayed
        // breaks d^2 = 0 or the chain equivalence
        let d = generic_domination();
        let mut inst = build_instant(&d).unwrap();
        let b = Blocks { d: &d, n: 3, ranks: inst.c_ranks.clone() };
        let h2 = b.h(2, 1);
        assert!(!h2.is_zero());
        let d1 = &mut inst.boundaries[0];
        let (r0, c0) = (1 + 2 + 2, 0);
        for r in 0..h2.rows() {
            for c in 0..h2.cols() {
                let v = d1.ring().neg(d1.get(r0 + r, c0 + c)).unwrap();
                d1.set(r0 + r, c0 + c, v).unwrap();
            }
        }
        assert!(!audit_instant(&d, &inst).unwrap().is_ok());
    }

    #[test]
    fn trim_examples() {
        let t = trim_below(&cone1(), 0).unwrap();
        assert!(t.complex.is_empty());

        let x = ProjComplex::free(&z(), 0, &[1, 2], vec![int(&[&[1, 0]])]).unwrap();
        let t = trim_below(&x, 0).unwrap();
        assert_eq!(t.complex.bottom(), 1);
        assert_eq!(t.complex.len(), 1);
        assert!(t.complex.is_free());
        assert_eq!(t.complex.ambient_rank(1), 1);
        assert_eq!(homology(&t.complex).unwrap().at(1), HomologyGroup::free(1));
        assert!(t.splittings.iter().all(|s| verify_splitting(s).is_ok()));

        let bad = ProjComplex::free(&z(), 0, &[1, 1], vec![int(&[&[2]])]).unwrap();
        assert!(matches!(trim_below(&bad, 0), Err(RanickiError::Precondition { degree: 0, .. })));
    }

    #[test]
    fn free_replacement_examples() {
        let x = cone1();
        let w = StableFreenessWitness { a: 0, b: 1, iso: int(&[&[1]]), iso_inverse: int(&[&[1]]) };
        let (y, _) = free_replacement(&x, &w).unwrap();
        assert_eq!(y, x);

        let g = finite_projective_reduction(&build_instant(&zero_domination()).unwrap()).unwrap();
        let p = g.module(0).unwrap().clone();
        let w = crate::k0::integer_basis_witness(&p).unwrap();
        let (y, eq) = free_replacement(&g, &w).unwrap();
        assert!(y.is_free());
        let rep = verify_equivalence(&eq);
        assert!(rep.is_ok(), "{rep}");
        assert_eq!(homology(&y).unwrap(), homology(&g).unwrap());

        // e + (1 - e) on ambient 4, stably free through coordinates
        let e = int(&[&[1, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 1]]);
        let p = ProjModule::new(e).unwrap();
        let x = ProjComplex::concentrated(p.clone(), 0);
        let w = StableFreenessWitness::coordinate(&p).unwrap();
        let (y, eq) = free_replacement(&x, &w).unwrap();
        assert!(y.is_free() && y.ambient_rank(0) == 2);
        assert!(verify_equivalence(&eq).is_ok());
    }

    #[test]
    fn ideal_class_via_oracle() {
        let d = ideal_domination();
        let v = quadratic_class_oracle(d.a.module(0).unwrap(), None).unwrap();
        assert!(v.is_non_principal());
    }

    #[test]
    fn non_coordinate_integer_module_is_witnessed() {
        let p = ProjModule::new(int(&[&[1, 1], &[0, 0]])).unwrap();
        let (_, d) = crate::constructions::realize(&p, 1).unwrap();
        let r = finiteness_obstruction(&d, None).unwrap();
        assert_eq!(r.report.chi, -1);
        assert_eq!(r.status, SigmaStatus::Witnessed);
        assert!(r.report.verify_witness().unwrap().is_ok());
    }

    #[test]
    fn supplied_witness_settles_group_ring_class() {
        let c2 = RingDescriptor::group_ring(crate::ring::GroupTable::cyclic(2));
        let g = c2.group_element(1).unwrap();
        let minus_g = c2.neg(&g).unwrap();
        // e = u f u^-1 with f = diag(1, 0)
        let e = Mat::from_rows(&c2, vec![vec![c2.one(), g.clone()], vec![c2.zero(), c2.zero()]]).unwrap();
        let u = Mat::from_rows(&c2, vec![vec![c2.one(), minus_g], vec![c2.zero(), c2.one()]]).unwrap();
        let u_inv = Mat::from_rows(&c2, vec![vec![c2.one(), g], vec![c2.zero(), c2.one()]]).unwrap();
        let p = ProjModule::new(e).unwrap();
        let f = ProjModule::new(Mat::from_ints(&c2, &[&[1, 0], &[0, 0]])).unwrap();
        let wf = StableFreenessWitness::coordinate(&f).unwrap();
        let pad = |m: &Mat| Mat::block_diagonal(&c2, &[m.clone(), Mat::identity(&c2, wf.a)]).unwrap();
        let w = StableFreenessWitness {
            a: wf.a,
            b: wf.b,
            iso: wf.iso.mul(&pad(&u_inv)).unwrap(),
            iso_inverse: pad(&u).mul(&wf.iso_inverse).unwrap(),
        };
        assert!(verify_stable_freeness(&p, &w).is_ok());
        let (_, d) = crate::constructions::realize(&p, 2).unwrap();
        assert!(matches!(finiteness_obstruction(&d, None).unwrap().status, SigmaStatus::Unknown(_)));
        let r = finiteness_obstruction_with_witness(&d, &w, None).unwrap();
        assert_eq!(r.report.chi, 1);
        assert_eq!(r.status, SigmaStatus::Witnessed);
        assert!(r.report.verify_witness().unwrap().is_ok());
    }
}
