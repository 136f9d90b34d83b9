//! Bounded chain complexes of finitely generated projective modules, chain
//! maps, chain homotopies, mapping cones and homology.
//!
//! A projective module is the image of an idempotent matrix `e` acting on
//! the ambient free module. The identity endomorphism of such a module is
//! `e` itself, so "identity" below always means the idempotent.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

use crate::linalg::{self, IntMatrix, LinalgError, Mat};
use crate::report::VerifyReport;
use crate::ring::{RingDescriptor, RingElem, RingError, RingKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("matrix is not idempotent: e^2 - e is nonzero at ({row}, {col})")]
    NotIdempotent { row: usize, col: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("operation `{op}` is not supported over the {kind} ring")]
    Unsupported { op: &'static str, kind: RingKind },
}

impl From<RingError> for ChainError {
    fn from(e: RingError) -> Self {
        ChainError::Linalg(LinalgError::Ring(e))
    }
}

impl ChainError {
    pub(crate) fn from_report(what: &str, r: &VerifyReport) -> Self {
        match r.first() {
            Some(v) => ChainError::Invalid(format!("{what}: {v}")),
            None => ChainError::Invalid(what.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProjModule {
    idem: Mat,
}

impl ProjModule {
    /// Accepts `e` only when it is square and `e * e == e` exactly.
    pub fn new(e: Mat) -> Result<Self, ChainError> {
        let m = ProjModule::new_unchecked(e)?;
        match m.idempotency_defect()? {
            Some((row, col)) => Err(ChainError::NotIdempotent { row, col }),
            None => Ok(m),
        }
    }

    /// Skips the idempotency check (square shape is still enforced), so that
    /// validators can report the defect instead of failing at parse time.
    pub fn new_unchecked(e: Mat) -> Result<Self, ChainError> {
        if !e.is_square() {
            return Err(ChainError::Shape(format!("idempotent must be square, got {}x{}", e.rows(), e.cols())));
        }
        Ok(ProjModule { idem: e })
    }

    pub fn free(ring: &RingDescriptor, m: usize) -> Self {
        ProjModule { idem: Mat::identity(ring, m) }
    }

    pub fn zero(ring: &RingDescriptor, m: usize) -> Self {
        ProjModule { idem: Mat::zero(ring, m, m) }
    }

    pub fn ambient_rank(&self) -> usize {
        self.idem.rows()
    }

    pub fn idempotent(&self) -> &Mat {
        &self.idem
    }

    pub fn ring(&self) -> &RingDescriptor {
        self.idem.ring()
    }

    pub fn is_free(&self) -> bool {
        self.idem.is_identity()
    }

    /// First entry of `e^2 - e` that is nonzero.
    pub fn idempotency_defect(&self) -> Result<Option<(usize, usize)>, ChainError> {
        Ok(self.idem.mul(&self.idem)?.first_difference(&self.idem))
    }

    pub fn direct_sum(&self, other: &ProjModule) -> Result<ProjModule, ChainError> {
        let e = Mat::block_diagonal(self.ring(), &[self.idem.clone(), other.idem.clone()])?;
        Ok(ProjModule { idem: e })
    }

    /// Basis (columns) of the image of the idempotent, on the flattened
    /// integer lattice.
    pub fn lattice_basis(&self) -> Result<IntMatrix, ChainError> {
        let n =
            self.ring().integer_rank().ok_or(ChainError::Unsupported { op: "lattice", kind: self.ring().kind() })?;
        if self.is_free() {
            return Ok(IntMatrix::identity(self.ambient_rank() * n));
        }
        Ok(linalg::image_basis(&self.idem.flatten()?))
    }
}

/// Bounded complex `P_top -> ... -> P_bottom`. `boundaries[j]` is the map
/// from degree `bottom + j + 1` to degree `bottom + j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProjComplex {
    ring: RingDescriptor,
    bottom: i64,
    modules: Vec<ProjModule>,
    boundaries: Vec<Mat>,
}

impl ProjComplex {
    /// Checks shapes and ring agreement, but not `d^2 = 0`; use
    /// [`validate_complex`] for the full invariants.
    pub fn new(
        ring: &RingDescriptor,
        bottom: i64,
        modules: Vec<ProjModule>,
        boundaries: Vec<Mat>,
    ) -> Result<Self, ChainError> {
        if boundaries.len() + 1 != modules.len().max(1) {
            return Err(ChainError::Shape(format!(
                "{} modules need {} boundaries, got {}",
                modules.len(),
                modules.len().saturating_sub(1),
                boundaries.len()
            )));
        }
        for m in &modules {
            if m.ring() != ring {
                return Err(RingError::DescriptorMismatch.into());
            }
        }
        for (j, d) in boundaries.iter().enumerate() {
            if d.ring() != ring {
                return Err(RingError::DescriptorMismatch.into());
            }
            let (rows, cols) = (modules[j].ambient_rank(), modules[j + 1].ambient_rank());
            if (d.rows(), d.cols()) != (rows, cols) {
                return Err(ChainError::Shape(format!(
                    "boundary at degree {} is {}x{}, expected {rows}x{cols}",
                    bottom + j as i64 + 1,
                    d.rows(),
                    d.cols()
                )));
            }
        }
        Ok(ProjComplex { ring: ring.clone(), bottom, modules, boundaries })
    }

    pub fn zero(ring: &RingDescriptor) -> Self {
        ProjComplex { ring: ring.clone(), bottom: 0, modules: Vec::new(), boundaries: Vec::new() }
    }

    pub fn free(ring: &RingDescriptor, bottom: i64, ranks: &[usize], boundaries: Vec<Mat>) -> Result<Self, ChainError> {
        let modules = ranks.iter().map(|&m| ProjModule::free(ring, m)).collect();
        ProjComplex::new(ring, bottom, modules, boundaries)
    }

    /// The complex with the single module `p` in degree `k`.
    pub fn concentrated(p: ProjModule, k: i64) -> Self {
        ProjComplex { ring: p.ring().clone(), bottom: k, modules: vec![p], boundaries: Vec::new() }
    }

    /// Builds the complex on degrees `lo..=hi` from per-degree callbacks.
    pub fn from_fn(
        ring: &RingDescriptor,
        lo: i64,
        hi: i64,
        mut module: impl FnMut(i64) -> Result<ProjModule, ChainError>,
        mut boundary: impl FnMut(i64) -> Result<Mat, ChainError>,
    ) -> Result<Self, ChainError> {
        if hi < lo {
            return Ok(ProjComplex::zero(ring));
        }
        let modules = (lo..=hi).map(&mut module).collect::<Result<Vec<_>, _>>()?;
        let boundaries = (lo + 1..=hi).map(&mut boundary).collect::<Result<Vec<_>, _>>()?;
        ProjComplex::new(ring, lo, modules, boundaries)
    }

    pub fn ring(&self) -> &RingDescriptor {
        &self.ring
    }

    pub fn bottom(&self) -> i64 {
        self.bottom
    }

    /// Highest stored degree; `bottom - 1` for the empty complex.
    pub fn top(&self) -> i64 {
        self.bottom + self.modules.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.modules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modules.is_empty()
    }

    pub fn degrees(&self) -> std::ops::RangeInclusive<i64> {
        self.bottom..=self.top()
    }

    pub fn modules(&self) -> &[ProjModule] {
        &self.modules
    }

    pub fn boundaries(&self) -> &[Mat] {
        &self.boundaries
    }

    pub fn module(&self, n: i64) -> Option<&ProjModule> {
        if n < self.bottom {
            return None;
        }
        self.modules.get((n - self.bottom) as usize)
    }

    pub fn ambient_rank(&self, n: i64) -> usize {
        self.module(n).map_or(0, ProjModule::ambient_rank)
    }

    /// Idempotent in degree `n` (an empty matrix outside the stored range).
    pub fn idem(&self, n: i64) -> Mat {
        match self.module(n) {
            Some(p) => p.idempotent().clone(),
            None => Mat::zero(&self.ring, 0, 0),
        }
    }

    /// The boundary `d_n` from degree `n` to degree `n - 1`.
    pub fn boundary(&self, n: i64) -> Mat {
        if n > self.bottom && n <= self.top() {
            return self.boundaries[(n - self.bottom - 1) as usize].clone();
        }
        Mat::zero(&self.ring, self.ambient_rank(n - 1), self.ambient_rank(n))
    }

    pub fn is_free(&self) -> bool {
        self.modules.iter().all(ProjModule::is_free)
    }

    /// Drops modules of ambient rank zero from both ends.
    pub fn stripped(&self) -> ProjComplex {
        let keep: Vec<i64> = self.degrees().filter(|&n| self.ambient_rank(n) > 0).collect();
        let (Some(&lo), Some(&hi)) = (keep.first(), keep.last()) else {
            return ProjComplex::zero(&self.ring);
        };
        ProjComplex {
            ring: self.ring.clone(),
            bottom: lo,
            modules: (lo..=hi).map(|n| self.module(n).expect("in range").clone()).collect(),
            boundaries: (lo + 1..=hi).map(|n| self.boundary(n)).collect(),
        }
    }
}

fn union_range(a: &ProjComplex, b: &ProjComplex) -> Option<(i64, i64)> {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => None,
        (false, true) => Some((a.bottom(), a.top())),
        (true, false) => Some((b.bottom(), b.top())),
        (false, false) => Some((a.bottom().min(b.bottom()), a.top().max(b.top()))),
    }
}

/// Degreewise maps `f_n : source_n -> target_{n + offset}`; chain maps use
/// offset 0 and homotopies offset 1.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Graded {
    offset: i64,
    components: BTreeMap<i64, Mat>,
}

impl Graded {
    fn new(
        source: &ProjComplex,
        target: &ProjComplex,
        offset: i64,
        components: BTreeMap<i64, Mat>,
    ) -> Result<Self, ChainError> {
        for (&n, m) in &components {
            if m.ring() != source.ring() {
                return Err(RingError::DescriptorMismatch.into());
            }
            let want = (target.ambient_rank(n + offset), source.ambient_rank(n));
            if (m.rows(), m.cols()) != want {
                return Err(ChainError::Shape(format!(
                    "component at degree {n} is {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    want.0,
                    want.1
                )));
            }
        }
        let components = components.into_iter().filter(|(_, m)| !m.is_zero()).collect();
        Ok(Graded { offset, components })
    }

    fn get(&self, source: &ProjComplex, target: &ProjComplex, n: i64) -> Mat {
        match self.components.get(&n) {
            Some(m) => m.clone(),
            None => Mat::zero(source.ring(), target.ambient_rank(n + self.offset), source.ambient_rank(n)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainMap {
    source: ProjComplex,
    target: ProjComplex,
    maps: Graded,
}

impl ChainMap {
    /// Missing degrees are zero.
    pub fn new(source: &ProjComplex, target: &ProjComplex, components: BTreeMap<i64, Mat>) -> Result<Self, ChainError> {
        if source.ring() != target.ring() {
            return Err(RingError::DescriptorMismatch.into());
        }
        let maps = Graded::new(source, target, 0, components)?;
        Ok(ChainMap { source: source.clone(), target: target.clone(), maps })
    }

    pub fn from_fn(
        source: &ProjComplex,
        target: &ProjComplex,
        mut f: impl FnMut(i64) -> Result<Mat, ChainError>,
    ) -> Result<Self, ChainError> {
        let mut components = BTreeMap::new();
        if let Some((lo, hi)) = union_range(source, target) {
            for n in lo..=hi {
                components.insert(n, f(n)?);
            }
        }
        ChainMap::new(source, target, components)
    }

    pub fn identity(x: &ProjComplex) -> Self {
        ChainMap::from_fn(x, x, |n| Ok(x.idem(n))).expect("idempotents have the right shape")
    }

    pub fn zero(source: &ProjComplex, target: &ProjComplex) -> Self {
        ChainMap::new(source, target, BTreeMap::new()).expect("empty component table")
    }

    pub fn source(&self) -> &ProjComplex {
        &self.source
    }

    pub fn target(&self) -> &ProjComplex {
        &self.target
    }

    pub fn ring(&self) -> &RingDescriptor {
        self.source.ring()
    }

    pub fn component(&self, n: i64) -> Mat {
        self.maps.get(&self.source, &self.target, n)
    }

    /// The nonzero components.
    pub fn components(&self) -> &BTreeMap<i64, Mat> {
        &self.maps.components
    }

    pub fn degrees(&self) -> Option<(i64, i64)> {
        union_range(&self.source, &self.target)
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &ChainMap) -> Result<ChainMap, ChainError> {
        if first.target != self.source {
            return Err(ChainError::Shape("composition: intermediate complexes differ".into()));
        }
        ChainMap::from_fn(&first.source, &self.target, |n| Ok(self.component(n).mul(&first.component(n))?))
    }

    pub fn add(&self, other: &ChainMap) -> Result<ChainMap, ChainError> {
        self.same_ends(other)?;
        ChainMap::from_fn(&self.source, &self.target, |n| Ok(self.component(n).add(&other.component(n))?))
    }

    pub fn sub(&self, other: &ChainMap) -> Result<ChainMap, ChainError> {
        self.same_ends(other)?;
        ChainMap::from_fn(&self.source, &self.target, |n| Ok(self.component(n).sub(&other.component(n))?))
    }

    pub fn neg(&self) -> ChainMap {
        ChainMap::from_fn(&self.source, &self.target, |n| Ok(self.component(n).neg())).expect("same shapes")
    }

    fn same_ends(&self, other: &ChainMap) -> Result<(), ChainError> {
        if self.source != other.source || self.target != other.target {
            return Err(ChainError::Shape("maps have different source or target".into()));
        }
        Ok(())
    }
}

/// Degree-raising maps `s_n : source_n -> target_{n+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Homotopy {
    source: ProjComplex,
    target: ProjComplex,
    maps: Graded,
}

impl Homotopy {
    pub fn new(source: &ProjComplex, target: &ProjComplex, components: BTreeMap<i64, Mat>) -> Result<Self, ChainError> {
        if source.ring() != target.ring() {
            return Err(RingError::DescriptorMismatch.into());
        }
        let maps = Graded::new(source, target, 1, components)?;
        Ok(Homotopy { source: source.clone(), target: target.clone(), maps })
    }

    pub fn from_fn(
        source: &ProjComplex,
        target: &ProjComplex,
        mut f: impl FnMut(i64) -> Result<Mat, ChainError>,
    ) -> Result<Self, ChainError> {
        let mut components = BTreeMap::new();
        if let Some((lo, hi)) = union_range(source, target) {
            for n in lo - 1..=hi {
                components.insert(n, f(n)?);
            }
        }
        Homotopy::new(source, target, components)
    }

    pub fn zero(source: &ProjComplex, target: &ProjComplex) -> Self {
        Homotopy::new(source, target, BTreeMap::new()).expect("empty component table")
    }

    pub fn source(&self) -> &ProjComplex {
        &self.source
    }

    pub fn target(&self) -> &ProjComplex {
        &self.target
    }

    pub fn component(&self, n: i64) -> Mat {
        self.maps.get(&self.source, &self.target, n)
    }

    /// The nonzero components.
    pub fn components(&self) -> &BTreeMap<i64, Mat> {
        &self.maps.components
    }

    pub fn neg(&self) -> Homotopy {
        Homotopy::from_fn(&self.source, &self.target, |n| Ok(self.component(n).neg())).expect("same shapes")
    }
}

/// Confirms idempotency of every module, compatibility `e d e = d`, and
/// `d d = 0`, listing each failing degree.
pub fn validate_complex(x: &ProjComplex) -> VerifyReport {
    let mut rep = VerifyReport::new();
    for n in x.degrees() {
        let p = x.module(n).expect("in range");
        match p.idempotency_defect() {
            Ok(Some((r, c))) => rep.violations.push(crate::report::Violation {
                code: "not_idempotent".into(),
                degree: Some(n),
                entry: Some((r, c)),
                detail: "e^2 != e".into(),
            }),
            Ok(None) => {}
            Err(e) => rep.push("not_idempotent", Some(n), e.to_string()),
        }
    }
    for n in x.bottom() + 1..=x.top() {
        let d = x.boundary(n);
        match x.idem(n - 1).mul(&d).and_then(|m| m.mul(&x.idem(n))) {
            Ok(ede) => rep.expect_eq("boundary_not_compatible", Some(n), &ede, &d),
            Err(e) => rep.push("boundary_not_compatible", Some(n), e.to_string()),
        }
        if n - 1 > x.bottom() {
            match x.boundary(n - 1).mul(&d) {
                Ok(dd) => {
                    let zero = Mat::zero(x.ring(), dd.rows(), dd.cols());
                    rep.expect_eq("boundary_squared_nonzero", Some(n), &dd, &zero);
                }
                Err(e) => rep.push("boundary_squared_nonzero", Some(n), e.to_string()),
            }
        }
    }
    rep
}

/// Checks `e' f e = f` and `d' f = f d` in every degree.
pub fn verify_chain_map(f: &ChainMap) -> VerifyReport {
    let mut rep = VerifyReport::new();
    let Some((lo, hi)) = f.degrees() else { return rep };
    let (x, y) = (f.source(), f.target());
    for n in lo..=hi {
        let c = f.component(n);
        match y.idem(n).mul(&c).and_then(|m| m.mul(&x.idem(n))) {
            Ok(m) => rep.expect_eq("map_not_compatible", Some(n), &m, &c),
            Err(e) => rep.push("map_not_compatible", Some(n), e.to_string()),
        }
        if n > lo {
            let lhs = y.boundary(n).mul(&c);
            let rhs = f.component(n - 1).mul(&x.boundary(n));
            match (lhs, rhs) {
                (Ok(l), Ok(r)) => rep.expect_eq("square_does_not_commute", Some(n), &l, &r),
                (Err(e), _) | (_, Err(e)) => rep.push("square_does_not_commute", Some(n), e.to_string()),
            }
        }
    }
    rep
}

/// Checks `d' s_n + s_{n-1} d = f_n - g_n` in every degree, plus
/// compatibility of `s` with the idempotents.
pub fn verify_homotopy(s: &Homotopy, f: &ChainMap, g: &ChainMap) -> VerifyReport {
    let mut rep = VerifyReport::new();
    if f.source() != s.source() || g.source() != s.source() || f.target() != s.target() || g.target() != s.target() {
        rep.push("homotopy_context", None, "maps and homotopy do not share source and target");
        return rep;
    }
    let (x, y) = (s.source(), s.target());
    let Some((lo, hi)) = f.degrees() else { return rep };
    for n in lo..=hi {
        let sn = s.component(n);
        match y.idem(n + 1).mul(&sn).and_then(|m| m.mul(&x.idem(n))) {
            Ok(m) => rep.expect_eq("homotopy_not_compatible", Some(n), &m, &sn),
            Err(e) => rep.push("homotopy_not_compatible", Some(n), e.to_string()),
        }
        let lhs =
            y.boundary(n + 1).mul(&sn).and_then(|a| s.component(n - 1).mul(&x.boundary(n)).and_then(|b| a.add(&b)));
        let rhs = f.component(n).sub(&g.component(n));
        match (lhs, rhs) {
            (Ok(l), Ok(r)) => rep.expect_eq("homotopy_identity", Some(n), &l, &r),
            (Err(e), _) | (_, Err(e)) => rep.push("homotopy_identity", Some(n), e.to_string()),
        }
    }
    rep
}

/// A pair of chain maps with homotopies `1 ~ backward . forward` on the
/// source and `1 ~ forward . backward` on the target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainEquivalence {
    pub forward: ChainMap,
    pub backward: ChainMap,
    pub source_homotopy: Homotopy,
    pub target_homotopy: Homotopy,
}

pub fn verify_equivalence(eq: &ChainEquivalence) -> VerifyReport {
    let mut rep = VerifyReport::new();
    rep.absorb(verify_chain_map(&eq.forward).scoped("forward"));
    rep.absorb(verify_chain_map(&eq.backward).scoped("backward"));
    if !rep.is_ok() {
        return rep;
    }
    let (x, y) = (eq.forward.source(), eq.forward.target());
    match eq.backward.compose(&eq.forward) {
        Ok(bf) => rep.absorb(verify_homotopy(&eq.source_homotopy, &ChainMap::identity(x), &bf).scoped("source")),
        Err(e) => rep.push("source.compose", None, e.to_string()),
    }
    match eq.forward.compose(&eq.backward) {
        Ok(fb) => rep.absorb(verify_homotopy(&eq.target_homotopy, &ChainMap::identity(y), &fb).scoped("target")),
        Err(e) => rep.push("target.compose", None, e.to_string()),
    }
    rep
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct HomologyGroup {
    pub betti: usize,
    /// Invariant factors greater than one, each dividing the next.
    pub torsion: Vec<BigInt>,
}

impl HomologyGroup {
    pub fn is_zero(&self) -> bool {
        self.betti == 0 && self.torsion.is_empty()
    }

    pub fn free(betti: usize) -> Self {
        HomologyGroup { betti, torsion: Vec::new() }
    }

    pub fn direct_sum(&self, other: &HomologyGroup) -> HomologyGroup {
        let all: Vec<BigInt> = self.torsion.iter().chain(&other.torsion).cloned().collect();
        HomologyGroup { betti: self.betti + other.betti, torsion: linalg::invariant_factors(&all) }
    }
}

impl fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.betti {
            0 => {}
            1 => parts.push("Z".to_string()),
            b => parts.push(format!("Z^{b}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// Homology of the underlying abelian groups, one entry per stored degree.
/// Degrees outside the table are zero; equality ignores that distinction.
#[derive(Debug, Clone, Default)]
pub struct HomologyResult {
    groups: BTreeMap<i64, HomologyGroup>,
}

impl HomologyResult {
    pub fn from_groups(groups: BTreeMap<i64, HomologyGroup>) -> Self {
        HomologyResult { groups }
    }

    pub fn at(&self, n: i64) -> HomologyGroup {
        self.groups.get(&n).cloned().unwrap_or_default()
    }

    pub fn groups(&self) -> &BTreeMap<i64, HomologyGroup> {
        &self.groups
    }

    pub fn is_acyclic(&self) -> bool {
        self.groups.values().all(HomologyGroup::is_zero)
    }

    pub fn direct_sum(&self, other: &HomologyResult) -> HomologyResult {
        let mut groups = self.groups.clone();
        for (n, g) in &other.groups {
            let merged = groups.get(n).cloned().unwrap_or_default().direct_sum(g);
            groups.insert(*n, merged);
        }
        HomologyResult { groups }
    }

    fn nonzero(&self) -> BTreeMap<i64, &HomologyGroup> {
        self.groups.iter().filter(|(_, g)| !g.is_zero()).map(|(n, g)| (*n, g)).collect()
    }
}

impl PartialEq for HomologyResult {
    fn eq(&self, other: &Self) -> bool {
        self.nonzero() == other.nonzero()
    }
}

impl Eq for HomologyResult {}

impl fmt::Display for HomologyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.groups.iter().map(|(n, g)| format!("H{n} = {g}")).collect();
        f.write_str(&parts.join(", "))
    }
}

/// The boundaries of `x` written in coordinates of the image lattices of the
/// idempotents. Entry `n` maps lattice `n` to lattice `n - 1`.
pub(crate) fn lattice_complex(x: &ProjComplex) -> Result<(Vec<IntMatrix>, BTreeMap<i64, IntMatrix>), ChainError> {
    let bases = x.modules().iter().map(ProjModule::lattice_basis).collect::<Result<Vec<_>, _>>()?;
    let mut maps = BTreeMap::new();
    for n in x.bottom() + 1..=x.top() {
        let j = (n - x.bottom()) as usize;
        let image = &x.boundary(n).flatten()? * &bases[j];
        let coords = linalg::solve_integer(&bases[j - 1], &image)
            .ok_or_else(|| ChainError::Invalid(format!("boundary at degree {n} leaves the projective summand")))?;
        maps.insert(n, coords);
    }
    Ok((bases, maps))
}

/// Homology of the underlying abelian groups, computed inside the image
/// lattice of each idempotent.
pub fn homology(x: &ProjComplex) -> Result<HomologyResult, ChainError> {
    if x.ring().kind() == RingKind::Laurent {
        return Err(ChainError::Unsupported { op: "homology", kind: RingKind::Laurent });
    }
    let (bases, maps) = lattice_complex(x)?;
    let mut groups = BTreeMap::new();
    for (j, n) in x.degrees().enumerate() {
        let dim = bases[j].cols();
        let out_rank = maps.get(&n).map_or(0, linalg::rank);
        let (in_rank, torsion) = match maps.get(&(n + 1)) {
            Some(m) => {
                let s = linalg::smith_normal_form(m);
                let t = s.diagonal().into_iter().filter(|d| !d.is_one()).collect();
                (s.rank, t)
            }
            None => (0, Vec::new()),
        };
        groups.insert(n, HomologyGroup { betti: dim - out_rank - in_rank, torsion });
    }
    Ok(HomologyResult { groups })
}

/// Cone of `f : X -> Y`: degree `n` is `Y_n + X_{n-1}` with boundary
/// `[[d', f], [0, -d]]`.
pub fn mapping_cone(f: &ChainMap) -> Result<ProjComplex, ChainError> {
    let rep = verify_chain_map(f);
    if !rep.is_ok() {
        return Err(ChainError::from_report("cone of an invalid chain map", &rep));
    }
    let (x, y) = (f.source(), f.target());
    let ring = f.ring();
    let lo = match (x.is_empty(), y.is_empty()) {
        (true, true) => return Ok(ProjComplex::zero(ring)),
        (true, false) => y.bottom(),
        (false, true) => x.bottom() + 1,
        (false, false) => y.bottom().min(x.bottom() + 1),
    };
    let hi = y.top().max(x.top() + 1);
    ProjComplex::from_fn(
        ring,
        lo,
        hi,
        |n| {
            let e = Mat::block_diagonal(ring, &[y.idem(n), x.idem(n - 1)])?;
            ProjModule::new_unchecked(e)
        },
        |n| {
            let rows = [y.ambient_rank(n - 1), x.ambient_rank(n - 2)];
            let cols = [y.ambient_rank(n), x.ambient_rank(n - 1)];
            Ok(Mat::assemble(ring, &rows, &cols, |i, j| match (i, j) {
                (0, 0) => Some(y.boundary(n)),
                (0, 1) => Some(f.component(n - 1)),
                (1, 1) => Some(x.boundary(n - 1).neg()),
                _ => None,
            })?)
        },
    )
}

/// Relabels degrees: degree `n` of `x` becomes degree `n + k`.
pub fn shift(x: &ProjComplex, k: i64) -> ProjComplex {
    let mut out = x.clone();
    out.bottom += k;
    out
}

pub fn direct_sum(x: &ProjComplex, y: &ProjComplex) -> Result<ProjComplex, ChainError> {
    if x.ring() != y.ring() {
        return Err(RingError::DescriptorMismatch.into());
    }
    let ring = x.ring();
    let Some((lo, hi)) = union_range(x, y) else { return Ok(ProjComplex::zero(ring)) };
    ProjComplex::from_fn(
        ring,
        lo,
        hi,
        |n| ProjModule::new_unchecked(Mat::block_diagonal(ring, &[x.idem(n), y.idem(n)])?),
        |n| Ok(Mat::block_diagonal(ring, &[x.boundary(n), y.boundary(n)])?),
    )
}

/// Applies a ring homomorphism entrywise to every idempotent and boundary.
pub fn change_rings(
    x: &ProjComplex,
    target: &RingDescriptor,
    f: impl Fn(&RingElem) -> Result<RingElem, RingError> + Copy,
) -> Result<ProjComplex, ChainError> {
    let modules = x
        .modules()
        .iter()
        .map(|p| ProjModule::new_unchecked(p.idempotent().map_entries(target, f)?))
        .collect::<Result<Vec<_>, _>>()?;
    let boundaries = x.boundaries().iter().map(|d| d.map_entries(target, f)).collect::<Result<Vec<_>, _>>()?;
    ProjComplex::new(target, x.bottom(), modules, boundaries)
}

/// Base change along the inclusion of constants `R -> R[t, t^-1]`.
pub fn tensor_with_laurent(x: &ProjComplex) -> Result<ProjComplex, ChainError> {
    let l = laurent_over(x.ring())?;
    change_rings(x, &l, |c| l.include_constant(c))
}

/// Base change of a map along `R -> R[t, t^-1]`, between the base-changed
/// complexes.
pub fn tensor_map_with_laurent(f: &ChainMap) -> Result<ChainMap, ChainError> {
    let l = laurent_over(f.ring())?;
    let x = tensor_with_laurent(f.source())?;
    let y = tensor_with_laurent(f.target())?;
    ChainMap::from_fn(&x, &y, |n| Ok(f.component(n).map_entries(&l, |c| l.include_constant(c))?))
}

fn laurent_over(ring: &RingDescriptor) -> Result<RingDescriptor, ChainError> {
    match ring.kind() {
        RingKind::Integers | RingKind::GroupRing => Ok(RingDescriptor::laurent(ring.clone())?),
        kind => Err(ChainError::Unsupported { op: "tensor_with_laurent", kind }),
    }
}

/// Substitutes `t -> u` in a complex over a Laurent ring.
pub fn evaluate(x: &ProjComplex, u: &RingElem) -> Result<ProjComplex, ChainError> {
    let base =
        x.ring().laurent_base().ok_or(ChainError::Unsupported { op: "evaluate", kind: x.ring().kind() })?.clone();
    let l = x.ring().clone();
    change_rings(x, &base, |a| l.laurent_evaluate(a, u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::GroupTable;

    fn z() -> RingDescriptor {
        RingDescriptor::Integers
    }

    fn int(rows: &[&[i64]]) -> Mat {
        Mat::from_ints(&z(), rows)
    }

    fn circle() -> ProjComplex {
        ProjComplex::free(&z(), 0, &[1, 1], vec![int(&[&[0]])]).unwrap()
    }

    fn cone1() -> ProjComplex {
        ProjComplex::free(&z(), 0, &[1, 1], vec![int(&[&[1]])]).unwrap()
    }

    fn times2() -> ProjComplex {
        ProjComplex::free(&z(), 0, &[1, 1], vec![int(&[&[2]])]).unwrap()
    }

    fn rp2() -> ProjComplex {
        ProjComplex::free(&z(), 0, &[1, 1, 1], vec![int(&[&[0]]), int(&[&[2]])]).unwrap()
    }

    fn group(betti: usize, torsion: &[i64]) -> HomologyGroup {
        HomologyGroup { betti, torsion: torsion.iter().map(|&t| BigInt::from(t)).collect() }
    }

    #[test]
    fn validate_examples() {
        assert!(validate_complex(&circle()).is_ok());
        assert!(validate_complex(&cone1()).is_ok());
        let bad = ProjComplex::free(&z(), 0, &[1, 1, 1], vec![int(&[&[1]]), int(&[&[1]])]).unwrap();
        let rep = validate_complex(&bad);
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].code, "boundary_squared_nonzero");
        assert_eq!(rep.violations[0].degree, Some(2));
    }

    #[test]
    fn validate_reports_non_idempotent() {
        let p = ProjModule::new_unchecked(int(&[&[2]])).unwrap();
        let x = ProjComplex::concentrated(p, 0);
        assert_eq!(validate_complex(&x).violations[0].code, "not_idempotent");
        assert!(matches!(ProjModule::new(int(&[&[2]])), Err(ChainError::NotIdempotent { row: 0, col: 0 })));
    }

    #[test]
    fn chain_map_examples() {
        assert!(verify_chain_map(&ChainMap::identity(&rp2())).is_ok());
        assert!(verify_chain_map(&ChainMap::zero(&circle(), &cone1())).is_ok());
        // f = 1 in degree 1 only: the square d' f_1 = f_0 d reads 1 = 0
        let f = ChainMap::new(&circle(), &cone1(), BTreeMap::from([(1, int(&[&[1]]))])).unwrap();
        let rep = verify_chain_map(&f);
        assert_eq!(rep.violations[0].code, "square_does_not_commute");
        assert_eq!(rep.violations[0].degree, Some(1));
    }

    #[test]
    fn homotopy_examples() {
        let x = cone1();
        let id = ChainMap::identity(&x);
        assert!(verify_homotopy(&Homotopy::zero(&x, &x), &id, &id).is_ok());
        let zero = ChainMap::zero(&x, &x);
        let s = Homotopy::new(&x, &x, BTreeMap::from([(0, int(&[&[1]]))])).unwrap();
        assert!(verify_homotopy(&s, &id, &zero).is_ok());
        let s2 = Homotopy::new(&x, &x, BTreeMap::from([(0, int(&[&[2]]))])).unwrap();
        assert!(!verify_homotopy(&s2, &id, &zero).is_ok());
    }

    #[test]
    fn homology_examples() {
        let h = homology(&circle()).unwrap();
        assert_eq!(h.at(0), group(1, &[]));
        assert_eq!(h.at(1), group(1, &[]));
        let h = homology(&times2()).unwrap();
        assert_eq!(h.at(0), group(0, &[2]));
        assert_eq!(h.at(1), group(0, &[]));
        let h = homology(&rp2()).unwrap();
        assert_eq!(h.at(0), group(1, &[]));
        assert_eq!(h.at(1), group(0, &[2]));
        assert_eq!(h.at(2), group(0, &[]));
        assert_eq!(h.to_string(), "H0 = Z, H1 = Z/2, H2 = 0");
    }

    #[test]
    fn homology_of_projective_summand() {
        // im [[1,0],[0,0]] carries H0 = Z; the ambient zero complex would give Z^2
        let p = ProjModule::new(int(&[&[1, 0], &[0, 0]])).unwrap();
        let h = homology(&ProjComplex::concentrated(p, 0)).unwrap();
        assert_eq!(h.at(0), group(1, &[]));
    }

    #[test]
    fn homology_rejects_laurent() {
        let x = tensor_with_laurent(&circle()).unwrap();
        assert!(matches!(homology(&x), Err(ChainError::Unsupported { .. })));
    }

    #[test]
    fn cone_examples() {
        let c = mapping_cone(&ChainMap::identity(&circle())).unwrap();
        assert!(validate_complex(&c).is_ok());
        assert!(homology(&c).unwrap().is_acyclic());

        let x = rp2();
        let c = mapping_cone(&ChainMap::zero(&x, &ProjComplex::zero(&z()))).unwrap();
        assert_eq!(c.bottom(), 1);
        for n in 2..=3 {
            assert_eq!(c.boundary(n), x.boundary(n - 1).neg());
        }

        let pt = ProjComplex::free(&z(), 0, &[1], vec![]).unwrap();
        let two = ChainMap::new(&pt, &pt, BTreeMap::from([(0, int(&[&[2]]))])).unwrap();
        let h = homology(&mapping_cone(&two).unwrap()).unwrap();
        assert_eq!(h.at(0), group(0, &[2]));
        assert!(h.at(1).is_zero());
    }

    #[test]
    fn shift_sum_tensor() {
        let x = rp2();
        assert_eq!(shift(&shift(&x, 1), -1), x);
        assert_eq!(direct_sum(&x, &ProjComplex::zero(&z())).unwrap(), x);
        let t = tensor_with_laurent(&times2()).unwrap();
        let l = t.ring().clone();
        assert_eq!(*t.boundary(1).get(0, 0), l.from_int(2));
        assert!(validate_complex(&t).is_ok());
    }

    #[test]
    fn evaluation_undoes_inclusion() {
        let r = RingDescriptor::group_ring(GroupTable::cyclic(2));
        let g = r.group_element(1).unwrap();
        let x = ProjComplex::free(&r, 0, &[1, 1], vec![Mat::scalar(&r, r.group_elem(&[(1, 0), (-1, 1)]).unwrap())])
            .unwrap();
        let t = tensor_with_laurent(&x).unwrap();
        assert_eq!(evaluate(&t, &g).unwrap(), x);
    }

    #[test]
    fn equivalence_of_identity() {
        let x = rp2();
        let eq = ChainEquivalence {
            forward: ChainMap::identity(&x),
            backward: ChainMap::identity(&x),
            source_homotopy: Homotopy::zero(&x, &x),
            target_homotopy: Homotopy::zero(&x, &x),
        };
        assert!(verify_equivalence(&eq).is_ok());
    }
}
