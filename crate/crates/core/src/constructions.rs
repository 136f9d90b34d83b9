//! Realization, the Laurent resolution, swindle prefixes and mapping tori.

use std::collections::BTreeMap;

use crate::chain::{
    mapping_cone, tensor_map_with_laurent, validate_complex, verify_chain_map, verify_equivalence, verify_homotopy,
    ChainEquivalence, ChainError, ChainMap, Homotopy, ProjComplex, ProjModule,
};
use crate::k0::complement;
use crate::linalg::{cokernel, image_basis, rank, solve_integer, IntMatrix, Mat};
use crate::ranicki::{Domination, RanickiError};
use crate::report::VerifyReport;
use crate::ring::{RingDescriptor, RingKind};

pub const DEFAULT_WINDOW: usize = 8;

/// `P` alone in degree `k`, dominated by the free module of the same
/// ambient rank with `i = r = e` and `s = 0`.
pub fn realize(p: &ProjModule, k: i64) -> Result<(ProjComplex, Domination), RanickiError> {
    if k < 0 {
        return Err(RanickiError::Unsupported(format!("realize needs a degree >= 0, got {k}")));
    }
    let e = p.idempotent();
    if let Some((r, c)) = p.idempotency_defect()? {
        return Err(ChainError::NotIdempotent { row: r, col: c }.into());
    }
    let ring = p.ring();
    if p.ambient_rank() == 0 {
        let z = ProjComplex::zero(ring);
        let d = Domination {
            a: z.clone(),
            c: z.clone(),
            i: ChainMap::identity(&z),
            r: ChainMap::identity(&z),
            s: Homotopy::zero(&z, &z),
        };
        return Ok((z, d));
    }
    let a = ProjComplex::concentrated(p.clone(), k);
    let c = ProjComplex::free(ring, k, &[p.ambient_rank()], vec![])?;
    let i = ChainMap::new(&a, &c, BTreeMap::from([(k, e.clone())]))?;
    let r = ChainMap::new(&c, &a, BTreeMap::from([(k, e.clone())]))?;
    let s = Homotopy::zero(&a, &a);
    Ok((a.clone(), Domination { a, c, i, r, s }))
}

/// Exactness evidence for `1 - e t` on the exponent window `[-N, N]`.
///
/// The domain lattice is `R^m t^k` for `|k| <= N` together with
/// `(1 - e) R^m t^(N+1)`, which the map fixes; the target is `R^m t^k` for
/// `-N <= k <= N + 1`. The cokernel is compared with `im(e)` through the
/// evaluation `v -> e v(1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowedLaurentCheck {
    pub window: usize,
    pub injective: bool,
    pub cokernel_rank: usize,
    pub cokernel_torsion: Vec<num_bigint::BigInt>,
    pub expected_rank: usize,
    pub evaluation_kills_image: bool,
    pub evaluation_surjective: bool,
}

impl WindowedLaurentCheck {
    pub fn cokernel_matches(&self) -> bool {
        self.cokernel_rank == self.expected_rank
            && self.cokernel_torsion.is_empty()
            && self.evaluation_kills_image
            && self.evaluation_surjective
    }

    pub fn is_ok(&self) -> bool {
        self.injective && self.cokernel_matches()
    }

    pub fn details(&self) -> String {
        let torsion: Vec<String> = self.cokernel_torsion.iter().map(ToString::to_string).collect();
        format!(
            "cokernel Z^{} torsion [{}], expected Z^{}; evaluation kills image: {}, surjective: {}",
            self.cokernel_rank,
            torsion.join(", "),
            self.expected_rank,
            self.evaluation_kills_image,
            self.evaluation_surjective
        )
    }

    pub fn report(&self) -> VerifyReport {
        let mut rep = VerifyReport::new();
        let n = Some(self.window as i64);
        if !self.injective {
            rep.push("window_not_injective", n, self.details());
        }
        if !self.cokernel_matches() {
            rep.push("window_cokernel_mismatch", n, self.details());
        }
        rep
    }
}

fn laurent_base_ring(p: &ProjModule, op: &'static str) -> Result<(), ChainError> {
    match p.ring().kind() {
        RingKind::Integers | RingKind::GroupRing => Ok(()),
        kind => Err(ChainError::Unsupported { op, kind }),
    }
}

/// The two-term free complex `R[t,t^-1]^m -> R[t,t^-1]^m` with boundary
/// `e (1 - t) + (1 - e) = 1 - e t`, whose cokernel is `P`, checked on the
/// window `[-window, window]`.
pub fn laurent_resolution(p: &ProjModule, window: usize) -> Result<(ProjComplex, WindowedLaurentCheck), ChainError> {
    laurent_base_ring(p, "laurent_resolution")?;
    let base = p.ring();
    let l = RingDescriptor::laurent(base.clone())?;
    let m = p.ambient_rank();
    let e_l = p.idempotent().map_entries(&l, |c| l.include_constant(c))?;
    let d = Mat::identity(&l, m).sub(&e_l.scale(&l.variable()?)?)?;
    let x = ProjComplex::free(&l, 0, &[m, m], vec![d])?;
    Ok((x, laurent_window_check(p, window)?))
}

pub fn laurent_window_check(p: &ProjModule, window: usize) -> Result<WindowedLaurentCheck, ChainError> {
    laurent_base_ring(p, "laurent_window_check")?;
    let e = p.idempotent().flatten()?;
    let q = complement(p).idempotent().flatten()?;
    let w = e.rows();
    let slots = 2 * window + 2;
    let fixed = image_basis(&q);
    let cols = w * (slots - 1) + fixed.cols();
    let mut map = IntMatrix::zeros(w * slots, cols);
    // x t^k -> x t^k - e x t^(k+1)
    for k in 0..slots - 1 {
        for j in 0..w {
            let c = k * w + j;
            map.set(k * w + j, c, 1.into());
            for i in 0..w {
                map.set((k + 1) * w + i, c, -e.get(i, j).clone());
            }
        }
    }
    let top = (slots - 1) * w;
    for j in 0..fixed.cols() {
        for i in 0..w {
            map.set(top + i, w * (slots - 1) + j, fixed.get(i, j).clone());
        }
    }
    let parts: Vec<&IntMatrix> = (0..slots).map(|_| &e).collect();
    let ev = IntMatrix::hstack(&parts);
    let (cokernel_rank, cokernel_torsion) = cokernel(&map);
    Ok(WindowedLaurentCheck {
        window,
        injective: rank(&map) == cols,
        cokernel_rank,
        cokernel_torsion,
        expected_rank: rank(&e),
        evaluation_kills_image: (&ev * &map).is_zero(),
        evaluation_surjective: solve_integer(&ev, &e).is_some(),
    })
}

/// A finite prefix of the periodic resolution of `P`: free of rank `m` in
/// degrees `0..=N`, with `d_j = 1 - e` for odd `j` and `e` for even `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwindlePrefix {
    pub complex: ProjComplex,
    /// The homology in the top degree is `im(top_module)` instead of zero,
    /// because the prefix stops there.
    pub top_degree: i64,
    pub top_module: ProjModule,
}

pub fn swindle_prefix(p: &ProjModule, n: usize) -> Result<SwindlePrefix, ChainError> {
    if n == 0 {
        return Err(ChainError::Invalid("swindle prefix needs N >= 1".into()));
    }
    let ring = p.ring();
    let e = p.idempotent().clone();
    let q = complement(p);
    let boundaries = (1..=n).map(|j| if j % 2 == 1 { q.idempotent().clone() } else { e.clone() }).collect();
    let complex = ProjComplex::free(ring, 0, &vec![p.ambient_rank(); n + 1], boundaries)?;
    // ker d_N = im(e) for odd N, im(1 - e) for even N
    let top_module = if n % 2 == 1 { p.clone() } else { q };
    Ok(SwindlePrefix { complex, top_degree: n as i64, top_module })
}

fn laurent_lift(m: &Mat, l: &RingDescriptor) -> Result<Mat, ChainError> {
    Ok(m.map_entries(l, |c| l.include_constant(c))?)
}

fn check_endomorphism(f: &ChainMap) -> Result<(), ChainError> {
    if f.source() != f.target() {
        return Err(ChainError::Invalid("mapping torus needs an endomorphism".into()));
    }
    match f.ring().kind() {
        RingKind::Integers | RingKind::GroupRing => {}
        kind => return Err(ChainError::Unsupported { op: "algebraic_mapping_torus", kind }),
    }
    let rep = verify_chain_map(f);
    if !rep.is_ok() {
        return Err(ChainError::from_report("mapping torus of a non-chain map", &rep));
    }
    Ok(())
}

/// `1 - t f` on the Laurent extension of the source of `f`.
fn one_minus_tf(f: &ChainMap) -> Result<ChainMap, ChainError> {
    let fl = tensor_map_with_laurent(f)?;
    let x = fl.source().clone();
    let t = x.ring().variable()?;
    ChainMap::from_fn(&x, &x, |n| Ok(x.idem(n).sub(&fl.component(n).scale(&t)?)?))
}

/// `cone(1 - t f)` over `R[t, t^-1]`.
pub fn algebraic_mapping_torus(f: &ChainMap) -> Result<ProjComplex, ChainError> {
    check_endomorphism(f)?;
    let x = mapping_cone(&one_minus_tf(f)?)?;
    let rep = validate_complex(&x);
    if !rep.is_ok() {
        return Err(ChainError::from_report("mapping torus", &rep));
    }
    Ok(x)
}

/// A chain map between tori given by blocks `[[a, b], [0, c]]` on
/// `X_n + X_(n-1)`, with `b : X_(n-1) -> Y_n`.
fn torus_map(
    src: &ProjComplex,
    tgt: &ProjComplex,
    a: impl Fn(i64) -> Result<Mat, ChainError>,
    b: impl Fn(i64) -> Result<Option<Mat>, ChainError>,
    c: impl Fn(i64) -> Result<Mat, ChainError>,
) -> Result<ChainMap, ChainError> {
    let ring = src.ring().clone();
    ChainMap::from_fn(src, tgt, |n| {
        let (a, c) = (a(n)?, c(n - 1)?);
        let mut m = Mat::block_diagonal(&ring, &[a.clone(), c.clone()])?;
        if let Some(b) = b(n - 1)? {
            m = Mat::block(&ring, &[vec![a.clone(), b], vec![Mat::zero(&ring, c.rows(), a.cols()), c]])?;
        }
        Ok(m)
    })
}

/// `[[0, 0], [1, 0]]`, the homotopy from `1` to `t f` on `cone(1 - t f)`.
fn torus_shift_homotopy(x: &ProjComplex, base: &ProjComplex) -> Result<Homotopy, ChainError> {
    let ring = x.ring().clone();
    Homotopy::from_fn(x, x, |n| {
        let rows = [base.ambient_rank(n + 1), base.ambient_rank(n)];
        let cols = [base.ambient_rank(n), base.ambient_rank(n - 1)];
        let id = laurent_lift(&base.idem(n), &ring)?;
        Ok(Mat::assemble(&ring, &rows, &cols, |i, j| (i == 1 && j == 0).then(|| id.clone()))?)
    })
}

/// Certificate that `T(X, v u)` and `T(Y, u v)` are equivalent, for maps
/// `u : X -> Y` and `v : Y -> X`: forward is `u` on both blocks, backward is
/// `t v`.
pub fn swap_certificate(u: &ChainMap, v: &ChainMap) -> Result<(ChainMap, ChainMap, ChainEquivalence), ChainError> {
    let f = v.compose(u)?;
    let g = u.compose(v)?;
    let tf = algebraic_mapping_torus(&f)?;
    let tg = algebraic_mapping_torus(&g)?;
    let l = tf.ring().clone();
    let t = l.variable()?;
    let ul = |n: i64| laurent_lift(&u.component(n), &l);
    let tvl = |n: i64| Ok(laurent_lift(&v.component(n), &l)?.scale(&t)?);
    let forward = torus_map(&tf, &tg, ul, |_| Ok(None), ul)?;
    let backward = torus_map(&tg, &tf, tvl, |_| Ok(None), tvl)?;
    let eq = ChainEquivalence {
        forward,
        backward,
        source_homotopy: torus_shift_homotopy(&tf, u.source())?,
        target_homotopy: torus_shift_homotopy(&tg, u.target())?,
    };
    Ok((f, g, eq))
}

/// Certificate that `T(X, f)` and `T(X, g)` are equivalent when
/// `d k + k d = f - g`: the maps `[[1, -t k], [0, 1]]` and
/// `[[1, t k], [0, 1]]` are mutually inverse.
pub fn homotopy_certificate(f: &ChainMap, g: &ChainMap, k: &Homotopy) -> Result<ChainEquivalence, ChainError> {
    let rep = verify_homotopy(k, f, g);
    if !rep.is_ok() {
        return Err(ChainError::from_report("torus homotopy certificate", &rep));
    }
    let tf = algebraic_mapping_torus(f)?;
    let tg = algebraic_mapping_torus(g)?;
    let l = tf.ring().clone();
    let t = l.variable()?;
    let x = f.source();
    let id = |n: i64| laurent_lift(&x.idem(n), &l);
    let tk = |n: i64, sign: bool| -> Result<Option<Mat>, ChainError> {
        let m = laurent_lift(&k.component(n), &l)?.scale(&t)?;
        Ok(Some(if sign { m.neg() } else { m }))
    };
    let forward = torus_map(&tf, &tg, id, |n| tk(n, true), id)?;
    let backward = torus_map(&tg, &tf, id, |n| tk(n, false), id)?;
    Ok(ChainEquivalence {
        forward,
        backward,
        source_homotopy: Homotopy::zero(&tf, &tf),
        target_homotopy: Homotopy::zero(&tg, &tg),
    })
}

/// Checks a supplied equivalence between `T(X, f)` and `T(Y, g)`.
pub fn torus_invariance_check(f: &ChainMap, g: &ChainMap, cert: &ChainEquivalence) -> VerifyReport {
    let mut rep = VerifyReport::new();
    let (tf, tg) = match (algebraic_mapping_torus(f), algebraic_mapping_torus(g)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            rep.push("torus_construction", None, e.to_string());
            return rep;
        }
    };
    if cert.forward.source() != &tf || cert.forward.target() != &tg {
        rep.push("certificate_ends", None, "forward map must go from T(X, f) to T(Y, g)");
        return rep;
    }
    if cert.backward.source() != &tg || cert.backward.target() != &tf {
        rep.push("certificate_ends", None, "backward map must go from T(Y, g) to T(X, f)");
        return rep;
    }
    rep.absorb(verify_equivalence(cert));
    rep
}
