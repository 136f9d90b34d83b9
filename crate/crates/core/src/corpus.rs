//! Seeded random dominations.
//!
//! A random free complex `X` is a sum of elementary pieces (a free
//! generator, `R -1-> R`, `R -a-> R`) moved by random unimodular changes of
//! basis. Two shapes of domination are produced, for a random degree-one map
//! `u` on `X`, `phi = 1 - (d u + u d)` and `K = cone(1_B)`:
//!
//! * `A = X`, `C = X + K`, `i` the inclusion, `r = phi . proj`, `s = u`;
//! * `A = X + K`, `C = X`, `i` the projection, `r = incl . phi`,
//!   `s = u + contraction of K`.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::{direct_sum, mapping_cone, ChainMap, Homotopy, ProjComplex};
use crate::doc::Workspace;
use crate::k0::contract;
use crate::linalg::Mat;
use crate::ranicki::Domination;
use crate::ring::{GroupTable, RingDescriptor, RingElem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// The dominated complex is `X` itself.
    Retract,
    /// The dominated complex carries an extra contractible summand.
    Collapse,
}

#[derive(Debug, Clone)]
pub struct CorpusMember {
    pub name: String,
    pub family: Family,
    pub domination: Domination,
    /// `X` has nothing but unit pieces touching degree 0.
    pub acyclic_bottom: bool,
    pub x: ProjComplex,
}

#[derive(Debug, Clone, Copy)]
enum Piece {
    Generator(i64),
    /// `R -a-> R` in degrees `k + 1, k`; `unit` pieces use `a = 1`.
    Arrow {
        k: i64,
        unit: bool,
    },
}

struct Gen<'a> {
    ring: &'a RingDescriptor,
    rng: ChaCha8Rng,
}

impl Gen<'_> {
    fn small(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.gen_range(lo..=hi)
    }

    fn element(&mut self, lo: i64, hi: i64) -> RingElem {
        match self.ring.group() {
            Some(g) => {
                let terms: Vec<(i64, usize)> = (0..g.order()).map(|i| (self.small(lo, hi), i)).collect();
                self.ring.group_elem(&terms).expect("indices in range")
            }
            None => self.ring.from_int(self.small(lo, hi)),
        }
    }

    /// Sparse entries in `{-1, 0, 1}` (coefficientwise).
    fn sparse_matrix(&mut self, rows: usize, cols: usize) -> Mat {
        let mut m = Mat::zero(self.ring, rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if self.rng.gen_bool(0.4) {
                    m.set(r, c, self.element(-1, 1)).expect("same ring");
                }
            }
        }
        m
    }

    fn torsion_label(&mut self) -> RingElem {
        match self.ring.group() {
            Some(_) => {
                let choices = [[2, 0], [1, 1], [1, -1], [2, 1]];
                let c = choices[self.rng.gen_range(0..choices.len())];
                self.ring.group_elem(&[(c[0], 0), (c[1], 1)]).expect("index 1 exists")
            }
            None => self.ring.from_int(self.small(2, 3)),
        }
    }

    /// `(U, U^-1)`, a product of a few elementary matrices.
    fn unimodular(&mut self, n: usize) -> (Mat, Mat) {
        let mut u = Mat::identity(self.ring, n);
        let mut inv = Mat::identity(self.ring, n);
        if n < 2 {
            return (u, inv);
        }
        for _ in 0..self.rng.gen_range(0..=3) {
            let i = self.rng.gen_range(0..n);
            let mut j = self.rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let lambda = self.element(-1, 1);
            let mut e = Mat::identity(self.ring, n);
            e.set(i, j, lambda.clone()).expect("same ring");
            let mut e_inv = Mat::identity(self.ring, n);
            e_inv.set(i, j, self.ring.neg(&lambda).expect("same ring")).expect("same ring");
            u = e.mul(&u).expect("square");
            inv = inv.mul(&e_inv).expect("square");
        }
        (u, inv)
    }

    /// Pieces placed in degrees `0..=top`; with `acyclic_bottom` degree 0
    /// is only reached by unit arrows.
    fn free_complex(&mut self, top: i64, max_rank: usize, acyclic_bottom: bool) -> ProjComplex {
        let mut pieces = Vec::new();
        let mut ranks = vec![0usize; top as usize + 1];
        let attempts = self.rng.gen_range(1..=4);
        for _ in 0..attempts {
            let piece = match self.rng.gen_range(0..3) {
                0 if top >= 0 => Piece::Generator(self.small(0, top)),
                1 | 2 if top >= 1 => Piece::Arrow { k: self.small(0, top - 1), unit: self.rng.gen_bool(0.5) },
                _ => Piece::Generator(self.small(0, top)),
            };
            let (piece, degs) = match piece {
                Piece::Generator(0) if acyclic_bottom => continue,
                Piece::Arrow { k: 0, .. } if acyclic_bottom => (Piece::Arrow { k: 0, unit: true }, vec![0, 1]),
                Piece::Generator(k) => (piece, vec![k]),
                Piece::Arrow { k, .. } => (piece, vec![k, k + 1]),
            };
            if degs.iter().any(|&d| ranks[d as usize] >= max_rank) {
                continue;
            }
            for d in degs {
                ranks[d as usize] += 1;
            }
            pieces.push(piece);
        }
        if acyclic_bottom && ranks[0] == 0 && top >= 1 && ranks[0] < max_rank && ranks[1] < max_rank {
            pieces.push(Piece::Arrow { k: 0, unit: true });
            ranks[0] += 1;
            ranks[1] += 1;
        }
        // coordinates of each piece in its degrees
        let mut next = vec![0usize; ranks.len()];
        let mut bd: Vec<Mat> = (1..ranks.len()).map(|n| Mat::zero(self.ring, ranks[n - 1], ranks[n])).collect();
        for p in &pieces {
            match *p {
                Piece::Generator(k) => next[k as usize] += 1,
                Piece::Arrow { k, unit } => {
                    let (lo, hi) = (k as usize, k as usize + 1);
                    let a = if unit { self.ring.one() } else { self.torsion_label() };
                    bd[lo].set(next[lo], next[hi], a).expect("same ring");
                    next[lo] += 1;
                    next[hi] += 1;
                }
            }
        }
        let bases: Vec<(Mat, Mat)> = ranks.iter().map(|&m| self.unimodular(m)).collect();
        let boundaries: Vec<Mat> = (1..ranks.len())
            .map(|n| bases[n - 1].0.mul(&bd[n - 1]).and_then(|m| m.mul(&bases[n].1)).expect("conformable"))
            .collect();
        trim_top(ProjComplex::free(self.ring, 0, &ranks, boundaries).expect("shapes agree"))
    }

    fn degree_one_map(&mut self, x: &ProjComplex) -> Homotopy {
        Homotopy::from_fn(x, x, |n| Ok(self.sparse_matrix(x.ambient_rank(n + 1), x.ambient_rank(n))))
            .expect("shapes agree")
    }
}

/// Drops zero modules at the top, keeping the bottom at degree 0.
fn trim_top(x: ProjComplex) -> ProjComplex {
    let mut hi = x.top();
    while hi >= x.bottom() && x.ambient_rank(hi) == 0 {
        hi -= 1;
    }
    if hi < x.bottom() {
        return ProjComplex::zero(x.ring());
    }
    let len = (hi - x.bottom()) as usize;
    let modules = x.modules()[..=len].to_vec();
    let boundaries = x.boundaries()[..len].to_vec();
    ProjComplex::new(x.ring(), x.bottom(), modules, boundaries).expect("prefix of a complex")
}

/// `1 - (d u + u d)`.
fn deformation(x: &ProjComplex, u: &Homotopy) -> ChainMap {
    ChainMap::from_fn(x, x, |n| {
        let a = x.boundary(n + 1).mul(&u.component(n))?;
        let b = u.component(n - 1).mul(&x.boundary(n))?;
        Ok(x.idem(n).sub(&a.add(&b)?)?)
    })
    .expect("shapes agree")
}

fn summand_maps(x: &ProjComplex, sum: &ProjComplex) -> (ChainMap, ChainMap) {
    let ring = x.ring();
    let incl = ChainMap::from_fn(x, sum, |n| {
        let cols: Vec<usize> = (0..x.ambient_rank(n)).collect();
        Ok(Mat::identity(ring, sum.ambient_rank(n)).select_cols(&cols))
    })
    .expect("shapes agree");
    let proj = ChainMap::from_fn(sum, x, |n| {
        let rows: Vec<usize> = (0..x.ambient_rank(n)).collect();
        Ok(Mat::identity(ring, sum.ambient_rank(n)).select_rows(&rows))
    })
    .expect("shapes agree");
    (incl, proj)
}

fn member(g: &mut Gen, name: String, family: Family) -> CorpusMember {
    let ring = g.ring.clone();
    let acyclic_bottom = g.rng.gen_bool(0.3);
    let (x_rank, b_rank) = match family {
        Family::Retract => (3, 2),
        Family::Collapse => (2, 1),
    };
    let x = g.free_complex(2, x_rank, acyclic_bottom);
    let b_top = if family == Family::Collapse { 0 } else { 1 };
    let b = g.free_complex(b_top, b_rank, false);
    let k = mapping_cone(&ChainMap::identity(&b)).expect("identity is a chain map");
    let u = g.degree_one_map(&x);
    let phi = deformation(&x, &u);
    let sum = direct_sum(&x, &k).expect("same ring");
    let (incl, proj) = summand_maps(&x, &sum);
    let domination = match family {
        Family::Retract => {
            Domination { a: x.clone(), c: sum.clone(), i: incl, r: phi.compose(&proj).expect("composable"), s: u }
        }
        Family::Collapse => {
            let t = contract(&k).expect("cones of identities are contractible");
            let s =
                Homotopy::from_fn(&sum, &sum, |n| Ok(Mat::block_diagonal(&ring, &[u.component(n), t.component(n)])?))
                    .expect("shapes agree");
            Domination { a: sum.clone(), c: x.clone(), i: proj, r: incl.compose(&phi).expect("composable"), s }
        }
    };
    CorpusMember { name, family, domination, acyclic_bottom: acyclic_bottom && x.ambient_rank(0) > 0, x }
}

/// `count` dominations over `ring`, deterministic in `seed`.
pub fn generate_members(ring: &RingDescriptor, seed: u64, count: usize) -> Vec<CorpusMember> {
    let mut g = Gen { ring, rng: ChaCha8Rng::seed_from_u64(seed) };
    (0..count)
        .map(|j| {
            let family = if j % 3 == 2 { Family::Collapse } else { Family::Retract };
            member(&mut g, format!("d{j}"), family)
        })
        .collect()
}

/// Members alternate between the integers and `Z[C2]`.
pub fn mixed_members(seed: u64, count: usize) -> Vec<CorpusMember> {
    let z = RingDescriptor::Integers;
    let c2 = RingDescriptor::group_ring(GroupTable::cyclic(2));
    let half = count.div_ceil(2);
    let mut out = generate_members(&z, seed, half);
    for mut m in generate_members(&c2, seed, count - half) {
        m.name = format!("c2.{}", m.name);
        out.push(m);
    }
    out
}

/// A workspace holding `count` dominations `d0, d1, ...` over `ring`.
pub fn generate_corpus_over(ring: &RingDescriptor, seed: u64, count: usize) -> Workspace {
    let mut ws = Workspace::new(ring);
    for m in generate_members(ring, seed, count) {
        ws.insert_domination(&m.name, &m.domination);
    }
    ws
}

/// Integer corpus.
pub fn generate_corpus(seed: u64, count: usize) -> Workspace {
    generate_corpus_over(&RingDescriptor::Integers, seed, count)
}

/// Per-family counts, for reporting.
pub fn family_counts(members: &[CorpusMember]) -> BTreeMap<&'static str, usize> {
    let mut out = BTreeMap::new();
    for m in members {
        let key = match m.family {
            Family::Retract => "retract",
            Family::Collapse => "collapse",
        };
        *out.entry(key).or_insert(0) += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::validate_complex;
    use crate::ranicki::verify_domination;

    #[test]
    fn members_are_valid() {
        for m in mixed_members(7, 24) {
            assert!(validate_complex(&m.x).is_ok(), "{}", m.name);
            let rep = verify_domination(&m.domination);
            assert!(rep.is_ok(), "{}: {rep}", m.name);
            assert!(m.domination.a.top() <= 2);
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = generate_corpus(0, 3).to_text();
        assert_eq!(a, generate_corpus(0, 3).to_text());
        assert_ne!(a, generate_corpus(1, 3).to_text());
    }

    #[test]
    fn both_families_and_acyclic_bottoms_occur() {
        let ms = mixed_members(0, 60);
        let counts = family_counts(&ms);
        assert!(counts["retract"] > 0 && counts["collapse"] > 0);
        assert!(ms.iter().any(|m| m.acyclic_bottom));
        assert!(ms.iter().any(|m| !m.domination.s.components().is_empty()));
    }
}
