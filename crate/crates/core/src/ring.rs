//! Exact coefficient rings: the integers, integral group rings of finite
//! groups, Laurent extensions `R[t, t^-1]` of those, and imaginary quadratic
//! orders `Z[sqrt d]`.
//!
//! Elements are plain values; every operation goes through the
//! [`RingDescriptor`] that owns the multiplication rule. Results are always
//! returned in canonical form, so structural equality is ring equality.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::linalg::IntMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("element does not belong to the {0} ring")]
    Mismatch(RingKind),
    #[error("ring descriptors differ")]
    DescriptorMismatch,
    #[error("{0} is not a unit of the base ring")]
    NotUnit(String),
    #[error("operation `{op}` is not supported over the {kind} ring")]
    Unsupported { op: &'static str, kind: RingKind },
    #[error("invalid ring descriptor: {0}")]
    InvalidDescriptor(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RingKind {
    Integers,
    GroupRing,
    Laurent,
    Quadratic,
}

impl fmt::Display for RingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RingKind::Integers => "Integers",
            RingKind::GroupRing => "GroupRing",
            RingKind::Laurent => "Laurent",
            RingKind::Quadratic => "Quadratic",
        };
        f.write_str(s)
    }
}

/// Multiplication table of a finite group on the indices `0..n`, with `0`
/// the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupTable {
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
}

impl GroupTable {
    pub fn new(table: Vec<Vec<usize>>) -> Result<Self, RingError> {
        let n = table.len();
        let bad = |m: String| Err(RingError::InvalidDescriptor(m));
        if n == 0 {
            return bad("group table is empty".into());
        }
        for (g, row) in table.iter().enumerate() {
            if row.len() != n {
                return bad(format!("row {g} has length {} (expected {n})", row.len()));
            }
            let mut seen = vec![false; n];
            for &x in row {
                if x >= n || seen[x] {
                    return bad(format!("row {g} is not a permutation of 0..{n}"));
                }
                seen[x] = true;
            }
        }
        for h in 0..n {
            let mut seen = vec![false; n];
            for row in &table {
                if seen[row[h]] {
                    return bad(format!("column {h} is not a permutation of 0..{n}"));
                }
                seen[row[h]] = true;
            }
        }
        for g in 0..n {
            if table[0][g] != g || table[g][0] != g {
                return bad("index 0 is not the identity".into());
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return bad(format!("not associative at ({a}, {b}, {c})"));
                    }
                }
            }
        }
        let inverse = (0..n).map(|g| table[g].iter().position(|&x| x == 0).expect("latin square row")).collect();
        Ok(GroupTable { table, inverse })
    }

    /// The cyclic group of order `n`, element `k` standing for `g^k`.
    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        GroupTable::new(table).expect("cyclic table is a group")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.table[g][h]
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverse[g]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.table
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RingDescriptor {
    Integers,
    GroupRing(Arc<GroupTable>),
    /// `base[t, t^-1]`; the base is never itself a Laurent ring.
    Laurent(Arc<RingDescriptor>),
    /// `Z[sqrt d]` with `d < 0` squarefree.
    Quadratic(i64),
}

/// An element in canonical form. Support lists are sorted by group index or
/// exponent and never carry zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RingElem {
    Int(BigInt),
    Group(Vec<(BigInt, usize)>),
    Laurent(Vec<(RingElem, i64)>),
    /// `a + b sqrt d`
    Quad(BigInt, BigInt),
}

fn is_squarefree(d: i64) -> bool {
    let n = d.unsigned_abs();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p * p) {
            return false;
        }
        p += 1;
    }
    true
}

impl RingDescriptor {
    pub fn group_ring(table: GroupTable) -> Self {
        RingDescriptor::GroupRing(Arc::new(table))
    }

    pub fn laurent(base: RingDescriptor) -> Result<Self, RingError> {
        match base {
            RingDescriptor::Integers | RingDescriptor::GroupRing(_) => Ok(RingDescriptor::Laurent(Arc::new(base))),
            other => Err(RingError::InvalidDescriptor(format!(
                "Laurent base must be Integers or GroupRing, got {}",
                other.kind()
            ))),
        }
    }

    pub fn quadratic(d: i64) -> Result<Self, RingError> {
        if d >= 0 {
            return Err(RingError::InvalidDescriptor(format!("quadratic rings are restricted to d < 0 (got {d})")));
        }
        if !is_squarefree(d) {
            return Err(RingError::InvalidDescriptor(format!("d = {d} is not squarefree")));
        }
        Ok(RingDescriptor::Quadratic(d))
    }

    pub fn kind(&self) -> RingKind {
        match self {
            RingDescriptor::Integers => RingKind::Integers,
            RingDescriptor::GroupRing(_) => RingKind::GroupRing,
            RingDescriptor::Laurent(_) => RingKind::Laurent,
            RingDescriptor::Quadratic(_) => RingKind::Quadratic,
        }
    }

    pub fn laurent_base(&self) -> Option<&RingDescriptor> {
        match self {
            RingDescriptor::Laurent(b) => Some(b),
            _ => None,
        }
    }

    pub fn group(&self) -> Option<&GroupTable> {
        match self {
            RingDescriptor::GroupRing(g) => Some(g),
            _ => None,
        }
    }

    /// Rank of the ring as a free abelian group, when finite.
    pub fn integer_rank(&self) -> Option<usize> {
        match self {
            RingDescriptor::Integers => Some(1),
            RingDescriptor::GroupRing(g) => Some(g.order()),
            RingDescriptor::Quadratic(_) => Some(2),
            RingDescriptor::Laurent(_) => None,
        }
    }

    pub fn zero(&self) -> RingElem {
        match self {
            RingDescriptor::Integers => RingElem::Int(BigInt::zero()),
            RingDescriptor::GroupRing(_) => RingElem::Group(Vec::new()),
            RingDescriptor::Laurent(_) => RingElem::Laurent(Vec::new()),
            RingDescriptor::Quadratic(_) => RingElem::Quad(BigInt::zero(), BigInt::zero()),
        }
    }

    pub fn one(&self) -> RingElem {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> RingElem {
        self.from_bigint(BigInt::from(n))
    }

    pub fn from_bigint(&self, n: BigInt) -> RingElem {
        match self {
            RingDescriptor::Integers => RingElem::Int(n),
            RingDescriptor::GroupRing(_) => group_canonical(vec![(n, 0)]),
            RingDescriptor::Laurent(base) => {
                let c = base.from_bigint(n);
                laurent_canonical(base, vec![(c, 0)])
            }
            RingDescriptor::Quadratic(_) => RingElem::Quad(n, BigInt::zero()),
        }
    }

    /// The group element with index `g` (GroupRing only).
    pub fn group_element(&self, g: usize) -> Result<RingElem, RingError> {
        match self {
            RingDescriptor::GroupRing(t) if g < t.order() => Ok(RingElem::Group(vec![(BigInt::one(), g)])),
            RingDescriptor::GroupRing(_) => Err(RingError::Mismatch(RingKind::GroupRing)),
            _ => Err(RingError::Unsupported { op: "group_element", kind: self.kind() }),
        }
    }

    /// `c t^k` in a Laurent ring.
    pub fn monomial(&self, c: RingElem, k: i64) -> Result<RingElem, RingError> {
        match self {
            RingDescriptor::Laurent(base) => {
                base.check(&c)?;
                Ok(laurent_canonical(base, vec![(c, k)]))
            }
            _ => Err(RingError::Unsupported { op: "monomial", kind: self.kind() }),
        }
    }

    /// The Laurent variable `t`.
    pub fn variable(&self) -> Result<RingElem, RingError> {
        match self {
            RingDescriptor::Laurent(base) => self.monomial(base.one(), 1),
            _ => Err(RingError::Unsupported { op: "variable", kind: self.kind() }),
        }
    }

    pub fn quad(&self, a: i64, b: i64) -> Result<RingElem, RingError> {
        match self {
            RingDescriptor::Quadratic(_) => Ok(RingElem::Quad(a.into(), b.into())),
            _ => Err(RingError::Unsupported { op: "quad", kind: self.kind() }),
        }
    }

    /// Builds a group-ring element from `(coefficient, index)` pairs in any
    /// order, merging repeats.
    pub fn group_elem(&self, terms: &[(i64, usize)]) -> Result<RingElem, RingError> {
        let e = group_canonical(terms.iter().map(|&(c, g)| (BigInt::from(c), g)).collect());
        self.check(&e)?;
        Ok(e)
    }

    /// Shape check, including canonical form.
    pub fn check(&self, a: &RingElem) -> Result<(), RingError> {
        let ok = match (self, a) {
            (RingDescriptor::Integers, RingElem::Int(_)) => true,
            (RingDescriptor::Quadratic(_), RingElem::Quad(..)) => true,
            (RingDescriptor::GroupRing(t), RingElem::Group(terms)) => {
                terms.iter().all(|(c, g)| !c.is_zero() && *g < t.order()) && terms.windows(2).all(|w| w[0].1 < w[1].1)
            }
            (RingDescriptor::Laurent(base), RingElem::Laurent(terms)) => {
                terms.windows(2).all(|w| w[0].1 < w[1].1)
                    && terms.iter().all(|(c, _)| base.check(c).is_ok() && !base.is_zero(c))
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(RingError::Mismatch(self.kind()))
        }
    }

    pub fn is_zero(&self, a: &RingElem) -> bool {
        match a {
            RingElem::Int(n) => n.is_zero(),
            RingElem::Group(t) => t.is_empty(),
            RingElem::Laurent(t) => t.is_empty(),
            RingElem::Quad(x, y) => x.is_zero() && y.is_zero(),
        }
    }

    pub fn is_one(&self, a: &RingElem) -> bool {
        *a == self.one()
    }

    pub fn neg(&self, a: &RingElem) -> Result<RingElem, RingError> {
        self.check_shape(a)?;
        Ok(neg_unchecked(a))
    }

    pub fn add(&self, a: &RingElem, b: &RingElem) -> Result<RingElem, RingError> {
        match (self, a, b) {
            (RingDescriptor::Integers, RingElem::Int(x), RingElem::Int(y)) => Ok(RingElem::Int(x + y)),
            (RingDescriptor::Quadratic(_), RingElem::Quad(a1, b1), RingElem::Quad(a2, b2)) => {
                Ok(RingElem::Quad(a1 + a2, b1 + b2))
            }
            (RingDescriptor::GroupRing(_), RingElem::Group(x), RingElem::Group(y)) => {
                Ok(merge_sorted(x, y, |c1, c2| c1 + c2, |c| c.is_zero()).into_group())
            }
            (RingDescriptor::Laurent(base), RingElem::Laurent(x), RingElem::Laurent(y)) => {
                let mut out = Vec::with_capacity(x.len() + y.len());
                let (mut i, mut j) = (0, 0);
                while i < x.len() || j < y.len() {
                    if j == y.len() || (i < x.len() && x[i].1 < y[j].1) {
                        out.push(x[i].clone());
                        i += 1;
                    } else if i == x.len() || y[j].1 < x[i].1 {
                        out.push(y[j].clone());
                        j += 1;
                    } else {
                        let c = base.add(&x[i].0, &y[j].0)?;
                        if !base.is_zero(&c) {
                            out.push((c, x[i].1));
                        }
                        i += 1;
                        j += 1;
                    }
                }
                Ok(RingElem::Laurent(out))
            }
            _ => Err(RingError::Mismatch(self.kind())),
        }
    }

    pub fn sub(&self, a: &RingElem, b: &RingElem) -> Result<RingElem, RingError> {
        self.check_shape(b)?;
        self.add(a, &neg_unchecked(b))
    }

    pub fn mul(&self, a: &RingElem, b: &RingElem) -> Result<RingElem, RingError> {
        match (self, a, b) {
            (RingDescriptor::Integers, RingElem::Int(x), RingElem::Int(y)) => Ok(RingElem::Int(x * y)),
            (RingDescriptor::Quadratic(d), RingElem::Quad(a1, b1), RingElem::Quad(a2, b2)) => {
                let d = BigInt::from(*d);
                Ok(RingElem::Quad(a1 * a2 + d * b1 * b2, a1 * b2 + b1 * a2))
            }
            (RingDescriptor::GroupRing(t), RingElem::Group(x), RingElem::Group(y)) => {
                if x.is_empty() || y.is_empty() {
                    return Ok(RingElem::Group(Vec::new()));
                }
                let mut acc = vec![BigInt::zero(); t.order()];
                for (c1, g) in x {
                    for (c2, h) in y {
                        acc[t.mul(*g, *h)] += c1 * c2;
                    }
                }
                Ok(RingElem::Group(
                    acc.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(g, c)| (c, g)).collect(),
                ))
            }
            (RingDescriptor::Laurent(base), RingElem::Laurent(x), RingElem::Laurent(y)) => {
                let mut terms = Vec::with_capacity(x.len() * y.len());
                for (c1, e1) in x {
                    for (c2, e2) in y {
                        terms.push((base.mul(c1, c2)?, e1 + e2));
                    }
                }
                Ok(laurent_canonical(base, terms))
            }
            _ => Err(RingError::Mismatch(self.kind())),
        }
    }

    fn check_shape(&self, a: &RingElem) -> Result<(), RingError> {
        let ok = matches!(
            (self, a),
            (RingDescriptor::Integers, RingElem::Int(_))
                | (RingDescriptor::GroupRing(_), RingElem::Group(_))
                | (RingDescriptor::Laurent(_), RingElem::Laurent(_))
                | (RingDescriptor::Quadratic(_), RingElem::Quad(..))
        );
        if ok {
            Ok(())
        } else {
            Err(RingError::Mismatch(self.kind()))
        }
    }

    /// The augmentation `Z[G] -> Z`, summing coefficients.
    pub fn augment(&self, a: &RingElem) -> Result<BigInt, RingError> {
        match (self, a) {
            (RingDescriptor::GroupRing(_), RingElem::Group(terms)) => Ok(terms.iter().map(|(c, _)| c).sum()),
            (RingDescriptor::GroupRing(_), _) => Err(RingError::Mismatch(RingKind::GroupRing)),
            _ => Err(RingError::Unsupported { op: "augment", kind: self.kind() }),
        }
    }

    /// Substitutes `t -> u` for a unit `u` of the base ring (`±1` over the
    /// integers, `±g` over a group ring).
    pub fn laurent_evaluate(&self, a: &RingElem, u: &RingElem) -> Result<RingElem, RingError> {
        let base = match self {
            RingDescriptor::Laurent(b) => b.as_ref(),
            _ => return Err(RingError::Unsupported { op: "laurent_evaluate", kind: self.kind() }),
        };
        self.check_shape(a)?;
        let u_inv = base.unit_inverse(u)?;
        let terms = match a {
            RingElem::Laurent(t) => t,
            _ => unreachable!(),
        };
        let mut acc = base.zero();
        for (c, k) in terms {
            let (g, power) = if *k >= 0 { (u, *k) } else { (&u_inv, -*k) };
            let mut m = c.clone();
            for _ in 0..power {
                m = base.mul(&m, g)?;
            }
            acc = base.add(&acc, &m)?;
        }
        Ok(acc)
    }

    /// Inverse of a trivial unit `±g`; anything else is rejected.
    fn unit_inverse(&self, u: &RingElem) -> Result<RingElem, RingError> {
        match (self, u) {
            (RingDescriptor::Integers, RingElem::Int(n)) if n.abs().is_one() => Ok(u.clone()),
            (RingDescriptor::GroupRing(t), RingElem::Group(terms)) if terms.len() == 1 && terms[0].0.abs().is_one() => {
                Ok(RingElem::Group(vec![(terms[0].0.clone(), t.inverse(terms[0].1))]))
            }
            _ => Err(RingError::NotUnit(format!("{u:?}"))),
        }
    }

    /// Canonical inclusion of a base element as a Laurent constant.
    pub fn include_constant(&self, c: &RingElem) -> Result<RingElem, RingError> {
        match self {
            RingDescriptor::Laurent(base) => {
                base.check(c)?;
                Ok(laurent_canonical(base, vec![(c.clone(), 0)]))
            }
            _ => Err(RingError::Unsupported { op: "include_constant", kind: self.kind() }),
        }
    }

    /// Coordinates on the canonical integer basis (group elements, or
    /// `{1, sqrt d}`).
    pub fn coordinates(&self, a: &RingElem) -> Result<Vec<BigInt>, RingError> {
        match (self, a) {
            (RingDescriptor::Integers, RingElem::Int(n)) => Ok(vec![n.clone()]),
            (RingDescriptor::Quadratic(_), RingElem::Quad(x, y)) => Ok(vec![x.clone(), y.clone()]),
            (RingDescriptor::GroupRing(t), RingElem::Group(terms)) => {
                let mut v = vec![BigInt::zero(); t.order()];
                for (c, g) in terms {
                    v[*g] = c.clone();
                }
                Ok(v)
            }
            (RingDescriptor::Laurent(_), _) => {
                Err(RingError::Unsupported { op: "coordinates", kind: RingKind::Laurent })
            }
            _ => Err(RingError::Mismatch(self.kind())),
        }
    }

    pub fn from_coordinates(&self, v: &[BigInt]) -> Result<RingElem, RingError> {
        let n = self.integer_rank().ok_or(RingError::Unsupported { op: "from_coordinates", kind: self.kind() })?;
        if v.len() != n {
            return Err(RingError::Mismatch(self.kind()));
        }
        Ok(match self {
            RingDescriptor::Integers => RingElem::Int(v[0].clone()),
            RingDescriptor::Quadratic(_) => RingElem::Quad(v[0].clone(), v[1].clone()),
            RingDescriptor::GroupRing(_) => RingElem::Group(
                v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(g, c)| (c.clone(), g)).collect(),
            ),
            RingDescriptor::Laurent(_) => unreachable!(),
        })
    }

    /// Matrix of left multiplication by `a` on the canonical integer basis.
    pub fn regular_representation(&self, a: &RingElem) -> Result<IntMatrix, RingError> {
        match (self, a) {
            (RingDescriptor::Integers, RingElem::Int(n)) => Ok(IntMatrix::from_rows(vec![vec![n.clone()]])),
            (RingDescriptor::Quadratic(d), RingElem::Quad(x, y)) => {
                let d = BigInt::from(*d);
                Ok(IntMatrix::from_rows(vec![vec![x.clone(), &d * y], vec![y.clone(), x.clone()]]))
            }
            (RingDescriptor::GroupRing(t), RingElem::Group(terms)) => {
                let n = t.order();
                let mut m = IntMatrix::zeros(n, n);
                for (c, g) in terms {
                    for h in 0..n {
                        *m.get_mut(t.mul(*g, h), h) += c;
                    }
                }
                Ok(m)
            }
            (RingDescriptor::Laurent(_), _) => {
                Err(RingError::Unsupported { op: "regular_representation", kind: RingKind::Laurent })
            }
            _ => Err(RingError::Mismatch(self.kind())),
        }
    }

    /// Galois conjugation on `Z[sqrt d]`, the involution `g -> g^-1` on a
    /// group ring, identity on the integers.
    pub fn conjugate(&self, a: &RingElem) -> Result<RingElem, RingError> {
        match (self, a) {
            (RingDescriptor::Integers, RingElem::Int(_)) => Ok(a.clone()),
            (RingDescriptor::Quadratic(_), RingElem::Quad(x, y)) => Ok(RingElem::Quad(x.clone(), -y)),
            (RingDescriptor::GroupRing(t), RingElem::Group(terms)) => {
                Ok(group_canonical(terms.iter().map(|(c, g)| (c.clone(), t.inverse(*g))).collect()))
            }
            (RingDescriptor::Laurent(_), _) => Err(RingError::Unsupported { op: "conjugate", kind: RingKind::Laurent }),
            _ => Err(RingError::Mismatch(self.kind())),
        }
    }

    /// Field norm `a^2 - d b^2` on `Z[sqrt d]`.
    pub fn norm(&self, a: &RingElem) -> Result<BigInt, RingError> {
        match (self, a) {
            (RingDescriptor::Quadratic(d), RingElem::Quad(x, y)) => Ok(x * x - BigInt::from(*d) * y * y),
            _ => Err(RingError::Unsupported { op: "norm", kind: self.kind() }),
        }
    }
}

fn neg_unchecked(a: &RingElem) -> RingElem {
    match a {
        RingElem::Int(n) => RingElem::Int(-n),
        RingElem::Quad(x, y) => RingElem::Quad(-x, -y),
        RingElem::Group(t) => RingElem::Group(t.iter().map(|(c, g)| (-c, *g)).collect()),
        RingElem::Laurent(t) => RingElem::Laurent(t.iter().map(|(c, k)| (neg_unchecked(c), *k)).collect()),
    }
}

struct GroupTerms(Vec<(BigInt, usize)>);

impl GroupTerms {
    fn into_group(self) -> RingElem {
        RingElem::Group(self.0)
    }
}

fn merge_sorted(
    x: &[(BigInt, usize)],
    y: &[(BigInt, usize)],
    combine: impl Fn(&BigInt, &BigInt) -> BigInt,
    is_zero: impl Fn(&BigInt) -> bool,
) -> GroupTerms {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        if j == y.len() || (i < x.len() && x[i].1 < y[j].1) {
            out.push(x[i].clone());
            i += 1;
        } else if i == x.len() || y[j].1 < x[i].1 {
            out.push(y[j].clone());
            j += 1;
        } else {
            let c = combine(&x[i].0, &y[j].0);
            if !is_zero(&c) {
                out.push((c, x[i].1));
            }
            i += 1;
            j += 1;
        }
    }
    GroupTerms(out)
}

/// Sorts by index, merges repeated indices, drops zeros.
pub(crate) fn group_canonical(mut terms: Vec<(BigInt, usize)>) -> RingElem {
    terms.sort_by_key(|t| t.1);
    let mut out: Vec<(BigInt, usize)> = Vec::with_capacity(terms.len());
    for (c, g) in terms {
        match out.last_mut() {
            Some(last) if last.1 == g => last.0 += c,
            _ => out.push((c, g)),
        }
    }
    out.retain(|(c, _)| !c.is_zero());
    RingElem::Group(out)
}

pub(crate) fn laurent_canonical(base: &RingDescriptor, mut terms: Vec<(RingElem, i64)>) -> RingElem {
    terms.sort_by_key(|t| t.1);
    let mut out: Vec<(RingElem, i64)> = Vec::with_capacity(terms.len());
    for (c, k) in terms {
        match out.last_mut() {
            Some(last) if last.1 == k => {
                last.0 = base.add(&last.0, &c).expect("Laurent coefficients share the base ring");
            }
            _ => out.push((c, k)),
        }
    }
    out.retain(|(c, _)| !base.is_zero(c));
    RingElem::Laurent(out)
}

impl fmt::Display for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingElem::Int(n) => write!(f, "{n}"),
            RingElem::Quad(a, b) => write!(f, "{a}{}{}*sqrt(d)", if b.is_negative() { "" } else { "+" }, b),
            RingElem::Group(t) if t.is_empty() => f.write_str("0"),
            RingElem::Group(t) => {
                let parts: Vec<String> = t.iter().map(|(c, g)| format!("{c}*g{g}")).collect();
                f.write_str(&parts.join(" + "))
            }
            RingElem::Laurent(t) if t.is_empty() => f.write_str("0"),
            RingElem::Laurent(t) => {
                let parts: Vec<String> = t.iter().map(|(c, k)| format!("({c})*t^{k}")).collect();
                f.write_str(&parts.join(" + "))
            }
        }
    }
}

impl RingElem {
    /// Re-canonicalizes a possibly hand-built element.
    pub fn canonicalize(self, ring: &RingDescriptor) -> RingElem {
        match (ring, self) {
            (RingDescriptor::GroupRing(_), RingElem::Group(t)) => group_canonical(t),
            (RingDescriptor::Laurent(base), RingElem::Laurent(t)) => {
                laurent_canonical(base, t.into_iter().map(|(c, k)| (c.canonicalize(base), k)).collect())
            }
            (_, e) => e,
        }
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            RingElem::Int(n) => Some(n),
            _ => None,
        }
    }
}

/// Rounds `num / den` to the nearest integer, ties toward +infinity.
pub(crate) fn round_div(num: &BigInt, den: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    (num * &two + den).div_floor(&(den * two))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c2() -> RingDescriptor {
        RingDescriptor::group_ring(GroupTable::cyclic(2))
    }

    #[test]
    fn laurent_difference_of_squares() {
        let l = RingDescriptor::laurent(RingDescriptor::Integers).unwrap();
        let t = l.variable().unwrap();
        let one = l.one();
        let a = l.add(&one, &t).unwrap();
        let b = l.sub(&one, &t).unwrap();
        let t2 = l.mul(&t, &t).unwrap();
        assert_eq!(l.mul(&a, &b).unwrap(), l.sub(&one, &t2).unwrap());
    }

    #[test]
    fn quadratic_norm_of_one_plus_root() {
        let q = RingDescriptor::quadratic(-5).unwrap();
        let a = q.quad(1, 1).unwrap();
        let b = q.quad(1, -1).unwrap();
        assert_eq!(q.mul(&a, &b).unwrap(), q.from_int(6));
    }

    #[test]
    fn group_element_times_inverse() {
        let r = c2();
        let g = r.group_element(1).unwrap();
        assert_eq!(r.mul(&g, &g).unwrap(), r.one());
    }

    #[test]
    fn augmentation_examples() {
        let r = RingDescriptor::group_ring(GroupTable::cyclic(3));
        assert_eq!(r.augment(&r.group_elem(&[(2, 1), (-3, 2)]).unwrap()).unwrap(), BigInt::from(-1));
        assert_eq!(r.augment(&r.zero()).unwrap(), BigInt::zero());
        assert_eq!(r.augment(&r.one()).unwrap(), BigInt::one());
        assert!(RingDescriptor::Integers.augment(&RingElem::Int(1.into())).is_err());
    }

    #[test]
    fn evaluation_examples() {
        let l = RingDescriptor::laurent(RingDescriptor::Integers).unwrap();
        let t = l.variable().unwrap();
        let one_minus_t = l.sub(&l.one(), &t).unwrap();
        let z = RingDescriptor::Integers;
        assert_eq!(l.laurent_evaluate(&one_minus_t, &z.from_int(1)).unwrap(), z.from_int(0));
        assert_eq!(l.laurent_evaluate(&one_minus_t, &z.from_int(-1)).unwrap(), z.from_int(2));
        let p = l.sub(&l.monomial(z.from_int(3), 2).unwrap(), &l.monomial(z.from_int(1), -1).unwrap()).unwrap();
        assert_eq!(l.laurent_evaluate(&p, &z.from_int(1)).unwrap(), z.from_int(2));
        assert!(matches!(l.laurent_evaluate(&p, &z.from_int(2)), Err(RingError::NotUnit(_))));
    }

    #[test]
    fn evaluation_at_group_element() {
        let r = c2();
        let l = RingDescriptor::laurent(r.clone()).unwrap();
        let g = r.group_element(1).unwrap();
        // t^-1 at t = g is g^-1 = g
        let tinv = l.monomial(r.one(), -1).unwrap();
        assert_eq!(l.laurent_evaluate(&tinv, &g).unwrap(), g);
        let two = r.from_int(2);
        assert!(l.laurent_evaluate(&tinv, &two).is_err());
    }

    #[test]
    fn regular_representation_examples() {
        let r = c2();
        let one = r.regular_representation(&r.one()).unwrap();
        assert_eq!(one, IntMatrix::identity(2));
        let g = r.regular_representation(&r.group_element(1).unwrap()).unwrap();
        assert_eq!(g, IntMatrix::from_i64(&[&[0, 1], &[1, 0]]));
        let q = RingDescriptor::quadratic(-5).unwrap();
        let root = q.regular_representation(&q.quad(0, 1).unwrap()).unwrap();
        assert_eq!(root, IntMatrix::from_i64(&[&[0, -5], &[1, 0]]));
        let l = RingDescriptor::laurent(RingDescriptor::Integers).unwrap();
        assert!(l.regular_representation(&l.one()).is_err());
    }

    #[test]
    fn descriptor_validation() {
        assert!(RingDescriptor::quadratic(-4).is_err());
        assert!(RingDescriptor::quadratic(0).is_err());
        assert!(RingDescriptor::quadratic(1).is_err());
        assert!(RingDescriptor::quadratic(3).is_err());
        assert!(RingDescriptor::quadratic(-5).is_ok());
        let l = RingDescriptor::laurent(RingDescriptor::Integers).unwrap();
        assert!(RingDescriptor::laurent(l).is_err());
        assert!(RingDescriptor::laurent(RingDescriptor::Quadratic(-5)).is_err());
        assert!(GroupTable::new(vec![vec![0, 1], vec![1, 1]]).is_err());
        assert!(GroupTable::new(vec![vec![1, 0], vec![0, 1]]).is_err());
        // a latin square with identity 0 that is not associative (order 5 loop)
        let loop5 = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(GroupTable::new(loop5).is_err());
    }

    #[test]
    fn mismatched_rings_rejected() {
        let q = RingDescriptor::quadratic(-5).unwrap();
        let z = RingDescriptor::Integers;
        assert!(z.add(&z.one(), &q.one()).is_err());
        assert!(q.mul(&z.one(), &q.one()).is_err());
    }

    #[test]
    fn canonical_form_merges_and_drops() {
        let r = RingDescriptor::group_ring(GroupTable::cyclic(3));
        let raw = RingElem::Group(vec![(BigInt::from(2), 2), (BigInt::from(1), 0), (BigInt::from(-2), 2)]);
        let once = raw.canonicalize(&r);
        assert_eq!(once, r.one());
        assert_eq!(once.clone().canonicalize(&r), once);
    }

    #[test]
    fn rounding() {
        assert_eq!(round_div(&BigInt::from(7), &BigInt::from(2)), BigInt::from(4));
        assert_eq!(round_div(&BigInt::from(-7), &BigInt::from(2)), BigInt::from(-3));
        assert_eq!(round_div(&BigInt::from(5), &BigInt::from(3)), BigInt::from(2));
    }
}
