//! Smith normal form over the integers and the exact lattice primitives built
//! on it (solving, kernels, images, cokernels).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::IntMatrix;

/// `u * m * v == d` with `u`, `v` unimodular and `d` diagonal, nonnegative,
/// `d[0] | d[1] | ...`. The inverses are tracked alongside so callers never
/// need to invert.
#[derive(Debug, Clone)]
pub struct Smith {
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub u_inv: IntMatrix,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
    pub rank: usize,
}

impl Smith {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.rank).map(|i| self.d.get(i, i).clone()).collect()
    }
}

struct Work {
    a: IntMatrix,
    u: IntMatrix,
    u_inv: IntMatrix,
    v: IntMatrix,
    v_inv: IntMatrix,
}

impl Work {
    fn swap_rows(&mut self, i: usize, j: usize) {
        if i != j {
            self.a.swap_rows(i, j);
            self.u.swap_rows(i, j);
            self.u_inv.swap_cols(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i != j {
            self.a.swap_cols(i, j);
            self.v.swap_cols(i, j);
            self.v_inv.swap_rows(i, j);
        }
    }

    fn add_row(&mut self, dst: usize, src: usize, k: &BigInt) {
        self.a.add_row_multiple(dst, src, k);
        self.u.add_row_multiple(dst, src, k);
        self.u_inv.add_col_multiple(src, dst, &-k);
    }

    fn add_col(&mut self, dst: usize, src: usize, k: &BigInt) {
        self.a.add_col_multiple(dst, src, k);
        self.v.add_col_multiple(dst, src, k);
        self.v_inv.add_row_multiple(src, dst, &-k);
    }

    fn negate_row(&mut self, i: usize) {
        self.a.negate_row(i);
        self.u.negate_row(i);
        self.u_inv.negate_col(i);
    }
}

/// Position of the nonzero entry of least absolute value among `cells`,
/// first one wins on ties.
fn min_abs(a: &IntMatrix, cells: impl Iterator<Item = (usize, usize)>) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), BigInt)> = None;
    for (i, j) in cells {
        let x = a.get(i, j);
        if x.is_zero() {
            continue;
        }
        let ax = x.abs();
        if best.as_ref().is_none_or(|(_, b)| ax < *b) {
            best = Some(((i, j), ax));
        }
    }
    best.map(|(p, _)| p)
}

pub fn smith_normal_form(m: &IntMatrix) -> Smith {
    let (r, c) = (m.rows(), m.cols());
    let mut w = Work {
        a: m.clone(),
        u: IntMatrix::identity(r),
        u_inv: IntMatrix::identity(r),
        v: IntMatrix::identity(c),
        v_inv: IntMatrix::identity(c),
    };
    let mut t = 0;
    while t < r.min(c) {
        let cells = (t..r).flat_map(|i| (t..c).map(move |j| (i, j)));
        let Some((pi, pj)) = min_abs(&w.a, cells) else { break };
        w.swap_rows(t, pi);
        w.swap_cols(t, pj);
        loop {
            let mut clean = true;
            for i in t + 1..r {
                if !w.a.get(i, t).is_zero() {
                    let q = w.a.get(i, t) / w.a.get(t, t);
                    w.add_row(i, t, &-q);
                    clean &= w.a.get(i, t).is_zero();
                }
            }
            for j in t + 1..c {
                if !w.a.get(t, j).is_zero() {
                    let q = w.a.get(t, j) / w.a.get(t, t);
                    w.add_col(j, t, &-q);
                    clean &= w.a.get(t, j).is_zero();
                }
            }
            if !clean {
                let cross = std::iter::once((t, t)).chain((t + 1..r).map(|i| (i, t))).chain((t + 1..c).map(|j| (t, j)));
                let (pi, pj) = min_abs(&w.a, cross).expect("pivot row/column is nonzero");
                w.swap_rows(t, pi);
                w.swap_cols(t, pj);
                continue;
            }
            let pivot = w.a.get(t, t).clone();
            let offender = (t + 1..r).find(|&i| (t + 1..c).any(|j| !w.a.get(i, j).is_multiple_of(&pivot)));
            match offender {
                Some(i) => w.add_row(t, i, &BigInt::from(1)),
                None => break,
            }
        }
        if w.a.get(t, t).is_negative() {
            w.negate_row(t);
        }
        t += 1;
    }
    Smith { d: w.a, u: w.u, u_inv: w.u_inv, v: w.v, v_inv: w.v_inv, rank: t }
}

/// Solves `m * x = b` over the integers for every column of `b` at once.
pub fn solve_integer(m: &IntMatrix, b: &IntMatrix) -> Option<IntMatrix> {
    assert_eq!(m.rows(), b.rows(), "right-hand side has wrong height");
    let s = smith_normal_form(m);
    solve_with(&s, b)
}

fn solve_with(s: &Smith, b: &IntMatrix) -> Option<IntMatrix> {
    let y = &s.u * b;
    let cols = s.v.rows();
    let mut z = IntMatrix::zeros(cols, b.cols());
    for i in 0..y.rows() {
        for j in 0..b.cols() {
            let yi = y.get(i, j);
            if i < s.rank {
                let (q, rem) = yi.div_rem(s.d.get(i, i));
                if !rem.is_zero() {
                    return None;
                }
                z.set(i, j, q);
            } else if !yi.is_zero() {
                return None;
            }
        }
    }
    Some(&s.v * &z)
}

/// Columns form a basis of the integer kernel of `m`.
pub fn kernel_basis(m: &IntMatrix) -> IntMatrix {
    let s = smith_normal_form(m);
    let cols: Vec<usize> = (s.rank..m.cols()).collect();
    s.v.select_columns(&cols)
}

/// Columns form a basis of the lattice spanned by the columns of `m`.
pub fn image_basis(m: &IntMatrix) -> IntMatrix {
    let s = smith_normal_form(m);
    let mut b = s.u_inv.select_columns(&(0..s.rank).collect::<Vec<_>>());
    for j in 0..s.rank {
        let dj = s.d.get(j, j).clone();
        for i in 0..b.rows() {
            let v = b.get(i, j) * &dj;
            b.set(i, j, v);
        }
    }
    b
}

pub fn rank(m: &IntMatrix) -> usize {
    smith_normal_form(m).rank
}

/// Free rank and invariant factors (> 1) of `Z^rows / image(m)`.
pub fn cokernel(m: &IntMatrix) -> (usize, Vec<BigInt>) {
    let s = smith_normal_form(m);
    let torsion = s.diagonal().into_iter().filter(|d| *d > BigInt::from(1)).collect();
    (m.rows() - s.rank, torsion)
}

/// Normalizes a multiset of positive integers into an invariant-factor chain
/// (each entry divides the next, units dropped).
pub fn invariant_factors(orders: &[BigInt]) -> Vec<BigInt> {
    let n = orders.len();
    let mut m = IntMatrix::zeros(n, n);
    for (i, o) in orders.iter().enumerate() {
        m.set(i, i, o.clone());
    }
    let s = smith_normal_form(&m);
    s.diagonal().into_iter().filter(|d| *d > BigInt::from(1)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(m: &IntMatrix) -> Smith {
        let s = smith_normal_form(m);
        assert_eq!(&(&s.u * m) * &s.v, s.d);
        assert_eq!(&s.u * &s.u_inv, IntMatrix::identity(m.rows()));
        assert_eq!(&s.v * &s.v_inv, IntMatrix::identity(m.cols()));
        s
    }

    #[test]
    fn identity_is_fixed() {
        let s = check(&IntMatrix::identity(3));
        assert_eq!(s.d, IntMatrix::identity(3));
        assert_eq!(s.u, IntMatrix::identity(3));
        assert_eq!(s.v, IntMatrix::identity(3));
    }

    #[test]
    fn zero_one_by_one() {
        let s = check(&IntMatrix::from_i64(&[&[0]]));
        assert_eq!(s.d, IntMatrix::from_i64(&[&[0]]));
        assert_eq!(s.u, IntMatrix::identity(1));
        assert_eq!(s.v, IntMatrix::identity(1));
        assert_eq!(s.rank, 0);
    }

    #[test]
    fn two_by_two_example() {
        let s = check(&IntMatrix::from_i64(&[&[2, 4], &[6, 8]]));
        assert_eq!(s.diagonal(), vec![BigInt::from(2), BigInt::from(4)]);
    }

    #[test]
    fn divisibility_needs_fixup() {
        // diag(2, 3) has invariant factors (1, 6)
        let s = check(&IntMatrix::from_i64(&[&[2, 0], &[0, 3]]));
        assert_eq!(s.diagonal(), vec![BigInt::from(1), BigInt::from(6)]);
    }

    #[test]
    fn solve_small() {
        let m = IntMatrix::from_i64(&[&[2]]);
        assert_eq!(solve_integer(&m, &IntMatrix::from_i64(&[&[4]])), Some(IntMatrix::from_i64(&[&[2]])));
        assert_eq!(solve_integer(&m, &IntMatrix::from_i64(&[&[3]])), None);
    }

    #[test]
    fn kernels() {
        let k = kernel_basis(&IntMatrix::from_i64(&[&[1, 1]]));
        assert_eq!(k.cols(), 1);
        let v = k.column(0);
        assert_eq!(&v[0] + &v[1], BigInt::zero());
        assert!(v[0].abs() == BigInt::from(1));
        assert_eq!(kernel_basis(&IntMatrix::identity(3)).cols(), 0);
        assert_eq!(kernel_basis(&IntMatrix::from_i64(&[&[2, 4], &[6, 8]])).cols(), 0);
    }

    #[test]
    fn invariant_factor_merge() {
        let f = invariant_factors(&[BigInt::from(2), BigInt::from(3), BigInt::from(2)]);
        assert_eq!(f, vec![BigInt::from(2), BigInt::from(6)]);
    }

    #[test]
    fn empty_shapes() {
        let s = check(&IntMatrix::zeros(0, 3));
        assert_eq!(s.rank, 0);
        assert_eq!(kernel_basis(&IntMatrix::zeros(0, 2)).cols(), 2);
        assert_eq!(image_basis(&IntMatrix::zeros(2, 0)).cols(), 0);
    }
}
