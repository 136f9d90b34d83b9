use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use super::{snf, IntMatrix};
use crate::ring::{RingDescriptor, RingElem, RingError, RingKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("operation `{op}` is not supported over the {kind} ring")]
    UnsupportedRing { op: &'static str, kind: RingKind },
}

/// Dense matrix over one of the supported rings. Matrices act on column
/// vectors, so `a.mul(b)` is "first `b`, then `a`".
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    rows: usize,
    cols: usize,
    entries: Vec<RingElem>,
    ring: RingDescriptor,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat<{}> {}x{} {:?}", self.ring.kind(), self.rows, self.cols, self.entries)
    }
}

impl Mat {
    pub fn new(ring: &RingDescriptor, rows: usize, cols: usize, entries: Vec<RingElem>) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::Dimension(format!("{} entries for a {rows}x{cols} matrix", entries.len())));
        }
        for e in &entries {
            ring.check(e)?;
        }
        Ok(Mat { rows, cols, entries, ring: ring.clone() })
    }

    pub fn zero(ring: &RingDescriptor, rows: usize, cols: usize) -> Self {
        Mat { rows, cols, entries: vec![ring.zero(); rows * cols], ring: ring.clone() }
    }

    pub fn identity(ring: &RingDescriptor, n: usize) -> Self {
        let mut m = Self::zero(ring, n, n);
        for i in 0..n {
            m.entries[i * n + i] = ring.one();
        }
        m
    }

    pub fn from_ints(ring: &RingDescriptor, rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        let entries = rows.iter().flat_map(|row| row.iter().map(|&x| ring.from_int(x))).collect();
        Mat { rows: r, cols: c, entries, ring: ring.clone() }
    }

    pub fn from_rows(ring: &RingDescriptor, rows: Vec<Vec<RingElem>>) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(LinalgError::Dimension("ragged rows".into()));
        }
        Self::new(ring, r, c, rows.into_iter().flatten().collect())
    }

    pub fn scalar(ring: &RingDescriptor, a: RingElem) -> Self {
        Mat { rows: 1, cols: 1, entries: vec![a], ring: ring.clone() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn ring(&self) -> &RingDescriptor {
        &self.ring
    }

    pub fn entries(&self) -> &[RingElem] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> &RingElem {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: RingElem) -> Result<(), LinalgError> {
        self.ring.check(&v)?;
        self.entries[r * self.cols + c] = v;
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| self.ring.is_zero(e))
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == Mat::identity(&self.ring, self.rows)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    fn same_ring(&self, other: &Mat) -> Result<(), LinalgError> {
        if self.ring != other.ring {
            return Err(RingError::DescriptorMismatch.into());
        }
        Ok(())
    }

    fn same_shape(&self, other: &Mat, what: &str) -> Result<(), LinalgError> {
        self.same_ring(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(LinalgError::Dimension(format!(
                "{what}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Mat) -> Result<Mat, LinalgError> {
        self.same_shape(other, "sum")?;
        let entries =
            self.entries.iter().zip(&other.entries).map(|(a, b)| self.ring.add(a, b)).collect::<Result<_, _>>()?;
        Ok(Mat { entries, ..self.clone_shape() })
    }

    pub fn sub(&self, other: &Mat) -> Result<Mat, LinalgError> {
        self.same_shape(other, "difference")?;
        let entries =
            self.entries.iter().zip(&other.entries).map(|(a, b)| self.ring.sub(a, b)).collect::<Result<_, _>>()?;
        Ok(Mat { entries, ..self.clone_shape() })
    }

    pub fn neg(&self) -> Mat {
        let entries = self.entries.iter().map(|a| self.ring.neg(a).expect("entry in ring")).collect();
        Mat { entries, ..self.clone_shape() }
    }

    fn clone_shape(&self) -> Mat {
        Mat { rows: self.rows, cols: self.cols, entries: Vec::new(), ring: self.ring.clone() }
    }

    pub fn mul(&self, other: &Mat) -> Result<Mat, LinalgError> {
        self.same_ring(other)?;
        if self.cols != other.rows {
            return Err(LinalgError::Dimension(format!(
                "product: {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let ring = &self.ring;
        let mut entries = vec![ring.zero(); self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.entries[i * self.cols + k];
                if ring.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other.entries[k * other.cols + j];
                    if ring.is_zero(b) {
                        continue;
                    }
                    let p = ring.mul(a, b)?;
                    let slot = &mut entries[i * other.cols + j];
                    *slot = ring.add(slot, &p)?;
                }
            }
        }
        Ok(Mat { rows: self.rows, cols: other.cols, entries, ring: ring.clone() })
    }

    /// Left scalar multiple `a * self`.
    pub fn scale(&self, a: &RingElem) -> Result<Mat, LinalgError> {
        let entries = self.entries.iter().map(|x| self.ring.mul(a, x)).collect::<Result<_, _>>()?;
        Ok(Mat { entries, ..self.clone_shape() })
    }

    pub fn transpose(&self) -> Mat {
        let mut entries = Vec::with_capacity(self.entries.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                entries.push(self.get(r, c).clone());
            }
        }
        Mat { rows: self.cols, cols: self.rows, entries, ring: self.ring.clone() }
    }

    /// Applies `f` entrywise, landing in `target`.
    pub fn map_entries(
        &self,
        target: &RingDescriptor,
        f: impl Fn(&RingElem) -> Result<RingElem, RingError>,
    ) -> Result<Mat, LinalgError> {
        let entries = self.entries.iter().map(f).collect::<Result<Vec<_>, _>>()?;
        Mat::new(target, self.rows, self.cols, entries)
    }

    /// Glues a grid of blocks. `row_sizes` and `col_sizes` fix the block
    /// dimensions; `block(i, j)` returning `None` means a zero block.
    pub fn assemble(
        ring: &RingDescriptor,
        row_sizes: &[usize],
        col_sizes: &[usize],
        mut block: impl FnMut(usize, usize) -> Option<Mat>,
    ) -> Result<Mat, LinalgError> {
        let rows: usize = row_sizes.iter().sum();
        let cols: usize = col_sizes.iter().sum();
        let mut out = Mat::zero(ring, rows, cols);
        let mut r0 = 0;
        for (bi, &h) in row_sizes.iter().enumerate() {
            let mut c0 = 0;
            for (bj, &w) in col_sizes.iter().enumerate() {
                if let Some(b) = block(bi, bj) {
                    if b.ring != *ring {
                        return Err(RingError::DescriptorMismatch.into());
                    }
                    if (b.rows, b.cols) != (h, w) {
                        return Err(LinalgError::Dimension(format!(
                            "block ({bi}, {bj}) is {}x{}, slot is {h}x{w}",
                            b.rows, b.cols
                        )));
                    }
                    for r in 0..h {
                        for c in 0..w {
                            out.entries[(r0 + r) * cols + c0 + c] = b.get(r, c).clone();
                        }
                    }
                }
                c0 += w;
            }
            r0 += h;
        }
        Ok(out)
    }

    /// Block matrix from a full grid, inferring block sizes from the blocks.
    pub fn block(ring: &RingDescriptor, grid: &[Vec<Mat>]) -> Result<Mat, LinalgError> {
        let row_sizes: Vec<usize> = grid.iter().map(|row| row.first().map_or(0, |b| b.rows)).collect();
        let col_sizes: Vec<usize> = grid.first().map_or(Vec::new(), |row| row.iter().map(|b| b.cols).collect());
        if grid.iter().any(|row| row.len() != col_sizes.len()) {
            return Err(LinalgError::Dimension("ragged block grid".into()));
        }
        Mat::assemble(ring, &row_sizes, &col_sizes, |i, j| Some(grid[i][j].clone()))
    }

    pub fn block_diagonal(ring: &RingDescriptor, blocks: &[Mat]) -> Result<Mat, LinalgError> {
        let rs: Vec<usize> = blocks.iter().map(|b| b.rows).collect();
        let cs: Vec<usize> = blocks.iter().map(|b| b.cols).collect();
        Mat::assemble(ring, &rs, &cs, |i, j| (i == j).then(|| blocks[i].clone()))
    }

    /// Rows `r0..r0+h`, columns `c0..c0+w`.
    pub fn submatrix(&self, r0: usize, h: usize, c0: usize, w: usize) -> Mat {
        assert!(r0 + h <= self.rows && c0 + w <= self.cols, "submatrix out of range");
        let mut entries = Vec::with_capacity(h * w);
        for r in r0..r0 + h {
            for c in c0..c0 + w {
                entries.push(self.get(r, c).clone());
            }
        }
        Mat { rows: h, cols: w, entries, ring: self.ring.clone() }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Mat {
        let mut entries = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            for c in 0..self.cols {
                entries.push(self.get(r, c).clone());
            }
        }
        Mat { rows: rows.len(), cols: self.cols, entries, ring: self.ring.clone() }
    }

    pub fn select_cols(&self, cols: &[usize]) -> Mat {
        let mut entries = Vec::with_capacity(cols.len() * self.rows);
        for r in 0..self.rows {
            for &c in cols {
                entries.push(self.get(r, c).clone());
            }
        }
        Mat { rows: self.rows, cols: cols.len(), entries, ring: self.ring.clone() }
    }

    pub fn trace(&self) -> Result<RingElem, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::Dimension("trace of a non-square matrix".into()));
        }
        let mut acc = self.ring.zero();
        for i in 0..self.rows {
            acc = self.ring.add(&acc, self.get(i, i))?;
        }
        Ok(acc)
    }

    /// First `(row, col)` where the two matrices differ.
    pub fn first_difference(&self, other: &Mat) -> Option<(usize, usize)> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Some((0, 0));
        }
        (0..self.rows * self.cols)
            .find(|&k| self.entries[k] != other.entries[k])
            .map(|k| (k / self.cols, k % self.cols))
    }

    /// Integer matrix of the same map on underlying lattices: each entry is
    /// replaced by its left regular representation.
    pub fn flatten(&self) -> Result<IntMatrix, LinalgError> {
        let n =
            self.ring.integer_rank().ok_or(LinalgError::UnsupportedRing { op: "flatten", kind: self.ring.kind() })?;
        let mut out = IntMatrix::zeros(self.rows * n, self.cols * n);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let e = self.get(r, c);
                if self.ring.is_zero(e) {
                    continue;
                }
                let rep = self.ring.regular_representation(e)?;
                for i in 0..n {
                    for j in 0..n {
                        out.set(r * n + i, c * n + j, rep.get(i, j).clone());
                    }
                }
            }
        }
        Ok(out)
    }

    /// Stacks the coordinates of each column: column `j` of the result is
    /// the integer vector of column `j` of `self`.
    pub fn coordinate_columns(&self) -> Result<IntMatrix, LinalgError> {
        let n = self
            .ring
            .integer_rank()
            .ok_or(LinalgError::UnsupportedRing { op: "coordinates", kind: self.ring.kind() })?;
        let mut out = IntMatrix::zeros(self.rows * n, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                for (i, x) in self.ring.coordinates(self.get(r, c))?.into_iter().enumerate() {
                    out.set(r * n + i, c, x);
                }
            }
        }
        Ok(out)
    }

    /// Inverse of [`Mat::coordinate_columns`].
    pub fn from_coordinate_columns(ring: &RingDescriptor, rows: usize, v: &IntMatrix) -> Result<Mat, LinalgError> {
        let n = ring.integer_rank().ok_or(LinalgError::UnsupportedRing { op: "coordinates", kind: ring.kind() })?;
        if v.rows() != rows * n {
            return Err(LinalgError::Dimension("coordinate vector length".into()));
        }
        let mut entries = Vec::with_capacity(rows * v.cols());
        for r in 0..rows {
            for c in 0..v.cols() {
                let coords: Vec<BigInt> = (0..n).map(|i| v.get(r * n + i, c).clone()).collect();
                entries.push(ring.from_coordinates(&coords)?);
            }
        }
        Mat::new(ring, rows, v.cols(), entries)
    }
}

/// Solves `m * x = b` exactly over the ring of `m`. `Ok(None)` means no
/// solution exists. Group rings and quadratic orders are reduced to one
/// integer system through the regular representation.
pub fn solve_linear(m: &Mat, b: &Mat) -> Result<Option<Mat>, LinalgError> {
    m.same_ring(b)?;
    if m.rows != b.rows {
        return Err(LinalgError::Dimension(format!(
            "system has {} equations but right-hand side has {} rows",
            m.rows, b.rows
        )));
    }
    if m.ring.kind() == RingKind::Laurent {
        return Err(LinalgError::UnsupportedRing { op: "solve_linear", kind: RingKind::Laurent });
    }
    let flat = m.flatten()?;
    let rhs = b.coordinate_columns()?;
    match snf::solve_integer(&flat, &rhs) {
        Some(x) => Ok(Some(Mat::from_coordinate_columns(&m.ring, m.cols, &x)?)),
        None => Ok(None),
    }
}

/// Basis (as columns) of the integer kernel of `m`.
pub fn kernel_lattice(m: &IntMatrix) -> IntMatrix {
    snf::kernel_basis(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::GroupTable;

    #[test]
    fn identity_law() {
        let z = RingDescriptor::Integers;
        let a = Mat::from_ints(&z, &[&[1, -2, 3], &[0, 4, -1]]);
        assert_eq!(Mat::identity(&z, 2).mul(&a).unwrap(), a);
    }

    #[test]
    fn block_shape() {
        let z = RingDescriptor::Integers;
        let a = Mat::from_ints(&z, &[&[1, 2]]);
        let b = Mat::from_ints(&z, &[&[3], &[4]]);
        let m = Mat::block(&z, &[vec![a.clone(), Mat::zero(&z, 1, 1)], vec![Mat::zero(&z, 2, 2), b.clone()]]).unwrap();
        assert_eq!(m.rows(), a.rows() + b.rows());
        assert_eq!(m.cols(), a.cols() + b.cols());
        assert!(Mat::block(&z, &[vec![a.clone(), b.clone()]]).is_err());
    }

    #[test]
    fn idempotent_square() {
        // oracle: (e^2)_{ij} = sum_k e_ik e_kj written out by hand
        let e = [[0i64, 1], [0, 1]];
        let mut sq = [[0i64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                sq[i][j] = e[i][0] * e[0][j] + e[i][1] * e[1][j];
            }
        }
        assert_eq!(sq, e);
        let z = RingDescriptor::Integers;
        let m = Mat::from_ints(&z, &[&e[0], &e[1]]);
        assert_eq!(m.mul(&m).unwrap(), m);
    }

    #[test]
    fn dimension_errors() {
        let z = RingDescriptor::Integers;
        let a = Mat::from_ints(&z, &[&[1, 2]]);
        assert!(matches!(a.mul(&a), Err(LinalgError::Dimension(_))));
        assert!(a.add(&a.transpose()).is_err());
    }

    #[test]
    fn solve_examples() {
        let z = RingDescriptor::Integers;
        let two = Mat::from_ints(&z, &[&[2]]);
        assert_eq!(solve_linear(&two, &Mat::from_ints(&z, &[&[4]])).unwrap(), Some(Mat::from_ints(&z, &[&[2]])));
        assert_eq!(solve_linear(&two, &Mat::from_ints(&z, &[&[3]])).unwrap(), None);
    }

    #[test]
    fn one_plus_g_does_not_divide_two() {
        let r = RingDescriptor::group_ring(GroupTable::cyclic(2));
        let m = Mat::scalar(&r, r.group_elem(&[(1, 0), (1, 1)]).unwrap());
        let b = Mat::scalar(&r, r.from_int(2));
        assert_eq!(solve_linear(&m, &b).unwrap(), None);
        // brute force over x = a + b g with a, b in [-4, 4]
        for a in -4..=4 {
            for bb in -4..=4 {
                let x = Mat::scalar(&r, r.group_elem(&[(a, 0), (bb, 1)]).unwrap());
                assert_ne!(m.mul(&x).unwrap(), b);
            }
        }
    }

    #[test]
    fn solve_rejects_laurent() {
        let l = RingDescriptor::laurent(RingDescriptor::Integers).unwrap();
        let m = Mat::identity(&l, 1);
        assert!(matches!(solve_linear(&m, &m), Err(LinalgError::UnsupportedRing { .. })));
    }

    #[test]
    fn quadratic_solve_roundtrip() {
        let q = RingDescriptor::quadratic(-5).unwrap();
        let m = Mat::from_rows(&q, vec![vec![q.quad(1, 1).unwrap(), q.quad(2, 0).unwrap()]]).unwrap();
        let x0 = Mat::from_rows(&q, vec![vec![q.quad(3, -1).unwrap()], vec![q.quad(0, 2).unwrap()]]).unwrap();
        let b = m.mul(&x0).unwrap();
        let x = solve_linear(&m, &b).unwrap().expect("solvable");
        assert_eq!(m.mul(&x).unwrap(), b);
    }
}
