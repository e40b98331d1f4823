//! Dense matrices and row reduction over fields.
//!
//! Matrices act on column vectors: a map `R^n -> R^m` is an `m x n` matrix.

use super::{Elem, Ring};
use crate::{Error, Result};
use std::fmt;

/// Dense row-major matrix over a finite ring.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    ring: Ring,
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "Mat {}x{} over {}",
            self.rows,
            self.cols,
            self.ring.name()
        )?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|&x| self.ring.fmt_elem(x)).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Mat {
    pub fn zeros(ring: &Ring, rows: usize, cols: usize) -> Mat {
        Mat {
            ring: ring.clone(),
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(ring: &Ring, n: usize) -> Mat {
        let mut m = Mat::zeros(ring, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Scalar multiple of the identity.
    pub fn scalar(ring: &Ring, n: usize, c: Elem) -> Mat {
        let mut m = Mat::zeros(ring, n, n);
        for i in 0..n {
            m.data[i * n + i] = c;
        }
        m
    }

    /// Build from rows of already-encoded elements; all rows must have length `cols`.
    pub fn from_rows(
        ring: &Ring,
        rows: usize,
        cols: usize,
        entries: Vec<Vec<Elem>>,
    ) -> Result<Mat> {
        if entries.len() != rows || entries.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension(format!("expected {rows}x{cols} entries")));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for r in entries {
            for x in r {
                if x >= ring.order() {
                    return Err(Error::Invalid(format!("entry {x} outside {}", ring.name())));
                }
                data.push(x);
            }
        }
        Ok(Mat {
            ring: ring.clone(),
            rows,
            cols,
            data,
        })
    }

    /// Build from integer rows, reducing into the ring.
    pub fn from_ints(ring: &Ring, entries: &[Vec<i64>]) -> Mat {
        let rows = entries.len();
        let cols = entries.first().map_or(0, |r| r.len());
        let mut m = Mat::zeros(ring, rows, cols);
        for (i, r) in entries.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged integer matrix");
            for (j, &x) in r.iter().enumerate() {
                m.data[i * cols + j] = ring.from_int(x);
            }
        }
        m
    }

    /// Matrix whose columns are the given vectors (each of length `rows`).
    pub fn from_columns(ring: &Ring, rows: usize, columns: &[Vec<Elem>]) -> Mat {
        let mut m = Mat::zeros(ring, rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length mismatch");
            for (i, &x) in c.iter().enumerate() {
                m.data[i * m.cols + j] = x;
            }
        }
        m
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Elem) {
        self.data[i * self.cols + j] = v;
    }

    /// Add `v` to entry `(i, j)`.
    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: Elem) {
        let k = i * self.cols + j;
        self.data[k] = self.ring.add(self.data[k], v);
    }

    pub fn row(&self, i: usize) -> &[Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Elem> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// All entries in row-major order.
    pub fn entries(&self) -> &[Elem] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    fn check_ring(&self, other: &Mat) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::Invalid(format!(
                "ring mismatch: {} vs {}",
                self.ring.name(),
                other.ring.name()
            )));
        }
        Ok(())
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &Mat) -> Result<Mat> {
        self.check_ring(other)?;
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let r = &self.ring;
        let mut out = Mat::zeros(r, self.rows, other.cols);
        let n = other.cols;
        if r.is_field() && r.degree() == 1 {
            let p = r.order() as u128;
            let mut acc = vec![0u128; n];
            for i in 0..self.rows {
                acc.iter_mut().for_each(|a| *a = 0);
                for k in 0..self.cols {
                    let a = self.get(i, k) as u128;
                    if a == 0 {
                        continue;
                    }
                    let brow = other.row(k);
                    for j in 0..n {
                        acc[j] += a * brow[j] as u128;
                    }
                }
                for j in 0..n {
                    out.data[i * n + j] = (acc[j] % p) as u64;
                }
            }
            return Ok(out);
        }
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                let brow = other.row(k);
                for j in 0..n {
                    if brow[j] != 0 {
                        let t = r.mul(a, brow[j]);
                        out.data[i * n + j] = r.add(out.data[i * n + j], t);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `self * v` for a column vector.
    pub fn apply(&self, v: &[Elem]) -> Result<Vec<Elem>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} for {}x{} matrix",
                v.len(),
                self.rows,
                self.cols
            )));
        }
        let r = &self.ring;
        let mut out = vec![0; self.rows];
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.row(i);
            let mut acc = 0;
            for (a, b) in row.iter().zip(v) {
                if *a != 0 && *b != 0 {
                    acc = r.add(acc, r.mul(*a, *b));
                }
            }
            *o = acc;
        }
        Ok(out)
    }

    pub fn add(&self, other: &Mat) -> Result<Mat> {
        self.check_ring(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension("shape mismatch in addition".into()));
        }
        let r = &self.ring;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| r.add(a, b))
            .collect();
        Ok(Mat {
            ring: r.clone(),
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn sub(&self, other: &Mat) -> Result<Mat> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Mat {
        self.map(|x| self.ring.neg(x))
    }

    pub fn scale(&self, c: Elem) -> Mat {
        self.map(|x| self.ring.mul(c, x))
    }

    /// Apply a function to every entry (result stays over the same ring).
    pub fn map(&self, f: impl Fn(Elem) -> Elem) -> Mat {
        Mat {
            ring: self.ring.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Entrywise image under a ring map into `target`.
    pub fn map_to(&self, target: &Ring, f: impl Fn(Elem) -> Elem) -> Mat {
        Mat {
            ring: target.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Entrywise Frobenius (the matrix of the Frobenius twist of the map).
    pub fn frobenius(&self) -> Mat {
        self.map(|x| self.ring.frobenius(x))
    }

    /// Reduction modulo `p` into the residue field.
    pub fn reduce_mod_p(&self) -> Result<Mat> {
        let k = self.ring.residue_field()?;
        Ok(self.map_to(&k, |x| self.ring.reduce_mod_p_elem(x)))
    }

    /// Canonical lift from the residue field of `target` into `target`.
    pub fn lift_to(&self, target: &Ring) -> Mat {
        self.map_to(target, |x| target.lift_from_residue(x))
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(&self.ring, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &Mat) -> Result<Mat> {
        self.check_ring(other)?;
        if self.rows != other.rows {
            return Err(Error::Dimension("row mismatch in hstack".into()));
        }
        let cols = self.cols + other.cols;
        let mut out = Mat::zeros(&self.ring, self.rows, cols);
        for i in 0..self.rows {
            out.data[i * cols..i * cols + self.cols].copy_from_slice(self.row(i));
            out.data[i * cols + self.cols..(i + 1) * cols].copy_from_slice(other.row(i));
        }
        Ok(out)
    }

    /// `[self ; other]`.
    pub fn vstack(&self, other: &Mat) -> Result<Mat> {
        self.check_ring(other)?;
        if self.cols != other.cols {
            return Err(Error::Dimension("column mismatch in vstack".into()));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Mat {
            ring: self.ring.clone(),
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// Block matrix `[[a, b], [c, d]]` given the four blocks.
    pub fn block2(a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> Result<Mat> {
        a.hstack(b)?.vstack(&c.hstack(d)?)
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &Mat) -> Result<Mat> {
        let b = Mat::zeros(&self.ring, self.rows, other.cols);
        let c = Mat::zeros(&self.ring, other.rows, self.cols);
        Mat::block2(self, &b, &c, other)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Mat) -> Result<Mat> {
        self.check_ring(other)?;
        let r = &self.ring;
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Mat::zeros(r, rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == 0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        let b = other.get(k, l);
                        if b != 0 {
                            out.set(i * other.rows + k, j * other.cols + l, r.mul(a, b));
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Sub-matrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Mat {
        let mut out = Mat::zeros(&self.ring, rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out.set(a, b, self.get(i, j));
            }
        }
        out
    }

    /// Columns `range` of the matrix.
    pub fn col_range(&self, start: usize, end: usize) -> Mat {
        let cols: Vec<usize> = (start..end).collect();
        let rows: Vec<usize> = (0..self.rows).collect();
        self.select(&rows, &cols)
    }

    /// Rows `range` of the matrix.
    pub fn row_range(&self, start: usize, end: usize) -> Mat {
        let rows: Vec<usize> = (start..end).collect();
        let cols: Vec<usize> = (0..self.cols).collect();
        self.select(&rows, &cols)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// `row[dst] += c * row[src]`.
    pub fn add_row_multiple(&mut self, dst: usize, src: usize, c: Elem) {
        if c == 0 {
            return;
        }
        let r = self.ring.clone();
        for j in 0..self.cols {
            let s = self.data[src * self.cols + j];
            if s != 0 {
                let k = dst * self.cols + j;
                self.data[k] = r.add(self.data[k], r.mul(c, s));
            }
        }
    }

    /// `col[dst] += c * col[src]`.
    pub fn add_col_multiple(&mut self, dst: usize, src: usize, c: Elem) {
        if c == 0 {
            return;
        }
        let r = self.ring.clone();
        for i in 0..self.rows {
            let s = self.data[i * self.cols + src];
            if s != 0 {
                let k = i * self.cols + dst;
                self.data[k] = r.add(self.data[k], r.mul(c, s));
            }
        }
    }

    pub fn scale_row(&mut self, i: usize, c: Elem) {
        let r = self.ring.clone();
        for j in 0..self.cols {
            let k = i * self.cols + j;
            self.data[k] = r.mul(c, self.data[k]);
        }
    }

    pub fn scale_col(&mut self, j: usize, c: Elem) {
        let r = self.ring.clone();
        for i in 0..self.rows {
            let k = i * self.cols + j;
            self.data[k] = r.mul(c, self.data[k]);
        }
    }

    /// Rank over a field.
    pub fn rank(&self) -> Result<usize> {
        Ok(echelon(self)?.rank)
    }

    /// Inverse of a square matrix over a field or local ring.
    pub fn inverse(&self) -> Result<Mat> {
        if !self.is_square() {
            return Err(Error::Dimension("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let cols: Vec<Vec<Elem>> = (0..n)
            .map(|j| {
                let mut e = vec![0; n];
                e[j] = 1;
                self.solve(&e)
                    .and_then(|x| x.ok_or_else(|| Error::NotInvertible("singular matrix".into())))
            })
            .collect::<Result<_>>()?;
        Ok(Mat::from_columns(&self.ring, n, &cols))
    }

    /// Some `x` with `self * x = b`, or `None` if the system is inconsistent.
    pub fn solve(&self, b: &[Elem]) -> Result<Option<Vec<Elem>>> {
        if b.len() != self.rows {
            return Err(Error::Dimension("right-hand side length".into()));
        }
        if self.ring.is_field() {
            let bm = Mat::from_columns(&self.ring, self.rows, &[b.to_vec()]);
            let aug = self.hstack(&bm)?;
            let e = echelon(&aug)?;
            if e.pivots.last() == Some(&self.cols) {
                return Ok(None);
            }
            let mut x = vec![0; self.cols];
            for (i, &pc) in e.pivots.iter().enumerate() {
                x[pc] = e.rref.get(i, self.cols);
            }
            return Ok(Some(x));
        }
        super::smith::solve_local(self, b)
    }
}

/// Result of row reduction over a field.
#[derive(Clone, Debug)]
pub struct Echelon {
    /// Reduced row echelon form (same shape as the input).
    pub rref: Mat,
    pub rank: usize,
    /// Pivot column of each nonzero row of `rref`.
    pub pivots: Vec<usize>,
    /// Columns form a basis of `{x : m x = 0}`.
    pub kernel: Mat,
    /// Columns form a basis of the column space of `m` (pivot columns of `m`).
    pub image: Mat,
}

/// Reduced row echelon form, rank, kernel and image of a matrix over a field.
pub fn echelon(m: &Mat) -> Result<Echelon> {
    let ring = m.ring().clone();
    if !ring.is_field() {
        return Err(Error::NotAField(ring.name()));
    }
    let mut a = m.clone();
    let mut pivots = vec![];
    let mut row = 0;
    for c in 0..a.cols {
        if row == a.rows {
            break;
        }
        let Some(pr) = (row..a.rows).find(|&i| a.get(i, c) != 0) else {
            continue;
        };
        a.swap_rows(row, pr);
        let inv = ring.inv(a.get(row, c))?;
        a.scale_row(row, inv);
        for i in 0..a.rows {
            if i != row {
                let f = a.get(i, c);
                if f != 0 {
                    a.add_row_multiple(i, row, ring.neg(f));
                }
            }
        }
        pivots.push(c);
        row += 1;
    }
    let rank = pivots.len();
    let free: Vec<usize> = (0..a.cols).filter(|c| !pivots.contains(c)).collect();
    let mut kernel = Mat::zeros(&ring, a.cols, free.len());
    for (k, &f) in free.iter().enumerate() {
        kernel.set(f, k, 1);
        for (i, &pc) in pivots.iter().enumerate() {
            kernel.set(pc, k, ring.neg(a.get(i, f)));
        }
    }
    let all_rows: Vec<usize> = (0..m.rows).collect();
    let image = m.select(&all_rows, &pivots);
    Ok(Echelon {
        rref: a,
        rank,
        pivots,
        kernel,
        image,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ralg::RingSpec;

    #[test]
    fn identity_and_zero() {
        let k = Ring::fp(5).unwrap();
        let e = echelon(&Mat::identity(&k, 4)).unwrap();
        assert_eq!(e.rank, 4);
        assert_eq!(e.kernel.cols(), 0);
        let e = echelon(&Mat::zeros(&k, 2, 3)).unwrap();
        assert_eq!(e.rank, 0);
        assert_eq!(e.kernel.cols(), 3);
    }

    #[test]
    fn f4_rank_one() {
        let k = Ring::new(RingSpec::GaloisField {
            p: 2,
            r: 2,
            modulus: vec![1, 1, 1],
        })
        .unwrap();
        let x = k.from_coefficients(&[0, 1]);
        let x2 = k.mul(x, x);
        let m = Mat::from_rows(&k, 2, 2, vec![vec![x, 1], vec![x2, x]]).unwrap();
        let e = echelon(&m).unwrap();
        assert_eq!(e.rank, 1);
        assert!(m.mul(&e.kernel).unwrap().is_zero());
    }

    #[test]
    fn solve_and_inverse() {
        let k = Ring::fp(7).unwrap();
        let m = Mat::from_ints(&k, &[vec![1, 2, 3], vec![0, 1, 4], vec![5, 6, 0]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), Mat::identity(&k, 3));
        let z = Ring::zpe(3, 2).unwrap();
        let m = Mat::from_ints(&z, &[vec![1, 3], vec![0, 1]]);
        let inv = m.inverse().unwrap();
        assert_eq!(inv.mul(&m).unwrap(), Mat::identity(&z, 2));
    }
}
