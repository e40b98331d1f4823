//! Sparse matrices and streamed row reduction over fields.

use super::{Elem, Mat, Ring};
use crate::{Error, Result};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

/// A sparse vector: strictly increasing indices with nonzero values.
pub type SpVec = Vec<(usize, Elem)>;

/// Column-major sparse matrix; each column is a sorted [`SpVec`].
#[derive(Clone, Debug)]
pub struct SpMat {
    ring: Ring,
    rows: usize,
    cols: Vec<SpVec>,
}

impl SpMat {
    pub fn new(ring: &Ring, rows: usize) -> SpMat {
        SpMat {
            ring: ring.clone(),
            rows,
            cols: vec![],
        }
    }

    /// Append a column given as unsorted `(row, value)` pairs; duplicates are summed.
    pub fn push_col(&mut self, entries: impl IntoIterator<Item = (usize, Elem)>) {
        let col = normalize(&self.ring, entries);
        debug_assert!(col.iter().all(|&(i, _)| i < self.rows));
        self.cols.push(col);
    }

    /// Build from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        ring: &Ring,
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Elem)>,
    ) -> SpMat {
        let mut buckets: Vec<Vec<(usize, Elem)>> = vec![vec![]; cols];
        for (i, j, x) in triplets {
            buckets[j].push((i, x));
        }
        let mut s = SpMat::new(ring, rows);
        for b in buckets {
            s.push_col(b);
        }
        s
    }

    /// The identity matrix.
    pub fn identity(ring: &Ring, n: usize) -> SpMat {
        SpMat::from_triplets(ring, n, n, (0..n).map(|i| (i, i, 1)))
    }

    /// The zero matrix.
    pub fn zeros(ring: &Ring, rows: usize, cols: usize) -> SpMat {
        SpMat {
            ring: ring.clone(),
            rows,
            cols: vec![vec![]; cols],
        }
    }

    pub fn transpose(&self) -> SpMat {
        let mut t = vec![];
        for (j, c) in self.cols.iter().enumerate() {
            for &(i, x) in c {
                t.push((j, i, x));
            }
        }
        SpMat::from_triplets(&self.ring, self.cols.len(), self.rows, t)
    }

    /// Product `self * other`.
    pub fn mul(&self, other: &SpMat) -> SpMat {
        let mut s = SpMat::new(&self.ring, self.rows);
        for c in &other.cols {
            let v = self.apply_sparse(c);
            s.cols.push(v);
        }
        s
    }

    /// Entrywise map (e.g. Frobenius).
    pub fn map(&self, f: impl Fn(Elem) -> Elem) -> SpMat {
        let cols = self
            .cols
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&(i, x)| (i, f(x)))
                    .filter(|e| e.1 != 0)
                    .collect()
            })
            .collect();
        SpMat {
            ring: self.ring.clone(),
            rows: self.rows,
            cols,
        }
    }

    /// Entrywise map into another ring (e.g. reduction mod p).
    pub fn map_to(&self, target: &Ring, f: impl Fn(Elem) -> Elem) -> SpMat {
        let cols = self
            .cols
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&(i, x)| (i, f(x)))
                    .filter(|e| e.1 != 0)
                    .collect()
            })
            .collect();
        SpMat {
            ring: target.clone(),
            rows: self.rows,
            cols,
        }
    }

    pub fn scale(&self, c: Elem) -> SpMat {
        let r = self.ring.clone();
        self.map(|x| r.mul(c, x))
    }

    pub fn add(&self, other: &SpMat) -> SpMat {
        let mut s = SpMat::new(&self.ring, self.rows);
        for (a, b) in self.cols.iter().zip(&other.cols) {
            s.push_col(a.iter().chain(b.iter()).copied());
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(|c| c.is_empty())
    }

    pub fn from_dense(m: &Mat) -> SpMat {
        let mut s = SpMat::new(m.ring(), m.rows());
        for j in 0..m.cols() {
            s.cols.push(
                (0..m.rows())
                    .filter_map(|i| {
                        let x = m.get(i, j);
                        (x != 0).then_some((i, x))
                    })
                    .collect(),
            );
        }
        s
    }

    pub fn to_dense(&self) -> Mat {
        let mut m = Mat::zeros(&self.ring, self.rows, self.cols.len());
        for (j, c) in self.cols.iter().enumerate() {
            for &(i, x) in c {
                m.set(i, j, x);
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
        self.cols.len()
    }

    pub fn col(&self, j: usize) -> &SpVec {
        &self.cols[j]
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|c| c.len()).sum()
    }

    /// `self * v` for a dense vector.
    pub fn apply(&self, v: &[Elem]) -> Vec<Elem> {
        let r = &self.ring;
        let mut out = vec![0; self.rows];
        for (j, c) in self.cols.iter().enumerate() {
            if v[j] == 0 {
                continue;
            }
            for &(i, x) in c {
                out[i] = r.add(out[i], r.mul(x, v[j]));
            }
        }
        out
    }

    /// `self * v` for a sparse vector.
    pub fn apply_sparse(&self, v: &SpVec) -> SpVec {
        let r = &self.ring;
        let mut acc: HashMap<usize, Elem> = HashMap::new();
        for &(j, y) in v {
            for &(i, x) in &self.cols[j] {
                let e = acc.entry(i).or_insert(0);
                *e = r.add(*e, r.mul(x, y));
            }
        }
        normalize(r, acc)
    }

    /// Rank over a field.
    pub fn rank(&self) -> Result<usize> {
        let mut red = RowReducer::new(&self.ring, self.rows, self.rows)?;
        for c in &self.cols {
            red.insert(c.clone());
        }
        Ok(red.rank())
    }
}

/// Sort, merge duplicates and drop zeros.
pub fn normalize(ring: &Ring, entries: impl IntoIterator<Item = (usize, Elem)>) -> SpVec {
    let mut v: Vec<(usize, Elem)> = entries.into_iter().collect();
    v.sort_unstable_by_key(|e| e.0);
    let mut out: SpVec = Vec::with_capacity(v.len());
    for (i, x) in v {
        match out.last_mut() {
            Some(last) if last.0 == i => last.1 = ring.add(last.1, x),
            _ => out.push((i, x)),
        }
    }
    out.retain(|e| e.1 != 0);
    out
}

/// Outcome of inserting a row into a [`RowReducer`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RowStatus {
    /// The row created a new pivot in this column.
    NewPivot(usize),
    /// The row reduced to zero.
    Zero,
    /// The row reduced to zero in the pivot columns but not in the tail columns.
    Dependent(SpVec),
}

/// Incremental Gaussian elimination of sparse rows over a field.
///
/// Pivots are only taken in columns `< pivot_limit`; further columns are a tail
/// carried along, e.g. to record which combination of inserted rows produced a
/// vector. Rows are kept in semi-echelon form.
pub struct RowReducer {
    ring: Ring,
    width: usize,
    pivot_limit: usize,
    pivots: HashMap<usize, SpVec>,
    acc: Vec<Elem>,
    mark: Vec<bool>,
}

impl RowReducer {
    pub fn new(ring: &Ring, width: usize, pivot_limit: usize) -> Result<RowReducer> {
        if !ring.is_field() {
            return Err(Error::NotAField(ring.name()));
        }
        Ok(RowReducer {
            ring: ring.clone(),
            width,
            pivot_limit: pivot_limit.min(width),
            pivots: HashMap::new(),
            acc: vec![0; width],
            mark: vec![false; width],
        })
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Pivot columns in increasing order.
    pub fn pivot_columns(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.pivots.keys().copied().collect();
        v.sort_unstable();
        v
    }

    /// Reduce a row against the current pivots without inserting it.
    pub fn reduce(&mut self, row: &SpVec) -> SpVec {
        let r = self.ring.clone();
        let mut heap = BinaryHeap::new();
        let mut touched = vec![];
        for &(i, x) in row {
            self.acc[i] = r.add(self.acc[i], x);
            if !self.mark[i] {
                self.mark[i] = true;
                touched.push(i);
                heap.push(Reverse(i));
            }
        }
        while let Some(Reverse(c)) = heap.pop() {
            if c >= self.pivot_limit {
                break;
            }
            let a = self.acc[c];
            if a == 0 {
                continue;
            }
            let Some(prow) = self.pivots.get(&c) else {
                continue;
            };
            let f = r.neg(a);
            for &(j, y) in prow {
                self.acc[j] = r.add(self.acc[j], r.mul(f, y));
                if !self.mark[j] {
                    self.mark[j] = true;
                    touched.push(j);
                    heap.push(Reverse(j));
                }
            }
        }
        touched.sort_unstable();
        let mut out = Vec::new();
        for i in touched {
            if self.acc[i] != 0 {
                out.push((i, self.acc[i]));
            }
            self.acc[i] = 0;
            self.mark[i] = false;
        }
        out
    }

    /// Whether the row lies in the span of the inserted rows (pivot part only).
    pub fn contains(&mut self, row: &SpVec) -> bool {
        let red = self.reduce(row);
        red.first().is_none_or(|&(i, _)| i >= self.pivot_limit)
    }

    /// Insert a row, returning how it reduced.
    pub fn insert(&mut self, row: SpVec) -> RowStatus {
        let red = self.reduce(&row);
        match red.first() {
            None => RowStatus::Zero,
            Some(&(c, _)) if c >= self.pivot_limit => RowStatus::Dependent(red),
            Some(&(c, lead)) => {
                let inv = self.ring.inv(lead).expect("nonzero in a field");
                let row: SpVec = red
                    .into_iter()
                    .map(|(i, x)| (i, self.ring.mul(inv, x)))
                    .collect();
                self.pivots.insert(c, row);
                RowStatus::NewPivot(c)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ralg::echelon;

    #[test]
    fn sparse_rank_matches_dense() {
        let k = Ring::fp(3).unwrap();
        let m = Mat::from_ints(&k, &[vec![1, 2, 0, 1], vec![2, 1, 0, 2], vec![0, 0, 1, 1]]);
        let s = SpMat::from_dense(&m);
        assert_eq!(s.rank().unwrap(), echelon(&m).unwrap().rank);
        assert_eq!(s.to_dense(), m);
    }

    #[test]
    fn tail_records_combination() {
        let k = Ring::fp(5).unwrap();
        let rows = [vec![(0, 1), (1, 2)], vec![(1, 1), (2, 3)]];
        let mut red = RowReducer::new(&k, 5, 3).unwrap();
        for (t, r) in rows.iter().enumerate() {
            let mut r = r.clone();
            r.push((3 + t, 1));
            red.insert(r);
        }
        // target = 2*row0 + 3*row1 = (2, 4+3, 9) = (2, 2, 4)
        let target = vec![(0, 2), (1, 2), (2, 4)];
        let out = red.reduce(&target);
        assert!(out.iter().all(|&(i, _)| i >= 3));
        let coeffs: Vec<Elem> = (3..5)
            .map(|i| out.iter().find(|e| e.0 == i).map_or(0, |e| k.neg(e.1)))
            .collect();
        assert_eq!(coeffs, vec![2, 3]);
    }
}
