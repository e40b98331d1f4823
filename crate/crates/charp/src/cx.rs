//! Bounded cochain complexes of finite free modules.
//!
//! A complex lives in degrees `lo..=hi`; the differential `d^i` is a
//! `rank(i+1) x rank(i)` matrix. Cohomology over fields uses row reduction,
//! over local rings it is computed from a presentation via [`diagonalize`].
//! Cones use `cone(f)^i = C^{i+1} ⊕ D^i` with `d = [[-d_C, 0], [f, d_D]]`.

use crate::ralg::{diagonalize, echelon, Elem, Mat, ModuleStructure, Ring};
use crate::{Error, Result};
use std::sync::Arc;

/// A bounded cochain complex of free modules.
#[derive(Clone, Debug)]
pub struct CochainComplex {
    ring: Ring,
    lo: i64,
    ranks: Vec<usize>,
    d: Vec<Mat>,
}

impl CochainComplex {
    /// Build and validate (`shapes` and `d∘d = 0`).
    pub fn new(ring: &Ring, lo: i64, ranks: Vec<usize>, d: Vec<Mat>) -> Result<CochainComplex> {
        let c = CochainComplex::new_unchecked(ring, lo, ranks, d)?;
        for k in 0..c.d.len().saturating_sub(1) {
            if !c.d[k + 1].mul(&c.d[k])?.is_zero() {
                return Err(Error::NotAComplex(format!(
                    "d^{} d^{} != 0",
                    lo + k as i64 + 1,
                    lo + k as i64
                )));
            }
        }
        Ok(c)
    }

    /// Build checking shapes only; `d∘d = 0` must hold by construction.
    pub fn new_unchecked(
        ring: &Ring,
        lo: i64,
        ranks: Vec<usize>,
        d: Vec<Mat>,
    ) -> Result<CochainComplex> {
        if ranks.is_empty() {
            return Ok(CochainComplex {
                ring: ring.clone(),
                lo,
                ranks: vec![0],
                d: vec![],
            });
        }
        if d.len() + 1 != ranks.len() {
            return Err(Error::Dimension(format!(
                "{} ranks need {} differentials, got {}",
                ranks.len(),
                ranks.len() - 1,
                d.len()
            )));
        }
        for (k, m) in d.iter().enumerate() {
            if m.ring() != ring {
                return Err(Error::Invalid("differential over the wrong ring".into()));
            }
            if m.rows() != ranks[k + 1] || m.cols() != ranks[k] {
                return Err(Error::Dimension(format!(
                    "d^{} is {}x{}, expected {}x{}",
                    lo + k as i64,
                    m.rows(),
                    m.cols(),
                    ranks[k + 1],
                    ranks[k]
                )));
            }
        }
        Ok(CochainComplex {
            ring: ring.clone(),
            lo,
            ranks,
            d,
        })
    }

    /// A single free module of rank `n` in degree `deg`.
    pub fn module(ring: &Ring, n: usize, deg: i64) -> CochainComplex {
        CochainComplex {
            ring: ring.clone(),
            lo: deg,
            ranks: vec![n],
            d: vec![],
        }
    }

    /// The complex `[R^n --m--> R^k]` in degrees `deg, deg+1`.
    pub fn two_term(m: &Mat, deg: i64) -> CochainComplex {
        CochainComplex {
            ring: m.ring().clone(),
            lo: deg,
            ranks: vec![m.cols(), m.rows()],
            d: vec![m.clone()],
        }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.ranks.len() as i64 - 1
    }

    /// Rank in degree `i` (0 outside the range).
    pub fn rank(&self, i: i64) -> usize {
        if i < self.lo || i > self.hi() {
            0
        } else {
            self.ranks[(i - self.lo) as usize]
        }
    }

    /// Ranks for degrees `lo..=hi`.
    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// `d^i : C^i -> C^{i+1}`, a zero matrix outside the stored range.
    pub fn d(&self, i: i64) -> Mat {
        match self.d_ref(i) {
            Some(m) => m.clone(),
            None => Mat::zeros(&self.ring, self.rank(i + 1), self.rank(i)),
        }
    }

    pub fn d_ref(&self, i: i64) -> Option<&Mat> {
        if i < self.lo || i >= self.hi() {
            None
        } else {
            Some(&self.d[(i - self.lo) as usize])
        }
    }

    /// Alternating sum of ranks.
    pub fn euler_characteristic(&self) -> i64 {
        (self.lo..=self.hi())
            .map(|i| sign(i) * self.rank(i) as i64)
            .sum()
    }

    /// Cohomology in degree `i`; errors if `i` is outside `[lo, hi]`.
    pub fn cohomology(&self, i: i64) -> Result<CohomologySlice> {
        if i < self.lo || i > self.hi() {
            return Err(Error::DegreeOutOfRange {
                degree: i,
                lo: self.lo,
                hi: self.hi(),
            });
        }
        let d_in = self.d(i - 1);
        let d_out = self.d(i);
        CohomologySlice::compute(&self.ring, i, &d_in, &d_out)
    }

    /// Lengths (dimensions over a field) of `H^i` for `i` in `lo..=hi`.
    pub fn cohomology_dims(&self) -> Result<Vec<u64>> {
        (self.lo..=self.hi())
            .map(|i| Ok(self.cohomology(i)?.structure.length()))
            .collect()
    }

    /// Dimensions of cohomology over a field using ranks only (no bases).
    pub fn betti(&self) -> Result<Vec<usize>> {
        if !self.ring.is_field() {
            return Err(Error::NotAField(self.ring.name()));
        }
        let rk: Vec<usize> = self.d.iter().map(|m| m.rank()).collect::<Result<_>>()?;
        Ok((0..self.ranks.len())
            .map(|k| {
                let out = if k < rk.len() { rk[k] } else { 0 };
                let inc = if k > 0 { rk[k - 1] } else { 0 };
                self.ranks[k] - out - inc
            })
            .collect())
    }

    /// `H^i(shift(C, s)) = H^{i-s}(C)`; differentials are multiplied by `(-1)^s`.
    pub fn shift(&self, s: i64) -> CochainComplex {
        let d = if s % 2 == 0 {
            self.d.clone()
        } else {
            self.d.iter().map(|m| m.neg()).collect()
        };
        CochainComplex {
            ring: self.ring.clone(),
            lo: self.lo + s,
            ranks: self.ranks.clone(),
            d,
        }
    }

    /// Brutal truncation keeping degrees in `[a, b]`.
    pub fn brutal(&self, a: i64, b: i64) -> CochainComplex {
        let a2 = a.max(self.lo);
        let b2 = b.min(self.hi());
        if a2 > b2 {
            return CochainComplex::module(&self.ring, 0, a);
        }
        let ranks = (a2..=b2).map(|i| self.rank(i)).collect();
        let d = (a2..b2).map(|i| self.d(i)).collect();
        CochainComplex {
            ring: self.ring.clone(),
            lo: a2,
            ranks,
            d,
        }
    }

    /// Tensor product with `d = d_C ⊗ 1 + (-1)^i 1 ⊗ d_D`; the basis of
    /// `(C⊗D)^n` lists `C^i ⊗ D^{n-i}` for increasing `i`, each in Kronecker order.
    pub fn tensor(&self, other: &CochainComplex) -> Result<CochainComplex> {
        if self.ring != other.ring {
            return Err(Error::Invalid(
                "tensor of complexes over different rings".into(),
            ));
        }
        let r = &self.ring;
        let lo = self.lo + other.lo;
        let hi = self.hi() + other.hi();
        let offsets = |n: i64| -> Vec<(i64, usize)> {
            let mut v = vec![];
            let mut off = 0;
            for i in self.lo..=self.hi() {
                let j = n - i;
                if j < other.lo || j > other.hi() {
                    continue;
                }
                v.push((i, off));
                off += self.rank(i) * other.rank(j);
            }
            v
        };
        let total = |n: i64| -> usize {
            offsets(n)
                .iter()
                .map(|&(i, _)| self.rank(i) * other.rank(n - i))
                .sum()
        };
        let ranks: Vec<usize> = (lo..=hi).map(total).collect();
        let mut ds = vec![];
        for n in lo..hi {
            let mut m = Mat::zeros(r, total(n + 1), total(n));
            let src = offsets(n);
            let dst = offsets(n + 1);
            for &(i, so) in &src {
                let j = n - i;
                if let Some(&(_, to)) = dst.iter().find(|x| x.0 == i + 1) {
                    let blk = self.d(i).kron(&Mat::identity(r, other.rank(j)))?;
                    paste(&mut m, &blk, to, so);
                }
                if let Some(&(_, to)) = dst.iter().find(|x| x.0 == i) {
                    let mut blk = Mat::identity(r, self.rank(i)).kron(&other.d(j))?;
                    if i % 2 != 0 {
                        blk = blk.neg();
                    }
                    paste(&mut m, &blk, to, so);
                }
            }
            ds.push(m);
        }
        CochainComplex::new_unchecked(r, lo, ranks, ds)
    }

    /// Canonical truncation `τ^{≤n}` with its inclusion into `self`.
    ///
    /// Over a local ring the kernel of `d^n` must be free.
    pub fn truncate_le(&self, n: i64) -> Result<(CochainComplex, ComplexMap)> {
        let r = &self.ring;
        if n < self.lo {
            let z = CochainComplex::module(r, 0, self.lo);
            let f = ComplexMap::zero(&z, self);
            return Ok((z, f));
        }
        if n >= self.hi() {
            return Ok((self.clone(), ComplexMap::identity(self)));
        }
        let kbasis = free_kernel(&self.d(n))?;
        let mut ranks: Vec<usize> = (self.lo..n).map(|i| self.rank(i)).collect();
        ranks.push(kbasis.cols());
        let mut ds: Vec<Mat> = (self.lo..n - 1).map(|i| self.d(i)).collect();
        if n > self.lo {
            let dn1 = self.d(n - 1);
            let mut cols = vec![];
            for j in 0..dn1.cols() {
                let y = dn1.col(j);
                let x = kbasis
                    .solve(&y)?
                    .ok_or_else(|| Error::Internal("image not in kernel".into()))?;
                cols.push(x);
            }
            ds.push(Mat::from_columns(r, kbasis.cols(), &cols));
        }
        let t = CochainComplex::new_unchecked(r, self.lo, ranks, ds)?;
        let mut comps = vec![];
        for i in self.lo..n {
            comps.push((i, Mat::identity(r, self.rank(i))));
        }
        comps.push((n, kbasis));
        let f = ComplexMap::new_unchecked(&t, self, comps)?;
        Ok((t, f))
    }

    /// Canonical truncation `τ^{≥n}` with the projection `self -> τ^{≥n}` and a
    /// section matrix `C^n/im d^{n-1} -> C^n` in degree `n`.
    ///
    /// Over a local ring the cokernel of `d^{n-1}` must be free.
    pub fn truncate_ge(&self, n: i64) -> Result<(CochainComplex, ComplexMap, Mat)> {
        let r = &self.ring;
        if n <= self.lo {
            let id = ComplexMap::identity(self);
            return Ok((
                self.clone(),
                id,
                Mat::identity(r, self.rank(self.lo.max(n))),
            ));
        }
        if n > self.hi() {
            let z = CochainComplex::module(r, 0, n);
            return Ok((z.clone(), ComplexMap::zero(self, &z), Mat::zeros(r, 0, 0)));
        }
        let (proj, section) = free_cokernel(&self.d(n - 1))?;
        let mut ranks = vec![proj.rows()];
        ranks.extend((n + 1..=self.hi()).map(|i| self.rank(i)));
        let mut ds = vec![];
        if n < self.hi() {
            ds.push(self.d(n).mul(&section)?);
        }
        ds.extend((n + 1..self.hi()).map(|i| self.d(i)));
        let t = CochainComplex::new_unchecked(r, n, ranks, ds)?;
        let mut comps = vec![(n, proj)];
        for i in n + 1..=self.hi() {
            comps.push((i, Mat::identity(r, self.rank(i))));
        }
        let f = ComplexMap::new_unchecked(self, &t, comps)?;
        Ok((t, f, section))
    }

    /// Reduction modulo `p` into the residue field.
    pub fn reduce_mod_p(&self) -> Result<CochainComplex> {
        let k = self.ring.residue_field()?;
        let d = self
            .d
            .iter()
            .map(|m| m.reduce_mod_p())
            .collect::<Result<_>>()?;
        CochainComplex::new_unchecked(&k, self.lo, self.ranks.clone(), d)
    }

    /// Entrywise Frobenius twist of the differentials.
    pub fn frobenius_twist(&self) -> CochainComplex {
        let d = self.d.iter().map(|m| m.frobenius()).collect();
        CochainComplex {
            ring: self.ring.clone(),
            lo: self.lo,
            ranks: self.ranks.clone(),
            d,
        }
    }
}

fn sign(i: i64) -> i64 {
    if i.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

fn paste(dst: &mut Mat, blk: &Mat, row0: usize, col0: usize) {
    for i in 0..blk.rows() {
        for j in 0..blk.cols() {
            let x = blk.get(i, j);
            if x != 0 {
                dst.add_to(row0 + i, col0 + j, x);
            }
        }
    }
}

/// Columns form a basis of the (free) kernel of `m`.
fn free_kernel(m: &Mat) -> Result<Mat> {
    if m.ring().is_field() {
        return Ok(echelon(m)?.kernel);
    }
    let dg = diagonalize(m)?;
    if dg.vals.iter().any(|&v| v > 0) {
        return Err(Error::NonFree(format!(
            "kernel of a map over {} has torsion",
            m.ring().name()
        )));
    }
    Ok(dg.kernel)
}

/// Projection onto and section of a free cokernel of `m`.
fn free_cokernel(m: &Mat) -> Result<(Mat, Mat)> {
    let r = m.ring();
    if r.is_field() {
        let e = echelon(m)?;
        let (proj, comp) = complement(&e.image)?;
        return Ok((proj, comp));
    }
    let dg = diagonalize(m)?;
    if dg.vals.iter().any(|&v| v > 0) {
        return Err(Error::NonFree(format!(
            "cokernel of a map over {} has torsion",
            r.name()
        )));
    }
    let k = dg.vals.len();
    let rows: Vec<usize> = (k..m.rows()).collect();
    let all: Vec<usize> = (0..m.rows()).collect();
    let proj = dg.u.select(&rows, &all);
    let uinv = dg.u.inverse()?;
    let section = uinv.select(&all, &rows);
    Ok((proj, section))
}

/// For independent columns `s` (over a field), a projection `P` onto the
/// quotient by their span and a complement basis `W` with `P W = I`, `P s = 0`.
fn complement(s: &Mat) -> Result<(Mat, Mat)> {
    let r = s.ring();
    let n = s.rows();
    let k = s.cols();
    let aug = s.hstack(&Mat::identity(r, n))?;
    let e = echelon(&aug)?;
    let extra: Vec<usize> = e
        .pivots
        .iter()
        .filter(|&&c| c >= k)
        .map(|&c| c - k)
        .collect();
    let all: Vec<usize> = (0..n).collect();
    let w = Mat::identity(r, n).select(&all, &extra);
    // rows k.. of the row-operation matrix give coordinates along W
    let rowop = e.rref.col_range(k, k + n);
    let rows: Vec<usize> = (k..n).collect();
    let proj = rowop.select(&rows, &all);
    Ok((proj, w))
}

/// Coordinates data for a cohomology slice.
#[derive(Clone, Debug)]
enum Projection {
    /// Rows giving coordinates along the chosen class basis (field case).
    Field { proj: Mat },
    /// Local ring case: `w = U * zcoords(c)`; keep entries `idx` of `w`.
    Local {
        vinv: Mat,
        zscale: Vec<Option<u32>>,
        u: Mat,
        idx: Vec<usize>,
    },
}

/// `H^i` of a complex with representatives and a coordinate map.
#[derive(Clone, Debug)]
pub struct CohomologySlice {
    pub degree: i64,
    pub structure: ModuleStructure,
    /// Cocycles whose classes generate `H^i`; generator `k` has order `p^{orders[k]}`.
    pub basis: Vec<Vec<Elem>>,
    pub orders: Vec<u32>,
    ring: Ring,
    d_out: Arc<Mat>,
    projection: Projection,
}

impl CohomologySlice {
    /// Cohomology at the middle of `C^{i-1} --d_in--> C^i --d_out--> C^{i+1}`.
    pub fn compute(ring: &Ring, degree: i64, d_in: &Mat, d_out: &Mat) -> Result<CohomologySlice> {
        if ring.is_field() {
            Self::compute_field(ring, degree, d_in, d_out)
        } else {
            Self::compute_local(ring, degree, d_in, d_out)
        }
    }

    fn compute_field(ring: &Ring, degree: i64, d_in: &Mat, d_out: &Mat) -> Result<CohomologySlice> {
        let n = d_out.cols();
        let z = echelon(d_out)?.kernel;
        let b = echelon(d_in)?.image;
        // choose kernel columns independent modulo the image
        let bz = b.hstack(&z)?;
        let e = echelon(&bz)?;
        let hcols: Vec<usize> = e
            .pivots
            .iter()
            .filter(|&&c| c >= b.cols())
            .map(|&c| c - b.cols())
            .collect();
        let all: Vec<usize> = (0..n).collect();
        let h = z.select(&all, &hcols);
        let s = b.hstack(&h)?;
        let k = s.cols();
        let aug = s.hstack(&Mat::identity(ring, n))?;
        let ee = echelon(&aug)?;
        let rowop = ee.rref.col_range(k, k + n);
        let rows: Vec<usize> = (b.cols()..k).collect();
        let proj = rowop.select(&rows, &all);
        let dim = hcols.len();
        let basis = (0..dim).map(|j| h.col(j)).collect();
        Ok(CohomologySlice {
            degree,
            structure: ModuleStructure::free(ring, dim),
            basis,
            orders: vec![1; dim],
            ring: ring.clone(),
            d_out: Arc::new(d_out.clone()),
            projection: Projection::Field { proj },
        })
    }

    fn compute_local(ring: &Ring, degree: i64, d_in: &Mat, d_out: &Mat) -> Result<CohomologySlice> {
        let e = ring.exponent();
        let n = d_out.cols();
        let dz = diagonalize(d_out)?;
        let vinv = dz.v.inverse()?;
        // generators of Z: z_k = V e_k scaled by p^{e - val_k} (torsion) or V e_k (free)
        let mut zscale: Vec<Option<u32>> = vec![];
        let mut zgens: Vec<Vec<Elem>> = vec![];
        let mut ann: Vec<u32> = vec![];
        for k in 0..n {
            if k < dz.vals.len() {
                let v = dz.vals[k];
                if v == 0 {
                    zscale.push(None);
                    continue;
                }
                let c = ring.p_pow(e - v);
                zgens.push(dz.v.col(k).iter().map(|&x| ring.mul(c, x)).collect());
                zscale.push(Some(e - v));
                ann.push(v);
            } else {
                zgens.push(dz.v.col(k));
                zscale.push(Some(0));
                ann.push(e);
            }
        }
        let m = zgens.len();
        let zcoords = |c: &[Elem]| -> Result<Vec<Elem>> {
            let y = vinv.apply(c)?;
            let mut out = vec![];
            for (k, s) in zscale.iter().enumerate() {
                match s {
                    None => {
                        if y[k] != 0 {
                            return Err(Error::Invalid("vector is not a cocycle".into()));
                        }
                    }
                    Some(s) => out.push(ring.divexact(y[k], ring.p_pow(*s))?),
                }
            }
            Ok(out)
        };
        // relations: images of d_in in Z-coordinates, plus annihilators
        let mut rel_cols: Vec<Vec<Elem>> = vec![];
        for j in 0..d_in.cols() {
            rel_cols.push(zcoords(&d_in.col(j))?);
        }
        for (k, &a) in ann.iter().enumerate() {
            if a < e {
                let mut v = vec![0; m];
                v[k] = ring.p_pow(a);
                rel_cols.push(v);
            }
        }
        let rel = Mat::from_columns(ring, m, &rel_cols);
        let dr = diagonalize(&rel)?;
        let uinv = dr.u.inverse()?;
        let mut idx = vec![];
        let mut orders = vec![];
        let mut basis = vec![];
        for t in 0..m {
            let order = if t < dr.vals.len() { dr.vals[t] } else { e };
            if order == 0 {
                continue;
            }
            idx.push(t);
            orders.push(order);
            let coeffs = uinv.col(t);
            let mut cyc = vec![0; n];
            for (k, &a) in coeffs.iter().enumerate() {
                if a != 0 {
                    for (x, &g) in cyc.iter_mut().zip(&zgens[k]) {
                        *x = ring.add(*x, ring.mul(a, g));
                    }
                }
            }
            basis.push(cyc);
        }
        let structure = ModuleStructure::from_exponents(ring, orders.iter().copied());
        Ok(CohomologySlice {
            degree,
            structure,
            basis,
            orders,
            ring: ring.clone(),
            d_out: Arc::new(d_out.clone()),
            projection: Projection::Local {
                vinv,
                zscale,
                u: dr.u,
                idx,
            },
        })
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    /// Number of generators (the dimension over a field).
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_cocycle(&self, c: &[Elem]) -> Result<bool> {
        Ok(self.d_out.apply(c)?.iter().all(|&x| x == 0))
    }

    /// Coordinates of the class of a cocycle along `basis`; entry `k` is
    /// defined modulo `p^{orders[k]}` and returned reduced.
    pub fn coordinates(&self, c: &[Elem]) -> Result<Vec<Elem>> {
        if !self.is_cocycle(c)? {
            return Err(Error::Invalid(format!(
                "vector is not a cocycle in degree {}",
                self.degree
            )));
        }
        let r = &self.ring;
        match &self.projection {
            Projection::Field { proj } => proj.apply(c),
            Projection::Local {
                vinv,
                zscale,
                u,
                idx,
            } => {
                let y = vinv.apply(c)?;
                let mut zc = vec![];
                for (k, s) in zscale.iter().enumerate() {
                    if let Some(s) = s {
                        zc.push(r.divexact(y[k], r.p_pow(*s))?);
                    }
                }
                let w = u.apply(&zc)?;
                Ok(idx
                    .iter()
                    .zip(&self.orders)
                    .map(|(&t, &o)| reduce_mod_p_power(r, w[t], o))
                    .collect())
            }
        }
    }

    /// Whether a cocycle represents the zero class.
    pub fn is_zero_class(&self, c: &[Elem]) -> Result<bool> {
        Ok(self.coordinates(c)?.iter().all(|&x| x == 0))
    }

    /// Whether two cocycles are cohomologous.
    pub fn same_class(&self, a: &[Elem], b: &[Elem]) -> Result<bool> {
        let diff: Vec<Elem> = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| self.ring.sub(x, y))
            .collect();
        self.is_zero_class(&diff)
    }

    /// Whether `[a] = u [b]` for some unit `u` (both zero counts as proportional).
    pub fn proportional(&self, a: &[Elem], b: &[Elem]) -> Result<bool> {
        let ca = self.coordinates(a)?;
        let cb = self.coordinates(b)?;
        Ok(coords_proportional(&self.ring, &ca, &cb, &self.orders))
    }

    /// Cocycle representing `sum coords[k] * basis[k]`.
    pub fn cocycle(&self, coords: &[Elem]) -> Vec<Elem> {
        let r = &self.ring;
        let n = self.d_out.cols();
        let mut out = vec![0; n];
        for (k, &a) in coords.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (x, &g) in out.iter_mut().zip(&self.basis[k]) {
                *x = r.add(*x, r.mul(a, g));
            }
        }
        out
    }
}

/// Canonical representative of `x` modulo `p^o`.
fn reduce_mod_p_power(r: &Ring, x: Elem, o: u32) -> Elem {
    if o >= r.exponent() {
        return x;
    }
    // subtract the part divisible by p^o, coefficientwise for polynomial rings
    match r.witt_base() {
        Some(_) => {
            // o = 1 in W_2(k): keep the first component
            let (a0, _) = r.witt_components(x);
            r.witt_pair(a0, 0)
        }
        None => {
            let po = r.p().pow(o);
            let c: Vec<u64> = r.coefficients(x).iter().map(|v| v % po).collect();
            r.from_coefficients(&c)
        }
    }
}

/// Unit proportionality of two coordinate vectors whose entries live in `R/p^{orders[k]}`.
pub fn coords_proportional(r: &Ring, a: &[Elem], b: &[Elem], orders: &[u32]) -> bool {
    let az = a.iter().all(|&x| x == 0);
    let bz = b.iter().all(|&x| x == 0);
    if az || bz {
        return az && bz;
    }
    for u in r.elements().filter(|&u| r.is_unit(u)) {
        let ok = a
            .iter()
            .zip(b)
            .zip(orders)
            .all(|((&x, &y), &o)| reduce_mod_p_power(r, r.sub(x, r.mul(u, y)), o) == 0);
        if ok {
            return true;
        }
    }
    false
}

/// A map of complexes, stored degreewise on the overlap of the ranges.
#[derive(Clone, Debug)]
pub struct ComplexMap {
    pub source: CochainComplex,
    pub target: CochainComplex,
    comps: Vec<(i64, Mat)>,
}

impl ComplexMap {
    /// Build from components `(degree, matrix)` and check `f d = d f`.
    pub fn new(
        source: &CochainComplex,
        target: &CochainComplex,
        comps: Vec<(i64, Mat)>,
    ) -> Result<ComplexMap> {
        let f = ComplexMap::new_unchecked(source, target, comps)?;
        for i in source.lo.min(target.lo) - 1..=source.hi().max(target.hi()) {
            let lhs = f.at(i + 1).mul(&source.d(i))?;
            let rhs = target.d(i).mul(&f.at(i))?;
            if lhs != rhs {
                return Err(Error::Invalid(format!("not a chain map in degree {i}")));
            }
        }
        Ok(f)
    }

    pub fn new_unchecked(
        source: &CochainComplex,
        target: &CochainComplex,
        comps: Vec<(i64, Mat)>,
    ) -> Result<ComplexMap> {
        for (i, m) in &comps {
            if m.rows() != target.rank(*i) || m.cols() != source.rank(*i) {
                return Err(Error::Dimension(format!(
                    "component in degree {i} is {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    target.rank(*i),
                    source.rank(*i)
                )));
            }
        }
        Ok(ComplexMap {
            source: source.clone(),
            target: target.clone(),
            comps,
        })
    }

    pub fn identity(c: &CochainComplex) -> ComplexMap {
        let comps = (c.lo..=c.hi())
            .map(|i| (i, Mat::identity(&c.ring, c.rank(i))))
            .collect();
        ComplexMap {
            source: c.clone(),
            target: c.clone(),
            comps,
        }
    }

    pub fn zero(source: &CochainComplex, target: &CochainComplex) -> ComplexMap {
        ComplexMap {
            source: source.clone(),
            target: target.clone(),
            comps: vec![],
        }
    }

    /// Component in degree `i` (zero if not stored).
    pub fn at(&self, i: i64) -> Mat {
        self.comps
            .iter()
            .find(|(j, _)| *j == i)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| {
                Mat::zeros(&self.source.ring, self.target.rank(i), self.source.rank(i))
            })
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &ComplexMap) -> Result<ComplexMap> {
        let lo = self.source.lo.min(g.target.lo);
        let hi = self.source.hi().max(g.target.hi());
        let comps = (lo..=hi)
            .map(|i| Ok((i, g.at(i).mul(&self.at(i))?)))
            .collect::<Result<_>>()?;
        ComplexMap::new_unchecked(&self.source, &g.target, comps)
    }

    /// Sum of two parallel maps.
    pub fn add(&self, g: &ComplexMap) -> Result<ComplexMap> {
        let lo = self.source.lo.min(self.target.lo);
        let hi = self.source.hi().max(self.target.hi());
        let comps = (lo..=hi)
            .map(|i| Ok((i, self.at(i).add(&g.at(i))?)))
            .collect::<Result<_>>()?;
        ComplexMap::new_unchecked(&self.source, &self.target, comps)
    }

    /// Scalar multiple.
    pub fn scale(&self, c: Elem) -> ComplexMap {
        let comps = self.comps.iter().map(|(i, m)| (*i, m.scale(c))).collect();
        ComplexMap {
            source: self.source.clone(),
            target: self.target.clone(),
            comps,
        }
    }

    /// Matrix of the induced map `H^i(source) -> H^i(target)` in the slice bases.
    pub fn induced_on_h(&self, i: i64) -> Result<Mat> {
        let hs = self.source.cohomology(i)?;
        let ht = self.target.cohomology(i)?;
        self.induced_between(&hs, &ht)
    }

    /// Induced matrix between already computed slices.
    pub fn induced_between(&self, hs: &CohomologySlice, ht: &CohomologySlice) -> Result<Mat> {
        let f = self.at(hs.degree);
        let cols: Vec<Vec<Elem>> = hs
            .basis
            .iter()
            .map(|z| ht.coordinates(&f.apply(z)?))
            .collect::<Result<_>>()?;
        Ok(Mat::from_columns(&self.target.ring, ht.dim(), &cols))
    }

    /// The mapping cone with `d = [[-d_C, 0], [f, d_D]]` on `C^{i+1} ⊕ D^i`.
    pub fn cone(&self) -> Result<CochainComplex> {
        let c = &self.source;
        let d = &self.target;
        let r = &c.ring;
        let lo = (c.lo - 1).min(d.lo);
        let hi = (c.hi() - 1).max(d.hi());
        let rank = |i: i64| c.rank(i + 1) + d.rank(i);
        let ranks: Vec<usize> = (lo..=hi).map(rank).collect();
        let mut ds = vec![];
        for i in lo..hi {
            let a = c.d(i + 1).neg();
            let b = Mat::zeros(r, c.rank(i + 2), d.rank(i));
            let f = self.at(i + 1);
            let dd = d.d(i);
            ds.push(Mat::block2(&a, &b, &f, &dd)?);
        }
        CochainComplex::new_unchecked(r, lo, ranks, ds)
    }
}

type LiftFn = dyn Fn(i64, &[Elem]) -> Result<Vec<Elem>> + Send + Sync;

/// A degreewise split short exact sequence `0 -> C' -> C -> C'' -> 0`,
/// given by a degreewise section `C'' -> C` and a preimage map on `im(C' -> C)`.
pub struct Ses {
    pub sub: CochainComplex,
    pub mid: CochainComplex,
    pub quo: CochainComplex,
    lift: Box<LiftFn>,
    preimage: Box<LiftFn>,
}

impl Ses {
    /// Build from explicit set-theoretic data.
    pub fn from_fns(
        sub: CochainComplex,
        mid: CochainComplex,
        quo: CochainComplex,
        lift: Box<LiftFn>,
        preimage: Box<LiftFn>,
    ) -> Ses {
        Ses {
            sub,
            mid,
            quo,
            lift,
            preimage,
        }
    }

    /// Build from chain maps `inc`, `proj` and degreewise sections `s^i` of `proj`.
    /// Exactness is checked degreewise by rank counts and compositions.
    pub fn split(inc: &ComplexMap, proj: &ComplexMap, sections: Vec<(i64, Mat)>) -> Result<Ses> {
        let sub = inc.source.clone();
        let mid = inc.target.clone();
        let quo = proj.target.clone();
        let lo = sub.lo.min(mid.lo).min(quo.lo);
        let hi = sub.hi().max(mid.hi()).max(quo.hi());
        let mut secs = vec![];
        for i in lo..=hi {
            let a = inc.at(i);
            let b = proj.at(i);
            if mid.rank(i) != sub.rank(i) + quo.rank(i) {
                return Err(Error::NotExact(format!(
                    "ranks in degree {i} do not add up"
                )));
            }
            if !b.mul(&a)?.is_zero() {
                return Err(Error::NotExact(format!("proj ∘ inc != 0 in degree {i}")));
            }
            let s = sections
                .iter()
                .find(|(j, _)| *j == i)
                .map(|(_, m)| m.clone())
                .unwrap_or_else(|| Mat::zeros(mid.ring(), mid.rank(i), quo.rank(i)));
            if b.mul(&s)? != Mat::identity(quo.ring(), quo.rank(i)) {
                return Err(Error::NotExact(format!("section fails in degree {i}")));
            }
            let full = a.hstack(&s)?;
            if full.is_square() && full.rows() > 0 {
                full.inverse()
                    .map_err(|_| Error::NotExact(format!("inc is not injective in degree {i}")))?;
            }
            secs.push((i, s, a));
        }
        let secs = Arc::new(secs);
        let s2 = secs.clone();
        let lift = Box::new(move |i: i64, x: &[Elem]| -> Result<Vec<Elem>> {
            let (_, s, _) = s2
                .iter()
                .find(|t| t.0 == i)
                .ok_or(Error::DegreeOutOfRange { degree: i, lo, hi })?;
            s.apply(x)
        });
        let preimage = Box::new(move |i: i64, y: &[Elem]| -> Result<Vec<Elem>> {
            let (_, _, a) = secs
                .iter()
                .find(|t| t.0 == i)
                .ok_or(Error::DegreeOutOfRange { degree: i, lo, hi })?;
            a.solve(y)?
                .ok_or_else(|| Error::NotExact(format!("element not in the image in degree {i}")))
        });
        Ok(Ses {
            sub,
            mid,
            quo,
            lift,
            preimage,
        })
    }

    /// `0 -> C/p --p--> C --> C/p -> 0` for a free complex over a ring with `p^2 = 0`.
    pub fn reduction_mod_p(c: &CochainComplex) -> Result<Ses> {
        let r = c.ring.clone();
        if r.exponent() != 2 || !r.is_local() {
            return Err(Error::Invalid(format!(
                "mod-p Bockstein sequence needs p^2 = 0, got {}",
                r.name()
            )));
        }
        let red = c.reduce_mod_p()?;
        let r1 = r.clone();
        let lift = Box::new(move |_i: i64, x: &[Elem]| -> Result<Vec<Elem>> {
            Ok(x.iter().map(|&a| r1.lift_from_residue(a)).collect())
        });
        let r2 = r.clone();
        let preimage = Box::new(move |_i: i64, y: &[Elem]| -> Result<Vec<Elem>> {
            let p = r2.p_pow(1);
            y.iter()
                .map(|&b| {
                    let z = r2
                        .divexact(b, p)
                        .map_err(|_| Error::NotExact("not divisible by p".into()))?;
                    Ok(r2.reduce_mod_p_elem(z))
                })
                .collect()
        });
        Ok(Ses {
            sub: red.clone(),
            mid: c.clone(),
            quo: red,
            lift,
            preimage,
        })
    }

    /// Connecting map `H^i(C'') -> H^{i+1}(C')` on a cocycle representative.
    pub fn connect_cocycle(&self, i: i64, z: &[Elem]) -> Result<Vec<Elem>> {
        let s = (self.lift)(i, z)?;
        let ds = self.mid.d(i).apply(&s)?;
        let pre = (self.preimage)(i + 1, &ds)?;
        Ok(pre)
    }

    /// Matrix of the connecting map in the slice bases of `H^i(C'')` and `H^{i+1}(C')`.
    pub fn connecting(&self, i: i64) -> Result<Mat> {
        let hq = self.quo.cohomology(i)?;
        let hs = self.sub.cohomology(i + 1)?;
        let cols: Vec<Vec<Elem>> = hq
            .basis
            .iter()
            .map(|z| hs.coordinates(&self.connect_cocycle(i, z)?))
            .collect::<Result<_>>()?;
        Ok(Mat::from_columns(self.sub.ring(), hs.dim(), &cols))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(p: u64) -> Ring {
        Ring::fp(p).unwrap()
    }

    #[test]
    fn identity_two_term_is_acyclic() {
        let k = fp(3);
        let c = CochainComplex::two_term(&Mat::identity(&k, 2), 0);
        assert_eq!(c.cohomology_dims().unwrap(), vec![0, 0]);
    }

    #[test]
    fn multiplication_by_p_over_z_p2() {
        let r = Ring::zpe(3, 2).unwrap();
        let c = CochainComplex::two_term(&Mat::from_ints(&r, &[vec![3]]), 0);
        let h0 = c.cohomology(0).unwrap();
        let h1 = c.cohomology(1).unwrap();
        assert_eq!(h0.structure.torsion, vec![1]);
        assert_eq!(h1.structure.torsion, vec![1]);
        assert!(!h1.is_zero_class(&[1]).unwrap());
        assert!(h1.is_zero_class(&[3]).unwrap());
    }

    #[test]
    fn degree_out_of_range() {
        let c = CochainComplex::module(&fp(2), 1, 0);
        assert!(matches!(
            c.cohomology(3),
            Err(Error::DegreeOutOfRange { .. })
        ));
    }

    #[test]
    fn non_complex_rejected() {
        let k = fp(2);
        let d0 = Mat::identity(&k, 1);
        let r = CochainComplex::new(&k, 0, vec![1, 1, 1], vec![d0.clone(), d0]);
        assert!(matches!(r, Err(Error::NotAComplex(_))));
    }

    #[test]
    fn cone_of_identity_is_acyclic() {
        let k = fp(5);
        let d = Mat::from_ints(&k, &[vec![1, 2], vec![0, 0]]);
        let c = CochainComplex::new(&k, 0, vec![2, 2], vec![d]).unwrap();
        let cone = ComplexMap::identity(&c).cone().unwrap();
        assert!(cone.cohomology_dims().unwrap().iter().all(|&x| x == 0));
    }

    #[test]
    fn shift_moves_cohomology() {
        let k = fp(2);
        let c = CochainComplex::module(&k, 2, 0);
        let s = c.shift(3);
        assert_eq!(s.lo(), 3);
        assert_eq!(s.cohomology(3).unwrap().dim(), 2);
    }

    #[test]
    fn truncations_over_field() {
        let k = fp(3);
        // R --(1,0)^T--> R^2 --(0,1)--> R : H = (0, 0, 0)? d1 d0 = 0, rank d0 = 1, rank d1 = 1
        let d0 = Mat::from_ints(&k, &[vec![1], vec![0]]);
        let d1 = Mat::from_ints(&k, &[vec![0, 0]]);
        let c = CochainComplex::new(&k, 0, vec![1, 2, 1], vec![d0, d1]).unwrap();
        assert_eq!(c.cohomology_dims().unwrap(), vec![0, 1, 1]);
        let (t, inc) = c.truncate_le(1).unwrap();
        assert_eq!(t.cohomology_dims().unwrap(), vec![0, 1]);
        assert_eq!(inc.induced_on_h(1).unwrap().rank().unwrap(), 1);
        let (g, proj, _) = c.truncate_ge(1).unwrap();
        assert_eq!(g.lo(), 1);
        assert_eq!(g.cohomology_dims().unwrap(), vec![1, 1]);
        assert_eq!(proj.induced_on_h(2).unwrap().rank().unwrap(), 1);
    }

    #[test]
    fn tensor_kunneth_small() {
        let k = fp(2);
        let c = CochainComplex::new(
            &k,
            0,
            vec![1, 2],
            vec![Mat::from_ints(&k, &[vec![1], vec![0]])],
        )
        .unwrap();
        let t = c.tensor(&c).unwrap();
        // H(C) = (0, 1) so H(C ⊗ C) = (0, 0, 1)
        assert_eq!(t.cohomology_dims().unwrap(), vec![0, 0, 1]);
    }

    #[test]
    fn split_ses_has_zero_connecting() {
        let k = fp(3);
        let a = CochainComplex::two_term(&Mat::from_ints(&k, &[vec![0]]), 0);
        let mid = CochainComplex::two_term(&Mat::zeros(&k, 2, 2), 0);
        let inc = ComplexMap::new(
            &a,
            &mid,
            vec![
                (0, Mat::from_ints(&k, &[vec![1], vec![0]])),
                (1, Mat::from_ints(&k, &[vec![1], vec![0]])),
            ],
        )
        .unwrap();
        let proj = ComplexMap::new(
            &mid,
            &a,
            vec![
                (0, Mat::from_ints(&k, &[vec![0, 1]])),
                (1, Mat::from_ints(&k, &[vec![0, 1]])),
            ],
        )
        .unwrap();
        let sec = Mat::from_ints(&k, &[vec![0], vec![1]]);
        let ses = Ses::split(&inc, &proj, vec![(0, sec.clone()), (1, sec)]).unwrap();
        assert!(ses.connecting(0).unwrap().is_zero());
    }

    #[test]
    fn bockstein_of_mult_by_p_complex() {
        // Z/4 --0--> Z/4 --2--> Z/4: H^1 over F_2 of reduction is (ker 0)/(im 0): Bockstein nonzero
        let r = Ring::zpe(2, 2).unwrap();
        let c = CochainComplex::new(
            &r,
            0,
            vec![1, 1, 1],
            vec![
                Mat::from_ints(&r, &[vec![2]]),
                Mat::from_ints(&r, &[vec![0]]),
            ],
        )
        .unwrap();
        let ses = Ses::reduction_mod_p(&c).unwrap();
        let b = ses.connecting(0).unwrap();
        assert_eq!(b.rows(), 1);
        assert_eq!(b.get(0, 0), 1);
    }
}
