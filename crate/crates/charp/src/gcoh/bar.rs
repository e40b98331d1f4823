//! Normalized inhomogeneous bar cochains of finite groups.

use super::GModule;
use crate::cx::CohomologySlice;
use crate::ralg::{Elem, Mat, RowReducer, SpMat, SpVec};
use crate::{Error, Result};

/// Default cap on the dimension of any cochain group that is materialized.
pub const DEFAULT_MAX_COCHAINS: usize = 1 << 22;

/// Cap on `rows * cols` for dense cohomology computations.
const DENSE_LIMIT: usize = 1 << 25;

/// The normalized bar complex `C^n(G, M) = Maps((G \ e)^n, M)`.
///
/// A cochain is stored as a flat vector: the value on the tuple `(g_1, .., g_n)`
/// occupies `rank` consecutive entries at `tuple_index * rank`, where the tuple
/// index is the base-`(|G|-1)` number with digit `k_1` most significant and `k_i`
/// the position of `g_i` among the non-identity elements.
#[derive(Clone, Debug)]
pub struct BarComplex {
    module: GModule,
    elems: Vec<usize>,
    digit: Vec<usize>,
    max_cochains: usize,
}

impl BarComplex {
    pub fn new(module: &GModule) -> BarComplex {
        BarComplex::with_budget(module, DEFAULT_MAX_COCHAINS)
    }

    pub fn with_budget(module: &GModule, max_cochains: usize) -> BarComplex {
        let g = module.group();
        let elems: Vec<usize> = (0..g.order()).filter(|&a| a != g.identity()).collect();
        let mut digit = vec![usize::MAX; g.order()];
        for (k, &a) in elems.iter().enumerate() {
            digit[a] = k;
        }
        BarComplex {
            module: module.clone(),
            elems,
            digit,
            max_cochains,
        }
    }

    pub fn module(&self) -> &GModule {
        &self.module
    }

    /// Number of normalized `n`-tuples.
    pub fn tuples(&self, n: usize) -> usize {
        self.elems.len().saturating_pow(n as u32)
    }

    /// Dimension of `C^n` (saturating).
    pub fn dim(&self, n: usize) -> usize {
        self.tuples(n).saturating_mul(self.module.rank())
    }

    fn check_budget(&self, n: usize) -> Result<()> {
        if self.dim(n) > self.max_cochains {
            return Err(Error::Budget(format!(
                "C^{n}({}, M) has dimension {} > {}",
                self.module.group().name(),
                self.dim(n),
                self.max_cochains
            )));
        }
        Ok(())
    }

    /// Group elements of a tuple index.
    pub fn decode(&self, n: usize, mut idx: usize) -> Vec<usize> {
        let b = self.elems.len();
        let mut out = vec![0; n];
        for k in (0..n).rev() {
            out[k] = self.elems[idx % b];
            idx /= b;
        }
        out
    }

    /// Tuple index of group elements, or `None` if some entry is the identity.
    pub fn encode(&self, t: &[usize]) -> Option<usize> {
        let b = self.elems.len();
        let mut idx = 0;
        for &a in t {
            let k = self.digit[a];
            if k == usize::MAX {
                return None;
            }
            idx = idx * b + k;
        }
        Some(idx)
    }

    /// The terms of `(d f)(t)`: `(sign, acting element or None, source tuple index)`.
    pub(crate) fn terms(&self, t: &[usize]) -> Vec<(bool, Option<usize>, usize)> {
        let g = self.module.group();
        let n1 = t.len();
        let mut out = vec![];
        if let Some(s) = self.encode(&t[1..]) {
            out.push((false, Some(t[0]), s));
        }
        for i in 1..n1 {
            let mut u: Vec<usize> = t[..i - 1].to_vec();
            u.push(g.mul(t[i - 1], t[i]));
            u.extend_from_slice(&t[i + 1..]);
            if let Some(s) = self.encode(&u) {
                out.push((i % 2 == 1, None, s));
            }
        }
        if let Some(s) = self.encode(&t[..n1 - 1]) {
            out.push((n1 % 2 == 1, None, s));
        }
        out
    }

    /// `d f` for `f ∈ C^n`, over any coefficient ring.
    pub fn apply_d(&self, n: usize, f: &[Elem]) -> Result<Vec<Elem>> {
        if f.len() != self.dim(n) {
            return Err(Error::Dimension(format!(
                "cochain of length {} in degree {n}",
                f.len()
            )));
        }
        self.check_budget(n + 1)?;
        let r = self.module.ring();
        let rk = self.module.rank();
        let mut out = vec![0; self.dim(n + 1)];
        for u in 0..self.tuples(n + 1) {
            let t = self.decode(n + 1, u);
            let val = &mut out[u * rk..(u + 1) * rk];
            for (neg, act, s) in self.terms(&t) {
                let src = &f[s * rk..(s + 1) * rk];
                let v = match act {
                    Some(g) => self.module.act(g, src),
                    None => src.to_vec(),
                };
                for (x, y) in val.iter_mut().zip(v) {
                    *x = if neg { r.sub(*x, y) } else { r.add(*x, y) };
                }
            }
        }
        Ok(out)
    }

    /// The differential `d^n : C^n -> C^{n+1}` as a sparse matrix.
    pub fn d_sparse(&self, n: usize) -> Result<SpMat> {
        self.check_budget(n + 1)?;
        let r = self.module.ring();
        let rk = self.module.rank();
        let mut trip = vec![];
        for u in 0..self.tuples(n + 1) {
            let t = self.decode(n + 1, u);
            for (neg, act, s) in self.terms(&t) {
                for i in 0..rk {
                    match act {
                        Some(g) => {
                            let m = self.module.mat(g);
                            for j in 0..rk {
                                let x = m.get(i, j);
                                if x != 0 {
                                    trip.push((
                                        u * rk + i,
                                        s * rk + j,
                                        if neg { r.neg(x) } else { x },
                                    ));
                                }
                            }
                        }
                        None => trip.push((u * rk + i, s * rk + i, if neg { r.neg(1) } else { 1 })),
                    }
                }
            }
        }
        Ok(SpMat::from_triplets(r, self.dim(n + 1), self.dim(n), trip))
    }

    /// Rank of `d^n` over a field.
    pub fn rank_d(&self, n: usize) -> Result<usize> {
        self.d_sparse(n)?.rank()
    }

    /// `dim H^n` over a field.
    pub fn dim_h(&self, n: usize) -> Result<usize> {
        let below = if n == 0 { 0 } else { self.rank_d(n - 1)? };
        Ok(self.dim(n) - self.rank_d(n)? - below)
    }

    /// Whether `f ∈ C^n` is a cocycle.
    pub fn is_cocycle(&self, n: usize, f: &[Elem]) -> Result<bool> {
        Ok(self.apply_d(n, f)?.iter().all(|&x| x == 0))
    }

    /// Some `g` with `d g = f`, or `None` if `f` is not a coboundary (over a field).
    pub fn solve_coboundary(&self, n: usize, f: &[Elem]) -> Result<Option<Vec<Elem>>> {
        if f.len() != self.dim(n) {
            return Err(Error::Dimension(format!(
                "cochain of length {} in degree {n}",
                f.len()
            )));
        }
        if n == 0 {
            return Ok(f.iter().all(|&x| x == 0).then(Vec::new));
        }
        let d = self.d_sparse(n - 1)?;
        let (w, tail) = (self.dim(n), self.dim(n - 1));
        let r = self.module.ring();
        let mut red = RowReducer::new(r, w + tail, w)?;
        for j in 0..tail {
            let mut row: SpVec = d.col(j).clone();
            row.push((w + j, 1));
            red.insert(row);
        }
        let target: SpVec = f
            .iter()
            .enumerate()
            .filter(|e| *e.1 != 0)
            .map(|(i, &x)| (i, x))
            .collect();
        let out = red.reduce(&target);
        if out.first().is_some_and(|&(i, _)| i < w) {
            return Ok(None);
        }
        let mut g = vec![0; tail];
        for (i, x) in out {
            g[i - w] = r.neg(x);
        }
        Ok(Some(g))
    }

    /// Whether a cocycle is a coboundary.
    pub fn is_coboundary(&self, n: usize, f: &[Elem]) -> Result<bool> {
        Ok(self.solve_coboundary(n, f)?.is_some())
    }

    /// Whether the classes of two cocycles satisfy `[a] = u [b]` for a unit `u`
    /// (both zero counts as proportional).
    pub fn proportional(&self, n: usize, a: &[Elem], b: &[Elem]) -> Result<bool> {
        let za = self.is_coboundary(n, a)?;
        let zb = self.is_coboundary(n, b)?;
        if za || zb {
            return Ok(za && zb);
        }
        let r = self.module.ring();
        let w = self.dim(n);
        let mut red = RowReducer::new(r, w, w)?;
        if n > 0 {
            let d = self.d_sparse(n - 1)?;
            for j in 0..d.cols() {
                red.insert(d.col(j).clone());
            }
        }
        let sp = |v: &[Elem]| -> SpVec {
            v.iter()
                .enumerate()
                .filter(|e| *e.1 != 0)
                .map(|(i, &x)| (i, x))
                .collect()
        };
        red.insert(sp(b));
        Ok(red.contains(&sp(a)))
    }

    /// Dense `d^n`.
    pub fn d_dense(&self, n: usize) -> Result<Mat> {
        if self.dim(n).saturating_mul(self.dim(n + 1)) > DENSE_LIMIT {
            return Err(Error::Budget(format!(
                "dense d^{n} of size {} x {}",
                self.dim(n + 1),
                self.dim(n)
            )));
        }
        Ok(self.d_sparse(n)?.to_dense())
    }

    /// `H^n` as a [`CohomologySlice`] (dense; small complexes only).
    pub fn cohomology(&self, n: usize) -> Result<CohomologySlice> {
        let r = self.module.ring();
        let d_in = if n == 0 {
            Mat::zeros(r, self.dim(0), 0)
        } else {
            self.d_dense(n - 1)?
        };
        CohomologySlice::compute(r, n as i64, &d_in, &self.d_dense(n)?)
    }
}

/// `H^0, .., H^D` of `G` with coefficients in `M`.
pub fn bar_cohomology(m: &GModule, max_degree: usize) -> Result<Vec<CohomologySlice>> {
    let bar = BarComplex::new(m);
    (0..=max_degree).map(|n| bar.cohomology(n)).collect()
}

/// `dim H^0, .., dim H^D` computed with sparse elimination.
pub fn bar_cohomology_dims(m: &GModule, max_degree: usize) -> Result<Vec<usize>> {
    let bar = BarComplex::new(m);
    let ranks: Vec<usize> = (0..=max_degree)
        .map(|n| bar.rank_d(n))
        .collect::<Result<_>>()?;
    Ok((0..=max_degree)
        .map(|n| bar.dim(n) - ranks[n] - if n == 0 { 0 } else { ranks[n - 1] })
        .collect())
}

/// `dim H^0, .., dim H^D` of a cyclic group generated by `gen` from the
/// 2-periodic resolution `.. -> R[G] --N--> R[G] --(g-1)--> R[G] -> R`.
pub fn cyclic_cohomology_dims(m: &GModule, gen: usize, max_degree: usize) -> Result<Vec<usize>> {
    let g = m.group();
    if g.element_order(gen) != g.order() {
        return Err(Error::Invalid(format!(
            "element {gen} does not generate {}",
            g.name()
        )));
    }
    let r = m.ring();
    let id = Mat::identity(r, m.rank());
    let t = m.mat(gen).sub(&id)?;
    let mut norm = Mat::zeros(r, m.rank(), m.rank());
    let mut x = g.identity();
    for _ in 0..g.order() {
        norm = norm.add(m.mat(x))?;
        x = g.mul(x, gen);
    }
    let (rt, rn) = (t.rank()?, norm.rank()?);
    let n = m.rank();
    // ker(N)/im(g-1) in odd degrees and ker(g-1)/im(N) in even positive degrees.
    Ok((0..=max_degree)
        .map(|i| if i == 0 { n - rt } else { n - rt - rn })
        .collect())
}

/// Connecting map `H^i(G, M) -> H^{i+1}(G, M)` of `0 -> M -> M̃ -> M -> 0`
/// for a lift `M̃` over `W_2(k)` (or `GR(p^2, r)`) reducing to `M`. Returns a
/// representing cocycle.
pub fn group_bockstein(m: &GModule, lift: &GModule, i: usize, x: &[Elem]) -> Result<Vec<Elem>> {
    if !lift.reduces_to(m)? {
        return Err(Error::Invalid(
            "lifted module does not reduce to the given module".into(),
        ));
    }
    let w = lift.ring();
    if w.exponent() != 2 && w.witt_base().is_none() {
        return Err(Error::Invalid(format!(
            "{} is not a length-2 lift",
            w.name()
        )));
    }
    let bar = BarComplex::new(m);
    if !bar.is_cocycle(i, x)? {
        return Err(Error::Invalid(format!(
            "input is not a cocycle in degree {i}"
        )));
    }
    let lifted: Vec<Elem> = x.iter().map(|&a| w.lift_from_residue(a)).collect();
    let dx = BarComplex::new(lift).apply_d(i, &lifted)?;
    let p = w.p_pow(1);
    dx.iter()
        .map(|&y| Ok(w.reduce_mod_p_elem(w.divexact(y, p)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcoh::FiniteGroup;
    use crate::ralg::Ring;

    #[test]
    fn trivial_group_and_klein_four() {
        let k = Ring::fp(2).unwrap();
        let t = GModule::trivial(&FiniteGroup::trivial(), &k, 3);
        assert_eq!(bar_cohomology_dims(&t, 3).unwrap(), vec![3, 0, 0, 0]);
        let v4 = FiniteGroup::cyclic(2)
            .direct_product(&FiniteGroup::cyclic(2))
            .unwrap();
        let m = GModule::trivial(&v4, &k, 1);
        // Poincaré series 1/(1-t)^2.
        assert_eq!(bar_cohomology_dims(&m, 3).unwrap(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn cyclic_groups_match_periodic_resolution() {
        for p in [2u64, 3, 5] {
            let k = Ring::fp(p).unwrap();
            let g = FiniteGroup::cyclic(p as usize);
            let m = GModule::trivial(&g, &k, 1);
            let bar = bar_cohomology_dims(&m, 3).unwrap();
            assert_eq!(bar, vec![1; 4]);
            assert_eq!(bar, cyclic_cohomology_dims(&m, 1, 3).unwrap());
        }
        // C_4 acting on F_5 through the character 1 -> 2.
        let k = Ring::fp(5).unwrap();
        let g = FiniteGroup::cyclic(4);
        let m = GModule::character(&g, &k, &[1, 2, 4, 3]).unwrap();
        assert_eq!(
            bar_cohomology_dims(&m, 3).unwrap(),
            cyclic_cohomology_dims(&m, 1, 3).unwrap()
        );
        // C_3 acting on F_3[C_3]: free, so cohomology vanishes in positive degrees.
        let k = Ring::fp(3).unwrap();
        let g = FiniteGroup::cyclic(3);
        let perm = |s: usize| {
            let mut m = Mat::zeros(&k, 3, 3);
            for i in 0..3 {
                m.set((i + s) % 3, i, 1);
            }
            m
        };
        let m = GModule::new(&g, &k, (0..3).map(perm).collect()).unwrap();
        assert_eq!(bar_cohomology_dims(&m, 3).unwrap(), vec![1, 0, 0, 0]);
        assert_eq!(cyclic_cohomology_dims(&m, 1, 3).unwrap(), vec![1, 0, 0, 0]);
    }

    #[test]
    fn coboundary_solver() {
        let k = Ring::fp(3).unwrap();
        let g = FiniteGroup::cyclic(3);
        let m = GModule::trivial(&g, &k, 1);
        let bar = BarComplex::new(&m);
        let f = vec![1, 0];
        let df = bar.apply_d(1, &f).unwrap();
        let h = bar.solve_coboundary(2, &df).unwrap().unwrap();
        assert_eq!(bar.apply_d(1, &h).unwrap(), df);
        // The inclusion C_3 -> F_3 is a cocycle that is not a coboundary.
        let hom = vec![1, 2];
        assert!(bar.is_cocycle(1, &hom).unwrap());
        assert!(!bar.is_coboundary(1, &hom).unwrap());
        assert!(bar.proportional(1, &hom, &[2, 1]).unwrap());
    }

    #[test]
    fn bockstein_on_cyclic_groups() {
        for p in [2u64, 3] {
            let k = Ring::fp(p).unwrap();
            let w = Ring::zpe(p, 2).unwrap();
            let g = FiniteGroup::cyclic(p as usize);
            let m = GModule::trivial(&g, &k, 1);
            let mt = GModule::trivial(&g, &w, 1);
            let bar = BarComplex::new(&m);
            let x: Vec<Elem> = (1..p).collect();
            let y = group_bockstein(&m, &mt, 1, &x).unwrap();
            assert!(bar.is_cocycle(2, &y).unwrap());
            assert!(!bar.is_coboundary(2, &y).unwrap());
            // Direct oracle: c(g, h) = (g + h - (g + h mod p)) / p.
            let direct: Vec<Elem> = (1..p)
                .flat_map(|a| (1..p).map(move |b| (a + b) / p))
                .collect();
            assert!(bar.proportional(2, &y, &direct).unwrap());
            let z = group_bockstein(&m, &mt, 2, &y).unwrap();
            assert!(bar.is_coboundary(3, &z).unwrap());
        }
    }
}
