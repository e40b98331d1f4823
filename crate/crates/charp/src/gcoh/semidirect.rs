//! `H^i(Φ ⋉ A, M) = H^i(A, M)^Φ` for `|Φ|` prime to `p`, computed on the
//! complex of `Φ`-invariant normalized cochains of `A`.

use super::{BarComplex, FiniteGroup, GModule};
use crate::cx::{CochainComplex, CohomologySlice};
use crate::ralg::{echelon, Elem, Mat};
use crate::{Error, Result};
use std::collections::HashMap;

/// Orbit data of `Φ` on normalized `n`-tuples.
#[derive(Clone, Debug)]
struct Level {
    /// Tuple index of each orbit representative.
    reps: Vec<usize>,
    /// For every tuple: its orbit and some `φ` with `tuple = φ · rep`.
    lookup: Vec<(u32, u32)>,
    /// Columns spanning `M^{Stab(rep)}` for each orbit.
    bases: Vec<Mat>,
    /// Left inverses of `bases`.
    lefts: Vec<Mat>,
    offsets: Vec<usize>,
    dim: usize,
}

/// The complex of `Φ`-invariant cochains `C^n(A, M)^Φ`, where
/// `(φ · f)(a_1, .., a_n) = φ f(φ^{-1} · a_1, .., φ^{-1} · a_n)` and
/// `φ · a = φ a φ^{-1}`. An invariant cochain is stored by its values at orbit
/// representatives, in coordinates of the stabilizer invariants.
#[derive(Clone, Debug)]
pub struct InvariantComplex {
    bar: BarComplex,
    phi: FiniteGroup,
    act: Vec<Vec<usize>>,
    phi_mats: Vec<Mat>,
    levels: Vec<Level>,
    pub complex: CochainComplex,
}

/// Build the invariant complex in degrees `0..=max_degree + 1`.
///
/// `act(φ, a)` is the action of `Φ` on `A` by automorphisms and `phi_mats[φ]`
/// the action of `Φ` on `M`, compatible in the sense
/// `ρ(φ) ρ(a) ρ(φ)^{-1} = ρ(φ · a)`.
pub fn semidirect_reduce(
    inner: &GModule,
    phi: &FiniteGroup,
    act: impl Fn(usize, usize) -> usize,
    phi_mats: Vec<Mat>,
    max_degree: usize,
) -> Result<InvariantComplex> {
    let ring = inner.ring().clone();
    let p = ring.p() as usize;
    if phi.order().is_multiple_of(p) {
        return Err(Error::Invalid(format!(
            "|Φ| = {} is divisible by p = {p}",
            phi.order()
        )));
    }
    let a_grp = inner.group().clone();
    let act: Vec<Vec<usize>> = (0..phi.order())
        .map(|f| (0..a_grp.order()).map(|a| act(f, a)).collect())
        .collect();
    check_action(&a_grp, phi, &act)?;
    if phi_mats.len() != phi.order() {
        return Err(Error::Dimension(
            "one matrix per element of Φ is required".into(),
        ));
    }
    for f in 0..phi.order() {
        for g in 0..phi.order() {
            if phi_mats[f].mul(&phi_mats[g])? != phi_mats[phi.mul(f, g)] {
                return Err(Error::Invalid(
                    "matrices of Φ do not form a representation".into(),
                ));
            }
        }
        let finv = phi_mats[phi.inv(f)].clone();
        for a in 0..a_grp.order() {
            let lhs = phi_mats[f].mul(inner.mat(a))?.mul(&finv)?;
            if &lhs != inner.mat(act[f][a]) {
                return Err(Error::Invalid(
                    "Φ-action on M is not compatible with the action on A".into(),
                ));
            }
        }
    }
    let bar = BarComplex::new(inner);
    if bar.tuples(max_degree + 1) > super::DEFAULT_MAX_COCHAINS {
        return Err(Error::Budget(format!(
            "{} tuples in degree {}",
            bar.tuples(max_degree + 1),
            max_degree + 1
        )));
    }
    let mut ic = InvariantComplex {
        bar,
        phi: phi.clone(),
        act,
        phi_mats,
        levels: vec![],
        complex: CochainComplex::module(&ring, 0, 0),
    };
    for n in 0..=max_degree + 1 {
        let lv = ic.build_level(n)?;
        ic.levels.push(lv);
    }
    let mut ds = vec![];
    for n in 0..=max_degree {
        ds.push(ic.differential(n)?);
    }
    let ranks = ic.levels.iter().map(|l| l.dim).collect();
    ic.complex = CochainComplex::new(&ring, 0, ranks, ds)?;
    Ok(ic)
}

fn check_action(a: &FiniteGroup, phi: &FiniteGroup, act: &[Vec<usize>]) -> Result<()> {
    for f in 0..phi.order() {
        let mut seen = vec![false; a.order()];
        for x in 0..a.order() {
            let y = act[f][x];
            if y >= a.order() || seen[y] {
                return Err(Error::Invalid("Φ does not act by bijections".into()));
            }
            seen[y] = true;
        }
        for x in 0..a.order() {
            for &g in a.generators() {
                if act[f][a.mul(x, g)] != a.mul(act[f][x], act[f][g]) {
                    return Err(Error::Invalid("Φ does not act by automorphisms".into()));
                }
            }
        }
        for &g in phi.generators() {
            for x in 0..a.order() {
                if act[phi.mul(f, g)][x] != act[f][act[g][x]] {
                    return Err(Error::Invalid("Φ-action is not a homomorphism".into()));
                }
            }
        }
    }
    Ok(())
}

/// Columns spanning the space and a left inverse on it.
pub(crate) fn basis_and_left_inverse(b: Mat) -> Result<(Mat, Mat)> {
    let k = b.cols();
    let ring = b.ring().clone();
    if k == 0 {
        return Ok((b.clone(), Mat::zeros(&ring, 0, b.rows())));
    }
    let rows = echelon(&b.transpose())?.pivots;
    let all: Vec<usize> = (0..k).collect();
    let sq = b.select(&rows, &all).inverse()?;
    let mut sel = Mat::zeros(&ring, k, b.rows());
    for (i, &r) in rows.iter().enumerate() {
        sel.set(i, r, 1);
    }
    Ok((b, sq.mul(&sel)?))
}

impl InvariantComplex {
    fn act_tuple(&self, f: usize, u: usize, n: usize) -> usize {
        let t: Vec<usize> = self
            .bar
            .decode(n, u)
            .iter()
            .map(|&a| self.act[f][a])
            .collect();
        self.bar.encode(&t).expect("automorphisms fix the identity")
    }

    fn build_level(&self, n: usize) -> Result<Level> {
        let m = self.bar.module();
        let ring = m.ring();
        let count = self.bar.tuples(n);
        let mut lookup = vec![(u32::MAX, 0u32); count];
        let (mut reps, mut bases, mut lefts, mut offsets) = (vec![], vec![], vec![], vec![]);
        let mut dim = 0;
        for u in 0..count {
            if lookup[u].0 != u32::MAX {
                continue;
            }
            let o = reps.len() as u32;
            let mut stab = vec![];
            for f in 0..self.phi.order() {
                let v = self.act_tuple(f, u, n);
                if lookup[v].0 == u32::MAX {
                    lookup[v] = (o, f as u32);
                }
                if v == u {
                    stab.push(f);
                }
            }
            let inv =
                super::invariant_basis(ring, m.rank(), stab.iter().map(|&f| &self.phi_mats[f]))?;
            let (b, l) = basis_and_left_inverse(inv)?;
            reps.push(u);
            offsets.push(dim);
            dim += b.cols();
            bases.push(b);
            lefts.push(l);
        }
        Ok(Level {
            reps,
            lookup,
            bases,
            lefts,
            offsets,
            dim,
        })
    }

    /// `d^n` in invariant coordinates.
    fn differential(&self, n: usize) -> Result<Mat> {
        let ring = self.bar.module().ring().clone();
        let m = self.bar.module();
        let (src, tgt) = (&self.levels[n], &self.levels[n + 1]);
        let mut d = Mat::zeros(&ring, tgt.dim, src.dim);
        let neg = ring.neg(1);
        for (ti, &u) in tgt.reps.iter().enumerate() {
            let t = self.bar.decode(n + 1, u);
            let mut acc: HashMap<u32, Mat> = HashMap::new();
            for (is_neg, g, s) in self.bar.terms(&t) {
                let (o, f) = src.lookup[s];
                let mut blk = self.phi_mats[f as usize].mul(&src.bases[o as usize])?;
                if let Some(g) = g {
                    blk = m.mat(g).mul(&blk)?;
                }
                if is_neg {
                    blk = blk.scale(neg);
                }
                let e = acc
                    .entry(o)
                    .or_insert_with(|| Mat::zeros(&ring, m.rank(), blk.cols()));
                *e = e.add(&blk)?;
            }
            for (o, blk) in acc {
                let proj = tgt.lefts[ti].mul(&blk)?;
                let (r0, c0) = (tgt.offsets[ti], src.offsets[o as usize]);
                for i in 0..proj.rows() {
                    for j in 0..proj.cols() {
                        d.add_to(r0 + i, c0 + j, proj.get(i, j));
                    }
                }
            }
        }
        Ok(d)
    }

    /// The bar complex of the inner group.
    pub fn bar(&self) -> &BarComplex {
        &self.bar
    }

    /// `H^n(A, M)^Φ`.
    pub fn cohomology(&self, n: usize) -> Result<CohomologySlice> {
        if n + 1 >= self.levels.len() {
            return Err(Error::DegreeOutOfRange {
                degree: n as i64,
                lo: 0,
                hi: self.levels.len() as i64 - 2,
            });
        }
        self.complex.cohomology(n as i64)
    }

    /// The full cochain of `A` with the given invariant coordinates.
    pub fn embed(&self, n: usize, coords: &[Elem]) -> Result<Vec<Elem>> {
        let lv = &self.levels[n];
        let m = self.bar.module();
        let rk = m.rank();
        let vals: Vec<Vec<Elem>> = (0..lv.reps.len())
            .map(|o| lv.bases[o].apply(&coords[lv.offsets[o]..lv.offsets[o] + lv.bases[o].cols()]))
            .collect::<Result<_>>()?;
        let mut out = vec![0; self.bar.dim(n)];
        for (u, &(o, f)) in lv.lookup.iter().enumerate() {
            let v = self.phi_mats[f as usize].apply(&vals[o as usize])?;
            out[u * rk..(u + 1) * rk].copy_from_slice(&v);
        }
        Ok(out)
    }

    /// Invariant coordinates of the average `(1/|Φ|) Σ φ · f` of a full cochain.
    pub fn average(&self, n: usize, f: &[Elem]) -> Result<Vec<Elem>> {
        let lv = &self.levels[n];
        let ring = self.bar.module().ring();
        let rk = self.bar.module().rank();
        let scale = ring.inv(ring.from_int(self.phi.order() as i64))?;
        let mut out = vec![0; lv.dim];
        for (o, &u) in lv.reps.iter().enumerate() {
            let mut acc = vec![0; rk];
            for fi in 0..self.phi.order() {
                let v = self.act_tuple(self.phi.inv(fi), u, n);
                let y = self.phi_mats[fi].apply(&f[v * rk..(v + 1) * rk])?;
                for (a, b) in acc.iter_mut().zip(y) {
                    *a = ring.add(*a, b);
                }
            }
            let acc: Vec<Elem> = acc.iter().map(|&x| ring.mul(scale, x)).collect();
            let c = lv.lefts[o].apply(&acc)?;
            out[lv.offsets[o]..lv.offsets[o] + c.len()].copy_from_slice(&c);
        }
        Ok(out)
    }

    /// Number of `Φ`-orbits on normalized `n`-tuples.
    pub fn orbits(&self, n: usize) -> usize {
        self.levels[n].reps.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcoh::bar_cohomology_dims;
    use crate::ralg::Ring;

    /// `C_3 ⋊ C_2 = S_3` with `M = χ ⊗ ε^s` over `F_3` (`ε` the sign of `C_2`).
    #[test]
    fn s3_matches_direct_bar_complex() {
        let k = Ring::fp(3).unwrap();
        let c3 = FiniteGroup::cyclic(3);
        let c2 = FiniteGroup::cyclic(2);
        let act = |h: usize, x: usize| if h == 0 { x } else { (3 - x) % 3 };
        let s3 = FiniteGroup::semidirect(&c3, &c2, act).unwrap();
        for sign in [false, true] {
            let inner = GModule::trivial(&c3, &k, 1);
            let eps = if sign { k.neg(1) } else { 1 };
            let phi_mats = vec![Mat::identity(&k, 1), Mat::scalar(&k, 1, eps)];
            let ic = semidirect_reduce(&inner, &c2, act, phi_mats.clone(), 3).unwrap();
            let red: Vec<usize> = (0..=3).map(|n| ic.cohomology(n).unwrap().dim()).collect();
            let full_mats: Vec<Mat> = (0..6).map(|x| phi_mats[x % 2].clone()).collect();
            let full = GModule::new(&s3, &k, full_mats).unwrap();
            assert_eq!(red, bar_cohomology_dims(&full, 3).unwrap());
        }
    }

    #[test]
    fn trivial_phi_is_identity() {
        let k = Ring::fp(2).unwrap();
        let v4 = FiniteGroup::cyclic(2)
            .direct_product(&FiniteGroup::cyclic(2))
            .unwrap();
        let inner = GModule::trivial(&v4, &k, 1);
        let ic = semidirect_reduce(
            &inner,
            &FiniteGroup::trivial(),
            |_, a| a,
            vec![Mat::identity(&k, 1)],
            2,
        )
        .unwrap();
        let red: Vec<usize> = (0..=2).map(|n| ic.cohomology(n).unwrap().dim()).collect();
        assert_eq!(red, bar_cohomology_dims(&inner, 2).unwrap());
        let c = ic.cohomology(2).unwrap();
        let full = ic.embed(2, &c.basis[0]).unwrap();
        assert!(ic.bar().is_cocycle(2, &full).unwrap());
        assert_eq!(ic.average(2, &full).unwrap(), c.basis[0]);
    }

    #[test]
    fn rejects_p_divisible_phi() {
        let k = Ring::fp(2).unwrap();
        let inner = GModule::trivial(&FiniteGroup::cyclic(3), &k, 1);
        let c2 = FiniteGroup::cyclic(2);
        let r = semidirect_reduce(
            &inner,
            &c2,
            |h, x| if h == 0 { x } else { (3 - x) % 3 },
            vec![Mat::identity(&k, 1); 2],
            1,
        );
        assert!(r.is_err());
    }
}
