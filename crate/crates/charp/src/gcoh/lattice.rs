//! Cohomology of free abelian groups through the Koszul complex.

use super::LatticeModule;
use crate::cx::{CochainComplex, CohomologySlice};
use crate::dk::{BasisIndex, PolyFunctor};
use crate::ralg::Mat;
use crate::Result;

/// The Koszul complex `C^k = Hom(Λ^k Z^m, M)` with
/// `d(e_S ⊗ v) = Σ_{j ∉ S} ± e_{S ∪ j} ⊗ (ρ(e_j) - 1) v`, where the sign is
/// `(-1)^{#{s ∈ S : s < j}}`. Basis `e_S ⊗ f_c` sits at `index(S) * rank + c`.
pub fn koszul_complex(m: &LatticeModule) -> Result<CochainComplex> {
    let r = m.ring();
    let (lm, rk) = (m.lattice_rank(), m.rank());
    let id = Mat::identity(r, rk);
    let ops: Vec<Mat> = (0..lm)
        .map(|j| m.generator(j).sub(&id))
        .collect::<Result<_>>()?;
    let idx: Vec<BasisIndex> = (0..=lm)
        .map(|k| BasisIndex::new(PolyFunctor::ext(k), lm))
        .collect();
    let mut ds = vec![];
    for k in 0..lm {
        let (src, tgt) = (&idx[k], &idx[k + 1]);
        let mut d = Mat::zeros(r, tgt.len() * rk, src.len() * rk);
        for (si, s) in src.tuples.iter().enumerate() {
            for j in 0..lm as u32 {
                if s.contains(&j) {
                    continue;
                }
                let below = s.iter().filter(|&&x| x < j).count();
                let mut t = s.clone();
                t.insert(below, j);
                let ti = tgt.index(&t).expect("subset");
                let op = &ops[j as usize];
                for a in 0..rk {
                    for b in 0..rk {
                        let x = op.get(a, b);
                        if x != 0 {
                            let x = if below % 2 == 1 { r.neg(x) } else { x };
                            d.add_to(ti * rk + a, si * rk + b, x);
                        }
                    }
                }
            }
        }
        ds.push(d);
    }
    let ranks = idx.iter().map(|i| i.len() * rk).collect();
    CochainComplex::new(r, 0, ranks, ds)
}

/// `H^0, .., H^m` of `Z^m` with coefficients in `M`.
pub fn lattice_cohomology(m: &LatticeModule) -> Result<Vec<CohomologySlice>> {
    let c = koszul_complex(m)?;
    (0..=m.lattice_rank() as i64)
        .map(|i| c.cohomology(i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ralg::{binomial, Ring};

    #[test]
    fn trivial_coefficients_give_exterior_powers() {
        let k = Ring::fp(3).unwrap();
        for m in 1..=4 {
            let dims: Vec<usize> = lattice_cohomology(&LatticeModule::trivial(&k, m, 1))
                .unwrap()
                .iter()
                .map(|h| h.dim())
                .collect();
            let expect: Vec<usize> = (0..=m as u64)
                .map(|i| binomial(m as u64, i) as usize)
                .collect();
            assert_eq!(dims, expect);
        }
    }

    #[test]
    fn nontrivial_characters_are_acyclic() {
        let k = Ring::fp(5).unwrap();
        let chi = LatticeModule::character(&k, &[2]).unwrap();
        assert!(lattice_cohomology(&chi)
            .unwrap()
            .iter()
            .all(|h| h.dim() == 0));
        let f4 = Ring::gf(2, 2).unwrap();
        let lambda = f4.primitive_element().unwrap();
        let chi = LatticeModule::character(&f4, &[1, lambda]).unwrap();
        assert!(lattice_cohomology(&chi)
            .unwrap()
            .iter()
            .all(|h| h.dim() == 0));
    }

    #[test]
    fn unipotent_action_over_z_mod_p2() {
        // Z acting on (Z/4)^2 by [[1, 2], [0, 1]]: H^0 = Z/4 + Z/2, H^1 = Z/2 + Z/4.
        let r = Ring::zpe(2, 2).unwrap();
        let m =
            LatticeModule::new(&r, 2, vec![Mat::from_ints(&r, &[vec![1, 2], vec![0, 1]])]).unwrap();
        let h = lattice_cohomology(&m).unwrap();
        assert_eq!(h[0].structure.length(), 3);
        assert_eq!(h[1].structure.length(), 3);
    }
}
