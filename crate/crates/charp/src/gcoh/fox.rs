//! Low-degree cohomology of finitely presented groups via Fox calculus, and the
//! Borel subgroup of `SL_2` over the integers of `Q(√5)`.

use crate::cx::{CochainComplex, CohomologySlice};
use crate::ralg::{Elem, Mat, Ring};
use crate::{Error, Result};

/// A letter `(generator, ±1)` of a group word.
pub type Letter = (usize, i32);

/// A finite presentation `<s_1, .., s_g | r_1, .., r_k>`.
#[derive(Clone, Debug)]
pub struct Presentation {
    pub generators: Vec<String>,
    pub relations: Vec<Vec<Letter>>,
}

/// The cochain complex `M -> M^g -> M^k` of a presentation with coefficients in
/// a representation. `H^0` and `H^1` are the group cohomology; a 2-cocycle of
/// the group that is zero in `H^2` of this complex is zero in `H^2` of the group.
#[derive(Clone, Debug)]
pub struct FoxComplex {
    pub presentation: Presentation,
    pub ring: Ring,
    pub rank: usize,
    pub gens: Vec<Mat>,
    pub complex: CochainComplex,
}

impl FoxComplex {
    /// Build from matrices for the generators; relations are checked to hold.
    pub fn new(pres: &Presentation, ring: &Ring, gens: Vec<Mat>) -> Result<FoxComplex> {
        if gens.len() != pres.generators.len() {
            return Err(Error::Dimension(
                "one matrix per generator is required".into(),
            ));
        }
        let rank = gens.first().map_or(0, |m| m.rows());
        let invs: Vec<Mat> = gens.iter().map(|m| m.inverse()).collect::<Result<_>>()?;
        let id = Mat::identity(ring, rank);
        for (k, rel) in pres.relations.iter().enumerate() {
            let mut p = id.clone();
            for &(s, e) in rel {
                p = p.mul(if e > 0 { &gens[s] } else { &invs[s] })?;
            }
            if p != id {
                return Err(Error::Invalid(format!(
                    "relation {k} does not hold in the representation"
                )));
            }
        }
        let g = gens.len();
        let mut d0 = Mat::zeros(ring, g * rank, rank);
        for (s, m) in gens.iter().enumerate() {
            let t = m.sub(&id)?;
            for a in 0..rank {
                for b in 0..rank {
                    d0.set(s * rank + a, b, t.get(a, b));
                }
            }
        }
        let mut d1 = Mat::zeros(ring, pres.relations.len() * rank, g * rank);
        for (k, rel) in pres.relations.iter().enumerate() {
            for (s, block) in fox_derivatives(rel, &gens, &invs, ring, rank)?
                .into_iter()
                .enumerate()
            {
                for a in 0..rank {
                    for b in 0..rank {
                        d1.set(k * rank + a, s * rank + b, block.get(a, b));
                    }
                }
            }
        }
        let complex = CochainComplex::new(
            ring,
            0,
            vec![rank, g * rank, pres.relations.len() * rank],
            vec![d0, d1],
        )?;
        Ok(FoxComplex {
            presentation: pres.clone(),
            ring: ring.clone(),
            rank,
            gens,
            complex,
        })
    }

    pub fn cohomology(&self, i: usize) -> Result<CohomologySlice> {
        self.complex.cohomology(i as i64)
    }

    /// Connecting map for `0 -> M -> M̃ -> M -> 0`: lift the 1-cocycle, apply
    /// `d` over the lift, divide by `p` and reduce.
    pub fn bockstein(&self, lift: &FoxComplex, x: &[Elem]) -> Result<Vec<Elem>> {
        let w = &lift.ring;
        let reduced: Vec<Mat> = lift
            .gens
            .iter()
            .map(|m| m.reduce_mod_p())
            .collect::<Result<_>>()?;
        if reduced != self.gens {
            return Err(Error::Invalid(
                "lifted representation does not reduce to the given one".into(),
            ));
        }
        let lifted: Vec<Elem> = x.iter().map(|&a| w.lift_from_residue(a)).collect();
        let dx = lift.complex.d(1).apply(&lifted)?;
        let p = w.p_pow(1);
        dx.iter()
            .map(|&y| Ok(w.reduce_mod_p_elem(w.divexact(y, p)?)))
            .collect()
    }
}

/// Fox derivatives `∂r/∂s_j` evaluated in the representation.
fn fox_derivatives(
    rel: &[Letter],
    gens: &[Mat],
    invs: &[Mat],
    ring: &Ring,
    rank: usize,
) -> Result<Vec<Mat>> {
    let mut out = vec![Mat::zeros(ring, rank, rank); gens.len()];
    let mut prefix = Mat::identity(ring, rank);
    for &(s, e) in rel {
        if e > 0 {
            out[s] = out[s].add(&prefix)?;
            prefix = prefix.mul(&gens[s])?;
        } else {
            prefix = prefix.mul(&invs[s])?;
            out[s] = out[s].sub(&prefix)?;
        }
    }
    Ok(out)
}

/// `B = T ⋉ A ⊂ SL_2(O_F)` for `F = Q(√5)`, `O_F = Z[ε]` with `ε^2 = ε + 1`.
///
/// Generators: `z = -1`, `t = diag(ε, ε^{-1})`, `a_1 = [[1, 1], [0, 1]]`,
/// `a_2 = [[1, ε], [0, 1]]`. Relations: `z^2`, `z` central, `[a_1, a_2]`,
/// `t a_1 t^{-1} = a_1 a_2` and `t a_2 t^{-1} = a_1 a_2^2` (multiplication by
/// `ε^2` on `O_F` in the basis `1, ε`).
pub fn borel_presentation_sqrt5() -> Presentation {
    let (z, t, a1, a2) = (0, 1, 2, 3);
    let rel = |w: &[(usize, i32)]| w.to_vec();
    Presentation {
        generators: ["z", "t", "a1", "a2"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        relations: vec![
            rel(&[(z, 1), (z, 1)]),
            rel(&[(z, 1), (t, 1), (z, -1), (t, -1)]),
            rel(&[(z, 1), (a1, 1), (z, -1), (a1, -1)]),
            rel(&[(z, 1), (a2, 1), (z, -1), (a2, -1)]),
            rel(&[(a1, 1), (a2, 1), (a1, -1), (a2, -1)]),
            rel(&[(t, 1), (a1, 1), (t, -1), (a2, -1), (a1, -1)]),
            rel(&[(t, 1), (a2, 1), (t, -1), (a2, -1), (a2, -1), (a1, -1)]),
        ],
    }
}

/// `O_F / 4 = GR(4, 2)` presented as `(Z/4)[x]/(x^2 - x - 1)`, with `x = ε`.
pub fn sqrt5_ring_mod4() -> Result<Ring> {
    Ring::gr_with_modulus(2, 2, vec![3, 3, 1])
}

/// `O_F / 2 = F_4` with `x = ε` (modulus `x^2 + x + 1`).
pub fn sqrt5_ring_mod2() -> Result<Ring> {
    sqrt5_ring_mod4()?.residue_field()
}

/// The image of `ε = (1 + √5)/2` in a quotient ring of `O_F`.
pub fn epsilon(ring: &Ring) -> Elem {
    ring.from_coefficients(&[0, 1])
}

/// Galois conjugation `ε ↦ 1 - ε` on a quotient of `O_F`; on `GR(4, 2)` this is
/// the Witt vector Frobenius and on `F_4` it is `x ↦ x^2`.
pub fn galois(ring: &Ring, a: Elem) -> Elem {
    let c = ring.coefficients(a);
    let (a0, a1) = (
        c.first().copied().unwrap_or(0),
        c.get(1).copied().unwrap_or(0),
    );
    let (u, v) = (ring.from_int(a0 as i64), ring.from_int(a1 as i64));
    // a0 + a1 (1 - x) = (a0 + a1) - a1 x
    let e = epsilon(ring);
    ring.sub(ring.add(u, v), ring.mul(v, e))
}

/// Matrices of `z, t, a_1, a_2` on the tautological module `V` over a quotient of `O_F`.
pub fn borel_natural_sqrt5(ring: &Ring) -> Result<Vec<Mat>> {
    let e = epsilon(ring);
    let einv = ring.inv(e)?;
    let m = |rows: Vec<Vec<Elem>>| Mat::from_rows(ring, 2, 2, rows);
    Ok(vec![
        Mat::scalar(ring, 2, ring.neg(1)),
        m(vec![vec![e, 0], vec![0, einv]])?,
        m(vec![vec![1, 1], vec![0, 1]])?,
        m(vec![vec![1, e], vec![0, 1]])?,
    ])
}

/// The Frobenius twist `V^{(1)}` (Galois conjugation applied entrywise).
pub fn borel_twisted_sqrt5(ring: &Ring) -> Result<Vec<Mat>> {
    Ok(borel_natural_sqrt5(ring)?
        .iter()
        .map(|m| m.map(|x| galois(ring, x)))
        .collect())
}

/// The character `χ_1^k` (`diag(u, u^{-1}) ↦ u^k`, trivial on `A`).
pub fn borel_character_sqrt5(ring: &Ring, k: i64) -> Result<Vec<Mat>> {
    let e = epsilon(ring);
    let pw = |u: Elem| -> Result<Elem> {
        let base = if k < 0 { ring.inv(u)? } else { u };
        Ok(ring.pow(base, k.unsigned_abs()))
    };
    Ok(vec![
        Mat::scalar(ring, 1, pw(ring.neg(1))?),
        Mat::scalar(ring, 1, pw(e)?),
        Mat::identity(ring, 1),
        Mat::identity(ring, 1),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_abelian_rank_two() {
        // <a, b | [a, b]> with trivial coefficients: dims 1, 2, 1.
        let k = Ring::fp(3).unwrap();
        let pres = Presentation {
            generators: vec!["a".into(), "b".into()],
            relations: vec![vec![(0, 1), (1, 1), (0, -1), (1, -1)]],
        };
        let f = FoxComplex::new(&pres, &k, vec![Mat::identity(&k, 1); 2]).unwrap();
        let dims: Vec<usize> = (0..3).map(|i| f.cohomology(i).unwrap().dim()).collect();
        assert_eq!(dims, vec![1, 2, 1]);
    }

    #[test]
    fn cyclic_group_bockstein() {
        // <s | s^3> over F_3 with lift Z/9: the Bockstein of the generator of H^1 is nonzero.
        let k = Ring::fp(3).unwrap();
        let w = Ring::zpe(3, 2).unwrap();
        let pres = Presentation {
            generators: vec!["s".into()],
            relations: vec![vec![(0, 1); 3]],
        };
        let f = FoxComplex::new(&pres, &k, vec![Mat::identity(&k, 1)]).unwrap();
        let fw = FoxComplex::new(&pres, &w, vec![Mat::identity(&w, 1)]).unwrap();
        let h1 = f.cohomology(1).unwrap();
        assert_eq!(h1.dim(), 1);
        let y = f.bockstein(&fw, &h1.basis[0]).unwrap();
        assert!(!f.cohomology(2).unwrap().is_zero_class(&y).unwrap());
    }

    #[test]
    fn borel_relations_hold() {
        let pres = borel_presentation_sqrt5();
        for ring in [sqrt5_ring_mod4().unwrap(), sqrt5_ring_mod2().unwrap()] {
            assert!(FoxComplex::new(&pres, &ring, borel_natural_sqrt5(&ring).unwrap()).is_ok());
            assert!(FoxComplex::new(&pres, &ring, borel_twisted_sqrt5(&ring).unwrap()).is_ok());
            assert!(
                FoxComplex::new(&pres, &ring, borel_character_sqrt5(&ring, -2).unwrap()).is_ok()
            );
        }
        let k = sqrt5_ring_mod2().unwrap();
        let e = epsilon(&k);
        assert_eq!(galois(&k, e), k.frobenius(e));
    }
}
