//! Linear representations of finite groups and of free abelian groups.

use super::FiniteGroup;
use crate::ralg::{echelon, Elem, Mat, Ring};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::sync::Arc;

/// A finite group acting on `R^rank` by one matrix per group element.
#[derive(Clone, Debug)]
pub struct GModule {
    group: FiniteGroup,
    ring: Ring,
    rank: usize,
    mats: Arc<Vec<Mat>>,
}

impl GModule {
    /// Build from one matrix per element. The homomorphism property is checked
    /// on all pairs involving a generator and on random pairs.
    pub fn new(group: &FiniteGroup, ring: &Ring, mats: Vec<Mat>) -> Result<GModule> {
        if mats.len() != group.order() {
            return Err(Error::Dimension(format!(
                "{} matrices for a group of order {}",
                mats.len(),
                group.order()
            )));
        }
        let rank = mats.first().map_or(0, |m| m.rows());
        if mats
            .iter()
            .any(|m| m.rows() != rank || m.cols() != rank || m.ring() != ring)
        {
            return Err(Error::Dimension(
                "action matrices must be square of one size over one ring".into(),
            ));
        }
        let m = GModule {
            group: group.clone(),
            ring: ring.clone(),
            rank,
            mats: Arc::new(mats),
        };
        m.check()?;
        Ok(m)
    }

    /// Build from matrices for the generators of the group.
    pub fn from_generators(
        group: &FiniteGroup,
        ring: &Ring,
        rank: usize,
        gen_mats: &[Mat],
    ) -> Result<GModule> {
        let gens = group.generators();
        if gens.len() != gen_mats.len() {
            return Err(Error::Dimension(
                "one matrix per generator is required".into(),
            ));
        }
        let mut mats: Vec<Option<Mat>> = vec![None; group.order()];
        mats[group.identity()] = Some(Mat::identity(ring, rank));
        let mut queue = vec![group.identity()];
        let mut k = 0;
        while k < queue.len() {
            let a = queue[k];
            for (&g, gm) in gens.iter().zip(gen_mats) {
                let b = group.mul(a, g);
                if mats[b].is_none() {
                    mats[b] = Some(mats[a].as_ref().expect("visited").mul(gm)?);
                    queue.push(b);
                }
            }
            k += 1;
        }
        let mats = mats
            .into_iter()
            .map(|m| {
                m.ok_or_else(|| {
                    Error::Invalid(format!("generators do not generate {}", group.name()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        GModule::new(group, ring, mats)
    }

    fn check(&self) -> Result<()> {
        let g = &self.group;
        let n = g.order();
        let bad = |a: usize, b: usize| -> Result<bool> {
            Ok(self.mats[a].mul(&self.mats[b])? != self.mats[g.mul(a, b)])
        };
        if self.mats[g.identity()] != Mat::identity(&self.ring, self.rank) {
            return Err(Error::Invalid("identity does not act trivially".into()));
        }
        let mut pairs: Vec<(usize, usize)> = vec![];
        if n * n <= 4096 {
            pairs.extend((0..n).flat_map(|a| (0..n).map(move |b| (a, b))));
        } else {
            for &s in g.generators() {
                pairs.extend((0..n).map(|a| (a, s)));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(0x6d6f64);
            pairs.extend((0..512).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))));
        }
        for (a, b) in pairs {
            if bad(a, b)? {
                return Err(Error::Invalid(format!(
                    "action of {} is not a homomorphism",
                    g.name()
                )));
            }
        }
        Ok(())
    }

    /// The trivial module `R^n`.
    pub fn trivial(group: &FiniteGroup, ring: &Ring, n: usize) -> GModule {
        let id = Mat::identity(ring, n);
        GModule {
            group: group.clone(),
            ring: ring.clone(),
            rank: n,
            mats: Arc::new(vec![id; group.order()]),
        }
    }

    /// A one-dimensional module given by the value of a character on each element.
    pub fn character(group: &FiniteGroup, ring: &Ring, values: &[Elem]) -> Result<GModule> {
        let mats = values.iter().map(|&v| Mat::scalar(ring, 1, v)).collect();
        GModule::new(group, ring, mats)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// The matrix of `g`.
    pub fn mat(&self, g: usize) -> &Mat {
        &self.mats[g]
    }

    pub fn mats(&self) -> &[Mat] {
        &self.mats
    }

    /// `g · v`.
    pub fn act(&self, g: usize, v: &[Elem]) -> Vec<Elem> {
        self.mats[g].apply(v).expect("dimensions checked")
    }

    fn map_mats(&self, ring: &Ring, f: impl Fn(&Mat) -> Result<Mat>) -> Result<GModule> {
        let mats = self.mats.iter().map(f).collect::<Result<Vec<_>>>()?;
        let rank = mats.first().map_or(0, |m| m.rows());
        Ok(GModule {
            group: self.group.clone(),
            ring: ring.clone(),
            rank,
            mats: Arc::new(mats),
        })
    }

    /// The Frobenius twist: entrywise Frobenius on every matrix.
    pub fn frobenius_twist(&self) -> GModule {
        self.map_mats(&self.ring, |m| Ok(m.frobenius()))
            .expect("entrywise map")
    }

    /// The contragredient module, `g ↦ ρ(g^{-1})^T`.
    pub fn dual(&self) -> GModule {
        let g = self.group.clone();
        let mats = (0..g.order())
            .map(|a| self.mats[g.inv(a)].transpose())
            .collect();
        GModule {
            group: g,
            ring: self.ring.clone(),
            rank: self.rank,
            mats: Arc::new(mats),
        }
    }

    /// `self ⊗ other` with basis `e_i ⊗ f_j` at index `i * other.rank + j`.
    pub fn tensor(&self, other: &GModule) -> Result<GModule> {
        self.same_group(other)?;
        let mats = (0..self.group.order())
            .map(|a| self.mats[a].kron(&other.mats[a]))
            .collect::<Result<Vec<_>>>()?;
        Ok(GModule {
            group: self.group.clone(),
            ring: self.ring.clone(),
            rank: self.rank * other.rank,
            mats: Arc::new(mats),
        })
    }

    /// `Hom(src, dst)` with `g · f = ρ_dst(g) f ρ_src(g)^{-1}`; the entry `f[i][j]`
    /// (row `i` of `dst`, column `j` of `src`) sits at index `i * src.rank + j`.
    pub fn hom(src: &GModule, dst: &GModule) -> Result<GModule> {
        src.same_group(dst)?;
        let g = &src.group;
        let mats = (0..g.order())
            .map(|a| dst.mats[a].kron(&src.mats[g.inv(a)].transpose()))
            .collect::<Result<Vec<_>>>()?;
        Ok(GModule {
            group: g.clone(),
            ring: src.ring.clone(),
            rank: src.rank * dst.rank,
            mats: Arc::new(mats),
        })
    }

    fn same_group(&self, other: &GModule) -> Result<()> {
        if self.group.order() != other.group.order() || self.ring != other.ring {
            return Err(Error::Invalid(
                "modules over different groups or rings".into(),
            ));
        }
        Ok(())
    }

    /// Restriction along an embedding `H -> G` given by element indices.
    pub fn restrict(&self, sub: &FiniteGroup, embedding: &[usize]) -> Result<GModule> {
        let mats = embedding.iter().map(|&g| self.mats[g].clone()).collect();
        GModule::new(sub, &self.ring, mats)
    }

    /// Change of coefficients by an entrywise ring map (e.g. reduction mod `p`).
    pub fn map_ring(&self, target: &Ring, f: impl Fn(Elem) -> Elem) -> GModule {
        self.map_mats(target, |m| Ok(m.map_to(target, &f)))
            .expect("entrywise map")
    }

    /// Reduction modulo `p` to the residue field.
    pub fn reduce_mod_p(&self) -> Result<GModule> {
        let k = self.ring.residue_field()?;
        let r = self.ring.clone();
        Ok(self.map_ring(&k, move |x| r.reduce_mod_p_elem(x)))
    }

    /// Check that `self` reduces modulo `p` to `m`.
    pub fn reduces_to(&self, m: &GModule) -> Result<bool> {
        let red = self.reduce_mod_p()?;
        Ok(red.ring == m.ring
            && red.rank == m.rank
            && red.mats.iter().zip(m.mats.iter()).all(|(a, b)| a == b))
    }

    /// A basis of the invariants `M^G` (columns), computed over a field.
    pub fn invariants(&self) -> Result<Mat> {
        invariant_basis(
            &self.ring,
            self.rank,
            self.group.generators().iter().map(|&g| &self.mats[g]),
        )
    }
}

/// Columns spanning `{v : A v = v for all A}` over a field.
pub fn invariant_basis<'a>(
    ring: &Ring,
    rank: usize,
    ops: impl IntoIterator<Item = &'a Mat>,
) -> Result<Mat> {
    let id = Mat::identity(ring, rank);
    let mut stacked = Mat::zeros(ring, 0, rank);
    for a in ops {
        stacked = stacked.vstack(&a.sub(&id)?)?;
    }
    Ok(echelon(&stacked)?.kernel)
}

/// All `X` with `X S_k = T_k X` for paired operator lists (a basis of the solution space).
pub fn intertwiners(src: &[Mat], dst: &[Mat]) -> Result<Vec<Mat>> {
    if src.len() != dst.len() || src.is_empty() {
        return Err(Error::Dimension(
            "paired operator lists of equal nonzero length are required".into(),
        ));
    }
    let ring = src[0].ring().clone();
    let (n, m) = (src[0].rows(), dst[0].rows());
    // Unknown X is m x n, index i * n + j.
    let mut eqs = Mat::zeros(&ring, 0, m * n);
    for (s, t) in src.iter().zip(dst) {
        let mut block = Mat::zeros(&ring, m * n, m * n);
        for i in 0..m {
            for j in 0..n {
                let row = i * n + j;
                // (X S)[i][j] = Σ_k X[i][k] S[k][j]
                for k in 0..n {
                    block.add_to(row, i * n + k, s.get(k, j));
                }
                // -(T X)[i][j] = -Σ_k T[i][k] X[k][j]
                for k in 0..m {
                    block.add_to(row, k * n + j, ring.neg(t.get(i, k)));
                }
            }
        }
        eqs = eqs.vstack(&block)?;
    }
    let ker = echelon(&eqs)?.kernel;
    Ok((0..ker.cols())
        .map(|c| {
            let v = ker.col(c);
            Mat::from_rows(
                &ring,
                m,
                n,
                (0..m).map(|i| v[i * n..(i + 1) * n].to_vec()).collect(),
            )
            .expect("shape")
        })
        .collect())
}

/// `Z^m` acting on `R^rank` through commuting invertible matrices `ρ(e_1), .., ρ(e_m)`.
#[derive(Clone, Debug)]
pub struct LatticeModule {
    ring: Ring,
    rank: usize,
    gens: Vec<Mat>,
}

impl LatticeModule {
    pub fn new(ring: &Ring, rank: usize, gens: Vec<Mat>) -> Result<LatticeModule> {
        for g in &gens {
            if g.rows() != rank || g.cols() != rank {
                return Err(Error::Dimension(format!("generator is not {rank}x{rank}")));
            }
            g.inverse()
                .map_err(|_| Error::NotInvertible("lattice generator is not invertible".into()))?;
        }
        for (i, a) in gens.iter().enumerate() {
            for b in &gens[i + 1..] {
                if a.mul(b)? != b.mul(a)? {
                    return Err(Error::Invalid("lattice generators do not commute".into()));
                }
            }
        }
        Ok(LatticeModule {
            ring: ring.clone(),
            rank,
            gens,
        })
    }

    /// The trivial module `R^n` for `Z^m`.
    pub fn trivial(ring: &Ring, m: usize, n: usize) -> LatticeModule {
        LatticeModule {
            ring: ring.clone(),
            rank: n,
            gens: vec![Mat::identity(ring, n); m],
        }
    }

    /// A character of `Z^m` with the given values on the basis vectors.
    pub fn character(ring: &Ring, values: &[Elem]) -> Result<LatticeModule> {
        LatticeModule::new(
            ring,
            1,
            values.iter().map(|&v| Mat::scalar(ring, 1, v)).collect(),
        )
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number `m` of lattice generators.
    pub fn lattice_rank(&self) -> usize {
        self.gens.len()
    }

    pub fn generator(&self, j: usize) -> &Mat {
        &self.gens[j]
    }
}

/// Index of each element of a list of distinct matrices.
pub(crate) fn matrix_index(mats: &[Mat]) -> HashMap<Vec<Elem>, usize> {
    mats.iter()
        .enumerate()
        .map(|(i, m)| (m.entries().to_vec(), i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcoh::MatrixGroup;

    fn sl2_f2() -> MatrixGroup {
        let k = Ring::fp(2).unwrap();
        let a = Mat::from_ints(&k, &[vec![1, 1], vec![0, 1]]);
        let b = Mat::from_ints(&k, &[vec![1, 0], vec![1, 1]]);
        MatrixGroup::generate("SL2(F2)", &k, 2, &[a, b], 100).unwrap()
    }

    #[test]
    fn natural_module_and_constructions() {
        let g = sl2_f2();
        let k = Ring::fp(2).unwrap();
        let v = GModule::new(&g.group, &k, g.matrices.clone()).unwrap();
        assert_eq!(v.invariants().unwrap().cols(), 0);
        let h = GModule::hom(&v, &v).unwrap();
        // Hom_G(V, V) contains the identity.
        let inv = h.invariants().unwrap();
        assert!(inv.cols() >= 1);
        let dual = v.dual();
        let t = v.tensor(&dual).unwrap();
        assert_eq!(t.rank(), 4);
        let ints = intertwiners(v.mats(), v.mats()).unwrap();
        assert_eq!(ints.len(), inv.cols());
    }

    #[test]
    fn from_generators_matches_elements() {
        let g = sl2_f2();
        let k = Ring::fp(2).unwrap();
        let gens: Vec<Mat> = g
            .group
            .generators()
            .iter()
            .map(|&i| g.matrices[i].clone())
            .collect();
        let v = GModule::from_generators(&g.group, &k, 2, &gens).unwrap();
        assert!(v.mats().iter().zip(&g.matrices).all(|(a, b)| a == b));
    }

    #[test]
    fn rejects_non_homomorphism() {
        let c2 = FiniteGroup::cyclic(2);
        let k = Ring::fp(3).unwrap();
        assert!(GModule::character(&c2, &k, &[1, 2]).is_ok());
        assert!(GModule::character(&c2, &k, &[1, 1]).is_ok());
        let k5 = Ring::fp(5).unwrap();
        assert!(GModule::character(&c2, &k5, &[1, 2]).is_err());
    }

    #[test]
    fn lattice_module_checks() {
        let k = Ring::fp(3).unwrap();
        let a = Mat::from_ints(&k, &[vec![1, 1], vec![0, 1]]);
        let b = Mat::from_ints(&k, &[vec![1, 0], vec![1, 1]]);
        assert!(LatticeModule::new(&k, 2, vec![a.clone(), a.clone()]).is_ok());
        assert!(LatticeModule::new(&k, 2, vec![a, b]).is_err());
        assert!(LatticeModule::character(&k, &[0]).is_err());
    }
}
