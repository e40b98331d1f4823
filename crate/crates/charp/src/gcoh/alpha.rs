//! The class `α(V) ∈ H^{p-1}(G, Hom(Λ^p V, V^{(1)}))` for groups acting on a
//! `p`-dimensional space, and its restriction to Borel subgroups.

use super::{
    borel_character_sqrt5, borel_natural_sqrt5, borel_presentation_sqrt5, borel_twisted_sqrt5,
    galois, hyperext_class, induced_on_cohomology, intertwiners, semidirect_reduce,
    sqrt5_ring_mod2, sqrt5_ring_mod4, BarComplex, EquivariantComplex, FiniteGroup, FoxComplex,
    GModule, InvariantComplex, MatrixGroup,
};
use crate::cx::{CochainComplex, ComplexMap};
use crate::dk::{
    de_rham, de_rham_action, derived_power_full, derived_power_map, PolyFunctor, DEFAULT_LEVEL_CAP,
};
use crate::ralg::{Elem, Mat, Ring, SpMat};
use crate::{Error, Result};
use rand::Rng;
use std::collections::HashMap;

/// Which complex realizes `τ^{≥2} S^p(V[-1])`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlphaModel {
    /// The de Rham complex `Ω^{≤p-1}_p`, with `V^{(1)}` in degree 1 and `Λ^p V` in degree `p - 1`.
    DeRham,
    /// The derived power `Sym^p(V[-1])`, with `V^{(1)}` in degree 2 and `Λ^p V` in degree `p`.
    Sym,
}

/// A cocycle representing `α(V)` restricted to a group.
#[derive(Clone, Debug)]
pub struct AlphaClass {
    pub degree: usize,
    /// `Hom(Λ^p V, V^{(1)})`.
    pub coefficients: GModule,
    pub cocycle: Vec<Elem>,
}

impl AlphaClass {
    pub fn bar(&self) -> BarComplex {
        BarComplex::new(&self.coefficients)
    }

    pub fn is_zero(&self) -> Result<bool> {
        self.bar().is_coboundary(self.degree, &self.cocycle)
    }

    /// Whether `self` and `other` are unit multiples of each other in cohomology.
    pub fn proportional(&self, other: &AlphaClass) -> Result<bool> {
        self.bar()
            .proportional(self.degree, &self.cocycle, &other.cocycle)
    }
}

/// The determinant, computed as `Λ^d`.
pub fn determinant(g: &Mat) -> Elem {
    let d = g.rows();
    PolyFunctor::ext(d)
        .apply(&SpMat::from_dense(g))
        .to_dense()
        .get(0, 0)
}

fn natural_module(g: &MatrixGroup, ring: &Ring) -> Result<GModule> {
    GModule::new(&g.group, ring, g.matrices.clone())
}

fn det_module(g: &MatrixGroup, ring: &Ring) -> Result<GModule> {
    GModule::character(
        &g.group,
        ring,
        &g.matrices.iter().map(determinant).collect::<Vec<_>>(),
    )
}

/// `Hom(Λ^p V, V^{(1)})` for the natural module of a matrix group.
pub fn alpha_coefficients(g: &MatrixGroup, ring: &Ring) -> Result<GModule> {
    GModule::hom(
        &det_module(g, ring)?,
        &natural_module(g, ring)?.frobenius_twist(),
    )
}

/// For `p = 2` and `g ∈ GL_2`: `g s g^{-1} - s` applied to `e_1 ∧ e_2`, where
/// `s(e_1 ∧ e_2) = e_1 e_2` splits `0 -> V^{(1)} -> S^2 V -> Λ^2 V -> 0`.
/// Coordinates are those of `e_1^2, e_2^2`.
pub fn alpha2_value(g: &Mat) -> Result<Vec<Elem>> {
    let r = g.ring().clone();
    if r.p() != 2 || g.rows() != 2 || g.cols() != 2 {
        return Err(Error::Invalid(
            "the quadratic splitting needs 2x2 matrices in characteristic 2".into(),
        ));
    }
    let s2 = PolyFunctor::sym(2).apply(&SpMat::from_dense(g)).to_dense();
    let basis = PolyFunctor::sym(2).basis(2);
    let pos = |t: &[u32]| basis.iter().position(|b| b == t).expect("monomial");
    let (i11, i12, i22) = (pos(&[0, 0]), pos(&[0, 1]), pos(&[1, 1]));
    let dinv = r.inv(determinant(g))?;
    let col: Vec<Elem> = (0..3).map(|i| r.mul(dinv, s2.get(i, i12))).collect();
    if r.sub(col[i12], 1) != 0 {
        return Err(Error::Internal(
            "splitting defect has a component outside V^(1)".into(),
        ));
    }
    Ok(vec![col[i11], col[i22]])
}

/// `α(V)` for `p = 2` from the quadratic extension `0 -> V^{(1)} -> S^2 V -> Λ^2 V -> 0`.
pub fn alpha_p2(g: &MatrixGroup, ring: &Ring) -> Result<AlphaClass> {
    let coefficients = alpha_coefficients(g, ring)?;
    let bar = BarComplex::new(&coefficients);
    let mut cocycle = vec![0; bar.dim(1)];
    for (a, m) in g.matrices.iter().enumerate() {
        if let Some(t) = bar.encode(&[a]) {
            cocycle[2 * t..2 * t + 2].copy_from_slice(&alpha2_value(m)?);
        }
    }
    if !bar.is_cocycle(1, &cocycle)? {
        return Err(Error::Internal("splitting defect is not a cocycle".into()));
    }
    Ok(AlphaClass {
        degree: 1,
        coefficients,
        cocycle,
    })
}

/// The equivariant complex representing `τ^{≥2} S^p(V[-1])` in the given model,
/// the matrices by which `extra` acts on it, and the degrees of `V^{(1)}` and `Λ^p V`.
fn model_complex(
    g: &MatrixGroup,
    ring: &Ring,
    model: AlphaModel,
    extra: &[Mat],
) -> Result<(EquivariantComplex, Vec<Vec<Mat>>, i64, i64)> {
    let p = ring.p() as usize;
    match model {
        AlphaModel::DeRham => {
            let full = de_rham(ring, p, p)?;
            let top = (p - 1) as i64;
            let c = full.brutal(0, top);
            let act = |m: &Mat| -> Result<Vec<Mat>> {
                let mut v = de_rham_action(m, p)?;
                v.truncate(p);
                Ok(v)
            };
            let eq = EquivariantComplex::from_fn(c, &g.group, |a| act(&g.matrices[a]))?;
            let ex = extra.iter().map(act).collect::<Result<_>>()?;
            Ok((eq, ex, 1, top))
        }
        AlphaModel::Sym => {
            let v = CochainComplex::module(ring, p, 1);
            let dp = derived_power_full(PolyFunctor::sym(p), &v, p, DEFAULT_LEVEL_CAP)?;
            let c = dp.complex().clone();
            let act = |m: &Mat| -> Result<Vec<Mat>> {
                let f = derived_power_map(&dp, &ComplexMap::new(&v, &v, vec![(1, m.clone())])?)?;
                Ok((c.lo()..=c.hi()).map(|i| f.at(i)).collect())
            };
            let eq = EquivariantComplex::from_fn(c.clone(), &g.group, |a| act(&g.matrices[a]))?;
            let ex = extra.iter().map(act).collect::<Result<_>>()?;
            Ok((eq, ex, 2, p as i64))
        }
    }
}

/// The unique (up to scalar) isomorphism `src -> dst` commuting with paired operators.
fn unique_iso(src: &[Mat], dst: &[Mat], what: &str) -> Result<Mat> {
    let xs = intertwiners(src, dst)?;
    if xs.len() != 1 {
        return Err(Error::Invalid(format!(
            "{what}: {} independent intertwiners, expected 1",
            xs.len()
        )));
    }
    xs[0].inverse()?;
    Ok(xs[0].clone())
}

/// `α(V)` for the natural module of a group of `p x p` matrices over `F_q`.
///
/// For `p = 2` this is the class of the quadratic extension. For `p > 2` the
/// staircase is run on the chosen model; `V^{(1)}` and `Λ^p V` are identified
/// with the cohomology of the model through the unique equivariant
/// isomorphisms, where `extra` are further matrices normalizing the group and
/// acting on the model (used to make these isomorphisms unique).
pub fn alpha_class<R: Rng>(
    g: &MatrixGroup,
    ring: &Ring,
    model: AlphaModel,
    extra: &[Mat],
    rng: Option<&mut R>,
) -> Result<AlphaClass> {
    if !ring.is_field() {
        return Err(Error::NotAField(ring.name()));
    }
    let p = ring.p() as usize;
    if g.matrices.first().map(|m| m.rows()) != Some(p) {
        return Err(Error::Dimension(format!(
            "α needs a {p}-dimensional representation"
        )));
    }
    if p == 2 {
        return alpha_p2(g, ring);
    }
    let (eq, extra_act, a, b) = model_complex(g, ring, model, extra)?;
    let cls = hyperext_class(&eq, a, b, rng)?;
    if cls.degree != p - 1 {
        return Err(Error::Internal(format!(
            "extension class in degree {}, expected {}",
            cls.degree,
            p - 1
        )));
    }
    let gens = g.group.generators();
    let twist = natural_module(g, ring)?.frobenius_twist();
    let det = det_module(g, ring)?;
    let side = |m: &GModule, ex: Vec<Mat>| -> Vec<Mat> {
        gens.iter().map(|&s| m.mat(s).clone()).chain(ex).collect()
    };
    let (ha, ma) = &cls.a;
    let (hb, mb) = &cls.b;
    let ex_a = extra_act
        .iter()
        .map(|v| induced_on_cohomology(ha, &v[(a - eq.complex.lo()) as usize]))
        .collect::<Result<Vec<_>>>()?;
    let ex_b = extra_act
        .iter()
        .map(|v| induced_on_cohomology(hb, &v[(b - eq.complex.lo()) as usize]))
        .collect::<Result<Vec<_>>>()?;
    let ex_f = extra.iter().map(|m| m.frobenius()).collect::<Vec<_>>();
    let ex_d = extra
        .iter()
        .map(|m| Mat::scalar(ring, 1, determinant(m)))
        .collect::<Vec<_>>();
    let x = unique_iso(&side(&twist, ex_f), &side(ma, ex_a), "V^(1) -> H^a")?;
    let y = unique_iso(&side(&det, ex_d), &side(mb, ex_b), "Λ^p V -> H^b")?;
    let xinv = x.inverse()?;
    let (na, nb) = (ha.dim(), hb.dim());
    let coefficients = alpha_coefficients(g, ring)?;
    let tuples = cls.cocycle.len() / (na * nb);
    let mut cocycle = Vec::with_capacity(tuples * p);
    for t in 0..tuples {
        let f = Mat::from_rows(
            ring,
            na,
            nb,
            cls.cocycle[t * na * nb..(t + 1) * na * nb]
                .chunks(nb)
                .map(|r| r.to_vec())
                .collect(),
        )?;
        cocycle.extend(xinv.mul(&f)?.mul(&y)?.entries().iter().copied());
    }
    Ok(AlphaClass {
        degree: p - 1,
        coefficients,
        cocycle,
    })
}

/// Generators of the unipotent radical `A_p(F_q)`: `[[1, a_2, .., a_p], [0, I]]`.
pub fn unipotent_generators(ring: &Ring, p: usize) -> Vec<Mat> {
    let mut out = vec![];
    for j in 1..p {
        for c in 0..ring.degree() {
            let mut coeffs = vec![0; c + 1];
            coeffs[c] = 1;
            let mut m = Mat::identity(ring, p);
            m.set(0, j, ring.from_coefficients(&coeffs));
            out.push(m);
        }
    }
    out
}

/// Generators of the diagonal torus `T_p(F_q)` of `SL_p`.
pub fn torus_generators(ring: &Ring, p: usize) -> Result<Vec<Mat>> {
    let w = ring.primitive_element()?;
    let winv = ring.inv(w)?;
    Ok((0..p - 1)
        .map(|i| {
            let mut m = Mat::identity(ring, p);
            m.set(i, i, w);
            m.set(i + 1, i + 1, winv);
            m
        })
        .collect())
}

/// `A_p(F_q)`, `T_p(F_q)` and `(T_p ⋉ A_p)(F_q)` as matrix groups.
pub fn borel_groups(ring: &Ring, p: usize) -> Result<(MatrixGroup, MatrixGroup, MatrixGroup)> {
    let (ag, tg) = (unipotent_generators(ring, p), torus_generators(ring, p)?);
    let a = MatrixGroup::generate("A", ring, p, &ag, 1 << 16)?;
    let t = MatrixGroup::generate("T", ring, p, &tg, 1 << 16)?;
    let all: Vec<Mat> = tg.iter().chain(&ag).cloned().collect();
    let b = MatrixGroup::generate("TA", ring, p, &all, 1 << 16)?;
    Ok((a, t, b))
}

/// The conjugation action `φ · a = φ a φ^{-1}` of one matrix group on another, as index tables.
pub fn conjugation_action(outer: &MatrixGroup, inner: &MatrixGroup) -> Result<Vec<Vec<usize>>> {
    let index: HashMap<Vec<Elem>, usize> = super::module::matrix_index(&inner.matrices);
    outer
        .matrices
        .iter()
        .map(|f| {
            let finv = f.inverse()?;
            inner
                .matrices
                .iter()
                .map(|a| {
                    let c = f.mul(a)?.mul(&finv)?;
                    index
                        .get(c.entries())
                        .copied()
                        .ok_or_else(|| Error::Invalid("conjugation leaves the subgroup".into()))
                })
                .collect()
        })
        .collect()
}

/// `H^•(A_p(F_q), χ_1^k)^{T_p(F_q)}` up to `max_degree`, where `χ_1` is the first diagonal entry.
pub fn chi1_invariant_complex(
    a: &MatrixGroup,
    t: &MatrixGroup,
    ring: &Ring,
    k: u64,
    max_degree: usize,
) -> Result<InvariantComplex> {
    let inner = GModule::trivial(&a.group, ring, 1);
    let phi_mats = t
        .matrices
        .iter()
        .map(|m| Mat::scalar(ring, 1, ring.pow(m.get(0, 0), k)))
        .collect();
    let act = conjugation_action(t, a)?;
    semidirect_reduce(&inner, &t.group, |f, x| act[f][x], phi_mats, max_degree)
}

/// `V^{(1)}` restricted to `A_p(F_q)` with its `T_p(F_q)`-invariant complex.
pub fn twist_invariant_complex(
    a: &MatrixGroup,
    t: &MatrixGroup,
    ring: &Ring,
    max_degree: usize,
) -> Result<InvariantComplex> {
    let inner = natural_module(a, ring)?.frobenius_twist();
    let phi_mats = t.matrices.iter().map(|m| m.frobenius()).collect();
    let act = conjugation_action(t, a)?;
    semidirect_reduce(&inner, &t.group, |f, x| act[f][x], phi_mats, max_degree)
}

/// Push a cochain with values in `χ_1^p` along the inclusion `χ_1^p = F_q e_1 ⊂ V^{(1)}`.
pub fn push_to_twist(cochain: &[Elem], p: usize) -> Vec<Elem> {
    let mut out = vec![0; cochain.len() * p];
    for (i, &x) in cochain.iter().enumerate() {
        out[i * p] = x;
    }
    out
}

/// Result of comparing `α(V)|_A` with the `χ_1^p` line.
#[derive(Clone, Debug)]
pub struct Chi1Comparison {
    /// `dim H^{p-1}(A, χ_1^p)^T`.
    pub source_dim: usize,
    /// `dim H^{p-1}(A, V^{(1)})^T`.
    pub target_dim: usize,
    /// Whether the generator of the source maps to a nonzero class.
    pub image_nonzero: bool,
    /// The image of the generator as a cochain in `C^{p-1}(A, V^{(1)})`.
    pub image: Vec<Elem>,
}

/// `H^{p-1}(A_p, χ_1^p)^T -> H^{p-1}(A_p, V^{(1)})^T` on the generator.
pub fn chi1_comparison(a: &MatrixGroup, t: &MatrixGroup, ring: &Ring) -> Result<Chi1Comparison> {
    let p = ring.p() as usize;
    let n = p - 1;
    let src = chi1_invariant_complex(a, t, ring, p as u64, n)?;
    let tgt = twist_invariant_complex(a, t, ring, n)?;
    let hs = src.cohomology(n)?;
    let ht = tgt.cohomology(n)?;
    let (mut image_nonzero, mut image) = (false, vec![]);
    if hs.dim() == 1 {
        image = push_to_twist(&src.embed(n, &hs.basis[0])?, p);
        let coords = tgt.average(n, &image)?;
        image_nonzero = !ht.is_zero_class(&coords)?;
    }
    Ok(Chi1Comparison {
        source_dim: hs.dim(),
        target_dim: ht.dim(),
        image_nonzero,
        image,
    })
}

/// The subgroup of `SL_2(F_q)` generated by elementary matrices and the torus.
pub fn sl2(ring: &Ring) -> Result<MatrixGroup> {
    let mut gens = torus_generators(ring, 2)?;
    for c in 0..ring.degree() {
        let mut coeffs = vec![0; c + 1];
        coeffs[c] = 1;
        let x = ring.from_coefficients(&coeffs);
        gens.push(Mat::from_rows(ring, 2, 2, vec![vec![1, x], vec![0, 1]])?);
        gens.push(Mat::from_rows(ring, 2, 2, vec![vec![1, 0], vec![x, 1]])?);
    }
    MatrixGroup::generate("SL2", ring, 2, &gens, 1 << 16)
}

/// Restriction of a 1-cocycle on a finite group to a presented group mapping to it:
/// the values on the images of the generators.
pub fn restrict_to_generators(bar: &BarComplex, cocycle: &[Elem], images: &[usize]) -> Vec<Elem> {
    let r = bar.module().rank();
    let mut out = vec![0; images.len() * r];
    for (s, &g) in images.iter().enumerate() {
        if let Some(t) = bar.encode(&[g]) {
            out[s * r..(s + 1) * r].copy_from_slice(&cocycle[t * r..(t + 1) * r]);
        }
    }
    out
}

/// Keep the identity group at hand for degenerate inputs.
pub fn trivial_matrix_group(ring: &Ring, p: usize) -> MatrixGroup {
    MatrixGroup {
        group: FiniteGroup::trivial(),
        matrices: vec![Mat::identity(ring, p)],
    }
}

/// The `χ̃_1^{(1)}` character of the integral Borel group over `O_F / 4`:
/// `t ↦ σ(ε)`, `z ↦ -1`, trivial on `A`.
pub fn borel_twisted_character_sqrt5(ring: &Ring) -> Result<Vec<Mat>> {
    Ok(borel_character_sqrt5(ring, 1)?
        .iter()
        .map(|m| m.map(|x| galois(ring, x)))
        .collect())
}

/// The facts about `Γ = (T_2 ⋉ A_2)(O_F)`, `F = Q(√5)`, behind the nonvanishing
/// of `Bock(α(V))` in `H^2(Γ, V^{(1)})`.
#[derive(Clone, Debug)]
pub struct IntegralChain {
    /// `dim H^0(Γ, χ_1^2)` and `dim H^0(Γ, χ_1^{-2})`.
    pub h0_chi: (usize, usize),
    /// `dim H^1(Γ, χ_1^{-2})`.
    pub h1_chi2: usize,
    /// Rank of `H^1((T ⋉ A)(F_4), χ_1^2) -> H^1(Γ, χ_1^2)` and the source dimension.
    pub restriction: (usize, usize),
    /// Composition length of `H^1(Γ, χ̃_1^{(1)})` over `O_F / 4` and whether it is killed by 2.
    pub h1_lift: (u64, bool),
    /// Composition length of `H^1(Γ, Ṽ^{(1)})` over `O_F / 4` and whether it is killed by 2.
    pub h1_twist_lift: (u64, bool),
    /// `α(V)|_Γ ≠ 0` in `H^1(Γ, V^{(1)})`.
    pub alpha_nonzero: bool,
    /// `Bock(α(V)|_Γ) ≠ 0` in `H^2(Γ, V^{(1)})`.
    pub bock_nonzero: bool,
}

/// Compute [`IntegralChain`] with Fox calculus on the presentation of `Γ`.
pub fn integral_chain_p2() -> Result<IntegralChain> {
    let pres = borel_presentation_sqrt5();
    let (k, w) = (sqrt5_ring_mod2()?, sqrt5_ring_mod4()?);
    let fox = |ring: &Ring, gens: Vec<Mat>| FoxComplex::new(&pres, ring, gens);
    let h0p = fox(&k, borel_character_sqrt5(&k, 2)?)?.cohomology(0)?.dim();
    let chim = fox(&k, borel_character_sqrt5(&k, -2)?)?;
    let h0m = chim.cohomology(0)?.dim();
    let h1_chi2 = chim.cohomology(1)?.dim();

    // Restriction from the finite Borel group along reduction mod 2.
    let (_, _, b) = borel_groups(&k, 2)?;
    let index = super::module::matrix_index(&b.matrices);
    let images: Vec<usize> = borel_natural_sqrt5(&k)?
        .iter()
        .map(|m| {
            index
                .get(m.entries())
                .copied()
                .ok_or_else(|| Error::Internal("generator does not reduce into B(F_4)".into()))
        })
        .collect::<Result<_>>()?;
    let chi = GModule::character(
        &b.group,
        &k,
        &b.matrices
            .iter()
            .map(|m| k.pow(m.get(0, 0), 2))
            .collect::<Vec<_>>(),
    )?;
    let bar = BarComplex::new(&chi);
    let hb = bar.cohomology(1)?;
    let fchi = fox(&k, borel_character_sqrt5(&k, 2)?)?;
    let hf = fchi.cohomology(1)?;
    let cols = hb
        .basis
        .iter()
        .map(|z| hf.coordinates(&restrict_to_generators(&bar, z, &images)))
        .collect::<Result<Vec<_>>>()?;
    let rank = Mat::from_columns(&k, hf.dim(), &cols).rank()?;

    let lift = fox(&w, borel_twisted_character_sqrt5(&w)?)?.cohomology(1)?;
    let h1_lift = (lift.structure.length(), lift.structure.is_p_torsion());

    let tw = fox(&k, borel_twisted_sqrt5(&k)?)?;
    let twl = fox(&w, borel_twisted_sqrt5(&w)?)?;
    let h = twl.cohomology(1)?;
    let h1_twist_lift = (h.structure.length(), h.structure.is_p_torsion());
    let alpha: Vec<Elem> = borel_natural_sqrt5(&k)?
        .iter()
        .map(alpha2_value)
        .collect::<Result<Vec<_>>>()?
        .concat();
    if !tw.complex.d(1).apply(&alpha)?.iter().all(|&x| x == 0) {
        return Err(Error::Internal("restricted α is not a cocycle".into()));
    }
    let alpha_nonzero = !tw.cohomology(1)?.is_zero_class(&alpha)?;
    let bock = tw.bockstein(&twl, &alpha)?;
    let bock_nonzero = !tw.cohomology(2)?.is_zero_class(&bock)?;
    Ok(IntegralChain {
        h0_chi: (h0p, h0m),
        h1_chi2,
        restriction: (rank, hb.dim()),
        h1_lift,
        h1_twist_lift,
        alpha_nonzero,
        bock_nonzero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quadratic_extension_on_sl2_f4_and_u2_f2() {
        let f4 = Ring::gf(2, 2).unwrap();
        let g = sl2(&f4).unwrap();
        assert_eq!(g.group.order(), 60);
        assert!(!alpha_p2(&g, &f4).unwrap().is_zero().unwrap());
        let f2 = Ring::fp(2).unwrap();
        let u = MatrixGroup::generate("U2", &f2, 2, &unipotent_generators(&f2, 2), 8).unwrap();
        assert_eq!(u.group.order(), 2);
        assert!(alpha_p2(&u, &f2).unwrap().is_zero().unwrap());
        let t = trivial_matrix_group(&f4, 2);
        assert!(alpha_p2(&t, &f4).unwrap().is_zero().unwrap());
    }

    #[test]
    fn quadratic_value_oracle() {
        // c(g) = det(g)^{-1} (ab, cd) for g = [[a, b], [c, d]].
        let f4 = Ring::gf(2, 2).unwrap();
        let w = f4.primitive_element().unwrap();
        let g = Mat::from_rows(&f4, 2, 2, vec![vec![w, 1], vec![w, 0]]).unwrap();
        let dinv = f4.inv(w).unwrap();
        assert_eq!(alpha2_value(&g).unwrap(), vec![f4.mul(dinv, w), 0]);
    }

    #[test]
    fn borel_group_orders() {
        let f9 = Ring::gf(3, 2).unwrap();
        let (a, t, _) = borel_groups(&f9, 3).unwrap();
        assert_eq!(a.group.order(), 81);
        assert_eq!(t.group.order(), 64);
        let f4 = Ring::gf(2, 2).unwrap();
        let (a, t, b) = borel_groups(&f4, 2).unwrap();
        assert_eq!(
            (a.group.order(), t.group.order(), b.group.order()),
            (4, 3, 12)
        );
    }

    #[test]
    fn chi1_invariant_line_over_f4() {
        let f4 = Ring::gf(2, 2).unwrap();
        let (a, t, _) = borel_groups(&f4, 2).unwrap();
        let c = chi1_invariant_complex(&a, &t, &f4, 2, 1).unwrap();
        assert_eq!(c.cohomology(1).unwrap().dim(), 1);
        let cmp = chi1_comparison(&a, &t, &f4).unwrap();
        assert_eq!(cmp.source_dim, 1);
        assert!(cmp.image_nonzero);
    }

    #[test]
    fn alpha_over_f3_borel_is_computable() {
        // Small case q = p: both models run and agree up to a scalar.
        let f3 = Ring::fp(3).unwrap();
        let (a, t, _) = borel_groups(&f3, 3).unwrap();
        let tg = torus_generators(&f3, 3).unwrap();
        let om = alpha_class::<ChaCha8Rng>(&a, &f3, AlphaModel::DeRham, &tg, None).unwrap();
        let sy = alpha_class::<ChaCha8Rng>(&a, &f3, AlphaModel::Sym, &tg, None).unwrap();
        assert_eq!(om.degree, 2);
        assert!(om.bar().is_cocycle(2, &om.cocycle).unwrap());
        assert!(om.proportional(&sy).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let again = alpha_class(&a, &f3, AlphaModel::DeRham, &tg, Some(&mut rng)).unwrap();
        assert!(om.proportional(&again).unwrap());
        assert_eq!(t.group.order(), 4);
    }

    #[test]
    fn integral_chain_over_sqrt5() {
        let c = integral_chain_p2().unwrap();
        assert_eq!(c.h0_chi, (0, 0));
        // At p = 2, χ_1^{-2} = χ_1 on T(F_4) and pairs with the Frobenius-linear
        // line of Hom(O_F, k) to a trivial weight.
        assert_eq!(c.h1_chi2, 1);
        assert_eq!(c.restriction.0, c.restriction.1);
        assert!(c.h1_lift.1);
        assert!(c.h1_twist_lift.1);
        assert!(c.alpha_nonzero);
        assert!(c.bock_nonzero);
    }
}
