//! Equivariant complexes and the extension class between two cohomology groups.

use super::{BarComplex, FiniteGroup, GModule};
use crate::cx::{CochainComplex, CohomologySlice};
use crate::ralg::{echelon, Elem, Mat};
use crate::{Error, Result};
use rand::Rng;

/// A cochain complex over a field with a group acting degreewise by chain maps.
#[derive(Clone, Debug)]
pub struct EquivariantComplex {
    pub complex: CochainComplex,
    /// The action on `C^j` is `actions[j - lo]`.
    pub actions: Vec<GModule>,
}

impl EquivariantComplex {
    /// Build from one module per degree; commutation with `d` is checked exactly.
    pub fn new(complex: CochainComplex, actions: Vec<GModule>) -> Result<EquivariantComplex> {
        let n = (complex.hi() - complex.lo() + 1) as usize;
        if actions.len() != n {
            return Err(Error::Dimension(format!(
                "{} actions for {n} degrees",
                actions.len()
            )));
        }
        for (k, m) in actions.iter().enumerate() {
            if m.rank() != complex.rank(complex.lo() + k as i64) || m.ring() != complex.ring() {
                return Err(Error::Dimension(format!(
                    "action in degree {} has the wrong size",
                    complex.lo() + k as i64
                )));
            }
        }
        let g = actions[0].group().clone();
        for k in 0..n.saturating_sub(1) {
            let d = complex.d(complex.lo() + k as i64);
            for a in 0..g.order() {
                if d.mul(actions[k].mat(a))? != actions[k + 1].mat(a).mul(&d)? {
                    return Err(Error::Invalid(format!(
                        "action does not commute with d in degree {}",
                        complex.lo() + k as i64
                    )));
                }
            }
        }
        Ok(EquivariantComplex { complex, actions })
    }

    /// Build from a function giving the matrices of each element in every degree.
    pub fn from_fn(
        complex: CochainComplex,
        group: &FiniteGroup,
        mut f: impl FnMut(usize) -> Result<Vec<Mat>>,
    ) -> Result<EquivariantComplex> {
        let n = (complex.hi() - complex.lo() + 1) as usize;
        let mut per_degree: Vec<Vec<Mat>> = vec![vec![]; n];
        for a in 0..group.order() {
            let mats = f(a)?;
            if mats.len() != n {
                return Err(Error::Dimension(format!(
                    "{} matrices for {n} degrees",
                    mats.len()
                )));
            }
            for (k, m) in mats.into_iter().enumerate() {
                per_degree[k].push(m);
            }
        }
        let ring = complex.ring().clone();
        let actions = per_degree
            .into_iter()
            .map(|mats| GModule::new(group, &ring, mats))
            .collect::<Result<_>>()?;
        EquivariantComplex::new(complex, actions)
    }

    pub fn group(&self) -> &FiniteGroup {
        self.actions[0].group()
    }

    /// The module acting on `C^j`.
    pub fn action(&self, j: i64) -> &GModule {
        &self.actions[(j - self.complex.lo()) as usize]
    }

    /// `H^j` with its induced action, in the coordinates of the slice basis.
    pub fn cohomology_module(&self, j: i64) -> Result<(CohomologySlice, GModule)> {
        let h = self.complex.cohomology(j)?;
        let act = self.action(j);
        let mats = act
            .mats()
            .iter()
            .map(|m| induced_on_cohomology(&h, m))
            .collect::<Result<Vec<_>>>()?;
        let module = GModule::new(self.group(), self.complex.ring(), mats)?;
        Ok((h, module))
    }
}

/// The matrix of the map on `H` induced by a chain-level operator on the same degree.
pub fn induced_on_cohomology(h: &CohomologySlice, op: &Mat) -> Result<Mat> {
    let cols = h
        .basis
        .iter()
        .map(|z| h.coordinates(&op.apply(z)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(Mat::from_columns(h.ring(), h.dim(), &cols))
}

/// A linear section of `d` on its image: `x = s(y)` with `d x = y` for `y ∈ im d`.
struct Section {
    pivots: Vec<usize>,
    left: Mat,
    cols: usize,
}

impl Section {
    fn new(d: &Mat) -> Result<Section> {
        let e = echelon(d)?;
        let all: Vec<usize> = (0..d.rows()).collect();
        let img = d.select(&all, &e.pivots);
        let (_, left) = super::semidirect::basis_and_left_inverse(img)?;
        Ok(Section {
            pivots: e.pivots,
            left,
            cols: d.cols(),
        })
    }

    fn apply(&self, y: &[Elem]) -> Result<Vec<Elem>> {
        let c = self.left.apply(y)?;
        let mut x = vec![0; self.cols];
        for (&p, v) in self.pivots.iter().zip(c) {
            x[p] = v;
        }
        Ok(x)
    }
}

/// An extension class in `H^{b-a+1}(G, Hom(B, A))`.
#[derive(Clone, Debug)]
pub struct HyperextClass {
    pub degree: usize,
    /// `Hom(B, A)` in slice coordinates.
    pub coefficients: GModule,
    /// Normalized bar cocycle with values in `coefficients`.
    pub cocycle: Vec<Elem>,
    pub a: (CohomologySlice, GModule),
    pub b: (CohomologySlice, GModule),
}

impl HyperextClass {
    pub fn bar(&self) -> BarComplex {
        BarComplex::new(&self.coefficients)
    }

    pub fn is_zero(&self) -> Result<bool> {
        self.bar().is_coboundary(self.degree, &self.cocycle)
    }
}

/// The class of `τ^{≥a} τ^{≤b} D` in `H^{b-a+1}(G, Hom(H^b, H^a))` for an
/// equivariant complex `D` with `H^j(D) = 0` for `a < j < b`.
///
/// A linear lift `σ_0 : H^b -> Z^b` is chosen; its equivariance defect
/// `δσ_k ∈ C^{k+1}(G, Hom(H^b, B^{b-k}))` is lifted through `d` to
/// `σ_{k+1} ∈ C^{k+1}(G, Hom(H^b, D^{b-k-1}))`, and the defect `δσ_{b-a}`
/// projected to `H^a` is the class. With `rng`, all choices are randomized.
pub fn hyperext_class<R: Rng>(
    d: &EquivariantComplex,
    a: i64,
    b: i64,
    mut rng: Option<&mut R>,
) -> Result<HyperextClass> {
    let c = &d.complex;
    if !(c.lo() <= a && a < b && b <= c.hi()) {
        return Err(Error::DegreeOutOfRange {
            degree: b,
            lo: c.lo(),
            hi: c.hi(),
        });
    }
    let ring = c.ring().clone();
    if !ring.is_field() {
        return Err(Error::NotAField(ring.name()));
    }
    for j in a + 1..b {
        if c.cohomology(j)?.dim() != 0 {
            return Err(Error::Invalid(format!("extra cohomology in degree {j}")));
        }
    }
    let (ha, ma) = d.cohomology_module(a)?;
    let (hb, mb) = d.cohomology_module(b)?;
    let nb = hb.dim();
    // σ_0 as a cochain in C^0(G, Hom(B, D^b)), index i * nb + l.
    let db = c.rank(b);
    let mut sigma = vec![0; db * nb];
    let dprev = c.d(b - 1);
    for (l, z) in hb.basis.iter().enumerate() {
        let mut z = z.clone();
        if let Some(r) = rng.as_deref_mut() {
            let w: Vec<Elem> = (0..c.rank(b - 1)).map(|_| ring.random(r)).collect();
            for (x, y) in z.iter_mut().zip(dprev.apply(&w)?) {
                *x = ring.add(*x, y);
            }
        }
        for i in 0..db {
            sigma[i * nb + l] = z[i];
        }
    }
    let steps = (b - a) as usize;
    for k in 0..=steps {
        let j = b - k as i64;
        let hom = GModule::hom(&mb, d.action(j))?;
        let delta = BarComplex::new(&hom).apply_d(k, &sigma)?;
        let dj = c.rank(j);
        if j == a {
            let coeffs = GModule::hom(&mb, &ma)?;
            let na = ha.dim();
            let tuples = delta.len() / (dj * nb).max(1);
            let mut out = vec![0; tuples * na * nb];
            if dj * nb > 0 {
                for t in 0..tuples {
                    let blk = &delta[t * dj * nb..(t + 1) * dj * nb];
                    for l in 0..nb {
                        let y: Vec<Elem> = (0..dj).map(|i| blk[i * nb + l]).collect();
                        let co = ha.coordinates(&y)?;
                        for (i, v) in co.into_iter().enumerate() {
                            out[t * na * nb + i * nb + l] = v;
                        }
                    }
                }
            }
            return Ok(HyperextClass {
                degree: k + 1,
                coefficients: coeffs,
                cocycle: out,
                a: (ha, ma),
                b: (hb, mb),
            });
        }
        let dm = c.d(j - 1);
        let sec = Section::new(&dm)?;
        let kernel = if rng.is_some() {
            echelon(&dm)?.kernel
        } else {
            Mat::zeros(&ring, c.rank(j - 1), 0)
        };
        let dl = c.rank(j - 1);
        let tuples = delta.len() / (dj * nb).max(1);
        let mut next = vec![0; tuples * dl * nb];
        for t in 0..tuples {
            let blk = &delta[t * dj * nb..(t + 1) * dj * nb];
            for l in 0..nb {
                let y: Vec<Elem> = (0..dj).map(|i| blk[i * nb + l]).collect();
                let mut x = sec.apply(&y)?;
                if dm.apply(&x)? != y {
                    return Err(Error::Internal(format!(
                        "staircase step {k} is not solvable"
                    )));
                }
                if let Some(r) = rng.as_deref_mut() {
                    let coef: Vec<Elem> = (0..kernel.cols()).map(|_| ring.random(r)).collect();
                    for (xi, v) in x.iter_mut().zip(kernel.apply(&coef)?) {
                        *xi = ring.add(*xi, v);
                    }
                }
                for (i, v) in x.into_iter().enumerate() {
                    next[t * dl * nb + i * nb + l] = v;
                }
            }
        }
        sigma = next;
    }
    unreachable!("loop returns at j = a")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ralg::Ring;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// `k[C_p] --(g-1)--> k[C_p]` has `H^0 = H^1 = k`; its class generates `H^2(C_p, k)`.
    fn group_algebra_complex(p: usize) -> EquivariantComplex {
        let k = Ring::fp(p as u64).unwrap();
        let g = FiniteGroup::cyclic(p);
        let perm = |s: usize| {
            let mut m = Mat::zeros(&k, p, p);
            for i in 0..p {
                m.set((i + s) % p, i, 1);
            }
            m
        };
        let d = perm(1).sub(&Mat::identity(&k, p)).unwrap();
        let c = CochainComplex::new(&k, 0, vec![p, p], vec![d]).unwrap();
        EquivariantComplex::from_fn(c, &g, |s| Ok(vec![perm(s), perm(s)])).unwrap()
    }

    #[test]
    fn regular_representation_gives_nonzero_class() {
        for p in [2, 3] {
            let d = group_algebra_complex(p);
            let cls = hyperext_class::<ChaCha8Rng>(&d, 0, 1, None).unwrap();
            assert_eq!(cls.degree, 2);
            assert!(!cls.is_zero().unwrap());
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for _ in 0..10 {
                let other = hyperext_class(&d, 0, 1, Some(&mut rng)).unwrap();
                assert!(cls
                    .bar()
                    .proportional(2, &cls.cocycle, &other.cocycle)
                    .unwrap());
                let diff: Vec<Elem> = cls
                    .cocycle
                    .iter()
                    .zip(&other.cocycle)
                    .map(|(&x, &y)| cls.coefficients.ring().sub(x, y))
                    .collect();
                assert!(cls.bar().is_coboundary(2, &diff).unwrap());
            }
        }
    }

    #[test]
    fn trivial_group_gives_zero() {
        let k = Ring::fp(3).unwrap();
        let c = CochainComplex::new(&k, 0, vec![2, 1], vec![Mat::from_ints(&k, &[vec![0, 0]])])
            .unwrap();
        let d = EquivariantComplex::from_fn(c, &FiniteGroup::trivial(), |_| {
            Ok(vec![Mat::identity(&k, 2), Mat::identity(&k, 1)])
        })
        .unwrap();
        assert!(hyperext_class::<ChaCha8Rng>(&d, 0, 1, None)
            .unwrap()
            .is_zero()
            .unwrap());
    }

    #[test]
    fn split_complex_gives_zero() {
        // k ⊕ k[-1] with trivial C_3-action.
        let k = Ring::fp(3).unwrap();
        let c = CochainComplex::new(&k, 0, vec![1, 1], vec![Mat::zeros(&k, 1, 1)]).unwrap();
        let d = EquivariantComplex::from_fn(c, &FiniteGroup::cyclic(3), |_| {
            Ok(vec![Mat::identity(&k, 1); 2])
        })
        .unwrap();
        assert!(hyperext_class::<ChaCha8Rng>(&d, 0, 1, None)
            .unwrap()
            .is_zero()
            .unwrap());
    }
}
