//! Cosimplicial commutative algebras, their Frobenius, and the operations
//! `P^0`, `P^1` on cohomology together with the Witt vector Bockstein.
//!
//! Two families of algebras are provided: algebras of functions on a finite
//! simplicial set (nerves of finite groups, the simplicial circle, products),
//! and levelwise truncated symmetric algebras `Sym^{<=D}(K(C))`.
//!
//! Operations are computed from universal classes. A cocycle `x` of degree
//! `i` corresponds to a cosimplicial map `φ : K(R[-i]) -> A`; the operation is
//! the image of a universal class of `Sym^p(K(R[-i]))` under `m ∘ Sym^p(φ)`.
//! The universal `P^0` is the class of `Δ(g) = g^p`, and the universal `P^1`
//! is its Bockstein in the `Z/p^2` model.

use crate::cx::{CochainComplex, CohomologySlice, ComplexMap, Ses};
use crate::dk::{
    conormalize_full, dold_kan, Conormalized, CosimplicialModule, NormBasis, PolyFunctor,
};
use crate::gcoh::FiniteGroup;
use crate::ralg::{Elem, Ring, SpMat};
use crate::{Error, Result};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Default cap on the total number of simplices in a function algebra.
pub const DEFAULT_MAX_CELLS: usize = 1 << 21;

/// A finite simplicial set, given levelwise.
pub trait SimplicialSet: Send + Sync {
    /// Number of `n`-simplices.
    fn size(&self, n: usize) -> usize;
    /// `S(θ)(x)` for a monotone `θ : [m] -> [n]` and an `n`-simplex `x`.
    fn pull(&self, theta: &[usize], n: usize, x: usize) -> usize;
    fn name(&self) -> String;
}

/// The nerve of a finite group; `n`-simplices are tuples `(g_1, .., g_n)`.
pub struct Nerve {
    group: FiniteGroup,
}

impl Nerve {
    pub fn new(group: &FiniteGroup) -> Nerve {
        Nerve {
            group: group.clone(),
        }
    }

    fn decode(&self, n: usize, mut x: usize) -> Vec<usize> {
        let g = self.group.order();
        let mut out = vec![0; n];
        for k in (0..n).rev() {
            out[k] = x % g;
            x /= g;
        }
        out
    }

    fn encode(&self, t: &[usize]) -> usize {
        t.iter().fold(0, |acc, &a| acc * self.group.order() + a)
    }
}

impl SimplicialSet for Nerve {
    fn size(&self, n: usize) -> usize {
        self.group.order().saturating_pow(n as u32)
    }

    fn pull(&self, theta: &[usize], n: usize, x: usize) -> usize {
        let g = self.decode(n, x);
        let grp = &self.group;
        let y: Vec<usize> = theta
            .windows(2)
            .map(|w| (w[0]..w[1]).fold(grp.identity(), |acc, k| grp.mul(acc, g[k])))
            .collect();
        self.encode(&y)
    }

    fn name(&self) -> String {
        format!("B{}", self.group.name())
    }
}

/// The simplicial circle `Δ[1]/∂Δ[1]`: the basepoint `0` and, in level `n`,
/// the cut points `1..=n`.
pub struct Circle;

impl SimplicialSet for Circle {
    fn size(&self, n: usize) -> usize {
        n + 1
    }

    fn pull(&self, theta: &[usize], _n: usize, x: usize) -> usize {
        if x == 0 {
            return 0;
        }
        let c = theta.iter().filter(|&&t| t < x).count();
        if c == 0 || c == theta.len() {
            0
        } else {
            c
        }
    }

    fn name(&self) -> String {
        "S1".into()
    }
}

/// Levelwise product of two simplicial sets; `(a, b) = a * |T_n| + b`.
pub struct Product(pub Arc<dyn SimplicialSet>, pub Arc<dyn SimplicialSet>);

impl SimplicialSet for Product {
    fn size(&self, n: usize) -> usize {
        self.0.size(n).saturating_mul(self.1.size(n))
    }

    fn pull(&self, theta: &[usize], n: usize, x: usize) -> usize {
        let m = theta.len() - 1;
        let (bn, bm) = (self.1.size(n), self.1.size(m));
        self.0.pull(theta, n, x / bn) * bm + self.1.pull(theta, n, x % bn)
    }

    fn name(&self) -> String {
        format!("{} x {}", self.0.name(), self.1.name())
    }
}

#[derive(Clone, Debug)]
struct MonomialLevel {
    basis: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

#[derive(Clone)]
enum Multiplication {
    /// Functions on a simplicial set: the standard basis consists of idempotents.
    Pointwise(Arc<dyn SimplicialSet>),
    /// `Sym^{<=D}` of a free module: basis of monomials, products above `D` vanish.
    Truncated {
        levels: Vec<MonomialLevel>,
        max_degree: usize,
    },
}

/// A cosimplicial commutative algebra with finitely many levels.
#[derive(Clone)]
pub struct CosimplicialAlgebra {
    name: String,
    module: CosimplicialModule,
    mult: Multiplication,
    normalized: Conormalized,
}

/// A cohomology class of a cosimplicial algebra, represented by a cocycle in
/// normalized coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HClass {
    pub degree: usize,
    pub cocycle: Vec<Elem>,
}

/// The algebra of `ring`-valued functions on `set` up to level `levels`.
pub fn function_algebra(
    set: Arc<dyn SimplicialSet>,
    ring: &Ring,
    levels: usize,
    max_cells: usize,
) -> Result<CosimplicialAlgebra> {
    let sizes: Vec<usize> = (0..=levels).map(|n| set.size(n)).collect();
    let total: usize = sizes.iter().fold(0usize, |a, &b| a.saturating_add(b));
    if total > max_cells {
        return Err(Error::Budget(format!(
            "function algebra on {} with {levels} levels needs {total} cells, limit {max_cells}",
            set.name()
        )));
    }
    let pullback = |theta: &[usize], n: usize| -> SpMat {
        let m = theta.len() - 1;
        let trip = (0..sizes[n]).map(|x| (x, set.pull(theta, n, x), 1));
        SpMat::from_triplets(ring, sizes[n], sizes[m], trip)
    };
    let mut cofaces = vec![vec![]];
    for n in 1..=levels {
        cofaces.push(
            (0..=n)
                .map(|i| pullback(&crate::dk::coface_map(n, i), n))
                .collect(),
        );
    }
    let codegens = (0..levels)
        .map(|n| {
            (0..=n)
                .map(|j| pullback(&crate::dk::codegeneracy_map(n, j), n))
                .collect()
        })
        .collect();
    let module = CosimplicialModule::new(ring, sizes, cofaces, codegens)?;
    let normalized = conormalize_full(&module)?;
    Ok(CosimplicialAlgebra {
        name: format!("Fun({}, {})", set.name(), ring.name()),
        module,
        mult: Multiplication::Pointwise(set),
        normalized,
    })
}

/// The cochain algebra of the nerve of a finite group.
pub fn nerve_algebra(g: &FiniteGroup, ring: &Ring, levels: usize) -> Result<CosimplicialAlgebra> {
    function_algebra(Arc::new(Nerve::new(g)), ring, levels, DEFAULT_MAX_CELLS)
}

/// The function algebra of the simplicial circle (cohomology `R` in degrees 0 and 1).
pub fn circle_algebra(ring: &Ring, levels: usize) -> Result<CosimplicialAlgebra> {
    function_algebra(Arc::new(Circle), ring, levels, DEFAULT_MAX_CELLS)
}

/// The levelwise truncated symmetric algebra `Sym^{<=D}(K(C))`.
pub fn symmetric_algebra(
    c: &CochainComplex,
    levels: usize,
    max_degree: usize,
) -> Result<CosimplicialAlgebra> {
    let dk = dold_kan(c, levels)?;
    let ring = c.ring().clone();
    let mut mlevels = vec![];
    for &r in dk.ranks() {
        let mut basis = vec![];
        for k in 0..=max_degree {
            basis.extend(PolyFunctor::sym(k).basis(r));
        }
        let index = basis
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        mlevels.push(MonomialLevel { basis, index });
    }
    let block = |f: &SpMat| -> SpMat {
        let mut trip = vec![];
        let (mut ro, mut co) = (0, 0);
        for k in 0..=max_degree {
            let g = PolyFunctor::sym(k).apply(f);
            for j in 0..g.cols() {
                for &(i, x) in g.col(j) {
                    trip.push((ro + i, co + j, x));
                }
            }
            ro += g.rows();
            co += g.cols();
        }
        SpMat::from_triplets(&ring, ro, co, trip)
    };
    let top = dk.top();
    let mut cofaces = vec![vec![]];
    for n in 1..=top {
        cofaces.push((0..=n).map(|i| block(dk.coface(n, i))).collect());
    }
    let codegens = (0..top)
        .map(|n| (0..=n).map(|j| block(dk.codegeneracy(n, j))).collect())
        .collect();
    let ranks = mlevels.iter().map(|l| l.basis.len()).collect();
    let module = CosimplicialModule::new(&ring, ranks, cofaces, codegens)?;
    let normalized = conormalize_full(&module)?;
    Ok(CosimplicialAlgebra {
        name: format!("Sym<={max_degree} over {}", ring.name()),
        module,
        mult: Multiplication::Truncated {
            levels: mlevels,
            max_degree,
        },
        normalized,
    })
}

impl CosimplicialAlgebra {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ring(&self) -> &Ring {
        self.module.ring()
    }

    pub fn module(&self) -> &CosimplicialModule {
        &self.module
    }

    /// Highest level present.
    pub fn top(&self) -> usize {
        self.module.top()
    }

    pub fn normalized(&self) -> &Conormalized {
        &self.normalized
    }

    /// The conormalized cochain complex; its cohomology is correct below [`Self::top`].
    pub fn complex(&self) -> &CochainComplex {
        &self.normalized.complex
    }

    pub fn cohomology(&self, i: usize) -> Result<CohomologySlice> {
        self.complex().cohomology(i as i64)
    }

    /// The underlying simplicial set for function algebras.
    pub fn simplicial_set(&self) -> Option<Arc<dyn SimplicialSet>> {
        match &self.mult {
            Multiplication::Pointwise(s) => Some(s.clone()),
            Multiplication::Truncated { .. } => None,
        }
    }

    /// The unit of level `n`.
    pub fn unit(&self, n: usize) -> Vec<Elem> {
        let r = self.module.rank(n);
        match &self.mult {
            Multiplication::Pointwise(_) => vec![1; r],
            Multiplication::Truncated { levels, .. } => {
                let mut u = vec![0; r];
                u[levels[n].index[&Vec::new()]] = 1;
                u
            }
        }
    }

    /// Product of two level-`n` vectors.
    pub fn mul(&self, n: usize, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
        let r = self.ring();
        match &self.mult {
            Multiplication::Pointwise(_) => a.iter().zip(b).map(|(&x, &y)| r.mul(x, y)).collect(),
            Multiplication::Truncated { levels, max_degree } => {
                let lv = &levels[n];
                let mut out = vec![0; a.len()];
                for (i, &x) in a.iter().enumerate() {
                    if x == 0 {
                        continue;
                    }
                    for (j, &y) in b.iter().enumerate() {
                        if y == 0 {
                            continue;
                        }
                        let (s, t) = (&lv.basis[i], &lv.basis[j]);
                        if s.len() + t.len() > *max_degree {
                            continue;
                        }
                        let mut m: Vec<u32> = s.iter().chain(t).copied().collect();
                        m.sort_unstable();
                        let k = lv.index[&m];
                        out[k] = r.add(out[k], r.mul(x, y));
                    }
                }
                out
            }
        }
    }

    /// `a^e` in level `n`.
    pub fn pow(&self, n: usize, a: &[Elem], e: u64) -> Vec<Elem> {
        let mut out = self.unit(n);
        for _ in 0..e {
            out = self.mul(n, &out, a);
        }
        out
    }

    fn basis_vector(&self, n: usize, k: usize) -> Vec<Elem> {
        let mut v = vec![0; self.module.rank(n)];
        v[k] = 1;
        v
    }

    /// Check commutativity, associativity, unitality and that structure maps are
    /// ring maps, on basis elements of levels `<= max_level` (at most `samples`
    /// triples per level).
    pub fn validate(&self, max_level: usize, samples: usize) -> Result<()> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 0..=max_level.min(self.top()) {
            let r = self.module.rank(n);
            if r == 0 {
                continue;
            }
            let u = self.unit(n);
            for _ in 0..samples {
                let (a, b, c) = (
                    rng.gen_range(0..r),
                    rng.gen_range(0..r),
                    rng.gen_range(0..r),
                );
                let (ea, eb, ec) = (
                    self.basis_vector(n, a),
                    self.basis_vector(n, b),
                    self.basis_vector(n, c),
                );
                let ab = self.mul(n, &ea, &eb);
                if ab != self.mul(n, &eb, &ea) {
                    return Err(Error::Invalid(format!("level {n} is not commutative")));
                }
                if self.mul(n, &ab, &ec) != self.mul(n, &ea, &self.mul(n, &eb, &ec)) {
                    return Err(Error::Invalid(format!("level {n} is not associative")));
                }
                if self.mul(n, &u, &ea) != ea {
                    return Err(Error::Invalid(format!("level {n} is not unital")));
                }
                if n < self.top() {
                    for i in 0..=n + 1 {
                        let f = self.module.coface(n + 1, i);
                        if f.apply(&ab) != self.mul(n + 1, &f.apply(&ea), &f.apply(&eb))
                            || f.apply(&u) != self.unit(n + 1)
                        {
                            return Err(Error::Invalid(format!(
                                "coface {i} into level {} is not multiplicative",
                                n + 1
                            )));
                        }
                    }
                }
                if n > 0 {
                    for j in 0..n {
                        let s = self.module.codegeneracy(n - 1, j);
                        if s.apply(&ab) != self.mul(n - 1, &s.apply(&ea), &s.apply(&eb)) {
                            return Err(Error::Invalid(format!(
                                "codegeneracy {j} out of level {n} is not multiplicative"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Embed normalized coordinates of degree `i` into level `i`.
    pub fn embed(&self, i: usize, coords: &[Elem]) -> Vec<Elem> {
        self.normalized.bases[i].embed(coords, self.module.rank(i), self.ring())
    }

    /// Normalized coordinates of a level-`i` vector.
    pub fn coords(&self, i: usize, v: &[Elem]) -> Result<Vec<Elem>> {
        self.normalized.bases[i].coords(v)
    }

    /// Wrap a normalized cocycle as a class, checking the cocycle condition.
    pub fn class(&self, degree: usize, cocycle: Vec<Elem>) -> Result<HClass> {
        if degree >= self.top() {
            return Err(Error::DegreeOutOfRange {
                degree: degree as i64,
                lo: 0,
                hi: self.top() as i64 - 1,
            });
        }
        let d = self.complex().d(degree as i64);
        if d.cols() != cocycle.len() {
            return Err(Error::Dimension(format!(
                "cocycle has length {}, expected {}",
                cocycle.len(),
                d.cols()
            )));
        }
        if d.apply(&cocycle)?.iter().any(|&x| x != 0) {
            return Err(Error::NotAComplex(format!(
                "vector is not a cocycle in degree {degree}"
            )));
        }
        Ok(HClass { degree, cocycle })
    }

    /// The classes of the basis of `H^i` computed by [`CochainComplex::cohomology`].
    pub fn basis_classes(&self, i: usize) -> Result<Vec<HClass>> {
        let h = self.cohomology(i)?;
        Ok(h.basis
            .iter()
            .map(|z| HClass {
                degree: i,
                cocycle: z.clone(),
            })
            .collect())
    }

    pub fn same_class(&self, a: &HClass, b: &HClass) -> Result<bool> {
        if a.degree != b.degree {
            return Ok(false);
        }
        self.cohomology(a.degree)?
            .same_class(&a.cocycle, &b.cocycle)
    }

    /// Whether two classes agree up to a unit scalar (both zero counts as agreement).
    pub fn proportional(&self, a: &HClass, b: &HClass) -> Result<bool> {
        if a.degree != b.degree {
            return Ok(false);
        }
        self.cohomology(a.degree)?
            .proportional(&a.cocycle, &b.cocycle)
    }

    pub fn is_zero(&self, a: &HClass) -> Result<bool> {
        self.cohomology(a.degree)?.is_zero_class(&a.cocycle)
    }

    /// The same algebra with coefficients changed along `f : ring -> target`
    /// (reduction mod `p`, or the canonical lift from the residue field).
    pub fn change_ring(
        &self,
        target: &Ring,
        f: impl Fn(Elem) -> Elem,
    ) -> Result<CosimplicialAlgebra> {
        match &self.mult {
            Multiplication::Pointwise(s) => {
                function_algebra(s.clone(), target, self.top(), usize::MAX)
            }
            Multiplication::Truncated { levels, max_degree } => {
                let m = &self.module;
                let tw = |x: &SpMat| x.map_to(target, &f);
                let cofaces = (0..=m.top())
                    .map(|n| {
                        if n == 0 {
                            vec![]
                        } else {
                            (0..=n).map(|i| tw(m.coface(n, i))).collect()
                        }
                    })
                    .collect();
                let codegens = (0..m.top())
                    .map(|n| (0..=n).map(|j| tw(m.codegeneracy(n, j))).collect())
                    .collect();
                let module =
                    CosimplicialModule::new(target, m.ranks().to_vec(), cofaces, codegens)?;
                let normalized = conormalize_full(&module)?;
                Ok(CosimplicialAlgebra {
                    name: format!("Sym<={max_degree} over {}", target.name()),
                    module,
                    mult: Multiplication::Truncated {
                        levels: levels.clone(),
                        max_degree: *max_degree,
                    },
                    normalized,
                })
            }
        }
    }

    /// Reduction modulo `p`.
    pub fn reduce_mod_p(&self) -> Result<CosimplicialAlgebra> {
        let r = self.ring().clone();
        let k = r.residue_field()?;
        let r2 = r.clone();
        self.change_ring(&k, move |x| r2.reduce_mod_p_elem(x))
    }

    /// The Frobenius `F^*(N A) -> N A` induced by `x -> x^p` on every level.
    pub fn frobenius_map(&self) -> Result<ComplexMap> {
        let r = self.ring();
        if r.exponent() != 1 {
            return Err(Error::Invalid(format!(
                "Frobenius needs characteristic p, got {}",
                r.name()
            )));
        }
        let p = r.p();
        let levels: Vec<SpMat> = (0..=self.top())
            .map(|n| self.frobenius_level(n, p))
            .collect();
        let twisted = conormalize_full(&self.module.frobenius_twist())?;
        let f = crate::dk::conormalize_map(&levels, &twisted, &self.normalized)?;
        ComplexMap::new(
            &f.source,
            &f.target,
            (0..=self.top() as i64).map(|i| (i, f.at(i))).collect(),
        )
    }

    /// Matrix of `b ⊗ 1 -> b^p` on level `n`.
    pub fn frobenius_level(&self, n: usize, p: u64) -> SpMat {
        let r = self.module.rank(n);
        let mut out = SpMat::new(self.ring(), r);
        for k in 0..r {
            let v = self.pow(n, &self.basis_vector(n, k), p);
            out.push_col(v.into_iter().enumerate().filter(|e| e.1 != 0));
        }
        out
    }

    /// The multiplication `Sym^k(A^n) -> A^n` on monomials.
    pub fn sym_multiplication(&self, n: usize, k: usize) -> SpMat {
        let r = self.module.rank(n);
        let mut out = SpMat::new(self.ring(), r);
        for mono in PolyFunctor::sym(k).basis(r) {
            let mut v = self.unit(n);
            for &b in &mono {
                v = self.mul(n, &v, &self.basis_vector(n, b as usize));
            }
            out.push_col(v.into_iter().enumerate().filter(|e| e.1 != 0));
        }
        out
    }
}

/// Surjections `[n] ↠ [i]` as step bitmasks with `i` bits set, ascending.
/// This is the basis order of `K(R[-i])^n`.
fn surjections(n: usize, i: usize) -> Vec<u32> {
    (0..(1u32 << n))
        .filter(|m| m.count_ones() as usize == i)
        .collect()
}

/// Minimal preimages `s_0 < .. < s_i` of a surjection.
fn min_preimages(mask: u32, i: usize) -> Vec<usize> {
    let mut s = vec![0];
    let mut t = 0;
    while s.len() < i + 1 {
        if mask & (1 << t) != 0 {
            s.push(t + 1);
        }
        t += 1;
    }
    s
}

fn surj_value(mask: u32, t: usize) -> usize {
    (mask & ((1u32 << t) - 1)).count_ones() as usize
}

/// The cosimplicial map `φ : K(R[-i]) -> A` classifying a normalized cocycle
/// `x` of degree `i`: `result[n][k]` is the image of the `k`-th generator of
/// level `n` (surjections in ascending mask order), for `n <= max_level`.
pub fn classifying_map(
    a: &CosimplicialAlgebra,
    x: &HClass,
    max_level: usize,
) -> Result<Vec<Vec<Vec<Elem>>>> {
    let i = x.degree;
    let r = a.ring().clone();
    let xl = a.embed(i, &x.cocycle);
    let mut out = vec![];
    for n in 0..=max_level.min(a.top()) {
        let surj = surjections(n, i);
        let pos: HashMap<u32, usize> = surj.iter().enumerate().map(|(k, &m)| (m, k)).collect();
        let mut order: Vec<(usize, u32)> = surj
            .iter()
            .map(|&m| (min_preimages(m, i).iter().sum(), m))
            .collect();
        order.sort_unstable();
        let mut images: Vec<Option<Vec<Elem>>> = vec![None; surj.len()];
        for &(_, tau) in &order {
            let theta = min_preimages(tau, i);
            let mut v = a.module().apply_monotone(&theta, n, &xl)?;
            for &other in &surj {
                if other == tau
                    || !theta
                        .iter()
                        .enumerate()
                        .all(|(k, &s)| surj_value(other, s) == k)
                {
                    continue;
                }
                let w = images[pos[&other]].as_ref().ok_or_else(|| {
                    Error::Internal("classifying map processed out of order".into())
                })?;
                for (vi, wi) in v.iter_mut().zip(w) {
                    *vi = r.sub(*vi, *wi);
                }
            }
            images[pos[&tau]] = Some(v);
        }
        out.push(
            images
                .into_iter()
                .map(|v| v.expect("all generators processed"))
                .collect(),
        );
    }
    Ok(out)
}

type UniversalKey = (u64, usize, u32);

/// A cocycle as `(monomial, coefficient)` pairs.
pub type UniversalCocycle = Arc<Vec<(Vec<u32>, Elem)>>;

fn universal_cache() -> &'static Mutex<HashMap<UniversalKey, UniversalCocycle>> {
    static CACHE: OnceLock<Mutex<HashMap<UniversalKey, UniversalCocycle>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The universal class of `P^m` (`m ∈ {0, 1}`) as a cocycle of level `i + m` of
/// `Sym^p(K(F_p[-i]))`, listed as `(monomial, coefficient)` pairs. Monomials
/// index the generators of `K(F_p[-i])^{i+m}` in ascending mask order.
pub fn universal_class(p: u64, i: usize, m: u32) -> Result<UniversalCocycle> {
    if m > 1 {
        return Err(Error::Invalid(format!(
            "only P^0 and P^1 are supported, got P^{m}"
        )));
    }
    if let Some(u) = universal_cache().lock().expect("cache").get(&(p, i, m)) {
        return Ok(u.clone());
    }
    let u = Arc::new(compute_universal(p, i, m)?);
    universal_cache()
        .lock()
        .expect("cache")
        .insert((p, i, m), u.clone());
    Ok(u)
}

fn compute_universal(p: u64, i: usize, m: u32) -> Result<Vec<(Vec<u32>, Elem)>> {
    let n = p as usize;
    let power: Vec<u32> = vec![0; n];
    if m == 0 {
        return Ok(vec![(power, 1)]);
    }
    let r2 = Ring::zpe(p, 2)?;
    let c = CochainComplex::module(&r2, 1, i as i64);
    let dk = dold_kan(&c, i + 2)?;
    let model = crate::dk::levelwise(PolyFunctor::sym(n), &dk);
    let norm = conormalize_full(&model)?;
    let ses = Ses::reduction_mod_p(&norm.complex)?;
    // Level i of K(R[-i]) has the single generator g_id, so Sym^p has the single monomial g_id^p.
    let gp = norm.bases[i].coords(&[1])?;
    let z: Vec<Elem> = gp.iter().map(|&x| r2.reduce_mod_p_elem(x)).collect();
    let w = ses.connect_cocycle(i as i64, &z)?;
    let wl: Vec<Elem> = w.iter().map(|&x| r2.lift_from_residue(x)).collect();
    let level = norm.bases[i + 1].embed(&wl, norm.level_ranks[i + 1], &r2);
    let basis = PolyFunctor::sym(n).basis(dk.rank(i + 1));
    Ok(basis
        .into_iter()
        .zip(level)
        .map(|(mono, x)| (mono, r2.reduce_mod_p_elem(x)))
        .filter(|e| e.1 != 0)
        .collect())
}

/// The Steenrod operation `P^m(x)` (`m ∈ {0, 1}`) for an algebra over `F_p`.
pub fn steenrod(a: &CosimplicialAlgebra, x: &HClass, m: u32) -> Result<HClass> {
    let r = a.ring().clone();
    if r.exponent() != 1 || r.degree() != 1 {
        return Err(Error::Invalid(format!(
            "Steenrod operations need a prime field, got {}",
            r.name()
        )));
    }
    let out_deg = x.degree + m as usize;
    if out_deg >= a.top() {
        return Err(Error::Budget(format!(
            "P^{m} in degree {} needs more than {} levels",
            x.degree,
            a.top()
        )));
    }
    a.class(x.degree, x.cocycle.clone())?;
    let u = universal_class(r.p(), x.degree, m)?;
    let phi = classifying_map(a, x, out_deg)?;
    let gens = &phi[out_deg];
    let mut acc = vec![0; a.module().rank(out_deg)];
    for (mono, c) in u.iter() {
        let mut v = a.unit(out_deg);
        for &g in mono {
            v = a.mul(out_deg, &v, &gens[g as usize]);
        }
        for (t, y) in acc.iter_mut().zip(v) {
            *t = r.add(*t, r.mul(*c, y));
        }
    }
    let coords = a.coords(out_deg, &acc)?;
    a.class(out_deg, coords)
}

/// The mod-`p` Bockstein `H^i(A/p) -> H^{i+1}(A/p)` of an algebra over a ring with `p^2 = 0`,
/// on classes given in the normalized coordinates of `A/p`.
pub fn bockstein(a: &CosimplicialAlgebra, x: &HClass) -> Result<HClass> {
    let ses = Ses::reduction_mod_p(a.complex())?;
    let y = ses.connect_cocycle(x.degree as i64, &x.cocycle)?;
    Ok(HClass {
        degree: x.degree + 1,
        cocycle: y,
    })
}

/// The connecting map of `0 -> A --V--> W_2(A) -> A -> 0` for a function algebra over `F_q`.
pub fn witt_bockstein(a: &CosimplicialAlgebra, x: &HClass) -> Result<HClass> {
    let set = a.simplicial_set().ok_or_else(|| {
        Error::Invalid("Witt vectors are only supported for function algebras".into())
    })?;
    let k = a.ring().clone();
    if !k.is_field() {
        return Err(Error::NotAField(k.name()));
    }
    let i = x.degree;
    if i + 1 >= a.top() {
        return Err(Error::Budget(format!(
            "Witt Bockstein in degree {i} needs more than {} levels",
            a.top()
        )));
    }
    a.class(i, x.cocycle.clone())?;
    let w = Ring::witt2(&k)?;
    let xl = a.embed(i, &x.cocycle);
    let lift: Vec<Elem> = xl.iter().map(|&v| w.witt_pair(v, 0)).collect();
    let n = i + 1;
    let mut out = vec![0; set.size(n)];
    for (y, o) in out.iter_mut().enumerate() {
        let mut acc = 0;
        for j in 0..=n {
            let f = lift[set.pull(&crate::dk::coface_map(n, j), n, y)];
            acc = if j % 2 == 0 {
                w.add(acc, f)
            } else {
                w.sub(acc, f)
            };
        }
        let (a0, a1) = w.witt_components(acc);
        if a0 != 0 {
            return Err(Error::Internal(
                "coboundary of a Teichmüller lift is not in the image of V".into(),
            ));
        }
        *o = a1;
    }
    let coords = a.coords(n, &out)?;
    a.class(n, coords)
}

/// Both sides of the algebra Bockstein identity for an algebra `A` over `Z/p^2`
/// and a class `x` of `A/p`: the left side is `m(γ(x))` computed through
/// `Sym^p A -> Γ^p A -> F^*(A/p)`, the right side is `Bock(φ(x))`. Both are
/// returned as classes of `A/p` in degree `i + 1`.
pub fn algebra_bockstein_check(a: &CosimplicialAlgebra, x: &HClass) -> Result<(HClass, HClass)> {
    let r = a.ring().clone();
    if r.exponent() != 2 || r.degree() != 1 {
        return Err(Error::Invalid(format!(
            "algebra Bockstein check needs Z/p^2, got {}",
            r.name()
        )));
    }
    let p = r.p();
    let a0 = a.reduce_mod_p()?;
    let i = x.degree;
    if i + 1 >= a.top() {
        return Err(Error::Budget(format!(
            "degree {i} needs more than {} levels",
            a.top()
        )));
    }
    a0.class(i, x.cocycle.clone())?;
    if a.normalized()
        .bases
        .iter()
        .any(|b| matches!(b, NormBasis::Dense(_)))
    {
        return Err(Error::Invalid(
            "normalized parts must be coordinate subspaces".into(),
        ));
    }
    // Normalized lift of x and its divided power x~^[p], pushed through the differential.
    let lift: Vec<Elem> = x.cocycle.iter().map(|&c| r.lift_from_residue(c)).collect();
    let xt = a.embed(i, &lift);
    let mut y: HashMap<Vec<u32>, Elem> = HashMap::new();
    for j in 0..=i + 1 {
        let dx = a.module().coface(i + 1, j).apply(&xt);
        let sign = if j % 2 == 0 { 1 } else { r.neg(1) };
        for (mono, c) in divided_power(&r, &dx, p as usize) {
            let e = y.entry(mono).or_insert(0);
            *e = r.add(*e, r.mul(sign, c));
        }
    }
    // Pull back along the norm N(x_I) = |Stab_I| e_I and multiply out.
    let n = i + 1;
    let fact_inv = r.inv(r.from_int((1..p as i64).product::<i64>()))?;
    let mut lhs = vec![0; a.module().rank(n)];
    for (mono, c) in y {
        if c == 0 {
            continue;
        }
        let stab: i64 = multiplicities(&mono)
            .iter()
            .map(|&k| (1..=k as i64).product::<i64>())
            .product();
        let z = if mono.iter().all(|&b| b == mono[0]) {
            let q = r.divexact(c, r.p_pow(1)).map_err(|_| {
                Error::Internal("divided power is not in the image of the norm".into())
            })?;
            r.mul(q, fact_inv)
        } else {
            r.mul(c, r.inv(r.from_int(stab))?)
        };
        let mut v = a.unit(n);
        for &b in &mono {
            let mut e = vec![0; v.len()];
            e[b as usize] = 1;
            v = a.mul(n, &v, &e);
        }
        for (t, w) in lhs.iter_mut().zip(v) {
            *t = r.add(*t, r.mul(z, w));
        }
    }
    let lhs0: Vec<Elem> = lhs.iter().map(|&v| r.reduce_mod_p_elem(v)).collect();
    let lhs_class = a0.class(n, a0.coords(n, &lhs0)?)?;
    // Right side: Bockstein of the Frobenius.
    let xl0 = a0.embed(i, &x.cocycle);
    let fx = a0.pow(i, &xl0, p);
    let fx = HClass {
        degree: i,
        cocycle: a0.coords(i, &fx)?,
    };
    let rhs = bockstein(a, &fx)?;
    let rhs_class = a0.class(n, rhs.cocycle)?;
    Ok((lhs_class, rhs_class))
}

/// `γ_p(v)` in `Γ^p`, in the basis of orbit sums indexed by multisets.
fn divided_power(r: &Ring, v: &[Elem], p: usize) -> Vec<(Vec<u32>, Elem)> {
    let support: Vec<(u32, Elem)> = v
        .iter()
        .enumerate()
        .filter(|e| *e.1 != 0)
        .map(|(k, &x)| (k as u32, x))
        .collect();
    let mut out = vec![];
    let mut cur: Vec<u32> = vec![];
    fn rec(
        r: &Ring,
        s: &[(u32, Elem)],
        start: usize,
        left: usize,
        coeff: Elem,
        cur: &mut Vec<u32>,
        out: &mut Vec<(Vec<u32>, Elem)>,
    ) {
        if left == 0 {
            out.push((cur.clone(), coeff));
            return;
        }
        for k in start..s.len() {
            cur.push(s[k].0);
            rec(r, s, k, left - 1, r.mul(coeff, s[k].1), cur, out);
            cur.pop();
        }
    }
    rec(r, &support, 0, p, 1, &mut cur, &mut out);
    out
}

fn multiplicities(t: &[u32]) -> Vec<usize> {
    let mut out = vec![];
    let mut i = 0;
    while i < t.len() {
        let j = i + t[i..].iter().take_while(|&&x| x == t[i]).count();
        out.push(j - i);
        i = j;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn fp(p: u64) -> Ring {
        Ring::fp(p).unwrap()
    }

    #[test]
    fn nerve_of_cyclic_group() {
        for p in [2u64, 3] {
            let a = nerve_algebra(&FiniteGroup::cyclic(p as usize), &fp(p), 5).unwrap();
            a.module().check_identities().unwrap();
            let b = a.complex().betti().unwrap();
            assert_eq!(&b[..4], &[1, 1, 1, 1], "p={p}");
        }
    }

    #[test]
    fn trivial_group_nerve() {
        let a = nerve_algebra(&FiniteGroup::trivial(), &fp(3), 4).unwrap();
        assert_eq!(&a.complex().betti().unwrap()[..3], &[1, 0, 0]);
    }

    #[test]
    fn nerve_c2_over_z4() {
        let z4 = Ring::zpe(2, 2).unwrap();
        let a = nerve_algebra(&FiniteGroup::cyclic(2), &z4, 6).unwrap();
        let h0 = a.cohomology(0).unwrap().structure;
        assert_eq!(h0.free, 1);
        // H^i(C_2, Z/4) = Z/2 in every positive degree (kernel of the norm 2 for odd i, Z/4 / 2 for even i).
        for i in 1..5 {
            let s = a.cohomology(i).unwrap().structure;
            assert_eq!((s.torsion.clone(), s.free), (vec![1], 0), "degree {i}");
        }
    }

    #[test]
    fn circle_and_torus() {
        let k = fp(3);
        let a = circle_algebra(&k, 4).unwrap();
        assert_eq!(&a.complex().betti().unwrap()[..3], &[1, 1, 0]);
        let t: Arc<dyn SimplicialSet> = Arc::new(Product(Arc::new(Circle), Arc::new(Circle)));
        let a = function_algebra(t, &k, 4, DEFAULT_MAX_CELLS).unwrap();
        a.module().check_identities().unwrap();
        assert_eq!(&a.complex().betti().unwrap()[..4], &[1, 2, 1, 0]);
    }

    #[test]
    fn apply_monotone_matches_pullback() {
        let g = FiniteGroup::cyclic(3);
        let a = nerve_algebra(&g, &fp(3), 4).unwrap();
        let set = Nerve::new(&g);
        let theta = vec![0, 0, 2, 3];
        let v: Vec<Elem> = (0..a.module().rank(3)).map(|k| (k % 3) as Elem).collect();
        let got = a.module().apply_monotone(&theta, 3, &v).unwrap();
        let want: Vec<Elem> = (0..set.size(3))
            .map(|y| v[set.pull(&theta, 3, y)])
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn classifying_map_is_cosimplicial() {
        let a = nerve_algebra(&FiniteGroup::cyclic(3), &fp(3), 5).unwrap();
        let x = a.basis_classes(2).unwrap().remove(0);
        let phi = classifying_map(&a, &x, 4).unwrap();
        let c = CochainComplex::module(&fp(3), 1, 2);
        let k = dold_kan(&c, 4).unwrap();
        for n in 1..=4 {
            for j in 0..=n {
                for g in 0..k.rank(n - 1) {
                    let mut e = vec![0; k.rank(n - 1)];
                    e[g] = 1;
                    let img = k.coface(n, j).apply(&e);
                    let mut lhs = vec![0; a.module().rank(n)];
                    for (t, &c) in img.iter().enumerate() {
                        for (l, v) in lhs.iter_mut().zip(&phi[n][t]) {
                            *l = (*l + c * v) % 3;
                        }
                    }
                    assert_eq!(lhs, a.module().coface(n, j).apply(&phi[n - 1][g]));
                }
            }
        }
    }

    #[test]
    fn p0_is_identity_on_nerves() {
        for p in [2u64, 3] {
            let a = nerve_algebra(&FiniteGroup::cyclic(p as usize), &fp(p), 5).unwrap();
            for i in 0..=3 {
                for x in a.basis_classes(i).unwrap() {
                    let y = steenrod(&a, &x, 0).unwrap();
                    assert!(a.same_class(&x, &y).unwrap(), "p={p} i={i}");
                }
            }
        }
    }

    #[test]
    fn p1_is_bockstein_on_cyclic_groups() {
        for p in [2u64, 3] {
            let k = fp(p);
            let g = FiniteGroup::cyclic(p as usize);
            let a = nerve_algebra(&g, &k, 5).unwrap();
            let a2 = nerve_algebra(&g, &Ring::zpe(p, 2).unwrap(), 5).unwrap();
            let mut unit = None;
            for i in 0..=2 {
                for x in a.basis_classes(i).unwrap() {
                    let y = steenrod(&a, &x, 1).unwrap();
                    let b = bockstein(&a2, &x).unwrap();
                    assert!(a.proportional(&y, &b).unwrap(), "p={p} i={i}");
                    let w = witt_bockstein(&a, &x).unwrap();
                    assert!(a.same_class(&w, &b).unwrap(), "p={p} i={i}");
                    if i == 1 {
                        assert!(!a.is_zero(&y).unwrap());
                        let h = a.cohomology(2).unwrap();
                        let (cy, cb) = (
                            h.coordinates(&y.cocycle).unwrap(),
                            h.coordinates(&b.cocycle).unwrap(),
                        );
                        let u = k.mul(cy[0], k.inv(cb[0]).unwrap());
                        assert_eq!(*unit.get_or_insert(u), u);
                    }
                    if i == 0 {
                        assert!(a.is_zero(&y).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn steenrod_independent_of_representative() {
        let p = 3;
        let k = fp(p);
        let a = nerve_algebra(&FiniteGroup::cyclic(3), &k, 5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for i in 1..=2 {
            let x = a.basis_classes(i).unwrap().remove(0);
            let base = steenrod(&a, &x, 1).unwrap();
            let d = a.complex().d(i as i64 - 1);
            for _ in 0..5 {
                let w: Vec<Elem> = (0..d.cols()).map(|_| rng.gen_range(0..p)).collect();
                let dw = d.apply(&w).unwrap();
                let z: Vec<Elem> = x
                    .cocycle
                    .iter()
                    .zip(&dw)
                    .map(|(&s, &t)| k.add(s, t))
                    .collect();
                let y = steenrod(
                    &a,
                    &HClass {
                        degree: i,
                        cocycle: z,
                    },
                    1,
                )
                .unwrap();
                assert!(a.same_class(&base, &y).unwrap());
            }
        }
    }

    #[test]
    fn algebra_bockstein_on_nerves_and_circle() {
        for p in [2u64, 3] {
            let r2 = Ring::zpe(p, 2).unwrap();
            let a = nerve_algebra(&FiniteGroup::cyclic(p as usize), &r2, 5).unwrap();
            let a0 = a.reduce_mod_p().unwrap();
            for i in 0..=2 {
                for x in a0.basis_classes(i).unwrap() {
                    let (l, r) = algebra_bockstein_check(&a, &x).unwrap();
                    assert!(a0.proportional(&l, &r).unwrap(), "p={p} i={i}");
                    if i == 1 {
                        assert!(!a0.is_zero(&l).unwrap());
                    }
                }
            }
            let c = circle_algebra(&r2, 4).unwrap();
            let c0 = c.reduce_mod_p().unwrap();
            for i in 0..=1 {
                for x in c0.basis_classes(i).unwrap() {
                    let (l, r) = algebra_bockstein_check(&c, &x).unwrap();
                    assert!(c0.is_zero(&l).unwrap() && c0.is_zero(&r).unwrap());
                }
            }
        }
    }

    #[test]
    fn frobenius_of_nerve_is_identity() {
        let a = nerve_algebra(&FiniteGroup::cyclic(2), &fp(2), 4).unwrap();
        let f = a.frobenius_map().unwrap();
        for i in 0..4 {
            assert_eq!(
                f.at(i),
                crate::ralg::Mat::identity(&fp(2), a.complex().rank(i))
            );
        }
    }

    #[test]
    fn symmetric_algebra_frobenius_is_m_delta() {
        let k = fp(3);
        let c = CochainComplex::module(&k, 1, 1);
        let a = symmetric_algebra(&c, 4, 3).unwrap();
        a.validate(3, 30).unwrap();
        for n in 0..=3 {
            let delta = crate::dk::natural_map_level(
                &k,
                crate::dk::NaturalMap::Delta,
                3,
                a.module().rank(n),
            )
            .unwrap();
            let md = a.sym_multiplication(n, 3).mul(&delta);
            assert_eq!(md.to_dense(), a.frobenius_level(n, 3).to_dense());
        }
        a.frobenius_map().unwrap();
    }

    #[test]
    fn steenrod_on_free_algebra_recovers_universal_class() {
        let p = 3u64;
        let k = fp(p);
        let i = 1;
        let c = CochainComplex::module(&k, 1, i as i64);
        let a = symmetric_algebra(&c, 4, p as usize).unwrap();
        let x = a
            .basis_classes(i)
            .unwrap()
            .into_iter()
            .find(|x| !a.is_zero(x).unwrap())
            .unwrap();
        let y = steenrod(&a, &x, 1).unwrap();
        assert!(!a.is_zero(&y).unwrap());
        let p0 = steenrod(&a, &x, 0).unwrap();
        assert!(!a.is_zero(&p0).unwrap());
    }
}
