//! The Dold–Kan correspondence and derived polynomial functors.
//!
//! A cochain complex `C` in degrees `[0, D]` corresponds to the cosimplicial
//! module `K(C)` with `K(C)^n = ⊕_{η : [n] ↠ [k]} C^k`. A monotone map
//! `θ : [m] -> [n]` sends the summand `η'` of level `m` to the summand `τ` of
//! level `n` by the identity when `τθ = η'`, by `d` when `τθ = δ_0 η'`, and by
//! zero otherwise. Conormalization (`∩ ker s^j` with `d = Σ (-1)^i d^i`)
//! recovers `C`. Applying a polynomial functor levelwise and conormalizing
//! computes its derived functor.

use crate::cx::{CochainComplex, ComplexMap};
use crate::ralg::{echelon, Elem, Mat, Ring, SpMat};
use crate::{Error, Result};
use std::collections::HashMap;

/// Default cap on the number of cosimplicial levels built.
pub const DEFAULT_LEVEL_CAP: usize = 8;

/// A monotone surjection `[n] ↠ [k]` encoded by the bitmask of its steps:
/// bit `t` is set iff `η(t+1) = η(t) + 1`.
type Surj = u32;

/// Monotone map `[m] -> [n]` as its list of values.
pub type Monotone = Vec<usize>;

/// The coface `δ_i : [n-1] -> [n]` skipping `i`.
pub fn coface_map(n: usize, i: usize) -> Monotone {
    (0..n).map(|t| if t < i { t } else { t + 1 }).collect()
}

/// The codegeneracy `σ_j : [n+1] -> [n]` hitting `j` twice.
pub fn codegeneracy_map(n: usize, j: usize) -> Monotone {
    (0..=n + 1)
        .map(|t| if t <= j { t } else { t - 1 })
        .collect()
}

/// A cosimplicial module truncated at a top level.
#[derive(Clone, Debug)]
pub struct CosimplicialModule {
    ring: Ring,
    ranks: Vec<usize>,
    /// `cofaces[n][i]`: level `n-1 -> n` for `1 <= n <= L`, `0 <= i <= n`.
    cofaces: Vec<Vec<SpMat>>,
    /// `codegens[n][j]`: level `n+1 -> n` for `n < L`, `0 <= j <= n`.
    codegens: Vec<Vec<SpMat>>,
}

impl CosimplicialModule {
    /// Build from explicit structure maps (shapes are checked).
    pub fn new(
        ring: &Ring,
        ranks: Vec<usize>,
        cofaces: Vec<Vec<SpMat>>,
        codegens: Vec<Vec<SpMat>>,
    ) -> Result<Self> {
        let l = ranks
            .len()
            .checked_sub(1)
            .ok_or_else(|| Error::Invalid("no levels".into()))?;
        if cofaces.len() != l + 1 || codegens.len() != l {
            return Err(Error::Dimension(
                "wrong number of structure-map levels".into(),
            ));
        }
        for n in 1..=l {
            if cofaces[n].len() != n + 1 {
                return Err(Error::Dimension(format!(
                    "level {n} needs {} cofaces",
                    n + 1
                )));
            }
            for m in &cofaces[n] {
                if m.rows() != ranks[n] || m.cols() != ranks[n - 1] {
                    return Err(Error::Dimension(format!(
                        "coface into level {n} has wrong shape"
                    )));
                }
            }
        }
        for n in 0..l {
            if codegens[n].len() != n + 1 {
                return Err(Error::Dimension(format!(
                    "level {n} needs {} codegeneracies",
                    n + 1
                )));
            }
            for m in &codegens[n] {
                if m.rows() != ranks[n] || m.cols() != ranks[n + 1] {
                    return Err(Error::Dimension(format!(
                        "codegeneracy into level {n} has wrong shape"
                    )));
                }
            }
        }
        Ok(CosimplicialModule {
            ring: ring.clone(),
            ranks,
            cofaces,
            codegens,
        })
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    /// Top level `L`.
    pub fn top(&self) -> usize {
        self.ranks.len() - 1
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn rank(&self, n: usize) -> usize {
        self.ranks[n]
    }

    /// Coface `d^i : X^{n-1} -> X^n`.
    pub fn coface(&self, n: usize, i: usize) -> &SpMat {
        &self.cofaces[n][i]
    }

    /// Codegeneracy `s^j : X^{n+1} -> X^n`.
    pub fn codegeneracy(&self, n: usize, j: usize) -> &SpMat {
        &self.codegens[n][j]
    }

    /// Check the cosimplicial identities up to the top level.
    pub fn check_identities(&self) -> Result<()> {
        let l = self.top();
        let bad = |what: &str, n: usize| {
            Err(Error::Invalid(format!(
                "cosimplicial identity {what} fails at level {n}"
            )))
        };
        // d^j d^i = d^i d^{j-1} for i < j
        for n in 2..=l {
            for j in 0..=n {
                for i in 0..j {
                    let lhs = self.cofaces[n][j].mul(&self.cofaces[n - 1][i]);
                    let rhs = self.cofaces[n][i].mul(&self.cofaces[n - 1][j - 1]);
                    if lhs.add(&rhs.scale(self.ring.neg(1))).nnz() != 0 {
                        return bad("d d", n);
                    }
                }
            }
        }
        // s^j s^i = s^i s^{j+1} for i <= j
        for n in 0..l.saturating_sub(1) {
            for j in 0..=n {
                for i in 0..=j {
                    let lhs = self.codegens[n][j].mul(&self.codegens[n + 1][i]);
                    let rhs = self.codegens[n][i].mul(&self.codegens[n + 1][j + 1]);
                    if lhs.add(&rhs.scale(self.ring.neg(1))).nnz() != 0 {
                        return bad("s s", n);
                    }
                }
            }
        }
        // s^j d^i: level n -> n+1 -> n
        for n in 0..l {
            let id = SpMat::identity(&self.ring, self.ranks[n]);
            for j in 0..=n {
                for i in 0..=n + 1 {
                    let lhs = self.codegens[n][j].mul(&self.cofaces[n + 1][i]);
                    let rhs = if i < j {
                        self.cofaces[n][i].mul(&self.codegens[n - 1][j - 1])
                    } else if i == j || i == j + 1 {
                        id.clone()
                    } else {
                        self.cofaces[n][i - 1].mul(&self.codegens[n - 1][j])
                    };
                    if lhs.add(&rhs.scale(self.ring.neg(1))).nnz() != 0 {
                        return bad("s d", n);
                    }
                }
            }
        }
        Ok(())
    }

    /// Apply `A(θ)` for a monotone `θ : [m] -> [n]` (given by its values) to a level-`m` vector.
    pub fn apply_monotone(&self, theta: &[usize], n: usize, v: &[Elem]) -> Result<Vec<Elem>> {
        let m = theta
            .len()
            .checked_sub(1)
            .ok_or_else(|| Error::Invalid("empty monotone map".into()))?;
        if m > self.top() || n > self.top() || theta.windows(2).any(|w| w[1] < w[0]) || theta[m] > n
        {
            return Err(Error::Invalid(format!(
                "{theta:?} is not a monotone map [{m}] -> [{n}] within the levels"
            )));
        }
        // θ = ι η with η : [m] ↠ [k] and ι : [k] -> [n] injective.
        let mut image: Vec<usize> = theta.to_vec();
        image.dedup();
        let mut eta: Vec<usize> = theta
            .iter()
            .map(|t| image.partition_point(|x| x < t))
            .collect();
        let mut out = v.to_vec();
        let mut level = m;
        while let Some(t) = (0..level).find(|&t| eta[t] == eta[t + 1]) {
            out = self.codegens[level - 1][t].apply(&out);
            eta.remove(t + 1);
            level -= 1;
        }
        let mut steps = vec![];
        let mut iota = image;
        let mut top = n;
        while iota.len() < top + 1 {
            let j = (0..=top)
                .rev()
                .find(|j| !iota.contains(j))
                .expect("missing value");
            steps.push((top, j));
            for x in iota.iter_mut() {
                if *x > j {
                    *x -= 1;
                }
            }
            top -= 1;
        }
        for &(lv, j) in steps.iter().rev() {
            out = self.cofaces[lv][j].apply(&out);
        }
        Ok(out)
    }

    /// Entrywise Frobenius twist of all structure maps.
    pub fn frobenius_twist(&self) -> CosimplicialModule {
        let r = self.ring.clone();
        let tw = |m: &SpMat| m.map(|x| r.frobenius(x));
        CosimplicialModule {
            ring: self.ring.clone(),
            ranks: self.ranks.clone(),
            cofaces: self
                .cofaces
                .iter()
                .map(|v| v.iter().map(tw).collect())
                .collect(),
            codegens: self
                .codegens
                .iter()
                .map(|v| v.iter().map(tw).collect())
                .collect(),
        }
    }
}

struct Level {
    /// `(mask, k, offset)` for each summand, masks ascending.
    summands: Vec<(Surj, usize, usize)>,
    index: HashMap<Surj, usize>,
    rank: usize,
}

fn dk_level(c: &CochainComplex, n: usize) -> Level {
    let mut summands = vec![];
    let mut index = HashMap::new();
    let mut off = 0;
    for mask in 0..(1u32 << n) {
        let k = mask.count_ones() as usize;
        let r = c.rank(k as i64);
        if r == 0 {
            continue;
        }
        index.insert(mask, summands.len());
        summands.push((mask, k, off));
        off += r;
    }
    Level {
        summands,
        index,
        rank: off,
    }
}

/// Value of the surjection `mask` at `t`.
fn surj_value(mask: Surj, t: usize) -> usize {
    (mask & ((1u32 << t) - 1)).count_ones() as usize
}

/// Matrix of `K(θ) : K^m -> K^n`.
fn dk_structure_map(c: &CochainComplex, lm: &Level, ln: &Level, theta: &Monotone) -> SpMat {
    let r = c.ring();
    let m = theta.len() - 1;
    let mut trip = vec![];
    for &(tau, k, toff) in &ln.summands {
        let comp: Vec<usize> = theta.iter().map(|&t| surj_value(tau, t)).collect();
        let steps_ok = comp.windows(2).all(|w| w[1] == w[0] || w[1] == w[0] + 1);
        if !steps_ok {
            continue;
        }
        let mut mask: Surj = 0;
        for t in 0..m {
            if comp[t + 1] == comp[t] + 1 {
                mask |= 1 << t;
            }
        }
        if comp[0] == 0 && comp[m] == k {
            if let Some(&si) = lm.index.get(&mask) {
                let (_, _, soff) = lm.summands[si];
                for a in 0..c.rank(k as i64) {
                    trip.push((toff + a, soff + a, 1));
                }
            }
        } else if comp[0] == 1 && comp[m] == k {
            if let Some(&si) = lm.index.get(&mask) {
                let (_, j, soff) = lm.summands[si];
                debug_assert_eq!(j + 1, k);
                let d = c.d(j as i64);
                for a in 0..d.rows() {
                    for b in 0..d.cols() {
                        let x = d.get(a, b);
                        if x != 0 {
                            trip.push((toff + a, soff + b, x));
                        }
                    }
                }
            }
        }
    }
    SpMat::from_triplets(r, ln.rank, lm.rank, trip)
}

/// The cosimplicial module `K(C)` up to level `levels`.
pub fn dold_kan(c: &CochainComplex, levels: usize) -> Result<CosimplicialModule> {
    if c.lo() < 0 {
        return Err(Error::Invalid(format!(
            "complex has negative degree {}",
            c.lo()
        )));
    }
    if levels > 30 {
        return Err(Error::Budget(format!("{levels} levels requested")));
    }
    let lv: Vec<Level> = (0..=levels).map(|n| dk_level(c, n)).collect();
    let mut cofaces = vec![vec![]];
    for n in 1..=levels {
        cofaces.push(
            (0..=n)
                .map(|i| dk_structure_map(c, &lv[n - 1], &lv[n], &coface_map(n, i)))
                .collect(),
        );
    }
    let mut codegens = vec![];
    for n in 0..levels {
        codegens.push(
            (0..=n)
                .map(|j| dk_structure_map(c, &lv[n + 1], &lv[n], &codegeneracy_map(n, j)))
                .collect(),
        );
    }
    let ranks = lv.iter().map(|l| l.rank).collect();
    CosimplicialModule::new(c.ring(), ranks, cofaces, codegens)
}

/// Levelwise maps `K(f)` of a chain map (block diagonal on summands).
pub fn dold_kan_map(f: &ComplexMap, levels: usize) -> Result<Vec<SpMat>> {
    let src = &f.source;
    let tgt = &f.target;
    let mut out = vec![];
    for n in 0..=levels {
        let ls = dk_level(src, n);
        let lt = dk_level(tgt, n);
        let mut trip = vec![];
        for &(mask, k, soff) in &ls.summands {
            if let Some(&ti) = lt.index.get(&mask) {
                let toff = lt.summands[ti].2;
                let m = f.at(k as i64);
                for a in 0..m.rows() {
                    for b in 0..m.cols() {
                        let x = m.get(a, b);
                        if x != 0 {
                            trip.push((toff + a, soff + b, x));
                        }
                    }
                }
            }
        }
        out.push(SpMat::from_triplets(src.ring(), lt.rank, ls.rank, trip));
    }
    Ok(out)
}

/// Kinds of classical polynomial functors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FunctorKind {
    Sym,
    Div,
    Ext,
}

/// A polynomial functor `Sym^n`, `Div^n` (= `Γ^n`) or `Ext^n` (= `Λ^n`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PolyFunctor {
    pub kind: FunctorKind,
    pub n: usize,
}

impl PolyFunctor {
    pub fn sym(n: usize) -> Self {
        PolyFunctor {
            kind: FunctorKind::Sym,
            n,
        }
    }
    pub fn div(n: usize) -> Self {
        PolyFunctor {
            kind: FunctorKind::Div,
            n,
        }
    }
    pub fn ext(n: usize) -> Self {
        PolyFunctor {
            kind: FunctorKind::Ext,
            n,
        }
    }

    /// Basis index tuples of `F(R^r)`: weakly increasing (Sym, Div) or strictly increasing (Ext), lex order.
    pub fn basis(&self, r: usize) -> Vec<Vec<u32>> {
        let strict = self.kind == FunctorKind::Ext;
        let mut out = vec![];
        let mut cur = vec![];
        fn rec(
            r: usize,
            n: usize,
            start: usize,
            strict: bool,
            cur: &mut Vec<u32>,
            out: &mut Vec<Vec<u32>>,
        ) {
            if cur.len() == n {
                out.push(cur.clone());
                return;
            }
            for i in start..r {
                cur.push(i as u32);
                rec(r, n, if strict { i + 1 } else { i }, strict, cur, out);
                cur.pop();
            }
        }
        rec(r, self.n, 0, strict, &mut cur, &mut out);
        out
    }

    /// Rank of `F(R^r)`.
    pub fn rank(&self, r: usize) -> usize {
        let n = self.n as u64;
        let r = r as u64;
        let b = match self.kind {
            FunctorKind::Ext => crate::ralg::binomial(r, n),
            _ => {
                if r == 0 {
                    (n == 0) as u128
                } else {
                    crate::ralg::binomial(r + n - 1, n)
                }
            }
        };
        b as usize
    }

    /// Matrix of `F(f)` for `f : R^s -> R^t`.
    pub fn apply(&self, f: &SpMat) -> SpMat {
        match self.kind {
            FunctorKind::Sym => product_map(f, self.n, false),
            FunctorKind::Ext => product_map(f, self.n, true),
            FunctorKind::Div => product_map(&f.transpose(), self.n, false).transpose(),
        }
    }
}

/// Index of basis tuples for a fixed functor and rank.
pub struct BasisIndex {
    pub tuples: Vec<Vec<u32>>,
    map: HashMap<Vec<u32>, usize>,
}

impl BasisIndex {
    pub fn new(f: PolyFunctor, r: usize) -> Self {
        let tuples = f.basis(r);
        let map = tuples
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        BasisIndex { tuples, map }
    }
    pub fn index(&self, t: &[u32]) -> Option<usize> {
        self.map.get(t).copied()
    }
    pub fn len(&self) -> usize {
        self.tuples.len()
    }
    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }
}

/// `Sym^n(f)` (or `Λ^n(f)` with signs) on monomial bases.
fn product_map(f: &SpMat, n: usize, alternating: bool) -> SpMat {
    let r = f.ring().clone();
    let kind = if alternating {
        FunctorKind::Ext
    } else {
        FunctorKind::Sym
    };
    let src = PolyFunctor { kind, n }.basis(f.cols());
    let tgt = BasisIndex::new(PolyFunctor { kind, n }, f.rows());
    let mut out = SpMat::new(&r, tgt.len());
    let neg1 = r.neg(1);
    for mono in &src {
        let mut terms: HashMap<Vec<u32>, Elem> = HashMap::new();
        terms.insert(vec![], 1);
        for &a in mono {
            let col = f.col(a as usize);
            let mut next: HashMap<Vec<u32>, Elem> = HashMap::new();
            for (m, c) in &terms {
                for &(i, x) in col {
                    let i = i as u32;
                    let pos = m.partition_point(|&y| y <= i);
                    let mut coeff = r.mul(*c, x);
                    if alternating {
                        if pos > 0 && m[pos - 1] == i {
                            continue;
                        }
                        if (m.len() - pos) % 2 == 1 {
                            coeff = r.mul(coeff, neg1);
                        }
                    }
                    let mut m2 = m.clone();
                    m2.insert(pos, i);
                    let e = next.entry(m2).or_insert(0);
                    *e = r.add(*e, coeff);
                }
            }
            next.retain(|_, v| *v != 0);
            terms = next;
        }
        out.push_col(
            terms
                .into_iter()
                .map(|(m, c)| (tgt.index(&m).expect("target monomial"), c)),
        );
    }
    out
}

/// Apply a functor levelwise to a cosimplicial module.
pub fn levelwise(f: PolyFunctor, a: &CosimplicialModule) -> CosimplicialModule {
    CosimplicialModule {
        ring: a.ring.clone(),
        ranks: a.ranks.iter().map(|&r| f.rank(r)).collect(),
        cofaces: a
            .cofaces
            .iter()
            .map(|v| v.iter().map(|m| f.apply(m)).collect())
            .collect(),
        codegens: a
            .codegens
            .iter()
            .map(|v| v.iter().map(|m| f.apply(m)).collect())
            .collect(),
    }
}

/// Basis of the normalized part of one level.
#[derive(Clone, Debug)]
pub enum NormBasis {
    /// The normalized part is spanned by these standard basis vectors.
    Coordinates(Vec<usize>),
    /// Columns of the matrix span the normalized part.
    Dense(Mat),
}

impl NormBasis {
    pub fn len(&self) -> usize {
        match self {
            NormBasis::Coordinates(v) => v.len(),
            NormBasis::Dense(m) => m.cols(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `k`-th basis vector in level coordinates.
    pub fn vector(&self, k: usize, level_rank: usize) -> Vec<Elem> {
        match self {
            NormBasis::Coordinates(v) => {
                let mut out = vec![0; level_rank];
                out[v[k]] = 1;
                out
            }
            NormBasis::Dense(m) => m.col(k),
        }
    }

    /// Embed normalized coordinates into the level.
    pub fn embed(&self, x: &[Elem], level_rank: usize, ring: &Ring) -> Vec<Elem> {
        match self {
            NormBasis::Coordinates(v) => {
                let mut out = vec![0; level_rank];
                for (k, &i) in v.iter().enumerate() {
                    out[i] = x[k];
                }
                out
            }
            NormBasis::Dense(m) => {
                let _ = ring;
                m.apply(x).expect("shape")
            }
        }
    }

    /// Coordinates of a normalized level vector.
    pub fn coords(&self, y: &[Elem]) -> Result<Vec<Elem>> {
        match self {
            NormBasis::Coordinates(v) => {
                let out: Vec<Elem> = v.iter().map(|&i| y[i]).collect();
                debug_assert!({
                    let mut z = y.to_vec();
                    for &i in v {
                        z[i] = 0;
                    }
                    z.iter().all(|&x| x == 0)
                });
                Ok(out)
            }
            NormBasis::Dense(m) => m
                .solve(y)?
                .ok_or_else(|| Error::Internal("vector is not normalized".into())),
        }
    }
}

/// A conormalized cosimplicial module with the bases used.
#[derive(Clone, Debug)]
pub struct Conormalized {
    pub complex: CochainComplex,
    pub bases: Vec<NormBasis>,
    pub level_ranks: Vec<usize>,
}

/// Whether every column has at most one nonzero entry and distinct nonzero columns hit distinct rows.
fn is_partial_monomial(m: &SpMat) -> bool {
    let mut seen = vec![false; m.rows()];
    for j in 0..m.cols() {
        let c = m.col(j);
        if c.len() > 1 {
            return false;
        }
        if let Some(&(i, _)) = c.first() {
            if seen[i] {
                return false;
            }
            seen[i] = true;
        }
    }
    true
}

fn normalized_basis(a: &CosimplicialModule, n: usize) -> Result<NormBasis> {
    let rank = a.ranks[n];
    if n == 0 {
        return Ok(NormBasis::Coordinates((0..rank).collect()));
    }
    let maps = &a.codegens[n - 1];
    if maps.iter().all(is_partial_monomial) {
        let mut killed = vec![true; rank];
        for m in maps {
            for (j, k) in killed.iter_mut().enumerate() {
                if !m.col(j).is_empty() {
                    *k = false;
                }
            }
        }
        return Ok(NormBasis::Coordinates(
            (0..rank).filter(|&j| killed[j]).collect(),
        ));
    }
    let mut stacked = maps[0].to_dense();
    for m in &maps[1..] {
        stacked = stacked.vstack(&m.to_dense())?;
    }
    if !a.ring.is_field() {
        let dg = crate::ralg::diagonalize(&stacked)?;
        if dg.vals.iter().any(|&v| v > 0) {
            return Err(Error::NonFree("normalized part is not free".into()));
        }
        return Ok(NormBasis::Dense(dg.kernel));
    }
    Ok(NormBasis::Dense(echelon(&stacked)?.kernel))
}

/// Conormalized complex `N^n = ∩ ker s^j`, `d = Σ (-1)^i d^i`, in degrees `[0, L]`.
/// Its cohomology is correct in degrees `< L`.
pub fn conormalize_full(a: &CosimplicialModule) -> Result<Conormalized> {
    let l = a.top();
    let bases: Vec<NormBasis> = (0..=l)
        .map(|n| normalized_basis(a, n))
        .collect::<Result<_>>()?;
    let r = &a.ring;
    let mut ds = vec![];
    for n in 0..l {
        let mut total = a.cofaces[n + 1][0].clone();
        for i in 1..=n + 1 {
            let m = &a.cofaces[n + 1][i];
            total = total.add(&if i % 2 == 1 {
                m.scale(r.neg(1))
            } else {
                m.clone()
            });
        }
        let mut cols = vec![];
        for k in 0..bases[n].len() {
            let v = bases[n].vector(k, a.ranks[n]);
            let img = total.apply(&v);
            cols.push(bases[n + 1].coords(&img)?);
        }
        ds.push(Mat::from_columns(r, bases[n + 1].len(), &cols));
    }
    let ranks = bases.iter().map(|b| b.len()).collect();
    let complex = CochainComplex::new_unchecked(r, 0, ranks, ds)?;
    Ok(Conormalized {
        complex,
        bases,
        level_ranks: a.ranks.clone(),
    })
}

/// Conormalized complex of a cosimplicial module.
pub fn conormalize(a: &CosimplicialModule) -> Result<CochainComplex> {
    Ok(conormalize_full(a)?.complex)
}

/// Restrict levelwise maps (commuting with the structure maps) to normalized parts.
pub fn conormalize_map(
    levels: &[SpMat],
    src: &Conormalized,
    tgt: &Conormalized,
) -> Result<ComplexMap> {
    let r = src.complex.ring().clone();
    let top = src.bases.len().min(tgt.bases.len());
    let mut comps = vec![];
    for n in 0..top {
        let mut cols = vec![];
        for k in 0..src.bases[n].len() {
            let v = src.bases[n].vector(k, src.level_ranks[n]);
            let img = levels[n].apply(&v);
            cols.push(tgt.bases[n].coords(&img)?);
        }
        comps.push((n as i64, Mat::from_columns(&r, tgt.bases[n].len(), &cols)));
    }
    ComplexMap::new_unchecked(&src.complex, &tgt.complex, comps)
}

/// Derived functor data: the cosimplicial model and its conormalization.
#[derive(Clone, Debug)]
pub struct DerivedPower {
    pub functor: PolyFunctor,
    pub input: CochainComplex,
    pub levels: usize,
    pub dk: CosimplicialModule,
    pub model: CosimplicialModule,
    pub normalized: Conormalized,
}

impl DerivedPower {
    pub fn complex(&self) -> &CochainComplex {
        &self.normalized.complex
    }
}

/// `F(C)` computed as `N(F(K(C)))` with `B + 1` levels; cohomology is correct in degrees `<= B`.
pub fn derived_power(f: PolyFunctor, c: &CochainComplex, bound: usize) -> Result<CochainComplex> {
    Ok(derived_power_full(f, c, bound, DEFAULT_LEVEL_CAP)?
        .normalized
        .complex)
}

/// The default degree bound `n * D` (the top degree of `F(C)`).
pub fn default_bound(f: PolyFunctor, c: &CochainComplex) -> usize {
    f.n * c.hi().max(0) as usize
}

/// Like [`derived_power`] but keeping all intermediate data and with an explicit level cap.
pub fn derived_power_full(
    f: PolyFunctor,
    c: &CochainComplex,
    bound: usize,
    cap: usize,
) -> Result<DerivedPower> {
    let levels = bound + 1;
    if levels > cap {
        return Err(Error::Budget(format!(
            "derived power needs {levels} cosimplicial levels, cap is {cap}"
        )));
    }
    let dk = dold_kan(c, levels)?;
    let model = levelwise(f, &dk);
    let normalized = conormalize_full(&model)?;
    Ok(DerivedPower {
        functor: f,
        input: c.clone(),
        levels,
        dk,
        model,
        normalized,
    })
}

/// Natural transformations between polynomial functors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NaturalMap {
    /// `N : Sym^n -> Div^n`, the symmetrization.
    Norm,
    /// `r : Div^n -> Sym^n`, inclusion then projection.
    Restriction,
    /// `Δ : F*(-) -> Sym^p`, `e_i -> x_i^p`.
    Delta,
    /// `ψ : Div^p -> F*(-)`, projection onto the `e_{(i,..,i)}` coordinates.
    Psi,
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Multiplicities of a sorted tuple.
fn multiplicities(t: &[u32]) -> Vec<usize> {
    let mut out = vec![];
    let mut i = 0;
    while i < t.len() {
        let mut j = i;
        while j < t.len() && t[j] == t[i] {
            j += 1;
        }
        out.push(j - i);
        i = j;
    }
    out
}

/// The natural map on a free module of rank `r` (a single level).
pub fn natural_map_level(ring: &Ring, name: NaturalMap, n: usize, r: usize) -> Result<SpMat> {
    let p = ring.p() as usize;
    match name {
        NaturalMap::Norm | NaturalMap::Restriction => {
            let basis = PolyFunctor::sym(n).basis(r);
            let mut trip = vec![];
            for (k, t) in basis.iter().enumerate() {
                let stab: u128 = multiplicities(t).iter().map(|&m| factorial(m)).product();
                let c = if name == NaturalMap::Norm {
                    stab
                } else {
                    factorial(n) / stab
                };
                let x = ring.from_int((c % (1u128 << 62)) as i64);
                if x != 0 {
                    trip.push((k, k, x));
                }
            }
            Ok(SpMat::from_triplets(ring, basis.len(), basis.len(), trip))
        }
        NaturalMap::Delta | NaturalMap::Psi => {
            if n != p || ring.exponent() != 1 {
                return Err(Error::Invalid(format!(
                    "Δ and ψ need n = p and characteristic p, got n = {n} over {}",
                    ring.name()
                )));
            }
            let idx = BasisIndex::new(PolyFunctor::sym(n), r);
            let mut trip = vec![];
            for i in 0..r {
                let t = vec![i as u32; n];
                let k = idx.index(&t).expect("power monomial");
                trip.push(if name == NaturalMap::Delta {
                    (k, i, 1)
                } else {
                    (i, k, 1)
                });
            }
            let (rows, cols) = if name == NaturalMap::Delta {
                (idx.len(), r)
            } else {
                (r, idx.len())
            };
            Ok(SpMat::from_triplets(ring, rows, cols, trip))
        }
    }
}

/// Source and target functors of a natural map; `None` stands for the Frobenius twist `F*`.
pub fn natural_map_ends(name: NaturalMap, n: usize) -> (Option<PolyFunctor>, Option<PolyFunctor>) {
    match name {
        NaturalMap::Norm => (Some(PolyFunctor::sym(n)), Some(PolyFunctor::div(n))),
        NaturalMap::Restriction => (Some(PolyFunctor::div(n)), Some(PolyFunctor::sym(n))),
        NaturalMap::Delta => (None, Some(PolyFunctor::sym(n))),
        NaturalMap::Psi => (Some(PolyFunctor::div(n)), None),
    }
}

/// The derived model of `F(C)` or of the Frobenius twist `F*C` (for `None`).
pub fn derived_model(
    f: Option<PolyFunctor>,
    c: &CochainComplex,
    bound: usize,
    cap: usize,
) -> Result<Conormalized> {
    let levels = bound + 1;
    if levels > cap {
        return Err(Error::Budget(format!(
            "needs {levels} cosimplicial levels, cap is {cap}"
        )));
    }
    let dk = dold_kan(c, levels)?;
    let model = match f {
        Some(f) => levelwise(f, &dk),
        None => dk.frobenius_twist(),
    };
    conormalize_full(&model)
}

/// A natural map between derived models of `C` as a [`ComplexMap`].
pub fn natural_map(
    name: NaturalMap,
    n: usize,
    c: &CochainComplex,
    bound: usize,
) -> Result<ComplexMap> {
    let (s, t) = natural_map_ends(name, n);
    let src = derived_model(s, c, bound, DEFAULT_LEVEL_CAP)?;
    let tgt = derived_model(t, c, bound, DEFAULT_LEVEL_CAP)?;
    let dk = dold_kan(c, bound + 1)?;
    let levels: Vec<SpMat> = dk
        .ranks
        .iter()
        .map(|&r| natural_map_level(c.ring(), name, n, r))
        .collect::<Result<_>>()?;
    conormalize_map(&levels, &src, &tgt)
}

/// Functoriality of a derived power: the endomorphism `F(f)` of the model
/// induced by a chain endomorphism `f` of the input complex.
pub fn derived_power_map(dp: &DerivedPower, f: &ComplexMap) -> Result<ComplexMap> {
    let levels: Vec<SpMat> = dold_kan_map(f, dp.levels)?
        .iter()
        .map(|m| dp.functor.apply(m))
        .collect();
    conormalize_map(&levels, &dp.normalized, &dp.normalized)
}

/// The de Rham complex `Ω^•_n` of polynomial degree `n` on `R^d`:
/// `Ω^j_n = Sym^{n-j} ⊗ Λ^j` with `d(x^a ⊗ ω) = Σ_i a_i x^{a - e_i} ⊗ dx_i ∧ ω`.
/// Basis `(monomial m, form w)` sits at `m * rank(Λ^j) + w`.
pub fn de_rham(ring: &Ring, d: usize, n: usize) -> Result<CochainComplex> {
    let top = n.min(d);
    let mut ds = vec![];
    let mut ranks = vec![];
    for j in 0..=top {
        ranks.push(PolyFunctor::sym(n - j).rank(d) * PolyFunctor::ext(j).rank(d));
    }
    for j in 0..top {
        let (ss, se) = (
            PolyFunctor::sym(n - j).basis(d),
            PolyFunctor::ext(j).basis(d),
        );
        let ts = BasisIndex::new(PolyFunctor::sym(n - j - 1), d);
        let te = BasisIndex::new(PolyFunctor::ext(j + 1), d);
        let mut m = Mat::zeros(ring, ranks[j + 1], ranks[j]);
        for (mi, mono) in ss.iter().enumerate() {
            for (wi, form) in se.iter().enumerate() {
                let col = mi * se.len() + wi;
                let mut k = 0;
                while k < mono.len() {
                    let i = mono[k];
                    let mult = mono.iter().filter(|&&x| x == i).count();
                    k += mult;
                    if form.contains(&i) {
                        continue;
                    }
                    let mut rest = mono.clone();
                    let pos = rest.iter().position(|&x| x == i).expect("present");
                    rest.remove(pos);
                    let below = form.iter().filter(|&&x| x < i).count();
                    let mut w = form.clone();
                    w.insert(below, i);
                    let mut c = ring.from_int(mult as i64);
                    if below % 2 == 1 {
                        c = ring.neg(c);
                    }
                    let row =
                        ts.index(&rest).expect("monomial") * te.len() + te.index(&w).expect("form");
                    m.add_to(row, col, c);
                }
            }
        }
        ds.push(m);
    }
    CochainComplex::new(ring, 0, ranks, ds)
}

/// The action of `g ∈ GL_d` on `Ω^j_n`, one matrix per degree `j`.
pub fn de_rham_action(g: &Mat, n: usize) -> Result<Vec<Mat>> {
    let d = g.rows();
    let gs = SpMat::from_dense(g);
    (0..=n.min(d))
        .map(|j| {
            PolyFunctor::sym(n - j)
                .apply(&gs)
                .to_dense()
                .kron(&PolyFunctor::ext(j).apply(&gs).to_dense())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(p: u64) -> Ring {
        Ring::fp(p).unwrap()
    }

    #[test]
    fn dk_ranks_and_identities() {
        let k = fp(3);
        let c = CochainComplex::module(&k, 1, 1);
        let a = dold_kan(&c, 5).unwrap();
        assert_eq!(a.ranks(), &[0, 1, 2, 3, 4, 5]);
        a.check_identities().unwrap();
        let c0 = CochainComplex::module(&k, 2, 0);
        let a0 = dold_kan(&c0, 4).unwrap();
        assert!(a0.ranks().iter().all(|&r| r == 2));
    }

    #[test]
    fn dk_identities_with_differentials() {
        let k = fp(5);
        let d0 = Mat::from_ints(&k, &[vec![1, 2], vec![3, 4], vec![0, 1]]);
        let d1 = Mat::from_ints(&k, &[vec![0, 0, 0]]);
        let c = CochainComplex::new(&k, 0, vec![2, 3, 1], vec![d0, d1]).unwrap();
        let a = dold_kan(&c, 5).unwrap();
        a.check_identities().unwrap();
        let n = conormalize(&a).unwrap();
        for i in 0..=2 {
            assert_eq!(n.rank(i), c.rank(i));
            assert_eq!(n.d(i), c.d(i));
        }
        assert_eq!(n.rank(3), 0);
    }

    #[test]
    fn functor_ranks() {
        assert_eq!(PolyFunctor::sym(2).rank(2), 3);
        assert_eq!(PolyFunctor::ext(2).rank(2), 1);
        assert_eq!(PolyFunctor::div(2).rank(2), 3);
        assert_eq!(PolyFunctor::sym(3).basis(2).len(), 4);
    }

    #[test]
    fn decalage_small() {
        for p in [2u64, 3] {
            let k = fp(p);
            for d in 1..=3 {
                let e = CochainComplex::module(&k, d, 1);
                let n = p as usize;
                let c = derived_power(PolyFunctor::div(n), &e, n).unwrap();
                let dims = c.betti().unwrap();
                for (i, &x) in dims.iter().enumerate().take(n + 1) {
                    let want = if i == n {
                        crate::ralg::binomial(d as u64, n as u64) as usize
                    } else {
                        0
                    };
                    assert_eq!(x, want, "p={p} d={d} deg={i}");
                }
            }
        }
    }

    #[test]
    fn sym2_of_shifted_rank2_over_f2() {
        let k = fp(2);
        let e = CochainComplex::module(&k, 2, 1);
        let c = derived_power(PolyFunctor::sym(2), &e, 2).unwrap();
        assert_eq!(&c.betti().unwrap()[..3], &[0, 2, 3]);
    }

    #[test]
    fn norm_then_restriction_is_factorial() {
        let k = Ring::zpe(3, 2).unwrap();
        for r in 1..=3 {
            let n = natural_map_level(&k, NaturalMap::Norm, 3, r)
                .unwrap()
                .to_dense();
            let rr = natural_map_level(&k, NaturalMap::Restriction, 3, r)
                .unwrap()
                .to_dense();
            let prod = rr.mul(&n).unwrap();
            assert_eq!(prod, Mat::scalar(&k, n.rows(), k.from_int(6)));
        }
    }
    #[test]
    fn de_rham_cartier_dimensions() {
        // p = 2, d = 2: S^2 -> V ⊗ V -> Λ^2 with ranks 3, 4, 1 and cohomology 2, 2, 0.
        let k = fp(2);
        let c = de_rham(&k, 2, 2).unwrap();
        assert_eq!(c.ranks(), &[3, 4, 1]);
        assert_eq!(c.betti().unwrap(), vec![2, 2, 0]);
        // Degrees prime to p are acyclic.
        for n in 1..=4 {
            if n % 3 != 0 {
                assert!(de_rham(&fp(3), 3, n)
                    .unwrap()
                    .betti()
                    .unwrap()
                    .iter()
                    .all(|&b| b == 0));
            }
        }
    }

    #[test]
    fn de_rham_action_commutes_with_d() {
        let k = fp(3);
        let g = Mat::from_ints(&k, &[vec![1, 2, 0], vec![0, 1, 1], vec![1, 0, 2]]);
        let c = de_rham(&k, 3, 3).unwrap();
        let act = de_rham_action(&g, 3).unwrap();
        for j in 0..3 {
            let dj = c.d(j as i64);
            assert_eq!(dj.mul(&act[j]).unwrap(), act[j + 1].mul(&dj).unwrap());
        }
    }

    #[test]
    fn derived_power_is_functorial() {
        let k = fp(3);
        let v = CochainComplex::module(&k, 2, 1);
        let dp = derived_power_full(PolyFunctor::sym(2), &v, 2, DEFAULT_LEVEL_CAP).unwrap();
        let g = Mat::from_ints(&k, &[vec![1, 1], vec![0, 2]]);
        let h = Mat::from_ints(&k, &[vec![2, 0], vec![1, 1]]);
        let map = |m: &Mat| ComplexMap::new(&v, &v, vec![(1, m.clone())]).unwrap();
        let fg = derived_power_map(&dp, &map(&g)).unwrap();
        let fh = derived_power_map(&dp, &map(&h)).unwrap();
        let fgh = derived_power_map(&dp, &map(&g.mul(&h).unwrap())).unwrap();
        for i in 0..=2 {
            assert_eq!(fg.at(i).mul(&fh.at(i)).unwrap(), fgh.at(i));
        }
    }
}
