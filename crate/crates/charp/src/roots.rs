//! Weights of the diagonal torus of `SL_p`, certified searches for sums of
//! roots, and the choice of a real quadratic field with prescribed units.
//!
//! Characters are written in the basis `χ_1, .., χ_{p-1}`, with
//! `χ_p = -(χ_1 + .. + χ_{p-1})`.

use crate::{Error, Result};
use serde::Serialize;

/// A character of the torus in the basis `χ_1, .., χ_{p-1}`.
pub type WeightVector = Vec<i64>;

/// `χ_i` for `1 <= i <= p`.
pub fn chi(p: usize, i: usize) -> WeightVector {
    assert!((1..=p).contains(&i), "character index out of range");
    if i == p {
        vec![-1; p - 1]
    } else {
        let mut v = vec![0; p - 1];
        v[i - 1] = 1;
        v
    }
}

pub fn add(a: &[i64], b: &[i64]) -> WeightVector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[i64], b: &[i64]) -> WeightVector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(c: i64, a: &[i64]) -> WeightVector {
    a.iter().map(|x| c * x).collect()
}

/// `Δ_{U_p}`: `χ_i - χ_j` for `1 <= i < j <= p-1` and `χ_i + (χ_1 + .. + χ_{p-1})`.
pub fn positive_roots(p: usize) -> Vec<WeightVector> {
    let sum = vec![1; p - 1];
    let mut out = vec![];
    for i in 1..p {
        for j in i + 1..p {
            out.push(sub(&chi(p, i), &chi(p, j)));
        }
    }
    for i in 1..p {
        out.push(add(&chi(p, i), &sum));
    }
    out
}

/// `Δ_{A_p}`: `χ_1 - χ_i` for `2 <= i <= p-1` and `2χ_1 + χ_2 + .. + χ_{p-1}`.
pub fn abelian_roots(p: usize) -> Vec<WeightVector> {
    let mut out: Vec<WeightVector> = (2..p).map(|i| sub(&chi(p, 1), &chi(p, i))).collect();
    out.push(add(&chi(p, 1), &vec![1; p - 1]));
    out
}

/// The set `{χ_1 - χ_i, p(χ_1 - χ_i) : 2 <= i <= p}` of weights of `H^1(A_p(O_F), k)` up to sign.
pub fn borel_set(p: usize) -> Vec<WeightVector> {
    let base: Vec<WeightVector> = (2..=p).map(|i| sub(&chi(p, 1), &chi(p, i))).collect();
    let twisted: Vec<WeightVector> = base.iter().map(|v| scale(p as i64, v)).collect();
    base.into_iter().chain(twisted).collect()
}

/// A sum `Σ p^{r_k} λ_k`, stored as sorted `(r_k, index of λ_k)`.
pub type Expression = Vec<(u32, usize)>;

/// Result of an enumeration.
#[derive(Clone, Debug, Serialize)]
pub struct Search {
    pub solutions: Vec<Expression>,
    /// Largest exponent actually searched.
    pub exponent_bound: u32,
    /// Whether the search covers all exponents (not just those up to the requested bound).
    pub complete: bool,
}

/// A linear functional taking a value `>= 1` on every generator, if the
/// decreasing weights `w_i = n - i` give one.
fn positive_functional(gens: &[WeightVector], n: usize) -> Option<Vec<i64>> {
    let w: Vec<i64> = (0..n).map(|i| (n - i) as i64).collect();
    let ev = |v: &WeightVector| v.iter().zip(&w).map(|(a, b)| a * b).sum::<i64>();
    if gens.iter().all(|g| ev(g) >= 1) {
        Some(w)
    } else {
        None
    }
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Multiplicative order of `p` modulo `m`.
pub fn multiplicative_order(p: u64, m: u64) -> Option<u32> {
    if m <= 1 || gcd(p, m) != 1 {
        return None;
    }
    let mut x = p % m;
    let mut k = 1;
    while x != 1 {
        x = x * p % m;
        k += 1;
    }
    Some(k)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// All ways, up to permutation, to write `target` as a sum of at most
/// `max_terms` elements `p^r λ` with `λ ∈ gens` and `r <= exponent_bound`.
///
/// With `modulus = 0` the sum must equal `target`; otherwise every coordinate
/// is compared modulo `modulus`. Completeness over all exponents:
/// * for `modulus > 0` coprime to `p`, `p^r` is periodic in `r` with period
///   `ord_m(p)`, so exponents below the period suffice;
/// * for `modulus = 0`, if a functional `φ` with `φ(λ) >= 1` on all generators
///   exists, every term satisfies `p^r <= p^r φ(λ) <= φ(target)`, which bounds
///   `r`; the same bound prunes partial sums.
pub fn enumerate(
    p: usize,
    target: &[i64],
    gens: &[WeightVector],
    max_terms: usize,
    exponent_bound: u32,
    modulus: i64,
) -> Search {
    let n = target.len();
    let pp = p as i64;
    let (mut bound, mut complete) = (exponent_bound, false);
    let phi = if modulus == 0 {
        positive_functional(gens, n)
    } else {
        None
    };
    if modulus > 0 {
        if let Some(ord) = multiplicative_order(p as u64, modulus as u64) {
            if exponent_bound + 1 >= ord {
                bound = ord - 1;
                complete = true;
            }
        }
    } else if let Some(w) = &phi {
        let t = dot(target, w);
        let mut r = 0;
        while pp.pow(r + 1) <= t.max(0) {
            r += 1;
        }
        if r <= exponent_bound {
            bound = r;
            complete = true;
        }
    }
    let mut items: Vec<((u32, usize), WeightVector)> = vec![];
    for r in 0..=bound {
        for (k, g) in gens.iter().enumerate() {
            items.push(((r, k), scale(pp.pow(r), g)));
        }
    }
    let budget = phi.as_ref().map(|w| dot(target, w));
    let weights: Vec<i64> = items
        .iter()
        .map(|(_, v)| phi.as_ref().map_or(0, |w| dot(v, w)))
        .collect();
    let matches = |s: &[i64]| -> bool {
        if modulus == 0 {
            s == target
        } else {
            s.iter()
                .zip(target)
                .all(|(a, b)| (a - b).rem_euclid(modulus) == 0)
        }
    };
    let mut solutions = vec![];
    let mut stack: Vec<usize> = vec![];
    type Ctx<'a> = (
        &'a [((u32, usize), WeightVector)],
        &'a [i64],
        Option<i64>,
        usize,
    );
    fn rec(
        start: usize,
        sum: &mut Vec<i64>,
        used: i64,
        stack: &mut Vec<usize>,
        ctx: &Ctx,
        matches: &dyn Fn(&[i64]) -> bool,
        out: &mut Vec<Expression>,
    ) {
        let (items, weights, budget, max_terms) = *ctx;
        if matches(sum) {
            out.push(stack.iter().map(|&i| items[i].0).collect());
        }
        if stack.len() == max_terms {
            return;
        }
        for i in start..items.len() {
            let u = used + weights[i];
            if budget.is_some_and(|b| u > b) {
                continue;
            }
            for (s, x) in sum.iter_mut().zip(&items[i].1) {
                *s += x;
            }
            stack.push(i);
            rec(i, sum, u, stack, ctx, matches, out);
            stack.pop();
            for (s, x) in sum.iter_mut().zip(&items[i].1) {
                *s -= x;
            }
        }
    }
    let mut sum = vec![0; n];
    rec(
        0,
        &mut sum,
        0,
        &mut stack,
        &(&items, &weights, budget, max_terms),
        &matches,
        &mut solutions,
    );
    Search {
        solutions,
        exponent_bound: bound,
        complete,
    }
}

/// The value of an expression.
pub fn evaluate(p: usize, expr: &Expression, gens: &[WeightVector], n: usize) -> WeightVector {
    let mut s = vec![0; n];
    for &(r, k) in expr {
        s = add(&s, &scale((p as i64).pow(r), &gens[k]));
    }
    s
}

/// Outcome of one part of a combinatorial lemma.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaCheck {
    pub name: String,
    pub p: usize,
    pub q: u64,
    /// Number of solutions found for each target, in order.
    pub counts: Vec<usize>,
    /// Whether all searches were certified complete.
    pub complete: bool,
    /// Whether the statement holds.
    pub holds: bool,
}

/// Parts (1)–(4) of the statement about the weights `pχ_j` of `V^{(1)}` against
/// `p^N · Δ_{U_p}`, for `q = p^r`.
pub fn weights_lemma(p: usize, r: u32, part: usize) -> Result<LemmaCheck> {
    let q = (p as u64).pow(r);
    let gens = positive_roots(p);
    let n = p - 1;
    let m = q as i64 - 1;
    let pc = |j: usize| scale(p as i64, &chi(p, j));
    let (counts, complete, holds) = match part {
        1 => {
            // Monoid membership: with φ(λ) >= 1 the number of terms is at most φ(target).
            let w = positive_functional(&gens, n)
                .ok_or_else(|| Error::Internal("no positive functional".into()))?;
            let mut counts = vec![];
            let mut complete = true;
            for j in 2..=p {
                let t = pc(j);
                let terms = dot(&t, &w).max(0) as usize;
                let s = enumerate(p, &t, &gens, terms, 64, 0);
                complete &= s.complete;
                counts.push(s.solutions.len());
            }
            let holds = counts.iter().all(|&c| c == 0);
            (counts, complete, holds)
        }
        2 => {
            let s = enumerate(p, &pc(1), &gens, p - 1, 64, 0);
            // χ_1 - χ_j (j = 2..p-1) are the first p - 2 roots; χ_1 + Σ follows the χ_i - χ_j.
            let mut expected: Expression = (0..p - 2).map(|k| (0, k)).collect();
            expected.push((0, (p - 1) * (p - 2) / 2));
            expected.sort();
            let holds = s.solutions.len() == 1 && s.solutions[0] == expected;
            (vec![s.solutions.len()], s.complete, holds)
        }
        3 => {
            let mut counts = vec![];
            let mut complete = true;
            for j in 2..=p {
                let s = enumerate(p, &pc(j), &gens, p - 1, 64, m);
                complete &= s.complete;
                counts.push(s.solutions.len());
            }
            let holds = q > p as u64 && counts.iter().all(|&c| c == 0);
            (counts, complete, holds)
        }
        4 => {
            let s = enumerate(p, &pc(1), &gens, p - 1, r.saturating_sub(1), m);
            let exact = s
                .solutions
                .iter()
                .all(|e| evaluate(p, e, &gens, n) == pc(1));
            let short = s.solutions.iter().all(|e| e.len() == p - 1);
            (
                vec![s.solutions.len()],
                true,
                q > p as u64 && exact && short,
            )
        }
        _ => return Err(Error::Invalid(format!("no part {part}"))),
    };
    Ok(LemmaCheck {
        name: format!("weights-{part}"),
        p,
        q,
        counts,
        complete,
        holds,
    })
}

/// Parts (1)–(3) of the statement about congruences modulo `p + 1` against [`borel_set`].
pub fn borel_lemma(p: usize, part: usize) -> Result<LemmaCheck> {
    let gens = borel_set(p);
    let n = p - 1;
    let m = p as i64 + 1;
    let pc = |j: usize| scale(p as i64, &chi(p, j));
    let (counts, holds) = match part {
        1 => {
            let counts: Vec<usize> = (2..=p)
                .map(|j| enumerate(p, &pc(j), &gens, p - 1, 0, m).solutions.len())
                .collect();
            let holds = counts.iter().all(|&c| c == 0);
            (counts, holds)
        }
        2 => {
            let c = enumerate(p, &pc(1), &gens, p.saturating_sub(2), 0, m)
                .solutions
                .len();
            (vec![c], c == 0)
        }
        3 => {
            let s = enumerate(p, &pc(1), &gens, p - 1, 0, m);
            let expected: Expression = (0..p - 1).map(|k| (0, k)).collect();
            let holds = s.solutions.len() == 1
                && s.solutions[0] == expected
                && evaluate(p, &s.solutions[0], &gens, n) == pc(1);
            (vec![s.solutions.len()], holds)
        }
        _ => return Err(Error::Invalid(format!("no part {part}"))),
    };
    Ok(LemmaCheck {
        name: format!("borel-{part}"),
        p,
        q: (p * p) as u64,
        counts,
        complete: true,
        holds,
    })
}

/// A real quadratic field `Q(√N)` in which `p` is inert, with a unit reducing to
/// a generator of the norm `±1` subgroup of `F_{p^2}^×` and a unit `u` with
/// `Fr(ū) ≠ ū^p` in `W_2(F_{p^2})`.
#[derive(Clone, Debug, Serialize)]
pub struct QuadraticField {
    pub p: u64,
    /// `N = d^2 + 1` (or 5 for `p = 2`).
    pub n: i64,
    /// `d` with `u = d + √N` (for `p = 2`, `u = (1 + √5)/2`).
    pub d: i64,
    /// Order of the image of `u` in `F_{p^2}^×`.
    pub unit_order: u64,
    /// Order of `{x : N(x) = ±1} ⊂ F_{p^2}^×`.
    pub subgroup_order: u64,
    /// The trace difference `Tr(u^p) - Tr(Fr(u))` modulo `p^2`.
    pub wieferich: i64,
}

/// `a + b s` with `s^2 = n`, modulo `m`.
type Quad = (i64, i64);

fn qmul(x: Quad, y: Quad, n: i64, m: i64) -> Quad {
    (
        (x.0 * y.0 + n % m * (x.1 * y.1 % m)).rem_euclid(m),
        (x.0 * y.1 + x.1 * y.0).rem_euclid(m),
    )
}

fn qpow(x: Quad, mut e: u64, n: i64, m: i64) -> Quad {
    let (mut acc, mut b) = ((1, 0), x);
    while e > 0 {
        if e & 1 == 1 {
            acc = qmul(acc, b, n, m);
        }
        b = qmul(b, b, n, m);
        e >>= 1;
    }
    acc
}

fn is_square_mod(a: i64, p: i64) -> bool {
    (0..p).any(|x| (x * x - a).rem_euclid(p) == 0)
}

/// Order of `x` in `(Z/p)[s]/(s^2 - n)`, assumed a field.
fn quad_order(x: Quad, n: i64, p: i64) -> u64 {
    let mut y = x;
    let mut k = 1;
    while y != (1, 0) {
        y = qmul(y, x, n, p);
        k += 1;
    }
    k
}

fn binom(n: u64, k: u64) -> i64 {
    crate::ralg::binomial(n, k) as i64
}

/// The trace difference `2(Σ_{j even} C(p, j) d^{p-j} (d^2+1)^{j/2}) - 2d` modulo `p^2`.
pub fn wieferich_value(p: u64, d: i64) -> i64 {
    let m = (p * p) as i64;
    let n = (d * d + 1).rem_euclid(m);
    let pw = |b: i64, e: u64| -> i64 { (0..e).fold(1i64, |acc, _| acc * b.rem_euclid(m) % m) };
    let mut s = 0i64;
    for j in (0..=p).step_by(2) {
        s = (s + binom(p, j) % m * pw(d, p - j) % m * pw(n, j / 2)) % m;
    }
    (2 * s - 2 * d).rem_euclid(m)
}

/// Search for the field, trying `d_0 = 0, 1, ..` and lifts `d_0 + k p`.
pub fn find_quadratic_field(p: u64, max_d: i64) -> Result<QuadraticField> {
    if p == 2 {
        // O_F = Z[ε], ε^2 = ε + 1: ε reduces to a generator of F_4^× (order 3 = |F_4^×|).
        let eps_order = {
            // In F_2[x]/(x^2 + x + 1): x^3 = 1.
            let mul = |a: (u8, u8), b: (u8, u8)| -> (u8, u8) {
                let c0 = a.0 & b.0;
                let c1 = (a.0 & b.1) ^ (a.1 & b.0);
                let c2 = a.1 & b.1;
                (c0 ^ c2, c1 ^ c2)
            };
            let mut y = (0u8, 1u8);
            let mut k = 1;
            while y != (1, 0) {
                y = mul(y, (0, 1));
                k += 1;
            }
            k
        };
        // u = -1: Fr(-1) = -1 while (-1)^2 = 1 in W_2(F_4); the difference of traces is -4 - 2 ≡ 2 mod 4.
        return Ok(QuadraticField {
            p,
            n: 5,
            d: 0,
            unit_order: eps_order,
            subgroup_order: 3,
            wieferich: 2,
        });
    }
    let pi = p as i64;
    for d0 in 0..pi.min(max_d + 1) {
        let n0 = (d0 * d0 + 1).rem_euclid(pi);
        if is_square_mod(n0, pi) {
            continue;
        }
        let u0 = (d0, 1);
        let unit_order = quad_order(u0, n0, pi);
        let subgroup_order = (0..pi)
            .flat_map(|a| (0..pi).map(move |b| (a, b)))
            .filter(|&(a, b)| {
                let nm = (a * a - n0 * b * b).rem_euclid(pi);
                nm == 1 || nm == pi - 1
            })
            .count() as u64;
        if unit_order != subgroup_order {
            continue;
        }
        for k in 0..pi {
            let d = d0 + k * pi;
            if d > max_d {
                break;
            }
            let w = wieferich_value(p, d);
            if w != 0 {
                return Ok(QuadraticField {
                    p,
                    n: d * d + 1,
                    d,
                    unit_order,
                    subgroup_order,
                    wieferich: w,
                });
            }
        }
    }
    Err(Error::Budget(format!(
        "no quadratic field found for p = {p} with d <= {max_d}"
    )))
}

/// Independent check of condition (2): in `(Z/p^2)[s]/(s^2 - N)`, `Fr(u)` differs from `u^p`
/// (`u = d + s`, `Fr(u) = d - s`; `u = -1` for `p = 2`).
pub fn frobenius_differs(f: &QuadraticField) -> bool {
    let m = (f.p * f.p) as i64;
    let n = f.n.rem_euclid(m);
    // For p = 2 the unit is u = -1, fixed by Frobenius.
    let (u, fr) = if f.p == 2 {
        ((m - 1, 0), (m - 1, 0))
    } else {
        ((f.d.rem_euclid(m), 1), (f.d.rem_euclid(m), m - 1))
    };
    qpow(u, f.p, n, m) != fr
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_sets() {
        assert_eq!(positive_roots(2), vec![vec![2]]);
        assert_eq!(positive_roots(3), vec![vec![1, -1], vec![2, 1], vec![1, 2]]);
        for p in [2, 3, 5, 7] {
            let u = positive_roots(p);
            assert_eq!(u.len(), (p - 1) * (p - 2) / 2 + p - 1);
            let a = abelian_roots(p);
            assert_eq!(a.len(), p - 1);
            assert!(a.iter().all(|x| u.contains(x)));
        }
    }

    #[test]
    fn enumeration_examples() {
        let g = positive_roots(3);
        let s = enumerate(3, &[3, 0], &g, 2, 8, 0);
        assert!(s.complete);
        assert_eq!(s.solutions, vec![vec![(0, 0), (0, 1)]]);
        for j in [2, 3] {
            let t = scale(3, &chi(3, j));
            let s = enumerate(3, &t, &g, 2, 8, 8);
            assert!(s.complete && s.solutions.is_empty());
        }
        let s = enumerate(3, &[3, 0], &borel_set(3), 2, 0, 4);
        assert_eq!(s.solutions.len(), 1);
        assert_eq!(evaluate(3, &s.solutions[0], &borel_set(3), 2), vec![3, 0]);
    }

    #[test]
    fn equalities_are_congruences() {
        let g = positive_roots(3);
        for t in [vec![3, 0], vec![2, 1], vec![4, 2]] {
            let exact = enumerate(3, &t, &g, 2, 1, 0).solutions;
            let cong = enumerate(3, &t, &g, 2, 1, 8).solutions;
            assert!(exact.iter().all(|e| cong.contains(e)));
        }
    }

    #[test]
    fn lemmas_at_p3() {
        for part in 1..=4 {
            let c = weights_lemma(3, 2, part).unwrap();
            assert!(c.holds && c.complete, "{c:?}");
        }
        for part in 1..=3 {
            assert!(borel_lemma(3, part).unwrap().holds);
        }
    }

    #[test]
    fn lemmas_at_p2() {
        // Statements (3) of the weights lemma and (1) of the congruences mod p + 1 need p > 2.
        let holds: Vec<bool> = (1..=4)
            .map(|k| weights_lemma(2, 2, k).unwrap().holds)
            .collect();
        assert_eq!(holds, vec![true, true, false, true]);
        assert_eq!(weights_lemma(2, 2, 3).unwrap().counts, vec![1]);
        let holds: Vec<bool> = (1..=3).map(|k| borel_lemma(2, k).unwrap().holds).collect();
        assert_eq!(holds, vec![false, true, true]);
    }

    #[test]
    fn quadratic_fields() {
        let f = find_quadratic_field(2, 0).unwrap();
        assert_eq!(f.n, 5);
        assert_eq!(f.unit_order, 3);
        assert!(frobenius_differs(&f));
        for p in [3, 5, 7] {
            let f = find_quadratic_field(p, 1000).unwrap();
            let pi = p as i64;
            // Independent re-evaluation of both conditions.
            assert!(!is_square_mod(f.n.rem_euclid(pi), pi));
            assert_eq!(f.unit_order, 2 * (p + 1));
            assert_ne!(wieferich_value(p, f.d), 0);
            assert!(frobenius_differs(&f));
        }
    }
}
