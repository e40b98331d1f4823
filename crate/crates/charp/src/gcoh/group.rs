//! Finite groups given by multiplication tables.

use crate::ralg::{Elem, Mat, Ring};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::sync::Arc;

/// A finite group with elements `0..order` and a dense multiplication table.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    name: String,
    order: usize,
    table: Arc<Vec<u32>>,
    identity: usize,
    inverses: Vec<usize>,
    generators: Vec<usize>,
}

impl FiniteGroup {
    /// Build from a table `table[a * order + b] = a * b`. Group axioms are
    /// checked exhaustively for order up to 100 and on random triples above.
    pub fn from_table(
        name: &str,
        order: usize,
        table: Vec<u32>,
        generators: Vec<usize>,
    ) -> Result<FiniteGroup> {
        if order == 0 || table.len() != order * order || table.iter().any(|&x| x as usize >= order)
        {
            return Err(Error::Invalid(format!(
                "malformed multiplication table for {name}"
            )));
        }
        let m = |a: usize, b: usize| table[a * order + b] as usize;
        let identity = (0..order)
            .find(|&e| (0..order).all(|a| m(e, a) == a && m(a, e) == a))
            .ok_or_else(|| Error::Invalid(format!("{name} has no identity")))?;
        let mut inverses = vec![usize::MAX; order];
        for a in 0..order {
            let b = (0..order)
                .find(|&b| m(a, b) == identity)
                .ok_or_else(|| Error::Invalid(format!("{name}: element {a} has no inverse")))?;
            inverses[a] = b;
        }
        let assoc = |a: usize, b: usize, c: usize| m(m(a, b), c) == m(a, m(b, c));
        if order <= 100 {
            for a in 0..order {
                for b in 0..order {
                    for c in 0..order {
                        if !assoc(a, b, c) {
                            return Err(Error::Invalid(format!("{name} is not associative")));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(order as u64);
            for _ in 0..10_000 {
                let (a, b, c) = (
                    rng.gen_range(0..order),
                    rng.gen_range(0..order),
                    rng.gen_range(0..order),
                );
                if !assoc(a, b, c) {
                    return Err(Error::Invalid(format!("{name} is not associative")));
                }
            }
        }
        Ok(FiniteGroup {
            name: name.to_string(),
            order,
            table: Arc::new(table),
            identity,
            inverses,
            generators,
        })
    }

    /// The trivial group.
    pub fn trivial() -> FiniteGroup {
        FiniteGroup::cyclic(1)
    }

    /// The cyclic group `Z/n` written additively as `0..n`.
    pub fn cyclic(n: usize) -> FiniteGroup {
        let table = (0..n * n).map(|k| ((k / n + k % n) % n) as u32).collect();
        let gens = if n > 1 { vec![1] } else { vec![] };
        FiniteGroup::from_table(&format!("C{n}"), n, table, gens).expect("cyclic group")
    }

    /// The additive group of a finite ring.
    pub fn additive(ring: &Ring) -> Result<FiniteGroup> {
        let n = ring.order() as usize;
        if n > 4096 {
            return Err(Error::Budget(format!("additive group of order {n}")));
        }
        let els: Vec<Elem> = ring.elements().collect();
        let index: HashMap<Elem, usize> = els.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let mut table = vec![0u32; n * n];
        for a in 0..n {
            for b in 0..n {
                table[a * n + b] = index[&ring.add(els[a], els[b])] as u32;
            }
        }
        FiniteGroup::from_table(
            &format!("({}, +)", ring.name()),
            n,
            table,
            (0..n).filter(|&i| els[i] != 0).collect(),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b] as usize
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }

    /// `g a g^{-1}`.
    pub fn conj(&self, g: usize, a: usize) -> usize {
        self.mul(self.mul(g, a), self.inv(g))
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..self.order).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Direct product with elements `(a, b) = a * |other| + b`.
    pub fn direct_product(&self, other: &FiniteGroup) -> Result<FiniteGroup> {
        let (n, m) = (self.order, other.order);
        let order = n * m;
        let mut table = vec![0u32; order * order];
        for x in 0..order {
            for y in 0..order {
                let a = self.mul(x / m, y / m);
                let b = other.mul(x % m, y % m);
                table[x * order + y] = (a * m + b) as u32;
            }
        }
        let mut gens: Vec<usize> = self
            .generators
            .iter()
            .map(|&g| g * m + other.identity)
            .collect();
        gens.extend(other.generators.iter().map(|&h| self.identity * m + h));
        FiniteGroup::from_table(
            &format!("{} x {}", self.name, other.name),
            order,
            table,
            gens,
        )
    }

    /// Semidirect product `N ⋊ H` where `act(h, n)` is an action of `H` on `N` by
    /// automorphisms. Elements are `(n, h) = n * |H| + h` with
    /// `(n1, h1)(n2, h2) = (n1 * act(h1, n2), h1 h2)`.
    pub fn semidirect(
        n_grp: &FiniteGroup,
        h_grp: &FiniteGroup,
        act: impl Fn(usize, usize) -> usize,
    ) -> Result<FiniteGroup> {
        let (n, m) = (n_grp.order, h_grp.order);
        let order = n * m;
        if order > 20_000 {
            return Err(Error::Budget(format!(
                "semidirect product of order {order}"
            )));
        }
        let acts: Vec<usize> = (0..m)
            .flat_map(|h| (0..n).map(move |x| (h, x)))
            .map(|(h, x)| act(h, x))
            .collect();
        for h in 0..m {
            for a in 0..n {
                for b in 0..n {
                    if acts[h * n + n_grp.mul(a, b)] != n_grp.mul(acts[h * n + a], acts[h * n + b])
                    {
                        return Err(Error::Invalid("action is not by homomorphisms".into()));
                    }
                }
            }
        }
        let mut table = vec![0u32; order * order];
        for x in 0..order {
            let (n1, h1) = (x / m, x % m);
            for y in 0..order {
                let (n2, h2) = (y / m, y % m);
                let a = n_grp.mul(n1, acts[h1 * n + n2]);
                table[x * order + y] = (a * m + h_grp.mul(h1, h2)) as u32;
            }
        }
        let mut gens: Vec<usize> = n_grp
            .generators
            .iter()
            .map(|&g| g * m + h_grp.identity)
            .collect();
        gens.extend(h_grp.generators.iter().map(|&h| n_grp.identity * m + h));
        FiniteGroup::from_table(
            &format!("{} : {}", n_grp.name, h_grp.name),
            order,
            table,
            gens,
        )
    }

    /// Subgroup generated by the given elements, with the embedding of its elements.
    pub fn subgroup(&self, name: &str, gens: &[usize]) -> Result<(FiniteGroup, Vec<usize>)> {
        let mut elems = vec![self.identity];
        let mut index: HashMap<usize, usize> = HashMap::from([(self.identity, 0)]);
        let mut k = 0;
        while k < elems.len() {
            let a = elems[k];
            for &g in gens {
                let b = self.mul(a, g);
                if let std::collections::hash_map::Entry::Vacant(e) = index.entry(b) {
                    e.insert(elems.len());
                    elems.push(b);
                }
            }
            k += 1;
        }
        let n = elems.len();
        let mut table = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                table[i * n + j] = index[&self.mul(elems[i], elems[j])] as u32;
            }
        }
        let sub_gens = gens.iter().map(|g| index[g]).collect();
        Ok((FiniteGroup::from_table(name, n, table, sub_gens)?, elems))
    }
}

/// A finite matrix group together with its elements as matrices.
#[derive(Clone, Debug)]
pub struct MatrixGroup {
    pub group: FiniteGroup,
    pub matrices: Vec<Mat>,
}

impl MatrixGroup {
    /// The group generated by invertible matrices, enumerated by closure.
    pub fn generate(
        name: &str,
        ring: &Ring,
        dim: usize,
        gens: &[Mat],
        max_order: usize,
    ) -> Result<MatrixGroup> {
        for g in gens {
            if g.rows() != dim || g.cols() != dim {
                return Err(Error::Dimension(format!("generator is not {dim}x{dim}")));
            }
        }
        let id = Mat::identity(ring, dim);
        let mut mats = vec![id.clone()];
        let mut index: HashMap<Vec<Elem>, usize> = HashMap::from([(id.entries().to_vec(), 0)]);
        let mut k = 0;
        while k < mats.len() {
            for g in gens {
                let b = mats[k].mul(g)?;
                if !index.contains_key(b.entries()) {
                    if mats.len() >= max_order {
                        return Err(Error::Budget(format!(
                            "{name} has more than {max_order} elements"
                        )));
                    }
                    index.insert(b.entries().to_vec(), mats.len());
                    mats.push(b);
                }
            }
            k += 1;
        }
        let n = mats.len();
        let mut table = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                let c = mats[i].mul(&mats[j])?;
                table[i * n + j] = index[c.entries()] as u32;
            }
        }
        let gen_idx = gens.iter().map(|g| index[g.entries()]).collect();
        let group = FiniteGroup::from_table(name, n, table, gen_idx)?;
        Ok(MatrixGroup {
            group,
            matrices: mats,
        })
    }

    /// Index of a matrix in the group, if present.
    pub fn index_of(&self, m: &Mat) -> Option<usize> {
        self.matrices.iter().position(|x| x == m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_and_products() {
        let c3 = FiniteGroup::cyclic(3);
        assert_eq!(c3.element_order(1), 3);
        let k = FiniteGroup::cyclic(2)
            .direct_product(&FiniteGroup::cyclic(2))
            .unwrap();
        assert_eq!(k.order(), 4);
        assert!(k.is_abelian());
        let s3 = FiniteGroup::semidirect(&c3, &FiniteGroup::cyclic(2), |h, x| {
            if h == 0 {
                x
            } else {
                (3 - x) % 3
            }
        })
        .unwrap();
        assert_eq!(s3.order(), 6);
        assert!(!s3.is_abelian());
    }

    #[test]
    fn sl2_f2_closure() {
        let k = Ring::fp(2).unwrap();
        let a = Mat::from_ints(&k, &[vec![1, 1], vec![0, 1]]);
        let b = Mat::from_ints(&k, &[vec![1, 0], vec![1, 1]]);
        let g = MatrixGroup::generate("SL2(F2)", &k, 2, &[a, b], 100).unwrap();
        assert_eq!(g.group.order(), 6);
        assert!(!g.group.is_abelian());
    }
}
