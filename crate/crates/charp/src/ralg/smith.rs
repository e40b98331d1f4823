//! Diagonalization over local rings with maximal ideal `(p)`.

use super::{Elem, Mat, Ring};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// A finitely generated module over a local ring `R` with `p^e = 0`,
/// written as `⊕ R/p^{e_i} ⊕ R^free` with `0 < e_i < e`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleStructure {
    pub p: u64,
    /// Residue degree of the ring (so `|R/p| = p^r`).
    pub r: usize,
    /// Nilpotency exponent of the ring.
    pub e: u32,
    /// Torsion exponents, sorted ascending.
    pub torsion: Vec<u32>,
    pub free: usize,
}

impl ModuleStructure {
    pub fn zero(ring: &Ring) -> ModuleStructure {
        ModuleStructure {
            p: ring.p(),
            r: ring.degree(),
            e: ring.exponent(),
            torsion: vec![],
            free: 0,
        }
    }

    /// Structure of `R^n`.
    pub fn free(ring: &Ring, n: usize) -> ModuleStructure {
        ModuleStructure {
            free: n,
            ..ModuleStructure::zero(ring)
        }
    }

    /// Build from a list of exponents in `[0, e]`; zeros are dropped and `e` counts as free.
    pub fn from_exponents(ring: &Ring, exps: impl IntoIterator<Item = u32>) -> ModuleStructure {
        let mut m = ModuleStructure::zero(ring);
        for x in exps {
            if x == 0 {
                continue;
            }
            if x >= m.e {
                m.free += 1;
            } else {
                m.torsion.push(x);
            }
        }
        m.torsion.sort_unstable();
        m
    }

    pub fn is_zero(&self) -> bool {
        self.torsion.is_empty() && self.free == 0
    }

    /// Minimal number of generators.
    pub fn num_generators(&self) -> usize {
        self.torsion.len() + self.free
    }

    /// Length as an `R`-module; over a field this is the dimension.
    pub fn length(&self) -> u64 {
        self.torsion.iter().map(|&x| x as u64).sum::<u64>() + self.e as u64 * self.free as u64
    }

    /// Whether the module is killed by `p`.
    pub fn is_p_torsion(&self) -> bool {
        self.torsion.iter().all(|&x| x <= 1) && (self.free == 0 || self.e == 1)
    }

    /// All exponents including free summands (as `e`), ascending.
    pub fn exponents(&self) -> Vec<u32> {
        let mut v = self.torsion.clone();
        v.extend(std::iter::repeat_n(self.e, self.free));
        v
    }
}

impl fmt::Display for ModuleStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = vec![];
        for &t in &self.torsion {
            parts.push(format!("R/p^{t}"));
        }
        if self.free > 0 {
            parts.push(format!("R^{}", self.free));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// Output of [`diagonalize`]: `u * m * v = d` with `u`, `v` invertible.
#[derive(Clone, Debug)]
pub struct Diagonalization {
    pub u: Mat,
    pub v: Mat,
    pub d: Mat,
    /// Valuations of the nonzero diagonal entries, ascending; `d[i][i] = p^{vals[i]}`.
    pub vals: Vec<u32>,
    /// Structure of the cokernel `R^rows / m R^cols`.
    pub cokernel: ModuleStructure,
    /// Columns generate `{x : m x = 0}`.
    pub kernel: Mat,
}

/// Smith-type diagonalization over `Z/p^e`, `GR(p^e, r)`, `W_2` of a finite field, or a field.
pub fn diagonalize(m: &Mat) -> Result<Diagonalization> {
    let ring = m.ring().clone();
    if !ring.is_local() {
        return Err(Error::NotLocal(ring.name()));
    }
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut u = Mat::identity(&ring, rows);
    let mut v = Mat::identity(&ring, cols);
    let mut vals = vec![];
    let n = rows.min(cols);
    for t in 0..n {
        let mut best: Option<(u32, usize, usize)> = None;
        'search: for i in t..rows {
            for j in t..cols {
                if let Some(val) = ring.valuation(a.get(i, j)) {
                    if best.is_none_or(|b| val < b.0) {
                        best = Some((val, i, j));
                        if val == 0 {
                            break 'search;
                        }
                    }
                }
            }
        }
        let Some((val, bi, bj)) = best else { break };
        a.swap_rows(t, bi);
        u.swap_rows(t, bi);
        a.swap_cols(t, bj);
        v.swap_cols(t, bj);
        let piv = a.get(t, t);
        for i in t + 1..rows {
            let x = a.get(i, t);
            if x != 0 {
                let f = ring.neg(ring.divexact(x, piv)?);
                a.add_row_multiple(i, t, f);
                u.add_row_multiple(i, t, f);
            }
        }
        for j in t + 1..cols {
            let x = a.get(t, j);
            if x != 0 {
                let f = ring.neg(ring.divexact(x, piv)?);
                a.add_col_multiple(j, t, f);
                v.add_col_multiple(j, t, f);
            }
        }
        let target = ring.p_pow(val);
        let unit = ring.divexact(a.get(t, t), target)?;
        let uinv = ring.inv(unit)?;
        a.scale_row(t, uinv);
        u.scale_row(t, uinv);
        debug_assert_eq!(a.get(t, t), target);
        vals.push(val);
    }
    let k = vals.len();
    let e = ring.exponent();
    let mut exps: Vec<u32> = vals.clone();
    exps.extend(std::iter::repeat_n(e, rows - k));
    let cokernel = ModuleStructure::from_exponents(&ring, exps);
    let mut kcols = vec![];
    for (i, &val) in vals.iter().enumerate() {
        if val > 0 {
            let c = ring.p_pow(e - val);
            kcols.push(
                v.col(i)
                    .iter()
                    .map(|&x| ring.mul(c, x))
                    .collect::<Vec<Elem>>(),
            );
        }
    }
    for i in k..cols {
        kcols.push(v.col(i));
    }
    let kernel = Mat::from_columns(&ring, cols, &kcols);
    Ok(Diagonalization {
        u,
        v,
        d: a,
        vals,
        cokernel,
        kernel,
    })
}

/// Solve `m x = b` over a local ring via diagonalization.
pub(crate) fn solve_local(m: &Mat, b: &[Elem]) -> Result<Option<Vec<Elem>>> {
    let ring = m.ring().clone();
    let dg = diagonalize(m)?;
    let ub = dg.u.apply(b)?;
    let mut y = vec![0; m.cols()];
    for (i, &val) in dg.vals.iter().enumerate() {
        let target = ring.p_pow(val);
        match ring.divexact(ub[i], target) {
            Ok(z) => y[i] = z,
            Err(_) => return Ok(None),
        }
    }
    if ub[dg.vals.len()..].iter().any(|&x| x != 0) {
        return Ok(None);
    }
    Ok(Some(dg.v.apply(&y)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(m: &Mat) -> Diagonalization {
        let dg = diagonalize(m).unwrap();
        assert_eq!(dg.u.mul(m).unwrap().mul(&dg.v).unwrap(), dg.d);
        for i in 0..dg.d.rows() {
            for j in 0..dg.d.cols() {
                if i != j {
                    assert_eq!(dg.d.get(i, j), 0);
                }
            }
        }
        assert!(m.mul(&dg.kernel).unwrap().is_zero());
        dg
    }

    #[test]
    fn cokernel_examples() {
        let z4 = Ring::zpe(2, 2).unwrap();
        let dg = check(&Mat::from_ints(&z4, &[vec![2, 2], vec![0, 2]]));
        assert_eq!(dg.cokernel.torsion, vec![1, 1]);
        assert_eq!(dg.cokernel.free, 0);
        let z9 = Ring::zpe(3, 2).unwrap();
        let dg = check(&Mat::from_ints(&z9, &[vec![3]]));
        assert_eq!(dg.cokernel.torsion, vec![1]);
        let dg = check(&Mat::identity(&z9, 3));
        assert!(dg.cokernel.is_zero());
        assert_eq!(dg.kernel.cols(), 0);
    }

    #[test]
    fn kernel_generators_over_z4() {
        let z4 = Ring::zpe(2, 2).unwrap();
        let dg = check(&Mat::from_ints(&z4, &[vec![2, 0, 1]]));
        assert_eq!(dg.cokernel, ModuleStructure::zero(&z4));
        // kernel of (2,0,1) is free of rank 2
        assert_eq!(dg.kernel.cols(), 2);
    }

    #[test]
    fn u_and_v_invertible_over_galois_ring() {
        let gr = Ring::gr(2, 2, 2).unwrap();
        let m = Mat::from_rows(&gr, 2, 3, vec![vec![2, 6, 3], vec![4, 2, 14]]).unwrap();
        let dg = check(&m);
        let ui = dg.u.inverse().unwrap();
        assert_eq!(ui.mul(&dg.u).unwrap(), Mat::identity(&gr, 2));
        let vi = dg.v.inverse().unwrap();
        assert_eq!(vi.mul(&dg.v).unwrap(), Mat::identity(&gr, 3));
    }
}
