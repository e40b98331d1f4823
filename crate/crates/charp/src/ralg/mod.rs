//! Exact arithmetic over finite coefficient rings and the linear-algebra kernel.
//!
//! Supported rings are the prime fields `F_p`, Galois fields `F_{p^r}`, the
//! rings `Z/p^e`, Galois rings `GR(p^e, r)` and length-2 Witt vectors `W_2(B)`
//! over any of these. Elements are encoded as `u64` indices in `[0, |R|)`:
//! polynomial coefficients are base-`p^e` digits, and a Witt pair `(a0, a1)` is
//! `a0 + |B| * a1`.

mod mat;
mod smith;
mod sparse;

pub use mat::{echelon, Echelon, Mat};
pub use smith::{diagonalize, Diagonalization, ModuleStructure};
pub use sparse::{normalize, RowReducer, RowStatus, SpMat, SpVec};

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Ring elements are dense indices into the finite ring.
pub type Elem = u64;

const MAX_R: usize = 16;
const TABLE_LIMIT: u64 = 1024;

/// Descriptor of a coefficient ring.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RingSpec {
    /// `F_p`.
    PrimeField { p: u64 },
    /// `F_p[x]/(modulus)`, modulus monic of degree `r`, coefficients low to high.
    GaloisField { p: u64, r: usize, modulus: Vec<u64> },
    /// `Z/p^e`.
    IntegersModPE { p: u64, e: u32 },
    /// `(Z/p^e)[x]/(modulus)` with the modulus reducing to an irreducible polynomial mod `p`.
    GaloisRing {
        p: u64,
        e: u32,
        r: usize,
        modulus: Vec<u64>,
    },
    /// Length-2 Witt vectors over `base`.
    Witt2 { base: Box<RingSpec> },
}

enum Kind {
    Zpe {
        pe: u64,
    },
    Gr {
        pe: u64,
        r: usize,
        modulus: Vec<u64>,
        frob_x: Elem,
    },
    Witt2 {
        base: Ring,
        ob: u64,
    },
}

struct Tables {
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>,
}

struct Inner {
    spec: RingSpec,
    p: u64,
    e: u32,
    r: usize,
    order: u64,
    kind: Kind,
    tables: Option<Tables>,
}

/// A finite commutative coefficient ring. Cheap to clone.
#[derive(Clone)]
pub struct Ring(Arc<Inner>);

impl PartialEq for Ring {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.spec == other.0.spec
    }
}
impl Eq for Ring {}

impl fmt::Debug for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ring({})", self.name())
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn checked_pow(b: u64, e: u64) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..e {
        acc = acc.checked_mul(b)?;
    }
    Some(acc)
}

/// Polynomials over `Z/m`, coefficients low to high, used for modulus checks.
mod poly {
    pub fn trim(a: &mut Vec<u64>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }
    fn inv_mod(a: u64, p: u64) -> u64 {
        super::inv_mod_int(a, p).expect("unit in prime field")
    }
    pub fn rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut a = a.to_vec();
        trim(&mut a);
        let mut b = b.to_vec();
        trim(&mut b);
        let db = b.len() - 1;
        let lc_inv = inv_mod(b[db], p);
        while a.len() > db {
            let da = a.len() - 1;
            let c = a[da] * lc_inv % p;
            for i in 0..=db {
                let t = c * b[i] % p;
                a[da - db + i] = (a[da - db + i] + p - t) % p;
            }
            trim(&mut a);
        }
        a
    }
    pub fn mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % p;
            }
        }
        rem(&out, m, p)
    }
    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        trim(&mut a);
        trim(&mut b);
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }
    /// Ben-Or irreducibility test over `F_p`.
    pub fn irreducible(f: &[u64], p: u64) -> bool {
        let r = f.len() - 1;
        if r == 0 {
            return false;
        }
        if r == 1 {
            return true;
        }
        let x = vec![0, 1];
        let mut xp = x.clone();
        for _ in 0..r / 2 {
            let mut acc = vec![1u64];
            for _ in 0..p {
                acc = mulmod(&acc, &xp, f, p);
            }
            xp = acc;
            let mut diff = xp.clone();
            diff.resize(diff.len().max(2), 0);
            diff[1] = (diff[1] + p - 1) % p;
            let g = gcd(f, &diff, p);
            if g.len() > 1 {
                return false;
            }
        }
        true
    }
}

pub(crate) fn inv_mod_int(a: u64, m: u64) -> Option<u64> {
    let (mut t, mut nt): (i128, i128) = (0, 1);
    let (mut r, mut nr): (i128, i128) = (m as i128, (a % m) as i128);
    while nr != 0 {
        let q = r / nr;
        (t, nt) = (nt, t - q * nt);
        (r, nr) = (nr, r - q * nr);
    }
    if r != 1 {
        return None;
    }
    if t < 0 {
        t += m as i128;
    }
    Some(t as u64)
}

/// Binomial coefficient as `u128` (small arguments only).
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

impl Ring {
    /// Construct a ring from its descriptor, validating the invariants.
    pub fn new(spec: RingSpec) -> Result<Ring> {
        let inner = match &spec {
            RingSpec::PrimeField { p } => Self::zpe_inner(spec.clone(), *p, 1)?,
            RingSpec::IntegersModPE { p, e } => Self::zpe_inner(spec.clone(), *p, *e)?,
            RingSpec::GaloisField { p, r, modulus } => {
                Self::gr_inner(spec.clone(), *p, 1, *r, modulus.clone())?
            }
            RingSpec::GaloisRing { p, e, r, modulus } => {
                Self::gr_inner(spec.clone(), *p, *e, *r, modulus.clone())?
            }
            RingSpec::Witt2 { base } => {
                let b = Ring::new((**base).clone())?;
                let ob = b.order();
                let order = ob
                    .checked_mul(ob)
                    .ok_or_else(|| Error::InvalidSpec("Witt2 base too large".into()))?;
                Inner {
                    spec: spec.clone(),
                    p: b.p(),
                    e: b.0.e + 1,
                    r: b.0.r,
                    order,
                    kind: Kind::Witt2 { base: b, ob },
                    tables: None,
                }
            }
        };
        let mut ring = Ring(Arc::new(inner));
        if ring.order() <= TABLE_LIMIT && !matches!(ring.0.kind, Kind::Zpe { .. }) {
            let tables = ring.build_tables();
            let mut inner = Arc::try_unwrap(ring.0).ok().expect("fresh ring");
            inner.tables = Some(tables);
            ring = Ring(Arc::new(inner));
        }
        Ok(ring)
    }

    fn zpe_inner(spec: RingSpec, p: u64, e: u32) -> Result<Inner> {
        if !is_prime(p) {
            return Err(Error::InvalidSpec(format!("{p} is not prime")));
        }
        if e == 0 {
            return Err(Error::InvalidSpec("exponent e must be >= 1".into()));
        }
        let pe = checked_pow(p, e as u64)
            .filter(|&x| x < (1u64 << 31))
            .ok_or_else(|| Error::InvalidSpec("p^e too large".into()))?;
        Ok(Inner {
            spec,
            p,
            e,
            r: 1,
            order: pe,
            kind: Kind::Zpe { pe },
            tables: None,
        })
    }

    fn gr_inner(spec: RingSpec, p: u64, e: u32, r: usize, modulus: Vec<u64>) -> Result<Inner> {
        if !is_prime(p) {
            return Err(Error::InvalidSpec(format!("{p} is not prime")));
        }
        if e == 0 || r == 0 || r > MAX_R {
            return Err(Error::InvalidSpec(format!(
                "need e >= 1 and 1 <= r <= {MAX_R}"
            )));
        }
        if modulus.len() != r + 1 || modulus[r] != 1 {
            return Err(Error::InvalidSpec(
                "modulus must be monic of degree r".into(),
            ));
        }
        let pe = checked_pow(p, e as u64)
            .filter(|&x| x < (1u64 << 31))
            .ok_or_else(|| Error::InvalidSpec("p^e too large".into()))?;
        if modulus.iter().any(|&c| c >= pe) {
            return Err(Error::InvalidSpec(
                "modulus coefficients must lie in [0, p^e)".into(),
            ));
        }
        let red: Vec<u64> = modulus.iter().map(|c| c % p).collect();
        if !poly::irreducible(&red, p) {
            return Err(Error::ReducibleModulus(format!("{red:?} over F_{p}")));
        }
        let order = checked_pow(pe, r as u64)
            .filter(|&x| x < (1u64 << 62))
            .ok_or_else(|| Error::InvalidSpec("ring too large".into()))?;
        let mut inner = Inner {
            spec,
            p,
            e,
            r,
            order,
            kind: Kind::Gr {
                pe,
                r,
                modulus,
                frob_x: 0,
            },
            tables: None,
        };
        let frob_x = Ring::frobenius_of_x(&inner);
        if let Kind::Gr { frob_x: fx, .. } = &mut inner.kind {
            *fx = frob_x;
        }
        Ok(inner)
    }

    /// The lift of `x -> x^p` sends `x` to the root of the modulus congruent to `x^p`.
    fn frobenius_of_x(inner: &Inner) -> Elem {
        let tmp = Ring(Arc::new(Inner {
            spec: inner.spec.clone(),
            p: inner.p,
            e: inner.e,
            r: inner.r,
            order: inner.order,
            kind: match &inner.kind {
                Kind::Gr { pe, r, modulus, .. } => Kind::Gr {
                    pe: *pe,
                    r: *r,
                    modulus: modulus.clone(),
                    frob_x: 0,
                },
                _ => unreachable!(),
            },
            tables: None,
        }));
        let (pe, r, modulus) = match &inner.kind {
            Kind::Gr { pe, r, modulus, .. } => (*pe, *r, modulus.clone()),
            _ => unreachable!(),
        };
        let x = if r == 1 {
            (pe - modulus[0] % pe) % pe
        } else {
            pe
        };
        let mut y = tmp.pow(x, inner.p);
        let f = |y: Elem| {
            let mut acc = 0;
            for c in modulus.iter().rev() {
                acc = tmp.add(tmp.mul(acc, y), *c);
            }
            acc
        };
        let df = |y: Elem| {
            let mut acc = 0;
            for (i, c) in modulus.iter().enumerate().skip(1).rev() {
                let coeff = (*c as u128 * i as u128 % pe as u128) as u64;
                acc = tmp.add(tmp.mul(acc, y), coeff);
            }
            acc
        };
        for _ in 0..inner.e + 1 {
            let fy = f(y);
            if fy == 0 {
                break;
            }
            let inv = tmp.inv(df(y)).expect("separable modulus");
            y = tmp.sub(y, tmp.mul(fy, inv));
        }
        y
    }

    fn build_tables(&self) -> Tables {
        let n = self.order() as usize;
        let mut add = vec![0u32; n * n];
        let mut mul = vec![0u32; n * n];
        let mut neg = vec![0u32; n];
        let mut inv = vec![u32::MAX; n];
        for a in 0..n {
            neg[a] = self.slow_neg(a as u64) as u32;
            for b in 0..n {
                add[a * n + b] = self.slow_add(a as u64, b as u64) as u32;
                mul[a * n + b] = self.slow_mul(a as u64, b as u64) as u32;
            }
        }
        for a in 0..n {
            if inv[a] != u32::MAX {
                continue;
            }
            for b in 0..n {
                if mul[a * n + b] == 1 {
                    inv[a] = b as u32;
                    inv[b] = a as u32;
                    break;
                }
            }
        }
        Tables { add, mul, neg, inv }
    }

    /// `F_p`.
    pub fn fp(p: u64) -> Result<Ring> {
        Ring::new(RingSpec::PrimeField { p })
    }

    /// `Z/p^e`.
    pub fn zpe(p: u64, e: u32) -> Result<Ring> {
        Ring::new(RingSpec::IntegersModPE { p, e })
    }

    /// The first irreducible monic polynomial of degree `r` over `F_p`, ordered
    /// by the integer whose base-`p` digits are its lower coefficients.
    pub fn default_modulus(p: u64, r: usize) -> Result<Vec<u64>> {
        if !is_prime(p) || r == 0 || r > MAX_R {
            return Err(Error::InvalidSpec(format!(
                "no default modulus for p={p}, r={r}"
            )));
        }
        let count =
            checked_pow(p, r as u64).ok_or_else(|| Error::InvalidSpec("too large".into()))?;
        for code in 0..count {
            let mut f = Vec::with_capacity(r + 1);
            let mut c = code;
            for _ in 0..r {
                f.push(c % p);
                c /= p;
            }
            f.push(1);
            if poly::irreducible(&f, p) {
                return Ok(f);
            }
        }
        Err(Error::Internal("no irreducible polynomial found".into()))
    }

    /// `F_{p^r}` with the default modulus.
    pub fn gf(p: u64, r: usize) -> Result<Ring> {
        if r == 1 {
            return Ring::fp(p);
        }
        let modulus = Ring::default_modulus(p, r)?;
        Ring::new(RingSpec::GaloisField { p, r, modulus })
    }

    /// `GR(p^e, r)` lifting the default modulus of `F_{p^r}` coefficientwise.
    pub fn gr(p: u64, e: u32, r: usize) -> Result<Ring> {
        if r == 1 {
            return Ring::zpe(p, e);
        }
        let modulus = Ring::default_modulus(p, r)?;
        Ring::new(RingSpec::GaloisRing { p, e, r, modulus })
    }

    /// `GR(p^e, r)` for an explicit monic modulus (coefficients in `[0, p^e)`).
    pub fn gr_with_modulus(p: u64, e: u32, modulus: Vec<u64>) -> Result<Ring> {
        let r = modulus.len().saturating_sub(1);
        if e == 1 {
            Ring::new(RingSpec::GaloisField { p, r, modulus })
        } else {
            Ring::new(RingSpec::GaloisRing { p, e, r, modulus })
        }
    }

    /// `W_2(base)`.
    pub fn witt2(base: &Ring) -> Result<Ring> {
        Ring::new(RingSpec::Witt2 {
            base: Box::new(base.spec().clone()),
        })
    }

    pub fn spec(&self) -> &RingSpec {
        &self.0.spec
    }

    /// Residue characteristic.
    pub fn p(&self) -> u64 {
        self.0.p
    }

    /// Number of elements.
    pub fn order(&self) -> u64 {
        self.0.order
    }

    /// Residue degree `r`.
    pub fn degree(&self) -> usize {
        self.0.r
    }

    /// Exponent `e` with `p^e = 0` (for Witt vectors over a field this is 2).
    pub fn exponent(&self) -> u32 {
        self.0.e
    }

    pub fn is_field(&self) -> bool {
        match &self.0.kind {
            Kind::Zpe { .. } | Kind::Gr { .. } => self.0.e == 1,
            Kind::Witt2 { .. } => false,
        }
    }

    /// Local rings with maximal ideal `(p)`: `Z/p^e`, Galois rings and `W_2` of a field.
    pub fn is_local(&self) -> bool {
        match &self.0.kind {
            Kind::Witt2 { base, .. } => base.is_field(),
            _ => true,
        }
    }

    /// The base ring of a Witt vector ring.
    pub fn witt_base(&self) -> Option<&Ring> {
        match &self.0.kind {
            Kind::Witt2 { base, .. } => Some(base),
            _ => None,
        }
    }

    /// Short human readable name.
    pub fn name(&self) -> String {
        match &self.0.spec {
            RingSpec::PrimeField { p } => format!("F_{p}"),
            RingSpec::GaloisField { p, r, modulus } => format!("F_{}^{} mod {:?}", p, r, modulus),
            RingSpec::IntegersModPE { p, e } => format!("Z/{}^{}", p, e),
            RingSpec::GaloisRing { p, e, r, modulus } => {
                format!("GR({}^{},{}) mod {:?}", p, e, r, modulus)
            }
            RingSpec::Witt2 { .. } => format!("W2({})", self.witt_base().unwrap().name()),
        }
    }

    pub fn zero(&self) -> Elem {
        0
    }

    pub fn one(&self) -> Elem {
        1
    }

    /// Iterator over all elements.
    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.order()
    }

    /// Image of an integer.
    pub fn from_int(&self, n: i64) -> Elem {
        match &self.0.kind {
            Kind::Zpe { pe } | Kind::Gr { pe, .. } => (n.rem_euclid(*pe as i64)) as u64,
            Kind::Witt2 { .. } => {
                let mut acc = 0;
                let mut base = 1;
                let mut k = n.unsigned_abs();
                while k > 0 {
                    if k & 1 == 1 {
                        acc = self.add(acc, base);
                    }
                    base = self.add(base, base);
                    k >>= 1;
                }
                if n < 0 {
                    self.neg(acc)
                } else {
                    acc
                }
            }
        }
    }

    /// Representative in `[0, p^e)` for elements of `Z/p^e`; panics otherwise.
    pub fn to_int(&self, x: Elem) -> u64 {
        match &self.0.kind {
            Kind::Zpe { .. } => x,
            _ => panic!("to_int only defined on Z/p^e"),
        }
    }

    #[inline]
    fn decode(&self, x: Elem, pe: u64, r: usize) -> [u64; MAX_R] {
        let mut out = [0u64; MAX_R];
        let mut x = x;
        for slot in out.iter_mut().take(r) {
            *slot = x % pe;
            x /= pe;
        }
        out
    }

    #[inline]
    fn encode(&self, c: &[u64], pe: u64) -> Elem {
        let mut acc = 0u64;
        for &v in c.iter().rev() {
            acc = acc * pe + v;
        }
        acc
    }

    /// Coefficients of a polynomial-type element (length `r`).
    pub fn coefficients(&self, x: Elem) -> Vec<u64> {
        match &self.0.kind {
            Kind::Zpe { .. } => vec![x],
            Kind::Gr { pe, r, .. } => self.decode(x, *pe, *r)[..*r].to_vec(),
            Kind::Witt2 { ob, .. } => vec![x % ob, x / ob],
        }
    }

    /// Element with the given polynomial coefficients (Witt: the pair).
    pub fn from_coefficients(&self, c: &[u64]) -> Elem {
        match &self.0.kind {
            Kind::Zpe { pe } => c.first().copied().unwrap_or(0) % pe,
            Kind::Gr { pe, r, .. } => {
                let mut v = [0u64; MAX_R];
                for (i, &x) in c.iter().take(*r).enumerate() {
                    v[i] = x % pe;
                }
                self.encode(&v[..*r], *pe)
            }
            Kind::Witt2 { ob, .. } => c[0] % ob + ob * (c.get(1).copied().unwrap_or(0) % ob),
        }
    }

    /// Element `(a0, a1)` of a Witt vector ring.
    pub fn witt_pair(&self, a0: Elem, a1: Elem) -> Elem {
        match &self.0.kind {
            Kind::Witt2 { ob, .. } => a0 + ob * a1,
            _ => panic!("witt_pair on non-Witt ring"),
        }
    }

    /// Components `(a0, a1)` of a Witt vector.
    pub fn witt_components(&self, x: Elem) -> (Elem, Elem) {
        match &self.0.kind {
            Kind::Witt2 { ob, .. } => (x % ob, x / ob),
            _ => panic!("witt_components on non-Witt ring"),
        }
    }

    /// Render an element for messages.
    pub fn fmt_elem(&self, x: Elem) -> String {
        match &self.0.kind {
            Kind::Zpe { .. } => format!("{x}"),
            Kind::Gr { r, .. } => {
                let c = self.coefficients(x);
                let mut terms = vec![];
                for (i, v) in c.iter().enumerate().take(*r) {
                    if *v == 0 {
                        continue;
                    }
                    terms.push(match i {
                        0 => format!("{v}"),
                        1 => format!("{v}*x"),
                        _ => format!("{v}*x^{i}"),
                    });
                }
                if terms.is_empty() {
                    "0".into()
                } else {
                    terms.join("+")
                }
            }
            Kind::Witt2 { base, .. } => {
                let (a0, a1) = self.witt_components(x);
                format!("({}, {})", base.fmt_elem(a0), base.fmt_elem(a1))
            }
        }
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        match &self.0.kind {
            Kind::Zpe { pe } => {
                let s = a + b;
                if s >= *pe {
                    s - pe
                } else {
                    s
                }
            }
            _ => match &self.0.tables {
                Some(t) => t.add[(a * self.0.order + b) as usize] as u64,
                None => self.slow_add(a, b),
            },
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        match &self.0.kind {
            Kind::Zpe { pe } => {
                if a == 0 {
                    0
                } else {
                    pe - a
                }
            }
            _ => match &self.0.tables {
                Some(t) => t.neg[a as usize] as u64,
                None => self.slow_neg(a),
            },
        }
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        match &self.0.kind {
            Kind::Zpe { pe } => {
                if a >= b {
                    a - b
                } else {
                    a + pe - b
                }
            }
            _ => self.add(a, self.neg(b)),
        }
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        match &self.0.kind {
            Kind::Zpe { pe } => a * b % pe,
            _ => match &self.0.tables {
                Some(t) => t.mul[(a * self.0.order + b) as usize] as u64,
                None => self.slow_mul(a, b),
            },
        }
    }

    fn slow_add(&self, a: Elem, b: Elem) -> Elem {
        match &self.0.kind {
            Kind::Zpe { pe } => (a + b) % pe,
            Kind::Gr { pe, r, .. } => {
                let x = self.decode(a, *pe, *r);
                let y = self.decode(b, *pe, *r);
                let mut z = [0u64; MAX_R];
                for i in 0..*r {
                    z[i] = (x[i] + y[i]) % pe;
                }
                self.encode(&z[..*r], *pe)
            }
            Kind::Witt2 { base, ob } => {
                let (a0, a1) = (a % ob, a / ob);
                let (b0, b1) = (b % ob, b / ob);
                let s0 = base.add(a0, b0);
                let s1 = base.sub(base.add(a1, b1), witt_carry(base, a0, b0));
                s0 + ob * s1
            }
        }
    }

    fn slow_neg(&self, a: Elem) -> Elem {
        match &self.0.kind {
            Kind::Zpe { pe } => (pe - a % pe) % pe,
            Kind::Gr { pe, r, .. } => {
                let x = self.decode(a, *pe, *r);
                let mut z = [0u64; MAX_R];
                for i in 0..*r {
                    z[i] = (pe - x[i]) % pe;
                }
                self.encode(&z[..*r], *pe)
            }
            Kind::Witt2 { base, ob } => {
                let (a0, a1) = (a % ob, a / ob);
                let x0 = base.neg(a0);
                let x1 = base.sub(witt_carry(base, a0, x0), a1);
                x0 + ob * x1
            }
        }
    }

    fn slow_mul(&self, a: Elem, b: Elem) -> Elem {
        match &self.0.kind {
            Kind::Zpe { pe } => a * b % pe,
            Kind::Gr { pe, r, modulus, .. } => {
                let (pe, r) = (*pe, *r);
                let x = self.decode(a, pe, r);
                let y = self.decode(b, pe, r);
                let mut prod = [0u128; 2 * MAX_R];
                for i in 0..r {
                    if x[i] == 0 {
                        continue;
                    }
                    for j in 0..r {
                        prod[i + j] += x[i] as u128 * y[j] as u128;
                    }
                }
                let pe128 = pe as u128;
                for v in prod.iter_mut().take(2 * r) {
                    *v %= pe128;
                }
                for k in (r..2 * r - 1).rev() {
                    let c = prod[k];
                    if c == 0 {
                        continue;
                    }
                    prod[k] = 0;
                    for i in 0..r {
                        let t = c * modulus[i] as u128 % pe128;
                        prod[k - r + i] = (prod[k - r + i] + pe128 - t) % pe128;
                    }
                }
                let mut z = [0u64; MAX_R];
                for i in 0..r {
                    z[i] = prod[i] as u64;
                }
                self.encode(&z[..r], pe)
            }
            Kind::Witt2 { base, ob } => {
                let p = self.0.p;
                let (a0, a1) = (a % ob, a / ob);
                let (b0, b1) = (b % ob, b / ob);
                let c0 = base.mul(a0, b0);
                let t1 = base.mul(base.pow(a0, p), b1);
                let t2 = base.mul(base.pow(b0, p), a1);
                let t3 = base.mul(base.from_int(p as i64), base.mul(a1, b1));
                c0 + ob * base.add(base.add(t1, t2), t3)
            }
        }
    }

    /// `a^n`.
    pub fn pow(&self, a: Elem, n: u64) -> Elem {
        let mut acc = self.one();
        let mut base = a;
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        acc
    }

    /// Whether `a` is a unit.
    pub fn is_unit(&self, a: Elem) -> bool {
        match &self.0.kind {
            Kind::Zpe { .. } => !a.is_multiple_of(self.0.p),
            Kind::Gr { .. } => self.reduce_mod_p_elem(a) != 0,
            Kind::Witt2 { base, ob } => {
                let (a0, a1) = (a % ob, a / ob);
                let p = self.0.p;
                base.is_unit(a0)
                    && base
                        .is_unit(base.add(base.pow(a0, p), base.mul(base.from_int(p as i64), a1)))
            }
        }
    }

    /// Multiplicative inverse; errors on non-units.
    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if let Some(t) = &self.0.tables {
            let v = t.inv[a as usize];
            return if v == u32::MAX {
                Err(Error::NotInvertible(format!(
                    "{} in {}",
                    self.fmt_elem(a),
                    self.name()
                )))
            } else {
                Ok(v as u64)
            };
        }
        match &self.0.kind {
            Kind::Zpe { pe } => inv_mod_int(a, *pe)
                .ok_or_else(|| Error::NotInvertible(format!("{} in {}", a, self.name()))),
            Kind::Gr { .. } => {
                if !self.is_unit(a) {
                    return Err(Error::NotInvertible(format!(
                        "{} in {}",
                        self.fmt_elem(a),
                        self.name()
                    )));
                }
                let p = self.0.p;
                let r = self.0.r as u64;
                let units = (checked_pow(p, r).unwrap() - 1)
                    * checked_pow(p, r * (self.0.e as u64 - 1)).unwrap();
                Ok(self.pow(a, units - 1))
            }
            Kind::Witt2 { base, ob } => {
                let p = self.0.p;
                let (a0, a1) = (a % ob, a / ob);
                let err =
                    || Error::NotInvertible(format!("{} in {}", self.fmt_elem(a), self.name()));
                let b0 = base.inv(a0).map_err(|_| err())?;
                let denom = base.add(base.pow(a0, p), base.mul(base.from_int(p as i64), a1));
                let dinv = base.inv(denom).map_err(|_| err())?;
                let b1 = base.neg(base.mul(base.mul(base.pow(b0, p), a1), dinv));
                Ok(b0 + ob * b1)
            }
        }
    }

    /// The Frobenius endomorphism: `x -> x^p` on fields, its unique lift on
    /// Galois rings, the identity on `Z/p^e`, componentwise on `W_2` of a field.
    pub fn frobenius(&self, a: Elem) -> Elem {
        match &self.0.kind {
            Kind::Zpe { .. } => a,
            Kind::Gr { pe, r, frob_x, .. } => {
                let c = self.decode(a, *pe, *r);
                let mut acc = 0;
                for i in (0..*r).rev() {
                    acc = self.add(self.mul(acc, *frob_x), c[i]);
                }
                acc
            }
            Kind::Witt2 { base, ob } => {
                let (a0, a1) = (a % ob, a / ob);
                base.frobenius(a0) + ob * base.frobenius(a1)
            }
        }
    }

    /// `frobenius^k`.
    pub fn frobenius_pow(&self, a: Elem, k: usize) -> Elem {
        let mut x = a;
        for _ in 0..k {
            x = self.frobenius(x);
        }
        x
    }

    /// Inverse of the Frobenius (an automorphism on all supported rings whose
    /// residue field is finite).
    pub fn frobenius_inv(&self, a: Elem) -> Elem {
        let r = self.0.r.max(1);
        self.frobenius_pow(a, r - 1)
    }

    /// The residue field `R/p` (for `W_2(k)`: `k`).
    pub fn residue_field(&self) -> Result<Ring> {
        match &self.0.kind {
            Kind::Zpe { .. } => Ring::fp(self.0.p),
            Kind::Gr { modulus, r, .. } => {
                if *r == 1 {
                    return Ring::fp(self.0.p);
                }
                let m: Vec<u64> = modulus.iter().map(|c| c % self.0.p).collect();
                Ring::new(RingSpec::GaloisField {
                    p: self.0.p,
                    r: *r,
                    modulus: m,
                })
            }
            Kind::Witt2 { base, .. } => {
                if base.is_field() {
                    Ok(base.clone())
                } else {
                    Err(Error::NotLocal(self.name()))
                }
            }
        }
    }

    /// Reduction `R -> R/p` on elements.
    pub fn reduce_mod_p_elem(&self, a: Elem) -> Elem {
        match &self.0.kind {
            Kind::Zpe { .. } => a % self.0.p,
            Kind::Gr { pe, r, .. } => {
                let c = self.decode(a, *pe, *r);
                let mut z = [0u64; MAX_R];
                for i in 0..*r {
                    z[i] = c[i] % self.0.p;
                }
                self.encode(&z[..*r], self.0.p)
            }
            Kind::Witt2 { ob, .. } => a % ob,
        }
    }

    /// Canonical lift `R/p -> R`: coefficientwise, Teichmüller for `W_2`.
    pub fn lift_from_residue(&self, a: Elem) -> Elem {
        match &self.0.kind {
            Kind::Zpe { .. } => a,
            Kind::Gr { pe, r, .. } => {
                let c = self.decode(a, self.0.p, *r);
                self.encode(&c[..*r], *pe)
            }
            Kind::Witt2 { .. } => a,
        }
    }

    /// `p`-adic valuation of a non-zero element of a local ring.
    pub fn valuation(&self, a: Elem) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let p = self.0.p;
        match &self.0.kind {
            Kind::Zpe { .. } => {
                let mut v = 0;
                let mut x = a;
                while x.is_multiple_of(p) {
                    x /= p;
                    v += 1;
                }
                Some(v)
            }
            Kind::Gr { pe, r, .. } => {
                let c = self.decode(a, *pe, *r);
                let mut best = u32::MAX;
                for &x in c.iter().take(*r) {
                    if x == 0 {
                        continue;
                    }
                    let mut v = 0;
                    let mut y = x;
                    while y % p == 0 {
                        y /= p;
                        v += 1;
                    }
                    best = best.min(v);
                }
                Some(best)
            }
            Kind::Witt2 { ob, .. } => Some(if !a.is_multiple_of(*ob) { 0 } else { 1 }),
        }
    }

    /// `p^k` as a ring element.
    pub fn p_pow(&self, k: u32) -> Elem {
        let mut acc = self.one();
        let p = self.from_int(self.0.p as i64);
        for _ in 0..k {
            acc = self.mul(acc, p);
        }
        acc
    }

    /// An element `z` with `x * z = y`, assuming `v(y) >= v(x)` in a local ring.
    pub fn divexact(&self, y: Elem, x: Elem) -> Result<Elem> {
        if y == 0 {
            return Ok(0);
        }
        let vx = self
            .valuation(x)
            .ok_or_else(|| Error::NotInvertible(format!("division by zero in {}", self.name())))?;
        let vy = self.valuation(y).unwrap();
        if vy < vx {
            return Err(Error::Invalid(format!(
                "{} is not divisible by {} in {}",
                self.fmt_elem(y),
                self.fmt_elem(x),
                self.name()
            )));
        }
        if vx == 0 {
            return Ok(self.mul(y, self.inv(x)?));
        }
        match &self.0.kind {
            Kind::Zpe { .. } | Kind::Gr { .. } => {
                let pv = self.0.p.pow(vx);
                let shift = |a: Elem| -> Elem {
                    let c = self.coefficients(a);
                    let d: Vec<u64> = c.iter().map(|v| v / pv).collect();
                    self.from_coefficients(&d)
                };
                let u = shift(x);
                let y2 = shift(y);
                Ok(self.mul(y2, self.inv(u)?))
            }
            Kind::Witt2 { base, .. } => {
                let (_, x1) = self.witt_components(x);
                let (_, y1) = self.witt_components(y);
                let q = base.mul(y1, base.inv(x1)?);
                Ok(self.witt_pair(base.frobenius_inv(q), 0))
            }
        }
    }

    /// A uniformly random element.
    pub fn random<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Elem {
        rng.gen_range(0..self.order())
    }

    /// A generator of the unit group of a finite field.
    pub fn primitive_element(&self) -> Result<Elem> {
        if !self.is_field() {
            return Err(Error::NotAField(self.name()));
        }
        let n = self.order() - 1;
        let mut primes = vec![];
        let mut m = n;
        let mut d = 2;
        while d * d <= m {
            if m.is_multiple_of(d) {
                primes.push(d);
                while m.is_multiple_of(d) {
                    m /= d;
                }
            }
            d += 1;
        }
        if m > 1 {
            primes.push(m);
        }
        for g in 1..self.order() {
            if primes.iter().all(|q| self.pow(g, n / q) != 1) {
                return Ok(g);
            }
        }
        Err(Error::Internal("no primitive element".into()))
    }

    /// Multiplicative order of a unit.
    pub fn mult_order(&self, a: Elem) -> Option<u64> {
        if !self.is_unit(a) {
            return None;
        }
        let mut x = a;
        let mut k = 1;
        while x != 1 {
            x = self.mul(x, a);
            k += 1;
            if k > self.order() {
                return None;
            }
        }
        Some(k)
    }
}

/// `sum_{i=1}^{p-1} (C(p,i)/p) a^i b^{p-i}` computed with integer binomials.
fn witt_carry(base: &Ring, a: Elem, b: Elem) -> Elem {
    let p = base.p();
    let mut acc = 0;
    for i in 1..p {
        let c = (binomial(p, i) / p as u128) as i64;
        let term = base.mul(base.pow(a, i), base.pow(b, p - i));
        acc = base.add(acc, base.mul(base.from_int(c), term));
    }
    acc
}

/// Length-2 Witt vector operations on explicit pairs over a base ring.
pub mod witt {
    use super::{witt_carry, Elem, Ring};

    /// A pair `(a0, a1)` of base elements.
    pub type Pair = (Elem, Elem);

    pub fn add(base: &Ring, a: Pair, b: Pair) -> Pair {
        (
            base.add(a.0, b.0),
            base.sub(base.add(a.1, b.1), witt_carry(base, a.0, b.0)),
        )
    }

    pub fn mul(base: &Ring, a: Pair, b: Pair) -> Pair {
        let p = base.p();
        let t1 = base.mul(base.pow(a.0, p), b.1);
        let t2 = base.mul(base.pow(b.0, p), a.1);
        let t3 = base.mul(base.from_int(p as i64), base.mul(a.1, b.1));
        (base.mul(a.0, b.0), base.add(base.add(t1, t2), t3))
    }

    /// Verschiebung on the length-2 truncation: `V(a0, a1) = (0, a0)`.
    pub fn verschiebung(a: Pair) -> Pair {
        (0, a.0)
    }

    pub fn teichmuller(x: Elem) -> Pair {
        (x, 0)
    }

    /// Ghost components `(a0, a0^p + p a1)`.
    pub fn ghost(base: &Ring, a: Pair) -> Pair {
        let p = base.p();
        (
            a.0,
            base.add(base.pow(a.0, p), base.mul(base.from_int(p as i64), a.1)),
        )
    }

    /// `n * 1` in `W_2(base)`.
    pub fn from_int(base: &Ring, n: u64) -> Pair {
        let mut acc = (0, 0);
        for _ in 0..n {
            acc = add(base, acc, (1, 0));
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f4() -> Ring {
        Ring::new(RingSpec::GaloisField {
            p: 2,
            r: 2,
            modulus: vec![1, 1, 1],
        })
        .unwrap()
    }

    #[test]
    fn f4_construction() {
        let k = f4();
        let x = k.from_coefficients(&[0, 1]);
        let x1 = k.from_coefficients(&[1, 1]);
        assert_eq!(k.mul(x, x1), 1);
        assert_eq!(k.order(), 4);
        assert!(k.is_field());
    }

    #[test]
    fn reducible_modulus_rejected() {
        let r = Ring::new(RingSpec::GaloisField {
            p: 2,
            r: 2,
            modulus: vec![1, 0, 1],
        });
        assert!(matches!(r, Err(Error::ReducibleModulus(_))));
    }

    #[test]
    fn non_unit_inverse_names_element() {
        let r = Ring::zpe(3, 2).unwrap();
        match r.inv(3) {
            Err(Error::NotInvertible(s)) => assert!(s.contains('3')),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gr_reduction_is_surjective_ring_map() {
        let gr = Ring::new(RingSpec::GaloisRing {
            p: 2,
            e: 2,
            r: 2,
            modulus: vec![1, 1, 1],
        })
        .unwrap();
        let k = gr.residue_field().unwrap();
        assert_eq!(k, f4());
        let mut image = std::collections::BTreeSet::new();
        for a in gr.elements() {
            image.insert(gr.reduce_mod_p_elem(a));
            for b in gr.elements() {
                let (ra, rb) = (gr.reduce_mod_p_elem(a), gr.reduce_mod_p_elem(b));
                assert_eq!(gr.reduce_mod_p_elem(gr.add(a, b)), k.add(ra, rb));
                assert_eq!(gr.reduce_mod_p_elem(gr.mul(a, b)), k.mul(ra, rb));
            }
        }
        assert_eq!(image.len(), 4);
    }

    #[test]
    fn frobenius_on_f9() {
        let k = Ring::new(RingSpec::GaloisField {
            p: 3,
            r: 2,
            modulus: vec![1, 0, 1],
        })
        .unwrap();
        let x = k.from_coefficients(&[0, 1]);
        assert_eq!(k.frobenius(x), k.neg(x));
        for a in k.elements() {
            assert_eq!(k.frobenius(k.frobenius(a)), a);
            assert_eq!(k.frobenius(a), k.pow(a, 3));
        }
    }

    #[test]
    fn galois_ring_frobenius_is_ring_automorphism() {
        for (p, e, r) in [(2u64, 2u32, 2usize), (3, 2, 2), (2, 3, 3)] {
            let gr = Ring::gr(p, e, r).unwrap();
            let mut seen = std::collections::BTreeSet::new();
            for a in gr.elements() {
                seen.insert(gr.frobenius(a));
                let ra = gr.reduce_mod_p_elem(gr.frobenius(a));
                let k = gr.residue_field().unwrap();
                assert_eq!(ra, k.pow(gr.reduce_mod_p_elem(a), p));
            }
            assert_eq!(seen.len() as u64, gr.order());
            for a in gr.elements().step_by(3) {
                for b in gr.elements().step_by(5) {
                    assert_eq!(
                        gr.frobenius(gr.mul(a, b)),
                        gr.mul(gr.frobenius(a), gr.frobenius(b))
                    );
                    assert_eq!(
                        gr.frobenius(gr.add(a, b)),
                        gr.add(gr.frobenius(a), gr.frobenius(b))
                    );
                }
            }
            let x = gr.from_coefficients(&[0, 1]);
            assert_eq!(gr.frobenius_pow(x, r), x);
        }
    }

    #[test]
    fn fields_have_inverses_and_frobenius_order_r() {
        for (p, r) in [
            (2u64, 1usize),
            (2, 2),
            (2, 3),
            (3, 1),
            (3, 2),
            (5, 1),
            (5, 2),
            (7, 1),
        ] {
            let k = Ring::gf(p, r).unwrap();
            for a in k.elements().skip(1) {
                let b = k.inv(a).unwrap();
                assert_eq!(k.mul(a, b), 1);
            }
            let mut ord = 0;
            for j in 1..=r {
                if k.elements().all(|a| k.frobenius_pow(a, j) == a) {
                    ord = j;
                    break;
                }
            }
            assert_eq!(ord, r);
        }
    }

    #[test]
    fn witt_identity_p_squared() {
        for p in [2u64, 3, 5] {
            let base = Ring::zpe(p, 2).unwrap();
            let pw = witt::from_int(&base, p);
            let sq = witt::mul(&base, pw, pw);
            assert_eq!(sq, witt::verschiebung(pw));
        }
    }

    #[test]
    fn witt_ring_matches_galois_ring_order_and_units() {
        let k = f4();
        let w = Ring::witt2(&k).unwrap();
        assert_eq!(w.order(), 16);
        let units = w.elements().filter(|&a| w.is_unit(a)).count();
        assert_eq!(units, 12);
        let four = w.from_int(4);
        assert_eq!(four, 0);
        assert_ne!(w.from_int(2), 0);
    }

    #[test]
    fn witt_vectors_of_field_match_galois_ring() {
        for (p, r) in [(2u64, 2usize), (3, 2), (2, 3)] {
            let k = Ring::gf(p, r).unwrap();
            let w = Ring::witt2(&k).unwrap();
            let gr = Ring::gr(p, 2, r).unwrap();
            let q = k.order();
            let teich = |a: Elem| gr.pow(gr.lift_from_residue(a), q);
            let phi = |x: Elem| {
                let (a0, a1) = w.witt_components(x);
                gr.add(
                    teich(a0),
                    gr.mul(gr.from_int(p as i64), teich(k.frobenius_inv(a1))),
                )
            };
            let mut image = std::collections::BTreeSet::new();
            for x in w.elements() {
                image.insert(phi(x));
                for y in w.elements().step_by(3) {
                    assert_eq!(phi(w.add(x, y)), gr.add(phi(x), phi(y)));
                    assert_eq!(phi(w.mul(x, y)), gr.mul(phi(x), phi(y)));
                }
            }
            assert_eq!(image.len() as u64, gr.order());
        }
    }

    #[test]
    fn ghost_of_verschiebung() {
        for p in [2u64, 3, 5] {
            let base = Ring::zpe(p, 3).unwrap();
            for a0 in base.elements() {
                let a = (a0, (a0 * 7 + 1) % base.order());
                let g = witt::ghost(&base, witt::verschiebung(a));
                assert_eq!(g, (0, base.mul(base.from_int(p as i64), a.0)));
            }
        }
    }

    #[test]
    fn teichmuller_multiplicative() {
        let k = Ring::gf(3, 2).unwrap();
        for x in k.elements() {
            for y in k.elements() {
                let lhs = witt::mul(&k, witt::teichmuller(x), witt::teichmuller(y));
                assert_eq!(lhs, witt::teichmuller(k.mul(x, y)));
            }
        }
    }

    #[test]
    fn divexact_in_local_rings() {
        let r = Ring::gr(3, 2, 2).unwrap();
        for x in r.elements() {
            for y in r.elements() {
                if x == 0 || r.valuation(y).unwrap_or(9) < r.valuation(x).unwrap() {
                    continue;
                }
                let z = r.divexact(y, x).unwrap();
                assert_eq!(r.mul(x, z), y);
            }
        }
        let w = Ring::witt2(&Ring::fp(3).unwrap()).unwrap();
        for x in w.elements().skip(1) {
            for y in w.elements() {
                if r.valuation(y).is_some() && w.valuation(y) < w.valuation(x) {
                    continue;
                }
                if let Ok(z) = w.divexact(y, x) {
                    assert_eq!(w.mul(x, z), y);
                }
            }
        }
    }
}
