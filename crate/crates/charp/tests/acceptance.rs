//! Acceptance run: one PASS/FAIL line per criterion with its time limit.
//!
//! Runs without the libtest harness so the lines are printed on success too.

use charp::csa::nerve_algebra;
use charp::cx::CochainComplex;
use charp::dk::{derived_power, PolyFunctor};
use charp::gcoh::{
    alpha_class, bar_cohomology_dims, hyperext_class, torus_generators, unipotent_generators,
    AlphaModel, EquivariantComplex, FiniteGroup, GModule, MatrixGroup,
};
use charp::ralg::{Mat, Ring};
use charp::verify::{run_with, Budget, Params, Profile};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

type Check = Result<(), String>;

/// Name, time limit in seconds and check of one criterion.
type Criterion = (&'static str, u64, fn() -> Check);

fn fast() -> Budget {
    Budget::for_profile(Profile::Fast)
}

fn full() -> Budget {
    Budget::for_profile(Profile::Full)
}

/// Run a scenario and require a non-skipped pass.
fn scenario(id: &str, p: u64, q: Option<u64>, dim: Option<usize>, budget: Budget) -> Check {
    let params = Params {
        p: Some(p),
        q,
        dim,
        seed: Some(1),
    };
    let r = run_with(id, &params, budget)
        .map_err(|e| format!("{id} p={p} q={q:?} dim={dim:?}: {e}"))?;
    if r.skipped {
        return Err(format!(
            "{id} p={p} q={q:?} dim={dim:?} skipped: {}",
            r.computed
                .get("skipped_reason")
                .cloned()
                .unwrap_or_default()
        ));
    }
    if !r.pass {
        return Err(format!(
            "{id} p={p} q={q:?} dim={dim:?}: computed {:?}",
            r.computed
        ));
    }
    Ok(())
}

fn all(checks: impl IntoIterator<Item = Check>) -> Check {
    let errs: Vec<String> = checks.into_iter().filter_map(|c| c.err()).collect();
    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs.join("; "))
    }
}

fn c1() -> Check {
    all([2, 3].map(|p| scenario("decalage", p, None, Some(4), fast())))
}

fn c2() -> Check {
    let mut v: Vec<Check> = vec![];
    for p in [2, 3] {
        for d in 1..=3 {
            v.push(scenario("sym-cohomology", p, None, Some(d), fast()));
        }
    }
    v.push(scenario("sym-cohomology", 5, None, Some(2), full()));
    all(v)
}

fn c3() -> Check {
    all([2, 3]
        .into_iter()
        .flat_map(|p| (1..=3).map(move |d| scenario("four-term-exact", p, None, Some(d), fast()))))
}

fn c4() -> Check {
    all([2, 3].into_iter().flat_map(|p| {
        (1..=3).map(move |d| scenario("norm-cokernel-zp2", p, None, Some(d), fast()))
    }))
}

fn c5() -> Check {
    all([2, 3, 5].map(|p| scenario("cartier", p, None, None, fast())))
}

fn c6() -> Check {
    let ids = [
        "steenrod-p0",
        "steenrod-p1",
        "witt-bockstein-agree",
        "algebra-bockstein",
    ];
    all([2, 3]
        .into_iter()
        .flat_map(|p| ids.map(|id| scenario(id, p, None, None, fast()))))
}

fn c7() -> Check {
    all([2, 3, 5].into_iter().flat_map(|p| {
        [
            scenario("witt-identity", p, None, None, fast()),
            scenario("ghost-v", p, None, None, fast()),
        ]
    }))
}

fn c8() -> Check {
    let mut v = vec![];
    for (p, q, n) in [
        (2, 2, 1),
        (2, 2, 2),
        (2, 2, 3),
        (2, 4, 1),
        (2, 4, 2),
        (2, 8, 1),
        (3, 3, 1),
        (3, 3, 2),
        (3, 9, 1),
    ] {
        v.push(scenario(
            "additive-cohomology-dims",
            p,
            Some(q),
            Some(n),
            fast(),
        ));
    }
    for p in [2, 3] {
        for m in 1..=4 {
            v.push(scenario("lattice-vanishing", p, None, Some(m), fast()));
        }
    }
    all(v)
}

fn c9() -> Check {
    let ids = [
        "weights-1",
        "weights-2",
        "weights-3",
        "weights-4",
        "borel-1",
        "borel-2",
        "borel-3",
    ];
    let mut v = vec![];
    for p in [2, 3] {
        v.extend(ids.map(|id| scenario(id, p, Some(p * p), None, fast())));
    }
    v.extend(ids.map(|id| scenario(id, 5, Some(25), None, full())));
    all(v)
}

fn c10() -> Check {
    all([
        scenario("alpha-sl2-f4", 2, Some(4), None, fast()),
        scenario("alpha-u2-f2-zero", 2, Some(2), None, fast()),
        scenario("alpha-ta-f9", 3, Some(9), None, fast()),
        scenario("chi1-iso", 3, Some(9), None, fast()),
    ])
}

fn c11() -> Check {
    all([
        scenario("integral-facts-p2", 2, Some(4), None, fast()),
        scenario("bock-alpha-nonzero-p2", 2, Some(4), None, fast()),
    ])
}

fn e<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Trivial-coefficient cohomology from the bar complex and from the nerve cochain algebra.
fn bar_vs_nerve() -> Check {
    let c2 = FiniteGroup::cyclic(2);
    let c3 = FiniteGroup::cyclic(3);
    let groups = vec![
        (FiniteGroup::cyclic(2), 2),
        (FiniteGroup::cyclic(3), 3),
        (FiniteGroup::cyclic(4), 2),
        (e(c2.direct_product(&c2))?, 2),
        (
            e(FiniteGroup::semidirect(&c3, &c2, |h, x| {
                if h == 0 {
                    x
                } else {
                    (3 - x) % 3
                }
            }))?,
            3,
        ),
        (
            e(FiniteGroup::semidirect(&c3, &c2, |h, x| {
                if h == 0 {
                    x
                } else {
                    (3 - x) % 3
                }
            }))?,
            2,
        ),
        (e(FiniteGroup::additive(&e(Ring::gf(2, 2))?))?, 2),
    ];
    let mut errs = vec![];
    for (g, p) in groups {
        let k = e(Ring::fp(p))?;
        let bar = e(bar_cohomology_dims(&GModule::trivial(&g, &k, 1), 3))?;
        let nerve = e(nerve_algebra(&g, &k, 5))?;
        let nv = (0..=3)
            .map(|i| nerve.cohomology(i).map(|h| h.dim()))
            .collect::<Result<Vec<_>, _>>();
        let nv = e(nv)?;
        if bar != nv {
            errs.push(format!(
                "order {} over F_{p}: bar {bar:?} nerve {nv:?}",
                g.order()
            ));
        }
    }
    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs.join("; "))
    }
}

/// The two-term complex `kC_n -> kC_n`, `x -> (g - 1) x`, with the regular action.
fn regular_complex(p: u64, n: usize) -> Result<EquivariantComplex, String> {
    let k = e(Ring::fp(p))?;
    let perm = |s: usize| {
        let mut m = Mat::zeros(&k, n, n);
        for i in 0..n {
            m.set((i + s) % n, i, 1);
        }
        m
    };
    let d = e(perm(1).sub(&Mat::identity(&k, n)))?;
    let c = e(CochainComplex::new(&k, 0, vec![n, n], vec![d]))?;
    e(EquivariantComplex::from_fn(
        c,
        &FiniteGroup::cyclic(n),
        |s| Ok(vec![perm(s), perm(s)]),
    ))
}

/// Classes from ten random splittings agree with the canonical one mod coboundaries.
fn hyperext_independence() -> Check {
    for (p, n) in [(2, 2), (3, 3), (2, 4)] {
        let d = regular_complex(p, n)?;
        let base = e(hyperext_class::<ChaCha8Rng>(&d, 0, 1, None))?;
        if e(base.is_zero())? {
            return Err(format!("C_{n} over F_{p}: class is zero"));
        }
        let ring = base.coefficients.ring().clone();
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let other = e(hyperext_class(&d, 0, 1, Some(&mut rng)))?;
            let diff: Vec<_> = base
                .cocycle
                .iter()
                .zip(&other.cocycle)
                .map(|(&x, &y)| ring.sub(x, y))
                .collect();
            if !e(base.bar().is_coboundary(base.degree, &diff))? {
                return Err(format!("C_{n} over F_{p}: seed {seed} differs"));
            }
        }
    }
    // The staircase class of Ω^{≤2}_3 on A_3(F_3) under random splittings.
    let k = e(Ring::fp(3))?;
    let a = e(MatrixGroup::generate(
        "A",
        &k,
        3,
        &unipotent_generators(&k, 3),
        1000,
    ))?;
    let tg = e(torus_generators(&k, 3))?;
    let base = e(alpha_class::<ChaCha8Rng>(
        &a,
        &k,
        AlphaModel::DeRham,
        &tg,
        None,
    ))?;
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let other = e(alpha_class(&a, &k, AlphaModel::DeRham, &tg, Some(&mut rng)))?;
        let diff: Vec<_> = base
            .cocycle
            .iter()
            .zip(&other.cocycle)
            .map(|(&x, &y)| k.sub(x, y))
            .collect();
        if !e(base.bar().is_coboundary(base.degree, &diff))? {
            return Err(format!("α on A_3(F_3): seed {seed} differs"));
        }
    }
    Ok(())
}

/// Cohomology in degrees `<= B` does not change when more levels are used.
fn derived_power_stability() -> Check {
    for p in [2u64, 3] {
        let k = e(Ring::fp(p))?;
        for d in 1..=3 {
            let c = CochainComplex::module(&k, d, 1);
            for f in [
                PolyFunctor::sym(2),
                PolyFunctor::div(2),
                PolyFunctor::ext(2),
                PolyFunctor::sym(3),
                PolyFunctor::div(3),
            ] {
                let b = f.n;
                let lo = e(e(derived_power(f, &c, b))?.betti())?;
                let hi = e(e(derived_power(f, &c, b + 2))?.betti())?;
                if lo[..=b] != hi[..=b] {
                    return Err(format!("{f:?} rank {d} over F_{p}: {lo:?} vs {hi:?}"));
                }
            }
        }
    }
    Ok(())
}

fn c12() -> Check {
    all([
        bar_vs_nerve(),
        scenario("semidirect-agree", 3, None, None, fast()),
        hyperext_independence(),
        derived_power_stability(),
    ])
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("décalage", 10, c1),
        ("S^p(E[-1]) cohomology", 60, c2),
        ("four-term exactness", 5, c3),
        ("norm cokernel over Z/p^2", 5, c4),
        ("Cartier", 30, c5),
        ("Steenrod identities", 120, c6),
        ("Witt identities", 1, c7),
        ("additive and lattice cohomology", 10, c8),
        ("weight combinatorics", 60, c9),
        ("α non-vanishing", 300, c10),
        ("integer-ring chain", 60, c11),
        ("cross-oracle properties", 180, c12),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let res = f();
        let t = start.elapsed();
        let res = res.and_then(|()| {
            if t <= Duration::from_secs(limit) {
                Ok(())
            } else {
                Err(format!("took {:.1} s, limit {limit} s", t.as_secs_f64()))
            }
        });
        let status = if res.is_ok() { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {status} {name} ({:.2} s, limit {limit} s)",
            i + 1,
            t.as_secs_f64()
        );
        if let Err(msg) = res {
            println!("    {msg}");
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
