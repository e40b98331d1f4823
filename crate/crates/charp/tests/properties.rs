//! Randomized invariants across the engine.

use charp::cx::CochainComplex;
use charp::dk::{derived_power, PolyFunctor};
use charp::gcoh::{bar_cohomology_dims, FiniteGroup, GModule};
use charp::ralg::{diagonalize, witt, Mat, Ring};
use charp::roots::{enumerate, evaluate, positive_roots};
use charp::verify::{run_with, Budget, Params, Report};
use proptest::prelude::*;

fn ring_strategy() -> impl Strategy<Value = Ring> {
    prop_oneof![
        Just(Ring::fp(2).unwrap()),
        Just(Ring::fp(5).unwrap()),
        Just(Ring::gf(2, 3).unwrap()),
        Just(Ring::gf(3, 2).unwrap()),
        Just(Ring::zpe(2, 3).unwrap()),
        Just(Ring::zpe(3, 2).unwrap()),
        Just(Ring::gr(2, 2, 2).unwrap()),
    ]
}

fn field_strategy() -> impl Strategy<Value = Ring> {
    prop_oneof![
        Just(Ring::fp(2).unwrap()),
        Just(Ring::fp(3).unwrap()),
        Just(Ring::gf(2, 2).unwrap()),
        Just(Ring::gf(3, 2).unwrap())
    ]
}

fn matrix(ring: &Ring, rows: usize, cols: usize, seed: &[u64]) -> Mat {
    let n = ring.order();
    let entries = (0..rows)
        .map(|i| {
            (0..cols)
                .map(|j| seed[(i * cols + j) % seed.len()] % n)
                .collect()
        })
        .collect();
    Mat::from_rows(ring, rows, cols, entries).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn ring_axioms(ring in ring_strategy(), a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let n = ring.order();
        let (a, b, c) = (a % n, b % n, c % n);
        prop_assert_eq!(ring.add(a, b), ring.add(b, a));
        prop_assert_eq!(ring.mul(a, b), ring.mul(b, a));
        prop_assert_eq!(ring.mul(ring.mul(a, b), c), ring.mul(a, ring.mul(b, c)));
        prop_assert_eq!(ring.mul(a, ring.add(b, c)), ring.add(ring.mul(a, b), ring.mul(a, c)));
        prop_assert_eq!(ring.sub(ring.add(a, b), b), a);
        if let Ok(inv) = ring.inv(a) {
            prop_assert_eq!(ring.mul(a, inv), 1);
        }
    }

    #[test]
    fn ghost_map_is_a_ring_homomorphism(p in prop::sample::select(vec![2u64, 3, 5]), a in any::<[u64; 4]>()) {
        let base = Ring::zpe(p, 3).unwrap();
        let n = base.order();
        let x = (a[0] % n, a[1] % n);
        let y = (a[2] % n, a[3] % n);
        let gx = witt::ghost(&base, x);
        let gy = witt::ghost(&base, y);
        let gs = witt::ghost(&base, witt::add(&base, x, y));
        let gp = witt::ghost(&base, witt::mul(&base, x, y));
        prop_assert_eq!(gs, (base.add(gx.0, gy.0), base.add(gx.1, gy.1)));
        prop_assert_eq!(gp, (base.mul(gx.0, gy.0), base.mul(gx.1, gy.1)));
    }

    #[test]
    fn rank_is_transpose_invariant(ring in field_strategy(), rows in 1usize..6, cols in 1usize..6, seed in prop::collection::vec(any::<u64>(), 1..40)) {
        let m = matrix(&ring, rows, cols, &seed);
        let r = m.rank().unwrap();
        prop_assert_eq!(r, m.transpose().rank().unwrap());
        prop_assert!(r <= rows.min(cols));
    }

    #[test]
    fn smith_form_reconstructs(ring in ring_strategy(), rows in 1usize..5, cols in 1usize..5, seed in prop::collection::vec(any::<u64>(), 1..30)) {
        let m = matrix(&ring, rows, cols, &seed);
        let dg = diagonalize(&m).unwrap();
        prop_assert_eq!(dg.u.mul(&m).unwrap().mul(&dg.v).unwrap(), dg.d.clone());
        for j in 0..dg.kernel.cols() {
            prop_assert!(m.apply(&dg.kernel.col(j)).unwrap().iter().all(|&x| x == 0));
        }
        // The cokernel of a square matrix and of its transpose agree.
        if rows == cols {
            let dt = diagonalize(&m.transpose()).unwrap();
            prop_assert_eq!(dg.cokernel.exponents(), dt.cokernel.exponents());
        }
    }

    #[test]
    fn derived_powers_are_complexes_with_matching_euler_characteristic(
        p in prop::sample::select(vec![2u64, 3]),
        d in 1usize..4,
        kind in 0usize..3,
        n in 2usize..4,
    ) {
        let k = Ring::fp(p).unwrap();
        let f = [PolyFunctor::sym(n), PolyFunctor::div(n), PolyFunctor::ext(n)][kind];
        let c = derived_power(f, &CochainComplex::module(&k, d, 1), n).unwrap();
        for i in c.lo()..c.hi() {
            prop_assert!(c.d(i + 1).mul(&c.d(i)).unwrap().is_zero());
        }
        let h = c.betti().unwrap();
        let chi: i64 = h.iter().enumerate().map(|(i, &x)| if (i as i64 + c.lo()) % 2 == 0 { x as i64 } else { -(x as i64) }).sum();
        prop_assert_eq!(chi, c.euler_characteristic());
    }

    #[test]
    fn cyclic_group_cohomology(n in 1usize..9, p in prop::sample::select(vec![2u64, 3, 5])) {
        let g = FiniteGroup::cyclic(n);
        let k = Ring::fp(p).unwrap();
        let h = bar_cohomology_dims(&GModule::trivial(&g, &k, 1), 3).unwrap();
        let pos = if (n as u64).is_multiple_of(p) { 1 } else { 0 };
        prop_assert_eq!(h, vec![1, pos, pos, pos]);
    }

    #[test]
    fn enumerated_expressions_evaluate_to_target(p in prop::sample::select(vec![2usize, 3]), coeffs in prop::collection::vec(0i64..3, 1..4)) {
        let gens = positive_roots(p);
        let n = gens[0].len();
        let mut target = vec![0; n];
        for (i, &c) in coeffs.iter().enumerate() {
            let g = &gens[i % gens.len()];
            for j in 0..n {
                target[j] += c * g[j];
            }
        }
        let s = enumerate(p, &target, &gens, 4, 3, 0);
        let used: i64 = coeffs.iter().sum();
        if (1..=4).contains(&used) {
            prop_assert!(!s.solutions.is_empty());
        }
        for e in &s.solutions {
            prop_assert_eq!(&evaluate(p, e, &gens, n), &target);
        }
        let m = (p * p - 1) as i64;
        let s = enumerate(p, &target, &gens, 3, 3, m);
        for e in &s.solutions {
            let v = evaluate(p, e, &gens, n);
            prop_assert!(v.iter().zip(&target).all(|(a, b)| (a - b).rem_euclid(m) == 0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn same_seed_reports_are_identical(seed in any::<u32>()) {
        let params = Params { seed: Some(seed as u64), ..Default::default() };
        let strip = |r: Report| Report { runtime_ms: 0, ..r };
        let a = strip(run_with("ghost-v", &params, Budget::default()).unwrap());
        let b = strip(run_with("ghost-v", &params, Budget::default()).unwrap());
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
