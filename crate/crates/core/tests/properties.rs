use combs::backend::{
    compose, copy, discard, identity, swap, tensor, Backend, Morphism, Object, Rational,
};
use combs::family::ObjectFamily;
use combs::laws;
use combs::random::Gen;
use combs::stream::behavior_equal;
use num_traits::{One, Zero};
use proptest::prelude::*;

const BACKENDS: [Backend; 3] = [Backend::FinFn, Backend::FinStoch, Backend::BigFn];

fn backend() -> impl Strategy<Value = Backend> {
    prop::sample::select(BACKENDS.to_vec())
}

fn finite_backend() -> impl Strategy<Value = Backend> {
    prop::sample::select(vec![Backend::FinFn, Backend::FinStoch])
}

/// Dense matrix of a finite map: entry `[i][j]` is the weight of `i ↦ j`.
fn dense(m: &Morphism) -> Vec<Vec<Rational>> {
    let (n, k) = (m.domain().size().unwrap(), m.codomain().size().unwrap());
    let mut out = vec![vec![Rational::zero(); k]; n];
    for (i, row) in out.iter_mut().enumerate() {
        match m.kernel() {
            Some(kernel) => {
                for (j, p) in kernel.row(i) {
                    row[*j] += p.clone();
                }
            }
            None => row[m.apply(i)] = Rational::one(),
        }
    }
    out
}

fn matmul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    a.iter()
        .map(|row| {
            (0..b[0].len())
                .map(|j| row.iter().zip(b).map(|(x, brow)| x * &brow[j]).sum())
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_is_associative(b in backend(), seed in any::<u64>()) {
        let mut g = Gen::new(b, seed, 3);
        let (w, x, y, z) = (g.object(), g.object(), g.object(), g.object());
        let f = g.morphism(&w, &x).unwrap();
        let h = g.morphism(&x, &y).unwrap();
        let k = g.morphism(&y, &z).unwrap();
        let left = compose(&compose(&k, &h).unwrap(), &f).unwrap();
        let right = compose(&k, &compose(&h, &f).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn composition_matches_dense_product(b in finite_backend(), seed in any::<u64>()) {
        let mut g = Gen::new(b, seed, 3);
        let (x, y, z) = (g.object(), g.object(), g.object());
        let f = g.morphism(&x, &y).unwrap();
        let h = g.morphism(&y, &z).unwrap();
        prop_assert_eq!(dense(&compose(&h, &f).unwrap()), matmul(&dense(&f), &dense(&h)));
    }

    #[test]
    fn stochastic_maps_are_closed_under_composition_and_tensor(seed in any::<u64>()) {
        let mut g = Gen::new(Backend::FinStoch, seed, 3);
        let (x, y, z) = (g.object(), g.object(), g.object());
        let f = g.morphism(&x, &y).unwrap();
        let h = g.morphism(&y, &z).unwrap();
        for m in [compose(&h, &f).unwrap(), tensor(&f, &h).unwrap()] {
            for row in dense(&m) {
                prop_assert!(row.iter().all(|p| *p >= Rational::zero()));
                prop_assert!(row.iter().cloned().sum::<Rational>().is_one());
            }
        }
    }

    #[test]
    fn interchange_law(b in backend(), seed in any::<u64>()) {
        let mut g = Gen::new(b, seed, 3);
        let (a, x, c, y, e, z) = (g.object(), g.object(), g.object(), g.object(), g.object(), g.object());
        let (f1, g1) = (g.morphism(&a, &x).unwrap(), g.morphism(&x, &e).unwrap());
        let (f2, g2) = (g.morphism(&c, &y).unwrap(), g.morphism(&y, &z).unwrap());
        let left = compose(&tensor(&g1, &g2).unwrap(), &tensor(&f1, &f2).unwrap()).unwrap();
        let right = tensor(&compose(&g1, &f1).unwrap(), &compose(&g2, &f2).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn swap_is_natural_and_involutive(b in backend(), seed in any::<u64>()) {
        let mut g = Gen::new(b, seed, 3);
        let (a, x, c, y) = (g.object(), g.object(), g.object(), g.object());
        let f = g.morphism(&a, &x).unwrap();
        let h = g.morphism(&c, &y).unwrap();
        let left = compose(&swap(&x, &y).unwrap(), &tensor(&f, &h).unwrap()).unwrap();
        let right = compose(&tensor(&h, &f).unwrap(), &swap(&a, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        let twice = compose(&swap(&c, &a).unwrap(), &swap(&a, &c).unwrap()).unwrap();
        prop_assert_eq!(twice, identity(&a.tensor(&c).unwrap()));
    }

    #[test]
    fn discard_is_terminal(b in backend(), seed in any::<u64>()) {
        let mut g = Gen::new(b, seed, 3);
        let (x, y) = (g.object(), g.object());
        let f = g.morphism(&x, &y).unwrap();
        prop_assert_eq!(compose(&discard(&y).unwrap(), &f).unwrap(), discard(&x).unwrap());
    }

    #[test]
    fn copy_is_natural_for_functions(seed in any::<u64>()) {
        let mut g = Gen::new(Backend::FinFn, seed, 3);
        let (x, y) = (g.object(), g.object());
        let f = g.morphism(&x, &y).unwrap();
        let left = compose(&copy(&y).unwrap(), &f).unwrap();
        let right = compose(&tensor(&f, &f).unwrap(), &copy(&x).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn morphism_json_round_trip(b in finite_backend(), seed in any::<u64>()) {
        let mut g = Gen::new(b, seed, 3);
        let (x, y) = (g.object(), g.object());
        let f = g.morphism(&x, &y).unwrap();
        let back: Morphism = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        prop_assert_eq!(dense(&back), dense(&f));
    }

    #[test]
    fn delay_shifts_families(b in backend(), seed in any::<u64>()) {
        let mut g = Gen::new(b, seed, 3);
        let x = g.family();
        let d = x.delay();
        prop_assert!(d.at(0).is_unit());
        for n in 0..6 {
            prop_assert_eq!(d.at(n + 1), x.at(n));
        }
        let y = g.family();
        let both = x.tensor(&y).unwrap();
        for n in 0..6 {
            prop_assert_eq!(both.at(n), &x.at(n).tensor(y.at(n)).unwrap());
        }
        prop_assert_eq!(&both.strip_left(&x).unwrap(), &y);
    }

    #[test]
    fn families_are_eventually_constant(b in backend(), seed in any::<u64>()) {
        let mut g = Gen::new(b, seed, 3);
        let x = g.family();
        let k = x.stable_from();
        prop_assert!(k <= x.prefix().len());
        for n in k..k + 4 {
            prop_assert_eq!(x.at(n), x.tail());
        }
        let rebuilt = ObjectFamily::new(x.take(k + 3), x.tail().clone()).unwrap();
        prop_assert_eq!(rebuilt, x);
    }

    #[test]
    fn truncations_are_consistent(b in backend(), seed in any::<u64>()) {
        let mut g = Gen::new(b, seed, 2);
        let (x, y) = (g.families(1, 3).remove(0), g.family());
        let c = g.stream_comb(&x, &y).unwrap();
        let long = c.behavior_up_to(3).unwrap();
        let short = c.behavior_up_to(1).unwrap();
        prop_assert_eq!(&long.maps()[..2], short.maps());
        prop_assert!(behavior_equal(&c, &c, 3).unwrap().is_equal());
    }

}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn monoidal_laws_hold(b in backend(), seed in any::<u64>()) {
        for check in [laws::seq_associativity, laws::seq_unit, laws::par_associativity, laws::par_unit, laws::interchange] {
            let verdict = check(&mut Gen::new(b, seed, 3), 3).unwrap();
            prop_assert!(verdict.is_none(), "{:?}", verdict);
        }
    }

    #[test]
    fn delay_and_feedback_laws_hold(b in backend(), seed in any::<u64>()) {
        for check in [laws::delay_functoriality, laws::trace_like, laws::feedback_naturality, laws::stream_slide_invariance, laws::causality] {
            let verdict = check(&mut Gen::new(b, seed, 3), 3).unwrap();
            prop_assert!(verdict.is_none(), "{:?}", verdict);
        }
    }

    #[test]
    fn slides_preserve_the_class(b in backend(), seed in any::<u64>()) {
        let verdict = laws::quotient_soundness(&mut Gen::new(b, seed, 2), 3).unwrap();
        prop_assert!(verdict.is_none(), "{:?}", verdict);
    }

    #[test]
    fn cartesian_characterization_holds(b in prop::sample::select(vec![Backend::FinFn, Backend::BigFn]), seed in any::<u64>()) {
        for check in [laws::causal_round_trip, laws::open_closed_collapse, laws::kleisli_equivalence, laws::kleisli_laws, laws::comonad_laws] {
            let verdict = check(&mut Gen::new(b, seed, 2), 3).unwrap();
            prop_assert!(verdict.is_none(), "{:?}", verdict);
        }
    }

    #[test]
    fn stochastic_states_are_coherent(seed in any::<u64>()) {
        let verdict = laws::state_coherence(&mut Gen::new(Backend::FinStoch, seed, 3), 4).unwrap();
        prop_assert!(verdict.is_none(), "{:?}", verdict);
    }
}

#[test]
fn random_objects_have_the_requested_backend() {
    for b in BACKENDS {
        let mut g = Gen::new(b, 7, 3);
        for _ in 0..20 {
            let o: Object = g.object();
            assert_eq!(o.backend(), b);
        }
    }
}
