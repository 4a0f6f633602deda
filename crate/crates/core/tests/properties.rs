use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qrom_core::altmeas::{closed_form_winprob, conditional_from_pairs, conditional_probs};
use qrom_core::bounds::{application_bound, jensen_bound, reweight_check, Application, BoundParams, WeightedValues};
use qrom_core::instances::{random_instance, InstanceLimits};
use qrom_core::linalg::{norm, random_state};
use qrom_core::oracle::{oracle_unitary_step, OracleTable};
use qrom_core::adversary::{RegisterLayout, Subsystem};
use qrom_core::separation::counting_bound;
use qrom_core::spectral::{oracle_spectra, success_probability};

fn weighted() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..8).prop_flat_map(|n| (prop::collection::vec(0.01f64..1.0, n), prop::collection::vec(0.0f64..=1.0, n)))
}

fn normalize(w: Vec<f64>) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn conditional_sequence_never_decreases((w, p) in weighted()) {
        let pairs: Vec<(f64, f64)> = normalize(w).into_iter().zip(p).collect();
        if let Ok(seq) = conditional_from_pairs(&pairs, 10) {
            for pair in seq.values.windows(2) {
                prop_assert!(pair[1] >= pair[0] - 1e-12, "{:?}", seq.values);
            }
            prop_assert!(seq.values.iter().all(|v| (-1e-12..=1.0 + 1e-12).contains(v)));
        }
    }

    #[test]
    fn reweighting_and_jensen((w, p) in weighted(), g in 1u32..12) {
        let wv = WeightedValues::new(normalize(w), p).unwrap();
        let (before, after) = reweight_check(&wv).unwrap();
        prop_assert!(after >= before - 1e-12);
        let (mean, root) = jensen_bound(&wv, g).unwrap();
        prop_assert!(mean <= root + 1e-12);
    }

    #[test]
    fn oracle_call_preserves_norm(entries in prop::collection::vec(0usize..3, 3), seed in any::<u64>()) {
        let h = OracleTable::new(3, entries).unwrap();
        let layout = RegisterLayout::new(
            vec![Subsystem::new("x", 3), Subsystem::new("y", 3)],
            vec!["x".into()],
            vec!["y".into()],
            "x",
        ).unwrap();
        let psi = random_state(9, &mut ChaCha8Rng::seed_from_u64(seed));
        let out = oracle_unitary_step(&h, &psi, &layout, "x", "y").unwrap();
        prop_assert!((norm(&out) - 1.0).abs() < 1e-12);
        // M applications return to the start
        let mut again = out;
        for _ in 0..2 {
            again = oracle_unitary_step(&h, &again, &layout, "x", "y").unwrap();
        }
        for (a, b) in again.iter().zip(&psi) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn counting_bound_is_a_probability(l in 0usize..64, n in 1usize..12, zeta in 0.0f64..=1.0) {
        let b = counting_bound(l, n, zeta);
        prop_assert!((0.0..=1.0).contains(&b));
    }

    #[test]
    fn bounds_grow_with_advice(s in 1.0f64..64.0, extra in 0.0f64..64.0, t in 0.0f64..8.0) {
        for which in [Application::Owf, Application::Prg] {
            let at = |s: f64| {
                let p = BoundParams { s: Some(s), t: Some(t), n: Some(4096.0), m: Some(4096.0), ..BoundParams::new() };
                application_bound(which, &p).unwrap().raw
            };
            prop_assert!(at(s + extra) >= at(s) - 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn first_moment_is_success_probability(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lim = InstanceLimits { max_dim: 32, max_oracles: 32, ..Default::default() };
        let inst = random_instance(&mut rng, &lim).unwrap();
        let sp = success_probability(&inst.advice, &inst.strategy, &inst.game, &inst.ensemble).unwrap();
        let spectra = oracle_spectra(&inst.advice, &inst.strategy, &inst.game, &inst.ensemble).unwrap();
        prop_assert!((sp - closed_form_winprob(&spectra, 1)).abs() < 1e-9);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&sp));
        if let Ok(seq) = conditional_probs(&spectra, 6) {
            prop_assert!((seq.values[0] - sp).abs() < 1e-9);
        }
    }
}
