use proptest::prelude::*;
use rand::Rng;
use swapsteer::criteria::{npt_entanglement_witness, ppt_test};
use swapsteer::network::{correlations, Scenario};
use swapsteer::qlinalg::{
    hw_expand, hw_reconstruct, kron_vec, partial_trace, partial_transpose, CMatrix, Subsystem, C64,
};
use swapsteer::sohs::{random_strategy, seesaw_bound, sohs_value, ProductStrategy, SeesawOptions};
use swapsteer::states::{
    random_density, random_povm, random_unitary, seeded_rng, DensityMatrix, StateRng,
};
use swapsteer::witnesses::{
    build_ccn_witness, build_npt_witness, build_universal_witness, eval_witness, load_witness,
    save_witness, WitnessSpec,
};

fn random_matrix(n: usize, rng: &mut StateRng) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn random_npt(d: usize, rng: &mut StateRng) -> DensityMatrix {
    loop {
        let rho = random_density((d, d), rng);
        if ppt_test(&rho).is_npt {
            return rho;
        }
    }
}

fn random_spec(family: usize, d: usize, rng: &mut StateRng) -> WitnessSpec {
    match family {
        0 => build_npt_witness(&random_npt(d, rng)).unwrap(),
        1 => {
            let u = random_unitary(d, rng);
            let v = random_unitary(d, rng);
            build_ccn_witness(d, &u, &v).unwrap()
        }
        _ => build_universal_witness(&npt_entanglement_witness(&random_npt(d, rng)).unwrap(), d)
            .unwrap(),
    }
}

fn random_scenario(spec: &WitnessSpec, rng: &mut StateRng) -> Scenario {
    let d = spec.d();
    Scenario::new(
        random_density((d, d), rng),
        random_density((d, d), rng),
        spec.alice().to_vec(),
        random_povm(d * d, spec.bob_outcomes(), rng).unwrap(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hw_expansion_round_trips(seed in any::<u64>(), n in 2usize..8) {
        let m = random_matrix(n, &mut seeded_rng(seed));
        let back = hw_reconstruct(&hw_expand(&m).unwrap());
        prop_assert!(back.max_abs_diff(&m) < 1e-12);
    }

    #[test]
    fn partial_transpose_is_involutive_and_keeps_trace(seed in any::<u64>(), da in 2usize..4, db in 2usize..4) {
        let rho = random_density((da, db), &mut seeded_rng(seed));
        let pt = partial_transpose(rho.matrix(), (da, db), Subsystem::A).unwrap();
        let back = partial_transpose(&pt, (da, db), Subsystem::A).unwrap();
        prop_assert!(back.max_abs_diff(rho.matrix()) < 1e-15);
        prop_assert!((pt.trace().re - 1.0).abs() < 1e-12);
        let ra = partial_trace(rho.matrix(), (da, db), Subsystem::B).unwrap();
        prop_assert!((ra.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn povms_stay_complete(seed in any::<u64>(), dim in 2usize..10, k in 2usize..6) {
        let mut rng = seeded_rng(seed);
        let p = random_povm(dim, k, &mut rng).unwrap();
        prop_assert!(p.completeness_defect() < 1e-10);
        let u = random_unitary(dim, &mut rng);
        prop_assert!(p.conjugated(&u).completeness_defect() < 1e-10);
    }

    #[test]
    fn witness_povms_are_complete(seed in any::<u64>(), family in 0usize..3, d in 2usize..4) {
        let spec = random_spec(family, d, &mut seeded_rng(seed));
        for p in spec.alice() {
            prop_assert!(p.completeness_defect() < 1e-10);
        }
    }

    #[test]
    fn correlations_are_normalized(seed in any::<u64>(), family in 0usize..3, d in 2usize..4) {
        let mut rng = seeded_rng(seed);
        let spec = random_spec(family, d, &mut rng);
        let table = correlations(&random_scenario(&spec, &mut rng));
        prop_assert!(table.validate().unwrap() < 1e-10);
    }

    #[test]
    fn eval_witness_is_linear(seed in any::<u64>(), family in 0usize..3, t in 0.0f64..1.0, s in -4.0f64..4.0) {
        let mut rng = seeded_rng(seed);
        let spec = random_spec(family, 2, &mut rng);
        let t1 = correlations(&random_scenario(&spec, &mut rng));
        let t2 = correlations(&random_scenario(&spec, &mut rng));
        let lhs = eval_witness(&spec, &t1.mix(&t2, t).unwrap()).unwrap();
        let rhs = t * eval_witness(&spec, &t1).unwrap() + (1.0 - t) * eval_witness(&spec, &t2).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
        let scaled = eval_witness(&spec.scaled(s), &t1).unwrap();
        prop_assert!((scaled - s * eval_witness(&spec, &t1).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn product_strategies_respect_bounds(seed in any::<u64>(), family in 0usize..3, d in 2usize..4) {
        let mut rng = seeded_rng(seed);
        let spec = random_spec(family, d, &mut rng);
        for _ in 0..5 {
            let strat = random_strategy(d, spec.bob_outcomes(), &mut rng);
            prop_assert!(sohs_value(&spec, &strat).unwrap() <= spec.sohs_bound() + 1e-9);
        }
    }

    #[test]
    fn universal_functional_is_minus_witness(seed in any::<u64>(), d in 2usize..4) {
        let mut rng = seeded_rng(seed);
        let w = npt_entanglement_witness(&random_npt(d, &mut rng)).unwrap();
        let spec = build_universal_witness(&w, d).unwrap();
        let strat = ProductStrategy { bob_response: 0, ..random_strategy(d, 2, &mut rng) };
        let psi = kron_vec(&strat.psi1, &strat.psi2);
        prop_assert!((sohs_value(&spec, &strat).unwrap() + w.expectation(&psi)).abs() < 1e-8);
    }

    #[test]
    fn seesaw_history_is_monotone(seed in any::<u64>(), family in 0usize..3) {
        let mut rng = seeded_rng(seed);
        let spec = random_spec(family, 2, &mut rng);
        let opts = SeesawOptions { restarts: 2, seed, ..SeesawOptions::default() };
        let r = seesaw_bound(&spec, &opts).unwrap();
        prop_assert!(r.history.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        prop_assert!((sohs_value(&spec, &r.strategy).unwrap() - r.value).abs() < 1e-10);
        prop_assert!(r.value <= spec.sohs_bound() + 1e-6);
    }

    #[test]
    fn witness_files_round_trip(seed in any::<u64>(), family in 0usize..3) {
        let spec = random_spec(family, 2, &mut seeded_rng(seed));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("w.json");
        save_witness(&spec, &p).unwrap();
        prop_assert_eq!(load_witness(&p).unwrap(), spec);
    }
}
