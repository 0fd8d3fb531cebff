use harvest_core::{
    brute_force_solve, evaluate_schedule, for_each_schedule, generate_weight_schedule,
    meta_objectives, named_scenarios, solve_scalarized, synthesize, HarvestSchedule,
    ReferenceConfig, SynthConfig, WeightLabel,
};
use harvest_milp::{BuiltinBackend, SolveOptions};
use proptest::prelude::*;

fn schedule(stands: usize, periods: usize) -> impl Strategy<Value = Vec<u32>> {
    proptest::collection::vec(0..=periods as u32, stands)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn deviations_are_distances_to_demand(seed in 0u64..500, assign in schedule(9, 3)) {
        let inst = synthesize(&SynthConfig::micro(seed, 9, 3));
        let [_, nominal, _] = named_scenarios(&inst);
        let s = HarvestSchedule::from_periods(assign.clone());
        let f = evaluate_schedule(&s, &nominal.volumes, &inst).unwrap();
        for a in 0..inst.assortments.len() {
            for t in 0..3 {
                let h: f64 = (0..9).filter(|&j| assign[j] as usize == t + 1).map(|j| nominal.volumes[a][j]).sum();
                prop_assert!((f.get(a, t) - (h - inst.demand.get(a, t)).abs()).abs() <= 1e-9);
            }
        }
        // moving every stand out of the horizon leaves the demand itself
        let none = evaluate_schedule(&HarvestSchedule::unharvested(9), &nominal.volumes, &inst).unwrap();
        for a in 0..inst.assortments.len() {
            for t in 0..3 {
                prop_assert_eq!(none.get(a, t), inst.demand.get(a, t));
            }
        }
    }

    #[test]
    fn meta_objectives_follow_canonical_order(seed in 0u64..500, assign in schedule(7, 2)) {
        let inst = synthesize(&SynthConfig::micro(seed, 7, 2));
        let sc = named_scenarios(&inst);
        let s = HarvestSchedule::from_periods(assign);
        let f = meta_objectives(&s, &inst, &sc).unwrap();
        for (p, scen) in sc.iter().enumerate() {
            let v = evaluate_schedule(&s, &scen.volumes, &inst).unwrap();
            for a in 0..inst.assortments.len() {
                for t in 0..2 {
                    prop_assert_eq!(f[(a * 2 + t) * 3 + p], v.get(a, t));
                }
            }
        }
    }

    #[test]
    fn scalarization_is_monotone(
        f in proptest::collection::vec(0.0..100.0f64, 6),
        bump in proptest::collection::vec(0.0..10.0f64, 6),
        w in proptest::collection::vec(0.1..50.0f64, 6),
        z in proptest::collection::vec(0.0..30.0f64, 6),
    ) {
        let r = ReferenceConfig { aspiration: z, weights: w, epsilon: 1e-4 };
        let g: Vec<f64> = f.iter().zip(&bump).map(|(a, b)| a + b).collect();
        prop_assert!(r.scalarize(&g) >= r.scalarize(&f) - 1e-12);
        prop_assert!(r.scalarize(&f) >= r.scalarize(&[0.0; 6]) - 1e-12);
    }
}

#[test]
fn exact_solve_matches_enumeration() {
    for seed in 0..12 {
        let inst = synthesize(&SynthConfig::micro(seed, 7, 2));
        let sc = named_scenarios(&inst);
        let k = inst.num_meta_objectives(3);
        let schedule = generate_weight_schedule(k, 100.0, 1.0).unwrap();
        for w in schedule.weights.iter().step_by(5) {
            let r = ReferenceConfig::neutral(k).with_weights(w.clone());
            let milp =
                solve_scalarized(&inst, &sc, &r, &SolveOptions::exact(), &BuiltinBackend).unwrap();
            let brute = brute_force_solve(&inst, &sc, &r).unwrap();
            let mut best = f64::INFINITY;
            for_each_schedule(&inst, &sc, |_, f| best = best.min(r.scalarize(f))).unwrap();
            assert!(
                (milp.objective - best).abs() <= 1e-7 * best.max(1.0),
                "seed {seed}"
            );
            assert!((brute.objective - best).abs() <= 1e-12 * best.max(1.0));
            assert!(milp.bound <= milp.objective);
        }
    }
}

#[test]
fn weight_schedule_layout() {
    let s = generate_weight_schedule(108, 100.0, 1.0).unwrap();
    assert_eq!(s.len(), 109);
    assert_eq!(s.labels[108], WeightLabel::Neutral);
    assert!(s.weights[108].iter().all(|&w| w == 1.0));
    for i in 0..108 {
        assert_eq!(s.labels[i], WeightLabel::Emphasis(i));
        assert_eq!(s.weights[i].iter().filter(|&&w| w == 100.0).count(), 1);
        assert_eq!(s.weights[i][i], 100.0);
    }
    assert!(generate_weight_schedule(0, 100.0, 1.0).is_err());
    assert!(generate_weight_schedule(3, -1.0, 1.0).is_err());
}
