use harvest_core::{
    named_scenarios, sample_scenario, stress_cohort, synthesize, SamplingMode, ScenarioId,
    SynthConfig,
};
use proptest::prelude::*;

fn mode() -> impl Strategy<Value = SamplingMode> {
    prop_oneof![Just(SamplingMode::Clamp), Just(SamplingMode::Truncate)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn samples_stay_inside_the_uncertainty_band(
        inst_seed in 0u64..1000, seed in any::<u64>(), mode in mode(), stands in 1usize..30,
    ) {
        let inst = synthesize(&SynthConfig::micro(inst_seed, stands, 2));
        let cohort = stress_cohort(&inst, 20, seed, mode);
        prop_assert_eq!(cohort.len(), 23);
        let ids: Vec<ScenarioId> = cohort.scenarios.iter().map(|s| s.id).collect();
        prop_assert_eq!(&ids[..4], &[ScenarioId::Worst, ScenarioId::Nominal, ScenarioId::Best, ScenarioId::Sample(1)]);
        let [worst, nominal, best] = named_scenarios(&inst);
        for (a, _) in inst.assortments.iter().enumerate() {
            for (j, st) in inst.stands.iter().enumerate() {
                let (m, sd) = (st.volume_mean[a], st.volume_sd[a]);
                prop_assert!(worst.volumes[a][j] <= nominal.volumes[a][j]);
                prop_assert!(nominal.volumes[a][j] <= best.volumes[a][j]);
                for s in &cohort.scenarios[3..] {
                    let v = s.volumes[a][j];
                    prop_assert!(v >= 0.0 && v >= worst.volumes[a][j] && v <= m + sd, "{} not in [{}, {}]", v, m - sd, m + sd);
                }
            }
        }
    }

    #[test]
    fn samples_do_not_depend_on_cohort_size(seed in any::<u64>(), k in 1u64..40, mode in mode()) {
        let inst = synthesize(&SynthConfig::micro(3, 12, 2));
        let cohort = stress_cohort(&inst, 40, seed, mode);
        prop_assert_eq!(&cohort.scenarios[k as usize + 2], &sample_scenario(&inst, k, seed, mode));
        let shorter = stress_cohort(&inst, k as usize, seed, mode);
        prop_assert_eq!(&shorter.scenarios[..], &cohort.scenarios[..shorter.len()]);
    }
}

#[test]
fn seeds_reproduce_and_differ() {
    let inst = synthesize(&SynthConfig::micro(1, 15, 3));
    let a = stress_cohort(&inst, 50, 9, SamplingMode::Clamp);
    let b = stress_cohort(&inst, 50, 9, SamplingMode::Clamp);
    let c = stress_cohort(&inst, 50, 10, SamplingMode::Clamp);
    assert_eq!(a, b);
    assert_eq!(a.fingerprint(), b.fingerprint());
    assert_ne!(a.fingerprint(), c.fingerprint());
    assert_ne!(a.scenarios[3], c.scenarios[3]);
}

#[test]
fn sample_mean_tracks_stand_mean() {
    // uniform on [m − sd, m + sd] has mean m whenever m ≥ sd
    let inst = synthesize(&SynthConfig::micro(5, 10, 2));
    let cohort = stress_cohort(&inst, 4000, 77, SamplingMode::Truncate);
    for (a, _) in inst.assortments.iter().enumerate() {
        for (j, st) in inst.stands.iter().enumerate() {
            let (m, sd) = (st.volume_mean[a], st.volume_sd[a]);
            if m < sd || sd == 0.0 {
                continue;
            }
            let mean: f64 = cohort.scenarios[3..]
                .iter()
                .map(|s| s.volumes[a][j])
                .sum::<f64>()
                / 4000.0;
            // standard error of the mean is sd / sqrt(3·4000)
            assert!(
                (mean - m).abs() < 5.0 * sd / (3.0f64 * 4000.0).sqrt(),
                "stand {j}: {mean} vs {m}"
            );
        }
    }
}
