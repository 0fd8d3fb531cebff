#![allow(dead_code)]

use std::path::Path;

use harvest_core::io;
use harvest_core::{
    generate_archive, generate_weight_schedule, named_scenarios, stress_cohort, stress_test,
    synthesize, ReferenceConfig, SamplingMode, ScenarioCohort, SolutionArchive, SynthConfig,
};
use harvest_milp::{BuiltinBackend, SolveOptions};
use harvest_service::bundle::{self, Bundle};

pub struct Parts {
    pub instance: harvest_core::ProblemInstance,
    pub archive: SolutionArchive,
    pub cohort: ScenarioCohort,
    pub matrix: harvest_core::EvaluationMatrix,
}

pub fn parts(seed: u64) -> Parts {
    let mut cfg = SynthConfig::micro(seed, 6, 3);
    cfg.dominance = vec![("pine".into(), 0.5), ("spruce".into(), 0.5)];
    let instance = synthesize(&cfg);
    let scenarios = named_scenarios(&instance);
    let k = instance.num_meta_objectives(scenarios.len());
    let schedule = generate_weight_schedule(k, 10.0, 1.0).unwrap();
    let archive = generate_archive(
        &instance,
        &scenarios,
        &schedule,
        &ReferenceConfig::neutral(k),
        &SolveOptions::exact(),
        &BuiltinBackend,
    )
    .unwrap();
    let cohort = stress_cohort(&instance, 60, seed, SamplingMode::Clamp);
    let matrix = stress_test(&archive, &cohort, &instance).unwrap();
    Parts {
        instance,
        archive,
        cohort,
        matrix,
    }
}

pub fn bundle(seed: u64) -> Bundle {
    let p = parts(seed);
    Bundle::from_parts(
        format!("micro-{seed}"),
        p.instance,
        p.archive,
        io::cohort_manifest(&p.cohort),
        p.matrix,
        None,
    )
    .unwrap()
}

pub fn write_bundle(p: &Parts, dir: &Path) {
    io::write_instance(&p.instance, dir).unwrap();
    io::write_json(&dir.join(bundle::ARCHIVE), &p.archive).unwrap();
    io::write_cohort(
        &p.cohort,
        &dir.join(bundle::COHORT_CSV),
        &dir.join(bundle::COHORT_MANIFEST),
    )
    .unwrap();
    io::write_matrix(
        &p.matrix,
        p.cohort.seed,
        &dir.join(bundle::MATRIX_BIN),
        &dir.join(bundle::MATRIX_MANIFEST),
    )
    .unwrap();
}
