//! Multi-scenario multiobjective harvest scheduling.
//!
//! The crate covers the data model and schedule evaluation ([`domain`]),
//! named and sampled volume scenarios ([`scenario`]), the scalarized MILP and
//! its exact solution ([`scalarize`]), ideal points and the Pareto archive
//! ([`pareto`]), stress testing and domain-criterion robustness
//! ([`robustness`]) and the on-disk formats ([`io`]).

pub mod domain;
pub mod error;
pub mod fingerprint;
pub mod io;
pub mod pareto;
mod rng;
pub mod robustness;
pub mod scalarize;
pub mod scenario;
pub mod synth;

pub use domain::{
    evaluate_schedule, stand_count_summary, validate_instance, Assortment, DemandTable,
    HarvestSchedule, MetaObjectiveKey, ObjectiveVector, ProblemInstance, StandRecord, VOLUME_TOL,
};
pub use error::{CoreError, Result, ValidationIssue, ValidationReport};
pub use fingerprint::{cohort_fingerprint, instance_fingerprint};
pub use pareto::{
    audit_against_enumeration, audit_pareto, compute_ideals, dominates, estimate_nadir,
    generate_archive, generate_weight_schedule, summarize_ideals, ArchiveEntry, DominanceReport,
    IdealRun, IdealSummary, IdealTensor, NadirEstimate, SolutionArchive, WeightLabel,
    WeightSchedule,
};
pub use robustness::{
    domain_criterion, filter_solutions, objective_ranges, rank_solutions, stress_test, Aggregation,
    DomainCriteria, EvaluationMatrix, ObjectiveRange, RobustnessScore, ThresholdMode,
};
pub use scalarize::{
    brute_force_solve, build_scalarized_milp, build_single_objective_milp, for_each_schedule,
    meta_objectives, schedule_count, solve_scalarized, solve_single_objective, ModelLayout,
    ReferenceConfig, SingleOutcome, SolveOutcome, SolveStatus, DEFAULT_EPSILON,
};
pub use scenario::{
    named_scenarios, sample_cohort, sample_scenario, stress_cohort, SamplingMode, Scenario,
    ScenarioCohort, ScenarioId, GENERATOR_VERSION,
};
pub use synth::{synthesize, SynthConfig};
