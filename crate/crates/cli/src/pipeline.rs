//! Stage runner over a bundle directory. Every stage records the
//! fingerprint of its inputs and outputs in `manifest.json`; a stage whose
//! inputs are unchanged and whose files verify is loaded instead of rerun.

use std::path::{Path, PathBuf};
use std::time::Instant;

use harvest_core::fingerprint::json_fingerprint;
use harvest_core::io;
use harvest_core::{
    compute_ideals, estimate_nadir, generate_archive, generate_weight_schedule,
    instance_fingerprint, named_scenarios, sample_cohort, stress_cohort, stress_test, synthesize,
    EvaluationMatrix, IdealTensor, ProblemInstance, ReferenceConfig, ScenarioCohort,
    SolutionArchive,
};
use harvest_milp::{MilpBackend, SolveOptions};
use harvest_service::bundle::{self, BundleManifest, StageRecord};
use serde::Serialize;

use crate::config::{
    ArchiveConfig, CohortConfig, IdealScenarios, IdealsConfig, InstanceConfig, PipelineConfig,
};
use crate::error::{CliError, Result, StageExt};

pub const STAGE_INSTANCE: &str = "instance";
pub const STAGE_COHORT: &str = "cohort";
pub const STAGE_IDEALS: &str = "ideals";
pub const STAGE_ARCHIVE: &str = "archive";
pub const STAGE_STRESS: &str = "stress";
pub const STAGES: [&str; 5] = [
    STAGE_INSTANCE,
    STAGE_COHORT,
    STAGE_IDEALS,
    STAGE_ARCHIVE,
    STAGE_STRESS,
];

/// An open bundle directory and its manifest.
pub struct Workspace {
    pub dir: PathBuf,
    pub manifest: BundleManifest,
    /// Rerun stages even when their records match.
    pub force: bool,
}

/// Whether a stage ran or was loaded from disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageRun {
    Computed,
    Skipped,
}

fn file_sha(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(json_fingerprint(&bytes))
}

impl Workspace {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        let path = dir.join(bundle::MANIFEST);
        let manifest = if path.is_file() {
            let m: BundleManifest = io::read_json(&path)?;
            if m.generator_version != harvest_core::GENERATOR_VERSION {
                log::warn!(
                    "bundle was written by scenario generator {}, this build uses {}; stages will be rerun",
                    m.generator_version,
                    harvest_core::GENERATOR_VERSION
                );
                BundleManifest::new()
            } else {
                m
            }
        } else {
            BundleManifest::new()
        };
        Ok(Workspace {
            dir,
            manifest,
            force: false,
        })
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }

    fn save(&self) -> Result<()> {
        io::write_json(&self.path(bundle::MANIFEST), &self.manifest)?;
        Ok(())
    }

    /// The stage's record if it is complete, its inputs match and its files
    /// are present.
    fn reusable(&self, stage: &str, inputs: &str) -> Option<&StageRecord> {
        if self.force {
            return None;
        }
        let rec = self.manifest.stages.get(stage)?;
        let ok = rec.complete
            && rec.inputs == inputs
            && rec.files.iter().all(|f| self.path(f).is_file());
        ok.then_some(rec)
    }

    fn begin(&mut self, stage: &str, inputs: &str, files: &[&str]) -> Result<()> {
        self.manifest.stages.insert(
            stage.into(),
            StageRecord {
                files: files.iter().map(|f| f.to_string()).collect(),
                fingerprint: String::new(),
                inputs: inputs.into(),
                seconds: 0.0,
                complete: false,
                notes: Default::default(),
            },
        );
        self.save()
    }

    fn finish(
        &mut self,
        stage: &str,
        fingerprint: String,
        started: Instant,
        notes: Vec<(&str, String)>,
    ) -> Result<()> {
        let rec = self
            .manifest
            .stages
            .get_mut(stage)
            .expect("stage begun before it finishes");
        rec.fingerprint = fingerprint;
        rec.seconds = started.elapsed().as_secs_f64();
        rec.complete = true;
        rec.notes = notes.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        log::info!("{stage}: done in {:.2} s", rec.seconds);
        self.save()
    }

    fn verify(stage: &'static str, rec: &StageRecord, actual: &str) -> Result<()> {
        if rec.fingerprint != actual {
            return Err(
                CliError::Core(harvest_core::CoreError::FingerprintMismatch(format!(
                    "files of stage {stage} changed since they were written"
                )))
                .in_stage(stage),
            );
        }
        log::info!("{stage}: up to date, skipped");
        Ok(())
    }

    fn record(&self, stage: &'static str) -> Result<&StageRecord> {
        match self.manifest.stages.get(stage) {
            Some(r) if r.complete => Ok(r),
            _ => Err(CliError::Config(format!(
                "stage {stage} has not completed in {}",
                self.dir.display()
            ))
            .in_stage(stage)),
        }
    }

    pub fn load_instance(&self) -> Result<ProblemInstance> {
        let rec = self.record(STAGE_INSTANCE)?;
        let inst = io::read_instance(&self.path(bundle::INSTANCE)).stage(STAGE_INSTANCE)?;
        Self::verify(STAGE_INSTANCE, rec, &instance_fingerprint(&inst))?;
        Ok(inst)
    }

    pub fn load_cohort(&self) -> Result<ScenarioCohort> {
        let rec = self.record(STAGE_COHORT)?;
        let c = io::read_cohort(
            &self.path(bundle::COHORT_CSV),
            &self.path(bundle::COHORT_MANIFEST),
        )
        .stage(STAGE_COHORT)?;
        Self::verify(STAGE_COHORT, rec, &c.fingerprint())?;
        Ok(c)
    }

    pub fn load_ideals(&self) -> Result<(IdealTensor, Option<Vec<f64>>)> {
        let rec = self.record(STAGE_IDEALS)?;
        let path = self.path(bundle::IDEALS);
        Self::verify(STAGE_IDEALS, rec, &file_sha(&path)?)?;
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        io::parse_ideals(&text).stage(STAGE_IDEALS)
    }

    pub fn load_archive(&self) -> Result<SolutionArchive> {
        let rec = self.record(STAGE_ARCHIVE)?;
        let a = io::read_archive(&self.path(bundle::ARCHIVE)).stage(STAGE_ARCHIVE)?;
        Self::verify(STAGE_ARCHIVE, rec, &a.fingerprint())?;
        Ok(a)
    }

    pub fn load_matrix(&self) -> Result<EvaluationMatrix> {
        let rec = self.record(STAGE_STRESS)?;
        let m = io::read_matrix(
            &self.path(bundle::MATRIX_BIN),
            &self.path(bundle::MATRIX_MANIFEST),
        )
        .stage(STAGE_STRESS)?;
        Self::verify(
            STAGE_STRESS,
            rec,
            &json_fingerprint(&(&m.archive_fingerprint, &m.cohort_fingerprint)),
        )?;
        Ok(m)
    }

    /// Reads or synthesizes the instance.
    pub fn instance(&mut self, cfg: &InstanceConfig) -> Result<(ProblemInstance, StageRun)> {
        const S: &str = STAGE_INSTANCE;
        let inputs = match (&cfg.path, &cfg.synth) {
            (Some(p), _) => json_fingerprint(&("path", file_sha(p).stage(S)?)),
            (None, Some(s)) => json_fingerprint(&("synth", s)),
            (None, None) => return Err(CliError::Config("no instance source".into()).in_stage(S)),
        };
        if self.reusable(S, &inputs).is_some() {
            return Ok((self.load_instance()?, StageRun::Skipped));
        }
        let started = Instant::now();
        self.begin(S, &inputs, &[bundle::INSTANCE, "stands.csv"])?;
        let inst = match (&cfg.path, &cfg.synth) {
            (Some(p), _) => io::read_instance(p).stage(S)?,
            (None, Some(s)) => synthesize(s),
            (None, None) => unreachable!(),
        };
        io::write_instance(&inst, &self.dir).stage(S)?;
        let notes = vec![
            ("stands", inst.num_stands().to_string()),
            ("periods", inst.periods.to_string()),
            ("assortments", inst.num_assortments().to_string()),
        ];
        self.finish(S, instance_fingerprint(&inst), started, notes)?;
        Ok((inst, StageRun::Computed))
    }

    pub fn cohort(
        &mut self,
        inst: &ProblemInstance,
        cfg: &CohortConfig,
    ) -> Result<(ScenarioCohort, StageRun)> {
        const S: &str = STAGE_COHORT;
        let inputs = json_fingerprint(&(
            instance_fingerprint(inst),
            cfg,
            harvest_core::GENERATOR_VERSION,
        ));
        if self.reusable(S, &inputs).is_some() {
            return Ok((self.load_cohort()?, StageRun::Skipped));
        }
        let started = Instant::now();
        self.begin(S, &inputs, &[bundle::COHORT_CSV, bundle::COHORT_MANIFEST])?;
        let samples = cfg.samples().stage(S)?;
        let cohort = if cfg.named {
            stress_cohort(inst, samples, cfg.seed, cfg.mode)
        } else {
            sample_cohort(inst, samples, cfg.seed, cfg.mode)
        };
        io::write_cohort(
            &cohort,
            &self.path(bundle::COHORT_CSV),
            &self.path(bundle::COHORT_MANIFEST),
        )
        .stage(S)?;
        let notes = vec![
            ("size", cohort.len().to_string()),
            ("seed", cfg.seed.to_string()),
        ];
        self.finish(S, cohort.fingerprint(), started, notes)?;
        Ok((cohort, StageRun::Computed))
    }

    pub fn ideals(
        &mut self,
        inst: &ProblemInstance,
        cohort: &ScenarioCohort,
        cfg: &IdealsConfig,
        backend: &dyn MilpBackend,
    ) -> Result<(IdealTensor, StageRun)> {
        const S: &str = STAGE_IDEALS;
        let set_fp = match cfg.scenarios {
            IdealScenarios::Cohort => cohort.fingerprint(),
            IdealScenarios::Optimization => "optimization".into(),
        };
        let inputs = json_fingerprint(&(instance_fingerprint(inst), set_fp, cfg, backend.name()));
        if self.reusable(S, &inputs).is_some() {
            return Ok((self.load_ideals()?.0, StageRun::Skipped));
        }
        let started = Instant::now();
        self.begin(S, &inputs, &[bundle::IDEALS])?;
        let named = named_scenarios(inst);
        let scenarios = match cfg.scenarios {
            IdealScenarios::Cohort => &cohort.scenarios[..],
            IdealScenarios::Optimization => &named[..],
        };
        let opts = cfg.solve_options();
        let run = compute_ideals(inst, scenarios, cfg.period_shortcut, &opts, backend).stage(S)?;
        let nadir = match cfg.scenarios {
            IdealScenarios::Optimization => Some(
                estimate_nadir(inst, scenarios, &run.tensor, &opts, backend)
                    .stage(S)?
                    .values,
            ),
            IdealScenarios::Cohort => None,
        };
        let path = self.path(bundle::IDEALS);
        let text = io::format_ideals_csv(&run.tensor, nadir.as_deref());
        std::fs::write(&path, &text).map_err(|e| CliError::io(&path, e).in_stage(S))?;
        let mut notes = vec![
            ("solves", run.solves.to_string()),
            ("shortcut", run.shortcut.to_string()),
            ("unproven", run.tensor.unproven().to_string()),
        ];
        for (n, w) in run.warnings.iter().enumerate() {
            notes.push(if n == 0 {
                ("warning", w.clone())
            } else {
                ("warning_more", w.clone())
            });
        }
        self.finish(S, file_sha(&path)?, started, notes)?;
        Ok((run.tensor, StageRun::Computed))
    }

    pub fn archive(
        &mut self,
        inst: &ProblemInstance,
        cfg: &ArchiveConfig,
        opts: &SolveOptions,
        ideal_opts: &SolveOptions,
        backend: &dyn MilpBackend,
    ) -> Result<(SolutionArchive, StageRun)> {
        const S: &str = STAGE_ARCHIVE;
        let inputs = json_fingerprint(&(instance_fingerprint(inst), cfg, opts, backend.name()));
        if self.reusable(S, &inputs).is_some() {
            return Ok((self.load_archive()?, StageRun::Skipped));
        }
        let started = Instant::now();
        self.begin(S, &inputs, &[bundle::ARCHIVE])?;
        let scenarios = named_scenarios(inst);
        let k = inst.num_meta_objectives(scenarios.len());
        let mut schedule = generate_weight_schedule(k, cfg.emphasis, cfg.base).stage(S)?;
        if cfg.normalize {
            let ideals = compute_ideals(inst, &scenarios, true, ideal_opts, backend).stage(S)?;
            let nadir =
                estimate_nadir(inst, &scenarios, &ideals.tensor, ideal_opts, backend).stage(S)?;
            schedule
                .normalize_by_range(&ideals.tensor.values, &nadir.values)
                .stage(S)?;
        }
        let mut base = ReferenceConfig::neutral(k);
        base.epsilon = cfg.epsilon;
        let archive =
            generate_archive(inst, &scenarios, &schedule, &base, opts, backend).stage(S)?;
        io::write_json(&self.path(bundle::ARCHIVE), &archive).stage(S)?;
        let limited = archive
            .entries
            .iter()
            .filter(|e| e.status.is_resource_limit())
            .count();
        if limited > 0 {
            log::warn!(
                "{limited} of {} archive solves stopped at a resource limit",
                archive.len()
            );
        }
        let dups = archive
            .entries
            .iter()
            .filter(|e| e.duplicate_of.is_some())
            .count();
        let notes = vec![
            ("entries", archive.len().to_string()),
            ("duplicates", dups.to_string()),
            ("resource_limited", limited.to_string()),
        ];
        self.finish(S, archive.fingerprint(), started, notes)?;
        Ok((archive, StageRun::Computed))
    }

    pub fn stress(
        &mut self,
        inst: &ProblemInstance,
        archive: &SolutionArchive,
        cohort: &ScenarioCohort,
    ) -> Result<(EvaluationMatrix, StageRun)> {
        const S: &str = STAGE_STRESS;
        let inputs = json_fingerprint(&(
            instance_fingerprint(inst),
            archive.fingerprint(),
            cohort.fingerprint(),
        ));
        if self.reusable(S, &inputs).is_some() {
            return Ok((self.load_matrix()?, StageRun::Skipped));
        }
        let started = Instant::now();
        self.begin(S, &inputs, &[bundle::MATRIX_BIN, bundle::MATRIX_MANIFEST])?;
        let matrix = stress_test(archive, cohort, inst).stage(S)?;
        io::write_matrix(
            &matrix,
            cohort.seed,
            &self.path(bundle::MATRIX_BIN),
            &self.path(bundle::MATRIX_MANIFEST),
        )
        .stage(S)?;
        let (n, s, k) = matrix.shape();
        let notes = vec![("shape", format!("{n}x{s}x{k}"))];
        let fp = json_fingerprint(&(&matrix.archive_fingerprint, &matrix.cohort_fingerprint));
        self.finish(S, fp, started, notes)?;
        Ok((matrix, StageRun::Computed))
    }
}

/// What a pipeline run produced.
#[derive(Debug)]
pub struct PipelineOutput {
    pub dir: PathBuf,
    pub instance: ProblemInstance,
    pub cohort: ScenarioCohort,
    pub ideals: Option<IdealTensor>,
    pub archive: SolutionArchive,
    pub matrix: EvaluationMatrix,
    pub runs: Vec<(&'static str, StageRun)>,
}

pub fn run_pipeline(cfg: &PipelineConfig, force: bool) -> Result<PipelineOutput> {
    cfg.validate()?;
    let opts = cfg.solver.solve_options()?;
    let backend = cfg.solver.backend(&cfg.output.join("solver"))?;
    let mut ws = Workspace::open(&cfg.output)?;
    ws.force = force;
    let mut runs = Vec::new();

    let (instance, r) = ws.instance(&cfg.instance)?;
    runs.push((STAGE_INSTANCE, r));
    let (cohort, r) = ws.cohort(&instance, &cfg.cohort)?;
    runs.push((STAGE_COHORT, r));
    let ideals = if cfg.ideals.enabled {
        let (t, r) = ws.ideals(&instance, &cohort, &cfg.ideals, backend.as_ref())?;
        runs.push((STAGE_IDEALS, r));
        Some(t)
    } else {
        None
    };
    let (archive, r) = ws.archive(
        &instance,
        &cfg.archive,
        &opts,
        &cfg.ideals.solve_options(),
        backend.as_ref(),
    )?;
    runs.push((STAGE_ARCHIVE, r));
    let (matrix, r) = ws.stress(&instance, &archive, &cohort)?;
    runs.push((STAGE_STRESS, r));
    if ideals.is_none() {
        // a stale table from an earlier run would be served as current
        let p = ws.path(bundle::IDEALS);
        if p.is_file() {
            std::fs::remove_file(&p).map_err(|e| CliError::io(&p, e))?;
        }
        ws.manifest.stages.remove(STAGE_IDEALS);
        ws.save()?;
    }
    Ok(PipelineOutput {
        dir: cfg.output.clone(),
        instance,
        cohort,
        ideals,
        archive,
        matrix,
        runs,
    })
}
