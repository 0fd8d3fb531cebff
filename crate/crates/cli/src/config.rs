//! Pipeline configuration, read from TOML.
//!
//! ```toml
//! output = "bundle"
//!
//! [instance]
//! synth = { seed = 2024, stands = 250, periods = 12 }   # or: path = "forest/instance.toml"
//!
//! [cohort]
//! size = 1000          # three named scenarios plus size - 3 random draws
//! seed = 7
//!
//! [ideals]
//! scenarios = "cohort" # or "optimization"
//!
//! [archive]
//! emphasis = 100.0
//!
//! [solver]
//! relative_gap = 1e-4
//! node_limit = 1000
//! ```

use std::path::{Path, PathBuf};
use std::time::Duration;

use harvest_core::{SamplingMode, SynthConfig, DEFAULT_EPSILON};
use harvest_milp::{BuiltinBackend, ExternalCommandBackend, MilpBackend, SolveOptions};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub output: PathBuf,
    pub instance: InstanceConfig,
    #[serde(default)]
    pub cohort: CohortConfig,
    #[serde(default)]
    pub ideals: IdealsConfig,
    #[serde(default)]
    pub archive: ArchiveConfig,
    #[serde(default)]
    pub solver: SolverConfig,
}

/// Exactly one of `path` and `synth`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CohortConfig {
    /// Total size, named scenarios included when `named` is set.
    pub size: usize,
    pub seed: u64,
    pub mode: SamplingMode,
    /// Put worst, nominal and best first.
    pub named: bool,
}

impl Default for CohortConfig {
    fn default() -> Self {
        CohortConfig {
            size: 1000,
            seed: 1,
            mode: SamplingMode::Clamp,
            named: true,
        }
    }
}

impl CohortConfig {
    pub fn samples(&self) -> Result<usize> {
        if !self.named {
            return Ok(self.size);
        }
        self.size.checked_sub(3).ok_or_else(|| {
            CliError::Config(format!(
                "cohort size {} is smaller than the three named scenarios",
                self.size
            ))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdealScenarios {
    /// The three optimization scenarios; also yields a nadir estimate.
    Optimization,
    /// Every cohort member.
    Cohort,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdealsConfig {
    pub enabled: bool,
    pub scenarios: IdealScenarios,
    pub period_shortcut: bool,
    /// Per single-objective solve.
    pub node_limit: Option<u64>,
}

impl Default for IdealsConfig {
    fn default() -> Self {
        IdealsConfig {
            enabled: true,
            scenarios: IdealScenarios::Cohort,
            period_shortcut: true,
            node_limit: Some(2000),
        }
    }
}

impl IdealsConfig {
    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            relative_gap: 0.0,
            absolute_gap: 1e-9,
            node_limit: self.node_limit,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArchiveConfig {
    pub emphasis: f64,
    pub base: f64,
    pub epsilon: f64,
    /// Divide weights by (nadir − ideal) estimated over the optimization
    /// scenarios.
    pub normalize: bool,
}

impl Default for ArchiveConfig {
    fn default() -> Self {
        ArchiveConfig {
            emphasis: 100.0,
            base: 1.0,
            epsilon: DEFAULT_EPSILON,
            normalize: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    #[default]
    Builtin,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub backend: BackendKind,
    /// Command template for the external backend, with `{lp}` and `{sol}`.
    pub command: Option<String>,
    pub relative_gap: f64,
    /// Node limit per archive solve. A value of 0 keeps the heuristic start.
    pub node_limit: Option<u64>,
    /// Wall-clock limit per archive solve. Makes results timing dependent.
    pub time_limit_secs: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            backend: BackendKind::Builtin,
            command: None,
            relative_gap: 1e-4,
            node_limit: Some(1000),
            time_limit_secs: None,
        }
    }
}

impl SolverConfig {
    pub fn solve_options(&self) -> Result<SolveOptions> {
        if !(self.relative_gap >= 0.0 && self.relative_gap.is_finite()) {
            return Err(CliError::Config(format!(
                "relative gap {} is invalid",
                self.relative_gap
            )));
        }
        let mut o = SolveOptions::default().with_relative_gap(self.relative_gap);
        o.node_limit = self.node_limit;
        if let Some(s) = self.time_limit_secs {
            let d = Duration::try_from_secs_f64(s)
                .map_err(|_| CliError::Config(format!("time limit {s} is invalid")))?;
            o.time_limit = Some(d);
        }
        Ok(o)
    }

    pub fn backend(&self, workdir: &Path) -> Result<Box<dyn MilpBackend>> {
        match (self.backend, &self.command) {
            (BackendKind::Builtin, _) => Ok(Box::new(BuiltinBackend)),
            (BackendKind::External, Some(cmd)) => Ok(Box::new(
                ExternalCommandBackend::from_template(cmd, workdir)
                    .map_err(|e| CliError::Config(e.to_string()))?,
            )),
            (BackendKind::External, None) => Err(CliError::Config(
                "the external backend needs a command template".into(),
            )),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: PipelineConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        // relative paths are relative to the config file
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(p) = &cfg.instance.path {
            if p.is_relative() {
                cfg.instance.path = Some(base.join(p));
            }
        }
        if cfg.output.is_relative() {
            cfg.output = base.join(&cfg.output);
        }
        Ok(cfg)
    }

    /// Checks everything that can be checked before any file is written.
    pub fn validate(&self) -> Result<()> {
        self.validate_instance()
            .map_err(|e| e.in_stage(crate::pipeline::STAGE_INSTANCE))?;
        self.cohort
            .samples()
            .map_err(|e| e.in_stage(crate::pipeline::STAGE_COHORT))?;
        if self.cohort.size == 0 {
            return Err(CliError::Config("cohort size must be positive".into())
                .in_stage(crate::pipeline::STAGE_COHORT));
        }
        self.solver.solve_options()?;
        self.solver.backend(&self.output)?;
        let a = &self.archive;
        if !(a.emphasis > 0.0 && a.base > 0.0 && a.epsilon > 0.0) {
            return Err(
                CliError::Config("emphasis, base and epsilon must be positive".into())
                    .in_stage(crate::pipeline::STAGE_ARCHIVE),
            );
        }
        Ok(())
    }

    fn validate_instance(&self) -> Result<()> {
        match (&self.instance.path, &self.instance.synth) {
            (Some(p), None) => {
                if !p.is_file() {
                    return Err(CliError::Config(format!(
                        "instance file {} does not exist",
                        p.display()
                    )));
                }
            }
            (None, Some(s)) => {
                if s.stands == 0 || s.periods == 0 || s.dominance.is_empty() {
                    return Err(CliError::Config(
                        "synthetic instance needs stands, periods and assortments".into(),
                    ));
                }
            }
            _ => {
                return Err(CliError::Config(
                    "give exactly one of instance.path and instance.synth".into(),
                ))
            }
        }
        Ok(())
    }

    /// Case-study-shaped synthetic run: 250 stands, 12 periods, three
    /// assortments and 1000 stress scenarios.
    pub fn case_study(output: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            output: output.into(),
            instance: InstanceConfig {
                path: None,
                synth: Some(SynthConfig::default()),
            },
            cohort: CohortConfig::default(),
            ideals: IdealsConfig::default(),
            archive: ArchiveConfig::default(),
            solver: SolverConfig::default(),
        }
    }
}
