//! Named optimization scenarios and seeded stress-test cohorts.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::domain::ProblemInstance;
use crate::error::CoreError;
use crate::rng;

pub const GENERATOR_VERSION: &str = "chacha8-stream/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioId {
    Worst,
    Nominal,
    Best,
    /// 1-based sample number.
    Sample(u64),
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioId::Worst => f.write_str("worst"),
            ScenarioId::Nominal => f.write_str("nominal"),
            ScenarioId::Best => f.write_str("best"),
            ScenarioId::Sample(k) => write!(f, "sample-{k}"),
        }
    }
}

impl FromStr for ScenarioId {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "worst" => Ok(ScenarioId::Worst),
            "nominal" => Ok(ScenarioId::Nominal),
            "best" => Ok(ScenarioId::Best),
            _ => s
                .strip_prefix("sample-")
                .and_then(|k| k.parse::<u64>().ok())
                .filter(|&k| k >= 1)
                .map(ScenarioId::Sample)
                .ok_or_else(|| CoreError::format("scenario id", format!("unknown id {s:?}"))),
        }
    }
}

impl Serialize for ScenarioId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ScenarioId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One realization of every uncertain volume, `volumes[a][j]` in m³.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: ScenarioId,
    pub volumes: Vec<Vec<f64>>,
}

/// How draws below zero are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    /// Draw from `[μ−σ, μ+σ]` and replace negatives with 0.
    #[default]
    Clamp,
    /// Draw from `[max(μ−σ, 0), μ+σ]`.
    Truncate,
}

impl fmt::Display for SamplingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplingMode::Clamp => "clamp",
            SamplingMode::Truncate => "truncate",
        })
    }
}

impl FromStr for SamplingMode {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "clamp" => Ok(SamplingMode::Clamp),
            "truncate" => Ok(SamplingMode::Truncate),
            _ => Err(CoreError::InvalidParameter(format!("sampling mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioCohort {
    pub scenarios: Vec<Scenario>,
    /// Fingerprint of the instance the volumes were drawn for.
    pub instance_fingerprint: String,
    pub seed: u64,
    pub generator_version: String,
    pub mode: SamplingMode,
}

impl ScenarioCohort {
    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn fingerprint(&self) -> String {
        crate::fingerprint::cohort_fingerprint(self)
    }
}

fn stat_table(inst: &ProblemInstance, f: impl Fn(f64, f64) -> f64) -> Vec<Vec<f64>> {
    (0..inst.num_assortments())
        .map(|a| {
            inst.stands
                .iter()
                .map(|s| f(s.volume_mean[a], s.volume_sd[a]))
                .collect()
        })
        .collect()
}

/// Worst `max(μ−σ, 0)`, nominal `μ` and best `μ+σ`, in that order.
pub fn named_scenarios(inst: &ProblemInstance) -> [Scenario; 3] {
    [
        Scenario {
            id: ScenarioId::Worst,
            volumes: stat_table(inst, |m, s| (m - s).max(0.0)),
        },
        Scenario {
            id: ScenarioId::Nominal,
            volumes: stat_table(inst, |m, _| m),
        },
        Scenario {
            id: ScenarioId::Best,
            volumes: stat_table(inst, |m, s| m + s),
        },
    ]
}

/// Sample `k` (1-based) of the cohort for `seed`. Each sample owns ChaCha
/// stream `k`, so any sample can be produced on its own.
pub fn sample_scenario(inst: &ProblemInstance, k: u64, seed: u64, mode: SamplingMode) -> Scenario {
    let mut r = rng::stream(seed, k);
    let volumes = (0..inst.num_assortments())
        .map(|a| {
            inst.stands
                .iter()
                .map(|s| {
                    let (m, sd) = (s.volume_mean[a], s.volume_sd[a]);
                    match mode {
                        SamplingMode::Clamp => rng::uniform(&mut r, m - sd, m + sd).max(0.0),
                        SamplingMode::Truncate => rng::uniform(&mut r, (m - sd).max(0.0), m + sd),
                    }
                })
                .collect()
        })
        .collect();
    Scenario {
        id: ScenarioId::Sample(k),
        volumes,
    }
}

pub fn sample_cohort(
    inst: &ProblemInstance,
    count: usize,
    seed: u64,
    mode: SamplingMode,
) -> ScenarioCohort {
    ScenarioCohort {
        scenarios: (1..=count as u64)
            .map(|k| sample_scenario(inst, k, seed, mode))
            .collect(),
        instance_fingerprint: crate::fingerprint::instance_fingerprint(inst),
        seed,
        generator_version: GENERATOR_VERSION.into(),
        mode,
    }
}

/// The three named scenarios followed by `samples` random draws.
pub fn stress_cohort(
    inst: &ProblemInstance,
    samples: usize,
    seed: u64,
    mode: SamplingMode,
) -> ScenarioCohort {
    let mut cohort = sample_cohort(inst, samples, seed, mode);
    let mut all: Vec<Scenario> = named_scenarios(inst).into_iter().collect();
    all.append(&mut cohort.scenarios);
    cohort.scenarios = all;
    cohort
}
