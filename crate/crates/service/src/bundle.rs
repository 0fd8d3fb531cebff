//! Artifact bundles: the precomputed files a session works on.

use std::collections::BTreeMap;
use std::path::Path;

use harvest_core::io::{self, CohortManifest};
use harvest_core::{
    instance_fingerprint, EvaluationMatrix, IdealTensor, ProblemInstance, SolutionArchive,
};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ServiceError};

pub const MANIFEST: &str = "manifest.json";
pub const INSTANCE: &str = "instance.toml";
pub const COHORT_CSV: &str = "cohort.csv";
pub const COHORT_MANIFEST: &str = "cohort.json";
pub const IDEALS: &str = "ideals.csv";
pub const ARCHIVE: &str = "archive.json";
pub const MATRIX_BIN: &str = "matrix.bin";
pub const MATRIX_MANIFEST: &str = "matrix.json";

/// One pipeline stage as recorded in the bundle manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub files: Vec<String>,
    /// Fingerprint of the stage output.
    pub fingerprint: String,
    /// Fingerprint of everything the stage was computed from.
    pub inputs: String,
    pub seconds: f64,
    pub complete: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, String>,
}

/// `manifest.json` at the root of a bundle directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleManifest {
    pub tool_version: String,
    pub generator_version: String,
    pub stages: BTreeMap<String, StageRecord>,
}

impl BundleManifest {
    pub fn new() -> Self {
        BundleManifest {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            generator_version: harvest_core::GENERATOR_VERSION.into(),
            stages: BTreeMap::new(),
        }
    }

    pub fn is_complete(&self, stage: &str) -> bool {
        self.stages.get(stage).is_some_and(|s| s.complete)
    }
}

impl Default for BundleManifest {
    fn default() -> Self {
        Self::new()
    }
}

/// Loaded, mutually consistent artifacts.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub name: String,
    pub instance: ProblemInstance,
    pub instance_fingerprint: String,
    pub archive: SolutionArchive,
    pub archive_fingerprint: String,
    pub cohort: CohortManifest,
    pub matrix: EvaluationMatrix,
    pub ideals: Option<IdealTensor>,
}

impl Bundle {
    /// Checks that every artifact was derived from the same instance and
    /// that the matrix belongs to this archive and cohort.
    pub fn from_parts(
        name: impl Into<String>,
        instance: ProblemInstance,
        archive: SolutionArchive,
        cohort: CohortManifest,
        matrix: EvaluationMatrix,
        ideals: Option<IdealTensor>,
    ) -> Result<Self> {
        if archive.is_empty() {
            return Err(ServiceError::MissingArtifact(
                "the archive has no entries".into(),
            ));
        }
        let fp = instance_fingerprint(&instance);
        if archive.instance_fingerprint != fp {
            return Err(ServiceError::FingerprintMismatch(
                "archive was built for a different instance".into(),
            ));
        }
        if cohort.instance_fingerprint != fp {
            return Err(ServiceError::FingerprintMismatch(
                "cohort was drawn for a different instance".into(),
            ));
        }
        let archive_fingerprint = archive.fingerprint();
        if matrix.archive_fingerprint != archive_fingerprint {
            return Err(ServiceError::FingerprintMismatch(
                "evaluation matrix belongs to a different archive".into(),
            ));
        }
        if matrix.cohort_fingerprint != cohort.fingerprint {
            return Err(ServiceError::FingerprintMismatch(
                "evaluation matrix belongs to a different cohort".into(),
            ));
        }
        matrix.check()?;
        if matrix.solutions != archive.ids()
            || matrix.scenarios.len() != cohort.count
            || matrix.assortments != instance.num_assortments()
            || matrix.periods != instance.periods
        {
            return Err(ServiceError::FingerprintMismatch(
                "evaluation matrix shape does not match the archive, cohort and instance".into(),
            ));
        }
        if matrix.scenarios.is_empty() {
            return Err(ServiceError::MissingArtifact("the cohort is empty".into()));
        }
        if let Some(t) = &ideals {
            if t.assortments != instance.num_assortments() || t.periods != instance.periods {
                return Err(ServiceError::FingerprintMismatch(
                    "ideal tensor does not match the instance".into(),
                ));
            }
        }
        Ok(Bundle {
            name: name.into(),
            instance,
            instance_fingerprint: fp,
            archive,
            archive_fingerprint,
            cohort,
            matrix,
            ideals,
        })
    }

    /// Loads a bundle directory written by the pipeline. The ideals table is
    /// optional; everything else is required.
    pub fn load(dir: &Path) -> Result<Self> {
        let need = |file: &str| {
            let p = dir.join(file);
            if p.is_file() {
                Ok(p)
            } else {
                Err(ServiceError::MissingArtifact(p.display().to_string()))
            }
        };
        let instance = io::read_instance(&need(INSTANCE)?)?;
        let archive = io::read_archive(&need(ARCHIVE)?)?;
        let cohort: CohortManifest = io::read_json(&need(COHORT_MANIFEST)?)?;
        let matrix = io::read_matrix(&need(MATRIX_BIN)?, &need(MATRIX_MANIFEST)?)?;
        let ideals_path = dir.join(IDEALS);
        let ideals = if ideals_path.is_file() {
            Some(io::parse_ideals(&std::fs::read_to_string(&ideals_path)?)?.0)
        } else {
            None
        };
        let name = dir.file_name().map_or_else(
            || "bundle".to_string(),
            |n| n.to_string_lossy().into_owned(),
        );
        Bundle::from_parts(name, instance, archive, cohort, matrix, ideals)
    }
}
