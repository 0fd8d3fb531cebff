//! Content fingerprints (hex SHA-256) used to tie artifacts together.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::domain::ProblemInstance;
use crate::scenario::ScenarioCohort;

/// Fingerprint of any value through its JSON form. Field order is fixed by
/// the struct definitions and floats print in shortest round-trip form, so
/// the result is stable across runs and platforms.
pub fn json_fingerprint<T: Serialize + ?Sized>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("serializable value");
    hex::encode(Sha256::digest(&bytes))
}

pub fn instance_fingerprint(inst: &ProblemInstance) -> String {
    json_fingerprint(inst)
}

/// Hashes ids, metadata and the raw bits of every volume.
pub fn cohort_fingerprint(cohort: &ScenarioCohort) -> String {
    let mut h = Sha256::new();
    h.update(cohort.instance_fingerprint.as_bytes());
    h.update(cohort.seed.to_le_bytes());
    h.update(cohort.generator_version.as_bytes());
    h.update(cohort.mode.to_string().as_bytes());
    for s in &cohort.scenarios {
        h.update(s.id.to_string().as_bytes());
        h.update([0u8]);
        for row in &s.volumes {
            h.update((row.len() as u64).to_le_bytes());
            for v in row {
                h.update(v.to_bits().to_le_bytes());
            }
        }
    }
    hex::encode(h.finalize())
}
