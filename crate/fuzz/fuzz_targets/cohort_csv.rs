#![no_main]
//! Input: cohort manifest JSON, a NUL byte, then the cohort table.

use harvest_core::io::{cohort_manifest, format_cohort_csv, parse_cohort, CohortManifest};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some(split) = data.iter().position(|&b| b == 0) else {
        return;
    };
    let Ok(manifest) = serde_json::from_slice::<CohortManifest>(&data[..split]) else {
        return;
    };
    // keep allocations bounded
    if manifest
        .count
        .saturating_mul(manifest.assortments)
        .saturating_mul(manifest.stands)
        > 1 << 16
    {
        return;
    }
    let Ok(text) = std::str::from_utf8(&data[split + 1..]) else {
        return;
    };
    if let Ok(cohort) = parse_cohort(text, &manifest) {
        assert_eq!(cohort_manifest(&cohort), manifest);
        assert_eq!(format_cohort_csv(&cohort), text);
    }
});
