use harvest_core::io::{
    cohort_manifest, decode_matrix, encode_matrix, format_cohort_csv, format_ideals_csv,
    format_instance, parse_archive, parse_cohort, parse_ideals, parse_instance, read_instance,
    read_matrix, write_instance, write_matrix,
};
use harvest_core::{
    compute_ideals, generate_archive, generate_weight_schedule, instance_fingerprint,
    named_scenarios, stress_cohort, stress_test, synthesize, ReferenceConfig, SamplingMode,
    SynthConfig,
};
use harvest_milp::{BuiltinBackend, SolveOptions};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn instance_and_cohort_round_trip(seed in any::<u64>(), stands in 1usize..40, periods in 1usize..6) {
        let inst = synthesize(&SynthConfig::micro(seed, stands, periods));
        let (header, table) = format_instance(&inst, "stands.csv").unwrap();
        let back = parse_instance(&header, &table).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(instance_fingerprint(&back), instance_fingerprint(&inst));

        let cohort = stress_cohort(&inst, 15, seed, SamplingMode::Clamp);
        let csv = format_cohort_csv(&cohort);
        let parsed = parse_cohort(&csv, &cohort_manifest(&cohort)).unwrap();
        prop_assert_eq!(parsed, cohort);
    }
}

#[test]
fn bundle_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = synthesize(&SynthConfig::micro(8, 6, 2));
    let path = write_instance(&inst, dir.path()).unwrap();
    assert_eq!(read_instance(&path).unwrap(), inst);

    let sc = named_scenarios(&inst);
    let k = inst.num_meta_objectives(3);
    let archive = generate_archive(
        &inst,
        &sc,
        &generate_weight_schedule(k, 100.0, 1.0).unwrap(),
        &ReferenceConfig::neutral(k),
        &SolveOptions::exact(),
        &BuiltinBackend,
    )
    .unwrap();
    let text = serde_json::to_string_pretty(&archive).unwrap();
    assert_eq!(parse_archive(&text).unwrap(), archive);

    let ideals = compute_ideals(&inst, &sc, true, &SolveOptions::exact(), &BuiltinBackend).unwrap();
    let nadir = vec![1.5; ideals.tensor.len()];
    let (t, n) = parse_ideals(&format_ideals_csv(&ideals.tensor, Some(&nadir))).unwrap();
    assert_eq!(t, ideals.tensor);
    assert_eq!(n.as_deref(), Some(&nadir[..]));

    let cohort = stress_cohort(&inst, 30, 2, SamplingMode::Truncate);
    let m = stress_test(&archive, &cohort, &inst).unwrap();
    let bytes = encode_matrix(&m);
    let decoded = decode_matrix(&bytes).unwrap();
    assert_eq!(decoded.values, m.values);
    assert_eq!(decoded.scenarios, m.scenarios);
    for cut in [0, 7, 12, bytes.len() / 2, bytes.len() - 1] {
        assert!(decode_matrix(&bytes[..cut]).is_err(), "truncated at {cut}");
    }
    let (bin, man) = (dir.path().join("m.bin"), dir.path().join("m.json"));
    write_matrix(&m, 2, &bin, &man).unwrap();
    assert_eq!(read_matrix(&bin, &man).unwrap(), m);
    let mut tampered = std::fs::read(&bin).unwrap();
    *tampered.last_mut().unwrap() ^= 1;
    std::fs::write(&bin, tampered).unwrap();
    assert!(read_matrix(&bin, &man).is_err());
}

#[test]
fn cohort_rows_must_be_in_order() {
    let inst = synthesize(&SynthConfig::micro(2, 3, 1));
    let cohort = stress_cohort(&inst, 2, 1, SamplingMode::Clamp);
    let csv = format_cohort_csv(&cohort);
    let mut lines: Vec<&str> = csv.lines().collect();
    lines.swap(1, 2);
    let swapped = lines.join("\n");
    assert!(parse_cohort(&swapped, &cohort_manifest(&cohort)).is_err());
}
