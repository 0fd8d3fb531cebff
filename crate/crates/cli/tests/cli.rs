use std::path::Path;
use std::process::{Command, Output};

use harvest_cli::config::{IdealScenarios, InstanceConfig, PipelineConfig};
use harvest_cli::{run_pipeline, StageRun};
use harvest_core::SynthConfig;

fn harvest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_harvest"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = harvest(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn micro_config(out: &Path) -> PipelineConfig {
    let mut cfg = PipelineConfig::case_study(out);
    cfg.instance = InstanceConfig {
        path: None,
        synth: Some(SynthConfig::micro(5, 6, 2)),
    };
    cfg.cohort.size = 50;
    cfg.ideals.scenarios = IdealScenarios::Optimization;
    cfg.solver.node_limit = None;
    cfg
}

#[test]
fn rerun_skips_completed_stages() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = micro_config(&dir.path().join("b"));
    let first = run_pipeline(&cfg, false).unwrap();
    assert!(first.runs.iter().all(|(_, r)| *r == StageRun::Computed));
    let second = run_pipeline(&cfg, false).unwrap();
    assert!(
        second.runs.iter().all(|(_, r)| *r == StageRun::Skipped),
        "{:?}",
        second.runs
    );
    assert_eq!(first.archive, second.archive);
    assert_eq!(first.matrix, second.matrix);

    // a new cohort seed reruns the cohort and everything that reads it
    let mut changed = cfg.clone();
    changed.cohort.seed += 1;
    let third = run_pipeline(&changed, false).unwrap();
    let runs: Vec<(&str, StageRun)> = third.runs.clone();
    assert_eq!(
        runs,
        vec![
            ("instance", StageRun::Skipped),
            ("cohort", StageRun::Computed),
            ("ideals", StageRun::Skipped),
            ("archive", StageRun::Skipped),
            ("stress", StageRun::Computed),
        ]
    );
}

#[test]
fn tampered_artifact_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = micro_config(&dir.path().join("b"));
    run_pipeline(&cfg, false).unwrap();
    let p = cfg.output.join("archive.json");
    let text = std::fs::read_to_string(&p).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let sched = &mut v["entries"][0]["schedule"][0];
    *sched = serde_json::json!((sched.as_u64().unwrap() + 1) % 3);
    std::fs::write(&p, v.to_string()).unwrap();
    let err = run_pipeline(&cfg, false).unwrap_err();
    assert!(err.to_string().contains("[archive]"), "{err}");
    assert_eq!(err.exit_code(), 1);
    // forcing rebuilds it
    run_pipeline(&cfg, true).unwrap();
}

#[test]
fn missing_instance_path_leaves_no_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.toml");
    std::fs::write(
        &cfg_path,
        "output = \"bundle\"\n[instance]\npath = \"nowhere/instance.toml\"\n",
    )
    .unwrap();
    let out = harvest(&["pipeline", cfg_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[instance]"), "{err}");
    assert!(!dir.path().join("bundle").exists());
}

#[test]
fn config_errors_exit_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.toml");
    std::fs::write(
        &cfg_path,
        "output = \"b\"\n[instance]\nsynth = { stands = 4 }\n[cohort]\nsize = 2\n",
    )
    .unwrap();
    let out = harvest(&["pipeline", cfg_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("[cohort]"));

    std::fs::write(&cfg_path, "output = \"b\"\nbogus = 1\n").unwrap();
    assert_eq!(
        harvest(&["pipeline", cfg_path.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );

    // stress before an archive exists
    let b = dir.path().join("partial");
    ok(&[
        "synth",
        b.to_str().unwrap(),
        "--stands",
        "4",
        "--periods",
        "2",
    ]);
    let out = harvest(&["stress", b.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("has not completed"));
}

#[test]
fn subcommands_build_a_servable_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("b");
    let bs = b.to_str().unwrap();
    ok(&[
        "synth",
        bs,
        "--seed",
        "8",
        "--stands",
        "5",
        "--periods",
        "2",
    ]);
    ok(&["scenarios", bs, "--size", "40", "--seed", "3"]);
    let ideals = ok(&["ideals", bs, "--node-limit", "100000"]);
    assert!(ideals.contains("spruce"), "{ideals}");
    let gen = ok(&["generate", bs, "--gap", "0", "--node-limit", "100000"]);
    assert!(gen.contains("archive: 19 entries"), "{gen}");
    let stress = ok(&["stress", bs]);
    assert!(stress.contains("19 x 40 x 6"), "{stress}");

    let csv = dir.path().join("scores.csv");
    let rep = ok(&[
        "report",
        bs,
        "--criteria",
        "0.3,0.2,0.3",
        "--scores-csv",
        csv.to_str().unwrap(),
    ]);
    assert!(rep.contains("min score over first 3 periods"), "{rep}");
    let lines = std::fs::read_to_string(&csv).unwrap().lines().count();
    assert_eq!(lines, 1 + 19 * 3 * 2);

    let bundle = harvest_service::Bundle::load(&b).unwrap();
    assert_eq!(bundle.archive.len(), 19);
    assert_eq!(bundle.matrix.scenarios.len(), 40);
    assert!(bundle.ideals.is_some());
}

#[test]
fn export_lp_writes_the_model() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("b");
    let bs = b.to_str().unwrap();
    ok(&["synth", bs, "--stands", "4", "--periods", "2"]);
    let lp = dir.path().join("m.lp");
    let msg = ok(&[
        "export-lp",
        bs,
        "--weights",
        "emphasis-2",
        "-o",
        lp.to_str().unwrap(),
    ]);
    // 4 stands x 2 periods binaries; 18 deviations plus the max term
    assert!(msg.contains("8 binaries, 19 continuous"), "{msg}");
    let text = std::fs::read_to_string(&lp).unwrap();
    assert!(text.contains("Binar") || text.contains("binar"), "{text}");
    let out = harvest(&[
        "export-lp",
        bs,
        "--weights",
        "emphasis-99",
        "-o",
        lp.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_lists_every_subcommand() {
    let help = ok(&["--help"]);
    for sub in [
        "pipeline",
        "synth",
        "scenarios",
        "ideals",
        "generate",
        "stress",
        "report",
        "export-lp",
        "serve",
    ] {
        assert!(help.contains(sub), "{sub} missing from help");
    }
}
