mod common;

use std::sync::Arc;

use harvest_core::{io, DomainCriteria};
use harvest_service::session::{ActionOutput, CriteriaRequest};
use harvest_service::{
    parse_journal, replay_journal, Action, Bundle, FilterRule, ScoreCache, ServiceError,
    SessionManager,
};

fn criteria(f: f64) -> DomainCriteria {
    DomainCriteria::per_assortment(&[f, f], 3)
}

#[test]
fn bundle_round_trips_through_a_directory() {
    let p = common::parts(3);
    let dir = tempfile::tempdir().unwrap();
    common::write_bundle(&p, dir.path());
    let b = Bundle::load(dir.path()).unwrap();
    assert_eq!(b.archive, p.archive);
    assert_eq!(b.matrix, p.matrix);
    assert!(b.ideals.is_none());
}

#[test]
fn bundle_rejects_a_matrix_from_another_archive() {
    let p = common::parts(3);
    let other = common::parts(4);
    let err = Bundle::from_parts(
        "x",
        p.instance.clone(),
        p.archive.clone(),
        io::cohort_manifest(&p.cohort),
        other.matrix,
        None,
    )
    .unwrap_err();
    assert!(matches!(err, ServiceError::FingerprintMismatch(_)), "{err}");
}

#[test]
fn bundle_load_reports_missing_files() {
    let p = common::parts(3);
    let dir = tempfile::tempdir().unwrap();
    common::write_bundle(&p, dir.path());
    std::fs::remove_file(dir.path().join("matrix.bin")).unwrap();
    assert!(matches!(
        Bundle::load(dir.path()),
        Err(ServiceError::MissingArtifact(_))
    ));
}

#[test]
fn full_session_replays_identically_from_disk() {
    let b = common::bundle(5);
    let ids = b.archive.ids();
    let dir = tempfile::tempdir().unwrap();
    let m = SessionManager::new(vec![b.clone()], Some(dir.path().into())).unwrap();
    let s = m.create_session(None).unwrap();
    m.set_criteria(
        &s.id,
        CriteriaRequest {
            thresholds: None,
            per_assortment: Some(vec![0.1, 0.1]),
            mode: Default::default(),
            inclusive: false,
        },
    )
    .unwrap();
    m.act(
        &s.id,
        Action::Filter {
            rules: vec![FilterRule {
                floor: 0.0,
                periods: vec![1, 2],
                assortments: None,
            }],
        },
    )
    .unwrap();
    m.act(&s.id, Action::InspectDecisions { solution: ids[0] })
        .unwrap();
    m.act(
        &s.id,
        Action::Shortlist {
            ids: vec![ids[1], ids[0], ids[1]],
        },
    )
    .unwrap();
    m.act(&s.id, Action::Finalize { solution: ids[0] }).unwrap();

    let text = std::fs::read_to_string(dir.path().join(format!("{}.jsonl", s.id))).unwrap();
    let records = parse_journal(&text).unwrap();
    assert_eq!(records.len(), 5);
    assert_eq!(records[3].result, vec![ids[1], ids[0]]);
    assert!(dir.path().join(format!("{}.report.json", s.id)).is_file());

    // fresh cache, fresh session
    let replayed = replay_journal(Arc::new(b), &records, &ScoreCache::default()).unwrap();
    let originals: Vec<Vec<u32>> = records.iter().map(|r| r.result.clone()).collect();
    assert_eq!(replayed, originals);
    assert_eq!(m.replay(&s.id).unwrap(), originals);
}

#[test]
fn tampered_journal_diverges() {
    let b = Arc::new(common::bundle(5));
    let mut s = harvest_service::Session::new("t".into(), b.clone());
    let cache = ScoreCache::default();
    let action = Action::SetCriteria {
        criteria: criteria(0.2),
    };
    let (ids, _) = s.execute(&action, &cache).unwrap();
    let mut rec = s.record(action, ids);
    rec.result.reverse();
    rec.result.push(999);
    let err = replay_journal(b, &[rec], &cache).unwrap_err();
    assert!(
        matches!(err, ServiceError::ReplayDiverged { seq: 1, .. }),
        "{err}"
    );
}

#[test]
fn scores_are_cached_across_sessions() {
    let m = SessionManager::new(vec![common::bundle(5)], None).unwrap();
    let hit = |id: &str| match m
        .act(
            id,
            Action::SetCriteria {
                criteria: criteria(0.3),
            },
        )
        .unwrap()
    {
        ActionOutput::Criteria(c) => c.cache_hit,
        other => panic!("{other:?}"),
    };
    let a = m.create_session(None).unwrap();
    let b = m.create_session(None).unwrap();
    assert!(!hit(&a.id));
    assert!(hit(&b.id));
    assert_eq!(m.cache().len(), 1);
}

#[test]
fn ranking_is_by_minimum_focus_score() {
    let b = Arc::new(common::bundle(6));
    let mut s = harvest_service::Session::new("r".into(), b.clone());
    let out = s
        .execute(
            &Action::SetCriteria {
                criteria: criteria(0.15),
            },
            &ScoreCache::default(),
        )
        .unwrap()
        .1;
    let ActionOutput::Criteria(c) = out else {
        panic!()
    };
    assert_eq!(c.cohort_size, b.matrix.scenarios.len());
    for w in c.ranking.windows(2) {
        assert!(w[0].score > w[1].score || (w[0].score == w[1].score && w[0].id < w[1].id));
    }
    for r in &c.ranking {
        let sc = c.scores.iter().find(|x| x.id == r.id).unwrap();
        let min = sc
            .scores
            .iter()
            .flatten()
            .fold(f64::INFINITY, |m, &v| m.min(v));
        assert_eq!(r.score, min);
    }
}

#[test]
fn rule_errors() {
    let b = Arc::new(common::bundle(5));
    let cache = ScoreCache::default();
    let mut s = harvest_service::Session::new("e".into(), b.clone());
    let filter = |floor: f64, periods: Vec<usize>| Action::Filter {
        rules: vec![FilterRule {
            floor,
            periods,
            assortments: None,
        }],
    };
    assert!(matches!(
        s.execute(&filter(0.5, vec![1]), &cache),
        Err(ServiceError::CriteriaNotSet)
    ));
    s.execute(
        &Action::SetCriteria {
            criteria: criteria(0.2),
        },
        &cache,
    )
    .unwrap();
    assert!(matches!(
        s.execute(&filter(0.5, vec![4]), &cache),
        Err(ServiceError::InvalidRequest(_))
    ));
    assert!(matches!(
        s.execute(&filter(1.5, vec![1]), &cache),
        Err(ServiceError::InvalidRequest(_))
    ));
    let bad = Action::SetCriteria {
        criteria: criteria(-0.1),
    };
    assert!(matches!(
        s.execute(&bad, &cache),
        Err(ServiceError::InvalidThreshold(_))
    ));
    assert!(matches!(
        s.execute(&Action::Finalize { solution: 1 }, &cache),
        Err(ServiceError::NotShortlisted(1))
    ));
    assert!(matches!(
        s.execute(&Action::Shortlist { ids: vec![9999] }, &cache),
        Err(ServiceError::UnknownSolution(9999))
    ));
    s.execute(&Action::Shortlist { ids: vec![1] }, &cache)
        .unwrap();
    s.execute(&Action::Finalize { solution: 1 }, &cache)
        .unwrap();
    assert!(matches!(
        s.execute(&Action::Shortlist { ids: vec![1] }, &cache),
        Err(ServiceError::Finalized)
    ));
}

#[test]
fn filter_rules_intersect() {
    let b = Arc::new(common::bundle(7));
    let cache = ScoreCache::default();
    let mut s = harvest_service::Session::new("f".into(), b);
    s.execute(
        &Action::SetCriteria {
            criteria: criteria(0.2),
        },
        &cache,
    )
    .unwrap();
    let rule = |floor, periods: Vec<usize>, a: Option<Vec<usize>>| FilterRule {
        floor,
        periods,
        assortments: a,
    };
    let r1 = rule(0.3, vec![1], Some(vec![1]));
    let r2 = rule(0.3, vec![2, 3], Some(vec![2]));
    let one = s
        .execute(
            &Action::Filter {
                rules: vec![r1.clone()],
            },
            &cache,
        )
        .unwrap()
        .0;
    let two = s
        .execute(
            &Action::Filter {
                rules: vec![r2.clone()],
            },
            &cache,
        )
        .unwrap()
        .0;
    let both = s
        .execute(
            &Action::Filter {
                rules: vec![r1, r2],
            },
            &cache,
        )
        .unwrap()
        .0;
    let expect: Vec<u32> = one.iter().copied().filter(|i| two.contains(i)).collect();
    assert_eq!(both, expect);
}

#[test]
fn malformed_journal_lines_are_rejected() {
    assert!(parse_journal("{not json}\n").is_err());
    let rec = r#"{"seq":2,"timestamp_ms":0,"action":"shortlist","ids":[1],"result":[1]}"#;
    assert!(parse_journal(rec).is_err());
    let ok = r#"{"seq":1,"timestamp_ms":0,"action":"shortlist","ids":[1],"result":[1]}"#;
    assert_eq!(parse_journal(&format!("{ok}\n\n")).unwrap().len(), 1);
}

#[test]
fn journal_fuzz_seeds_parse() {
    let dir =
        std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus/journal");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let records = harvest_service::parse_journal(&std::fs::read_to_string(&path).unwrap())
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(!records.is_empty());
    }
}
