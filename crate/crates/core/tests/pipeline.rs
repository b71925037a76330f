use std::fs;

use biasbench_core::analysis::{Analysis, Grouping};
use biasbench_core::jsonl::read_json;
use biasbench_core::pipeline::{
    AggregateReport, ErrorReport, Pipeline, PipelineConfig, Stage, StageStatus,
};
use biasbench_core::{AttributeKind, Error};

#[test]
fn desk_run_caches_and_recovers_deleted_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let p = Pipeline::new(PipelineConfig::default(), dir.path()).unwrap();
    let first = p.run_reporting(&Stage::ALL).unwrap();
    assert!(first.stages.iter().all(|(_, s)| *s == StageStatus::Ran));

    let agg: AggregateReport = read_json(&dir.path().join("aggregate_report.json")).unwrap();
    assert_eq!(agg.pairs, 9600);
    assert!(agg.kept_positive + agg.kept_negative + agg.dropped_uncanny <= agg.pairs);
    let disp = agg.median_pair_dispersion.unwrap();
    assert!((0.25..=0.35).contains(&disp), "dispersion {disp}");

    let a: Analysis = read_json(&dir.path().join("analysis.json")).unwrap();
    assert_eq!(a.models.len(), 3);
    for m in &a.models {
        let med = |g| m.grouping_medians[&g];
        assert!(med(Grouping::SameSeedSameGroup) > med(Grouping::DiffSeedSameGroup));
        assert!(med(Grouping::DiffSeedSameGroup) > med(Grouping::DiffGroup));
        let mut pose: Vec<(f64, f64)> = m
            .boxstats
            .iter()
            .filter(|b| {
                b.attribute == AttributeKind::Pose && b.grouping == Grouping::SameSeedSameGroup
            })
            .map(|b| (b.bucket.parse().unwrap(), b.median))
            .collect();
        pose.sort_by(|x, y| x.0.total_cmp(&y.0));
        assert!(pose.windows(2).all(|w| w[1].1 <= w[0].1), "{pose:?}");
    }
    assert!(dir.path().join("report/summary.json").exists());
    assert!(!dir.path().join("error.json").exists());

    let again = p.run(&Stage::ALL).unwrap();
    assert!(again.stages.iter().all(|(_, s)| *s == StageStatus::Cached));

    let pairs = dir.path().join("pairs.jsonl");
    let before = fs::read(&pairs).unwrap();
    let analysis_before = fs::read(dir.path().join("analysis.json")).unwrap();
    fs::remove_file(&pairs).unwrap();
    let third = p.run(&Stage::ALL).unwrap();
    let ran: Vec<Stage> = third
        .stages
        .iter()
        .filter(|(_, s)| *s == StageStatus::Ran)
        .map(|(s, _)| *s)
        .collect();
    assert_eq!(ran, vec![Stage::Pairs]);
    assert_eq!(fs::read(&pairs).unwrap(), before);
    assert_eq!(
        fs::read(dir.path().join("analysis.json")).unwrap(),
        analysis_before
    );
}

#[test]
fn report_without_analysis_fails_with_error_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = Pipeline::new(PipelineConfig::default(), dir.path()).unwrap();
    let err = p.run_reporting(&[Stage::Report]).unwrap_err();
    assert!(matches!(err, Error::MissingArtifact(_)));
    let report: ErrorReport = read_json(&dir.path().join("error.json")).unwrap();
    assert_eq!(report.stage, Some(Stage::Report));
    assert_eq!(report.kind, "missing_artifact");
}

#[test]
fn changed_config_invalidates_downstream_only() {
    let dir = tempfile::tempdir().unwrap();
    let stages = [Stage::World, Stage::Sample];
    Pipeline::new(PipelineConfig::default(), dir.path())
        .unwrap()
        .run(&stages)
        .unwrap();
    let mut cfg = PipelineConfig::default();
    cfg.sample.count = 4000;
    let r = Pipeline::new(cfg, dir.path())
        .unwrap()
        .run(&stages)
        .unwrap();
    assert_eq!(
        r.stages,
        vec![
            (Stage::World, StageStatus::Cached),
            (Stage::Sample, StageStatus::Ran)
        ]
    );
}
