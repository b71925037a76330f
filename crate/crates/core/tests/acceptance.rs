//! Acceptance criteria. Runs every check, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use biasbench_core::analysis::{
    dominates, fnmr_fmr, stratified_curves, Analysis, Grouping, ScoredPair, SortedScores,
};
use biasbench_core::annotation::{compute_hcic, ConsensusConfig};
use biasbench_core::controller::{
    traversal::{find_target_distance, margin_displacement},
    DirectionModel, DirectionSet, DirectionTarget, ModelKind, SequenceStatus, TraversalSpec,
};
use biasbench_core::curation::maxmin_select;
use biasbench_core::jsonl::read_json;
use biasbench_core::pairs::PairSummary;
use biasbench_core::pipeline::{AggregateReport, Pipeline, PipelineConfig, Stage};
use biasbench_core::world::{keyed_rng, BiasInjection, ModelSpec, WorldSpec};
use biasbench_core::{AnalyzerConfig, AttributeKind, DemographicGroup, PairId, PairKind, Race};
use rand::seq::SliceRandom;
use rand::Rng;
use tempfile::TempDir;

/// Smallest injected severity, on a 0.25 grid, at which the targeted group
/// dominated in at least 95 of 100 replications when calibrated.
const BIAS_FLOOR_ETA: f64 = 2.25;
const REPLICATIONS: u64 = 20;
const BIAS_TRIALS_PER_WORLD: usize = 5;
/// Matched-FMR levels for the dominance check. At 1% only three of a
/// stratum's ~300 negatives may be accepted, fewer than the same-identity
/// pairs that consensus labels negative, so every group saturates there.
const DOMINANCE_FMR: [f64; 3] = [0.05, 0.1, 0.2];

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);
/// Dominating trials, total trials, and both counts per targeted group.
type BiasTally = (usize, usize, BTreeMap<DemographicGroup, (usize, usize)>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run_pipeline(cfg: PipelineConfig, dir: &Path, stages: &[Stage]) -> Result<(), String> {
    Pipeline::new(cfg, dir)
        .map_err(|e| e.to_string())?
        .run(stages)
        .map(|_| ())
        .map_err(|(s, e)| format!("{s:?}: {e}"))
}

struct Replication {
    seed: u64,
    dir: TempDir,
    aggregate: AggregateReport,
    analysis: Analysis,
}

fn replication_config(seed: u64) -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.world.rng_seed = seed;
    cfg
}

/// Twenty full desk-scale runs on distinct world seeds, built once.
fn replications() -> &'static Result<Vec<Replication>, String> {
    static CELL: OnceLock<Result<Vec<Replication>, String>> = OnceLock::new();
    CELL.get_or_init(|| {
        (1..=REPLICATIONS)
            .map(|seed| {
                let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
                run_pipeline(replication_config(seed), dir.path(), &Stage::ALL)?;
                Ok(Replication {
                    seed,
                    aggregate: read_json(&dir.path().join("aggregate_report.json"))
                        .map_err(|e| e.to_string())?,
                    analysis: read_json(&dir.path().join("analysis.json"))
                        .map_err(|e| e.to_string())?,
                    dir,
                })
            })
            .collect()
    })
}

fn pair_topology() -> Check {
    let start = Instant::now();
    let mut cfg = PipelineConfig::default();
    cfg.prototypes.candidates = 150;
    cfg.curation.screen_keep = 120;
    cfg.curation.final_seeds = 100;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_pipeline(cfg, dir.path(), &Stage::ALL[..7])?;
    let big: PairSummary =
        read_json(&dir.path().join("pair_summary.json")).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(
        (big.positive, big.negative, big.self_slots) == (12_000, 36_000, 2_400),
        || {
            format!(
                "100 seeds gave {}/{} ({} self)",
                big.positive, big.negative, big.self_slots
            )
        },
    )?;
    ensure(elapsed < Duration::from_secs(60), || {
        format!("100-seed build took {elapsed:?}")
    })?;

    let reps = replications().as_ref()?;
    for r in reps {
        let s: PairSummary =
            read_json(&r.dir.path().join("pair_summary.json")).map_err(|e| e.to_string())?;
        ensure((s.positive, s.negative) == (2_400, 7_200), || {
            format!("seed {} gave {}/{}", r.seed, s.positive, s.negative)
        })?;
        for m in &r.analysis.models {
            let n = m
                .curves
                .iter()
                .filter(|c| c.t_hcic == r.analysis.config.t_hcic)
                .count();
            ensure(n == 24, || {
                format!("seed {} model {} has {n} curves", r.seed, m.model_id)
            })?;
        }
    }
    Ok(format!(
        "12000/36000 in {elapsed:.1?}; 2400/7200 and 24 curves per model in {} desk runs",
        reps.len()
    ))
}

fn hcic_oracle() -> Check {
    let mut rng = keyed_rng(1, &["acceptance", "hcic"]);
    let cfg = ConsensusConfig::default();
    let id = PairId::from("p".to_string());
    for i in 0..10_000 {
        let scores: Vec<u8> = (0..9).map(|_| rng.random_range(0..=4u8)).collect();
        let mut sorted = scores.clone();
        sorted.sort_unstable();
        let brute = sorted[2..7].iter().map(|&s| s as f64).sum::<f64>() / 5.0 / 4.0;
        let got = compute_hcic(&id, &scores, &cfg)
            .map_err(|e| e.to_string())?
            .hcic;
        ensure(got == brute, || {
            format!("vector {i} {scores:?}: {got} != {brute}")
        })?;
    }
    Ok("10000 vectors identical".into())
}

fn brute_maxmin(
    features: &[Vec<Vec<f64>>],
    ids: &[u64],
    initial: usize,
    n: usize,
) -> (Vec<usize>, Vec<Option<f64>>) {
    let dist = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let mut chosen = vec![initial];
    let mut dists = vec![None];
    while chosen.len() < n {
        let mut best: Option<(usize, f64)> = None;
        for s in 0..features.len() {
            if chosen.contains(&s) {
                continue;
            }
            let d = chosen
                .iter()
                .flat_map(|&c| (0..features[s].len()).map(move |g| (c, g)))
                .map(|(c, g)| dist(&features[s][g], &features[c][g]))
                .fold(f64::INFINITY, f64::min);
            let better = match best {
                None => true,
                Some((b, bd)) => d > bd || (d == bd && ids[s] < ids[b]),
            };
            if better {
                best = Some((s, d));
            }
        }
        let (s, d) = best.expect("candidates remain");
        chosen.push(s);
        dists.push(Some(d));
    }
    (chosen, dists)
}

fn maxmin_oracle() -> Check {
    let mut rng = keyed_rng(2, &["acceptance", "maxmin"]);
    let mut ties = 0;
    for pool in 0..200 {
        let m = rng.random_range(2..=20usize);
        let dim = rng.random_range(1..=3usize);
        // small integer coordinates make exact ties common
        let features: Vec<Vec<Vec<f64>>> = (0..m)
            .map(|_| {
                (0..6)
                    .map(|_| (0..dim).map(|_| rng.random_range(0..4) as f64).collect())
                    .collect()
            })
            .collect();
        let mut ids: Vec<u64> = (0..m as u64).map(|i| i * 7 + 3).collect();
        ids.shuffle(&mut rng);
        let initial = rng.random_range(0..m);
        let n = rng.random_range(1..=m);
        let got = maxmin_select(&features, &ids, initial, n).map_err(|e| e.to_string())?;
        let want = brute_maxmin(&features, &ids, initial, n);
        ensure(got == want, || format!("pool {pool}: {got:?} != {want:?}"))?;
        let d: Vec<f64> = want.1.iter().flatten().copied().collect();
        ties += d.windows(2).filter(|w| w[0] == w[1]).count();
    }
    Ok(format!(
        "200 pools identical ({ties} equal consecutive distances)"
    ))
}

fn random_scored(rng: &mut impl Rng, n: usize) -> Vec<ScoredPair> {
    (0..n)
        .map(|i| {
            let group = DemographicGroup::ALL[rng.random_range(0..6)];
            ScoredPair {
                pair_id: PairId::from(format!("p{i}")),
                model_id: "m".into(),
                cosine: rng.random_range(-64..=64) as f64 / 64.0,
                hcic: Some(rng.random_range(0..=20) as f64 / 20.0),
                group,
                right_group: None,
                varied_attribute: AttributeKind::VARIED[rng.random_range(0..4)],
                intended_kind: if rng.random_bool(0.5) {
                    PairKind::Positive
                } else {
                    PairKind::Negative
                },
                same_seed: rng.random_bool(0.3),
                is_self_slot: rng.random_bool(0.1),
                bucket: None,
            }
        })
        .collect()
}

fn brute_matched_fnmr(pos: &[f64], neg: &[f64], f: f64) -> f64 {
    let allowed = ((f * neg.len() as f64) + 1e-9).floor() as usize;
    let mut candidates: Vec<f64> = pos.iter().chain(neg).copied().collect();
    candidates.push(f64::NEG_INFINITY);
    candidates
        .into_iter()
        .filter(|&t| neg.iter().filter(|&&x| x > t).count() <= allowed)
        .map(|t| pos.iter().filter(|&&x| x <= t).count() as f64 / pos.len() as f64)
        .fold(f64::INFINITY, f64::min)
}

fn curve_oracle() -> Check {
    let mut rng = keyed_rng(3, &["acceptance", "curves"]);
    let cfg = AnalyzerConfig {
        threshold_sweep: biasbench_core::ThresholdGrid {
            start: -1.0,
            end: 1.0,
            points: 65,
        },
        ..Default::default()
    };
    let grid = cfg.threshold_sweep.values();
    let (mut curves_checked, mut points_checked) = (0, 0);
    for set in 0..100 {
        let n = rng.random_range(1..=100usize);
        let scored = random_scored(&mut rng, n);
        let (curves, _) = stratified_curves("m", &scored, &cfg).map_err(|e| e.to_string())?;
        for c in &curves {
            let members: Vec<&ScoredPair> = scored
                .iter()
                .filter(|p| p.group == c.group && p.varied_attribute == c.attribute)
                .collect();
            let pos: Vec<f64> = members
                .iter()
                .filter(|p| p.hcic.unwrap() <= c.t_hcic)
                .map(|p| p.cosine)
                .collect();
            let neg: Vec<f64> = members
                .iter()
                .filter(|p| p.hcic.unwrap() > c.t_hcic)
                .map(|p| p.cosine)
                .collect();
            for (pt, &t) in c.points.iter().zip(&grid) {
                let fr = pos.iter().filter(|&&x| x < t).count();
                let fa = neg.iter().filter(|&&x| x >= t).count();
                ensure(
                    (
                        pt.false_rejects,
                        pt.positives,
                        pt.false_accepts,
                        pt.negatives,
                    ) == (fr as u64, pos.len() as u64, fa as u64, neg.len() as u64)
                        && pt.fnmr == fr as f64 / pos.len() as f64
                        && pt.fmr == fa as f64 / neg.len() as f64,
                    || format!("set {set} {}/{} t={t}: {pt:?}", c.attribute, c.group),
                )?;
                points_checked += 1;
            }
            ensure(
                c.points
                    .windows(2)
                    .all(|w| w[0].fnmr <= w[1].fnmr && w[0].fmr >= w[1].fmr),
                || format!("set {set}: non-monotone curve {}/{}", c.attribute, c.group),
            )?;
            let first = &c.points[0];
            ensure((first.fnmr, first.fmr) == (0.0, 1.0), || {
                format!("set {set}: endpoint at -1 is {first:?}")
            })?;
            let s = SortedScores::new(pos.clone(), neg.clone()).map_err(|e| e.to_string())?;
            let past = s.point(1.0f64.next_up());
            ensure((past.fnmr, past.fmr) == (1.0, 0.0), || {
                format!("set {set}: endpoint above 1 is {past:?}")
            })?;
            for f in [0.0, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0] {
                let got = s.at_fmr(f).fnmr;
                let want = brute_matched_fnmr(&pos, &neg, f);
                ensure(got == want, || {
                    format!("set {set}: matched FNMR at {f}: {got} != {want}")
                })?;
            }
            let direct = fnmr_fmr(&pos, &neg, &grid).map_err(|e| e.to_string())?;
            ensure(direct == c.points, || {
                format!("set {set}: fnmr_fmr disagrees with curve")
            })?;
            curves_checked += 1;
        }
    }
    Ok(format!(
        "{curves_checked} curves, {points_checked} points recounted"
    ))
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn direction_recovery() -> Check {
    let start = Instant::now();
    let mut cfg = PipelineConfig::default();
    cfg.sample.count = 10_000;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_pipeline(
        cfg,
        dir.path(),
        &[Stage::World, Stage::Sample, Stage::Directions],
    )?;
    let elapsed = start.elapsed();
    let spec: WorldSpec = read_json(&dir.path().join("world.json")).map_err(|e| e.to_string())?;
    let set: DirectionSet =
        read_json(&dir.path().join("directions.json")).map_err(|e| e.to_string())?;
    let truth = &spec.directions;
    let mut pairs = vec![
        ("gender", &set.gender, truth.gender.clone()),
        ("age", &set.age, truth.age.clone()),
        ("expression", &set.expression, truth.expression.clone()),
    ];
    for r in Race::ALL {
        pairs.push(("race", &set.race[r.index()], truth.race_direction(r)));
    }
    let mut worst = f64::INFINITY;
    for (name, model, true_dir) in pairs {
        let c = cosine(&model.unit_normal, &true_dir).abs();
        ensure(c >= 0.95, || format!("{name}: |cos| {c:.4}"))?;
        worst = worst.min(c);
    }
    ensure(elapsed < Duration::from_secs(120), || {
        format!("fit took {elapsed:?}")
    })?;
    Ok(format!(
        "worst |cos| {worst:.4} over 6 models, {elapsed:.1?}"
    ))
}

fn traversal_closed_form() -> Check {
    let mut rng = keyed_rng(4, &["acceptance", "traversal"]);
    let spec = TraversalSpec {
        max_distance: 1e4,
        search_step: 0.25,
        ..TraversalSpec::<f64>::default()
    };
    let mut worst: f64 = 0.0;
    let mut complete = 0;
    for i in 0..1000 {
        let d = rng.random_range(2..=16usize);
        let w: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let b = rng.random_range(-1.0..1.0);
        let z: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let model = DirectionModel::linear(ModelKind::LinearRegressor, DirectionTarget::Age, w, b)
            .map_err(|e| e.to_string())?;
        let target = TraversalSpec::<f64>::age().target;
        let closed = (target - model.score(&z)) / model.weight_norm();
        let (found, status) = find_target_distance(&model, &z, &spec);
        if closed <= 0.0 {
            ensure(status == SequenceStatus::Degenerate && found == 0.0, || {
                format!("model {i}: {status:?} {found}")
            })?;
        } else {
            ensure(status == SequenceStatus::Complete, || {
                format!("model {i}: {status:?}")
            })?;
            worst = worst.max((found - closed).abs());
            complete += 1;
        }
        let margin = margin_displacement(&model, &z, target, true);
        ensure((margin - closed.max(0.0)).abs() <= 1e-9, || {
            format!("model {i}: margin {margin} vs {closed}")
        })?;
    }
    ensure(worst <= 1e-6, || format!("max |d - closed form| {worst:e}"))?;
    Ok(format!(
        "1000 models ({complete} traversed), max error {worst:.1e}"
    ))
}

fn null_calibration() -> Check {
    let reps = replications().as_ref()?;
    let mut inside: BTreeMap<String, usize> = BTreeMap::new();
    for r in reps {
        for m in &r.analysis.models {
            let t = m
                .null_test
                .as_ref()
                .ok_or_else(|| format!("seed {}: no null test for {}", r.seed, m.model_id))?;
            ensure(t.fmr_levels == [0.01, 0.1], || {
                format!("null levels {:?}", t.fmr_levels)
            })?;
            *inside.entry(m.model_id.clone()).or_default() += t.inside as usize;
        }
    }
    let worst = inside.values().copied().min().unwrap_or(0);
    let summary = inside
        .iter()
        .map(|(k, v)| format!("{k} {v}/{}", reps.len()))
        .collect::<Vec<_>>()
        .join(", ");
    ensure(worst >= 18, || format!("inside the null band: {summary}"))?;
    Ok(format!("inside the null band: {summary}"))
}

fn bias_trials(eta: f64) -> Result<BiasTally, String> {
    let reps = replications().as_ref()?;
    let (mut hits, mut trials) = (0, 0);
    let mut by_group: BTreeMap<DemographicGroup, (usize, usize)> = BTreeMap::new();
    for (w, r) in reps.iter().enumerate() {
        for k in 0..BIAS_TRIALS_PER_WORLD {
            let group = DemographicGroup::ALL[(w + k) % 6];
            let mut cfg = replication_config(r.seed);
            cfg.analysis.bootstrap_resamples = 1;
            cfg.embedding.models = vec![ModelSpec {
                model_id: "biased".into(),
                key: 100 + k as u64,
                bias_injection: Some(BiasInjection {
                    group,
                    severity: eta,
                }),
                ..ModelSpec::default()
            }];
            run_pipeline(cfg, r.dir.path(), &[Stage::Embed, Stage::Analyze])?;
            let a: Analysis =
                read_json(&r.dir.path().join("analysis.json")).map_err(|e| e.to_string())?;
            let matched: Vec<_> = a.models[0]
                .matched
                .iter()
                .filter(|m| {
                    m.t_hcic == a.config.t_hcic && DOMINANCE_FMR.contains(&m.point.fmr_target)
                })
                .cloned()
                .collect();
            let d = dominates(&matched, group);
            hits += d as usize;
            trials += 1;
            let e = by_group.entry(group).or_default();
            e.0 += d as usize;
            e.1 += 1;
        }
    }
    Ok((hits, trials, by_group))
}

fn bias_detection() -> Check {
    let (hits, trials, by_group) = bias_trials(BIAS_FLOOR_ETA)?;
    let (below, below_trials, _) = bias_trials(BIAS_FLOOR_ETA - 0.25)?;
    let groups = by_group
        .iter()
        .map(|(g, (h, n))| format!("{g} {h}/{n}"))
        .collect::<Vec<_>>()
        .join(" ");
    let detail = format!(
        "eta {BIAS_FLOOR_ETA}: {hits}/{trials} dominate ({groups}); eta {}: {below}/{below_trials}",
        BIAS_FLOOR_ETA - 0.25
    );
    ensure(trials == 100 && hits >= 95, || detail.clone())?;
    Ok(detail)
}

fn annotator_calibration() -> Check {
    let reps = replications().as_ref()?;
    let mut values = Vec::new();
    for r in reps {
        let d = r
            .aggregate
            .median_pair_dispersion
            .ok_or_else(|| format!("seed {}: no dispersion", r.seed))?;
        ensure((0.25..=0.35).contains(&d), || {
            format!("seed {}: median dispersion {d:.4}", r.seed)
        })?;
        values.push(d);
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(format!(
        "median per-pair dispersion in [{lo:.4}, {hi:.4}] over {} runs",
        values.len()
    ))
}

fn similarity_ordering() -> Check {
    let reps = replications().as_ref()?;
    let mut checked = 0;
    for r in reps {
        for m in &r.analysis.models {
            let med = |g: Grouping| {
                m.grouping_medians
                    .get(&g)
                    .copied()
                    .ok_or_else(|| format!("seed {}: no {g:?}", r.seed))
            };
            let (same, diff_seed, diff_group) = (
                med(Grouping::SameSeedSameGroup)?,
                med(Grouping::DiffSeedSameGroup)?,
                med(Grouping::DiffGroup)?,
            );
            ensure(same > diff_seed && diff_seed > diff_group, || {
                format!(
                    "seed {} {}: medians {same:.3} {diff_seed:.3} {diff_group:.3}",
                    r.seed, m.model_id
                )
            })?;
            let pose = |bucket: &str| {
                m.boxstats
                    .iter()
                    .find(|b| {
                        b.attribute == AttributeKind::Pose
                            && b.grouping == Grouping::SameSeedSameGroup
                            && b.bucket == bucket
                    })
                    .map(|b| b.median)
                    .ok_or_else(|| format!("seed {}: no pose bucket {bucket}", r.seed))
            };
            let (p0, p15, p30) = (pose("0")?, pose("15")?, pose("30")?);
            ensure(p30 <= p15 && p15 <= p0, || {
                format!(
                    "seed {} {}: pose medians {p0:.3} {p15:.3} {p30:.3}",
                    r.seed, m.model_id
                )
            })?;
            checked += 1;
        }
    }
    Ok(format!(
        "ordering holds for {checked} model runs over {} worlds",
        reps.len()
    ))
}

fn files_under(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).into_iter().flatten().flatten() {
            let p = entry.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).expect("under root").to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Check {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_pipeline(PipelineConfig::default(), a.path(), &Stage::ALL)?;
    run_pipeline(PipelineConfig::default(), b.path(), &Stage::ALL)?;
    let (fa, fb) = (files_under(a.path()), files_under(b.path()));
    ensure(fa == fb, || {
        format!("file sets differ: {} vs {}", fa.len(), fb.len())
    })?;
    let mut bytes = 0;
    for f in &fa {
        let (x, y) = (
            std::fs::read(a.path().join(f)),
            std::fs::read(b.path().join(f)),
        );
        let (x, y) = (x.map_err(|e| e.to_string())?, y.map_err(|e| e.to_string())?);
        ensure(x == y, || format!("{} differs", f.display()))?;
        bytes += x.len();
    }
    Ok(format!("{} files, {bytes} bytes identical", fa.len()))
}

fn main() -> ExitCode {
    let criteria: &[Criterion] = &[
        ("pair topology", pair_topology),
        ("HCIC oracle equivalence", hcic_oracle),
        ("max-min correctness", maxmin_oracle),
        ("FNMR/FMR oracle equivalence", curve_oracle),
        ("direction recovery", direction_recovery),
        ("traversal closed form", traversal_closed_form),
        ("null-bias calibration", null_calibration),
        ("bias detection", bias_detection),
        ("annotator calibration", annotator_calibration),
        ("similarity ordering", similarity_ordering),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{took:.1?}]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{took:.1?}]");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
