//! Order statistics, similarity box statistics and bootstrap gap estimates.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{AttributeKind, DemographicGroup};
use crate::world::keyed_rng;

use super::curves::SortedScores;
use super::similarity::ScoredPair;

/// Linear-interpolation quantile of ascending `sorted` (Hyndman-Fan type 7).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    SameSeedSameGroup,
    DiffSeedSameGroup,
    DiffGroup,
}

impl Grouping {
    pub fn of(p: &ScoredPair) -> Self {
        if p.right_group.is_some() {
            Grouping::DiffGroup
        } else if p.same_seed {
            Grouping::SameSeedSameGroup
        } else {
            Grouping::DiffSeedSameGroup
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Grouping::SameSeedSameGroup => "same_seed_same_group",
            Grouping::DiffSeedSameGroup => "diff_seed_same_group",
            Grouping::DiffGroup => "diff_group",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStat {
    pub model_id: String,
    pub grouping: Grouping,
    pub attribute: AttributeKind,
    pub bucket: String,
    pub n: usize,
    pub median: f64,
    pub p15: f64,
    pub p85: f64,
}

fn summarize(
    model_id: &str,
    grouping: Grouping,
    attribute: AttributeKind,
    bucket: String,
    mut v: Vec<f64>,
) -> BoxStat {
    v.sort_by(f64::total_cmp);
    BoxStat {
        model_id: model_id.into(),
        grouping,
        attribute,
        bucket,
        n: v.len(),
        median: quantile(&v, 0.5),
        p15: quantile(&v, 0.15),
        p85: quantile(&v, 0.85),
    }
}

/// Median and 15th/85th percentiles of similarity per grouping, attribute
/// and bucket. Pairs without a bucket are left out; empty buckets do not appear.
pub fn similarity_boxstats(model_id: &str, scored: &[ScoredPair]) -> Vec<BoxStat> {
    let mut cells: BTreeMap<(Grouping, AttributeKind, String), Vec<f64>> = BTreeMap::new();
    for p in scored {
        if let Some(b) = &p.bucket {
            cells
                .entry((Grouping::of(p), p.varied_attribute, b.clone()))
                .or_default()
                .push(p.cosine);
        }
    }
    let mut out: Vec<BoxStat> = cells
        .into_iter()
        .map(|((g, a, b), v)| summarize(model_id, g, a, b, v))
        .collect();
    out.sort_by(|x, y| {
        (x.grouping, x.attribute)
            .cmp(&(y.grouping, y.attribute))
            .then_with(|| bucket_order(&x.bucket).cmp(&bucket_order(&y.bucket)))
    });
    out
}

fn bucket_order(b: &str) -> (u8, i64, String) {
    match b.parse::<i64>() {
        Ok(n) => (0, n, String::new()),
        Err(_) => (1, 0, b.to_owned()),
    }
}

/// Median similarity per grouping over all attributes.
pub fn grouping_medians(scored: &[ScoredPair]) -> BTreeMap<Grouping, f64> {
    let mut cells: BTreeMap<Grouping, Vec<f64>> = BTreeMap::new();
    for p in scored {
        cells.entry(Grouping::of(p)).or_default().push(p.cosine);
    }
    cells
        .into_iter()
        .map(|(g, mut v)| {
            v.sort_by(f64::total_cmp);
            (g, quantile(&v, 0.5))
        })
        .collect()
}

/// A with-replacement draw from a sorted slice, kept as per-index counts.
struct Draw<'a> {
    values: &'a [f64],
    counts: Vec<u32>,
    total: usize,
}

impl<'a> Draw<'a> {
    fn new(rng: &mut impl Rng, values: &'a [f64], n: usize) -> Self {
        let mut counts = vec![0u32; values.len()];
        for _ in 0..n {
            counts[rng.random_range(0..values.len())] += 1;
        }
        Self {
            values,
            counts,
            total: n,
        }
    }

    fn whole(values: &'a [f64]) -> Self {
        Self {
            values,
            counts: vec![1; values.len()],
            total: values.len(),
        }
    }
}

/// FNMR at matched FMR `f`, with the same rule as [`SortedScores::at_fmr`].
fn draw_fnmr(pos: &Draw, neg: &Draw, f: f64) -> f64 {
    let allowed = ((f * neg.total as f64) + 1e-9).floor() as usize;
    if allowed >= neg.total {
        return 0.0;
    }
    let mut seen = 0usize;
    let mut i = neg.values.len();
    while seen <= allowed {
        i -= 1;
        seen += neg.counts[i] as usize;
    }
    let t = neg.values[i];
    let k = pos.values.partition_point(|&x| x <= t);
    let rejected: usize = pos.counts[..k].iter().map(|&c| c as usize).sum();
    rejected as f64 / pos.total as f64
}

fn max_gap_draws(groups: &[(Draw, Draw)], fmr_levels: &[f64]) -> f64 {
    fmr_levels
        .iter()
        .map(|&f| {
            let (lo, hi) = groups
                .iter()
                .map(|(p, n)| draw_fnmr(p, n, f))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                    (lo.min(x), hi.max(x))
                });
            hi - lo
        })
        .fold(0.0, f64::max)
}

fn max_gap(groups: &[SortedScores], fmr_levels: &[f64]) -> f64 {
    let whole: Vec<(Draw, Draw)> = groups
        .iter()
        .map(|g| (Draw::whole(&g.positives), Draw::whole(&g.negatives)))
        .collect();
    max_gap_draws(&whole, fmr_levels)
}

/// Between-group FNMR gap with a percentile bootstrap interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub fmr_levels: Vec<f64>,
    /// Largest FNMR difference between any two groups, maximized over levels.
    pub observed: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub resamples: usize,
}

/// Resamples pairs within each group (positives and negatives separately).
pub fn bootstrap_gap(
    groups: &[SortedScores],
    fmr_levels: &[f64],
    resamples: usize,
    seed: u64,
    label: &str,
) -> GapEstimate {
    let observed = max_gap(groups, fmr_levels);
    let mut stats: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = keyed_rng(seed, &["gap", label, &i.to_string()]);
            let boot: Vec<(Draw, Draw)> = groups
                .iter()
                .map(|g| {
                    let pos = Draw::new(&mut rng, &g.positives, g.positives.len());
                    let neg = Draw::new(&mut rng, &g.negatives, g.negatives.len());
                    (pos, neg)
                })
                .collect();
            max_gap_draws(&boot, fmr_levels)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let (ci_low, ci_high) = if stats.is_empty() {
        (observed, observed)
    } else {
        (quantile(&stats, 0.025), quantile(&stats, 0.975))
    };
    GapEstimate {
        fmr_levels: fmr_levels.to_vec(),
        observed,
        ci_low,
        ci_high,
        resamples,
    }
}

/// Observed max gap against its distribution when all groups share one
/// population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullGapTest {
    pub fmr_levels: Vec<f64>,
    pub observed: f64,
    /// 95th percentile of the gap under pooling; the interval of zero is `[0, null_q95]`.
    pub null_q95: f64,
    pub inside: bool,
    pub resamples: usize,
}

/// Pools every group's pairs, redraws groups of the original sizes with
/// replacement, and compares the observed gap with the resulting
/// 95th percentile.
pub fn null_gap_test(
    groups: &[SortedScores],
    fmr_levels: &[f64],
    resamples: usize,
    seed: u64,
    label: &str,
) -> NullGapTest {
    let observed = max_gap(groups, fmr_levels);
    let mut pool_pos: Vec<f64> = groups
        .iter()
        .flat_map(|g| g.positives.iter().copied())
        .collect();
    let mut pool_neg: Vec<f64> = groups
        .iter()
        .flat_map(|g| g.negatives.iter().copied())
        .collect();
    pool_pos.sort_by(f64::total_cmp);
    pool_neg.sort_by(f64::total_cmp);
    let mut stats: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = keyed_rng(seed, &["null-gap", label, &i.to_string()]);
            let boot: Vec<(Draw, Draw)> = groups
                .iter()
                .map(|g| {
                    let pos = Draw::new(&mut rng, &pool_pos, g.positives.len());
                    let neg = Draw::new(&mut rng, &pool_neg, g.negatives.len());
                    (pos, neg)
                })
                .collect();
            max_gap_draws(&boot, fmr_levels)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let null_q95 = if stats.is_empty() {
        0.0
    } else {
        quantile(&stats, 0.95)
    };
    NullGapTest {
        fmr_levels: fmr_levels.to_vec(),
        observed,
        null_q95,
        inside: observed <= null_q95,
        resamples,
    }
}

/// Every benchmark pair of each group (all attributes), split at `t_hcic`.
pub fn group_scores(
    scored: &[ScoredPair],
    t_hcic: f64,
    include_self_slots: bool,
) -> crate::error::Result<Vec<(DemographicGroup, SortedScores)>> {
    DemographicGroup::ALL
        .iter()
        .map(|&g| {
            let (mut pos, mut neg) = (Vec::new(), Vec::new());
            for p in scored
                .iter()
                .filter(|p| p.group == g && p.right_group.is_none())
            {
                if p.is_self_slot && !include_self_slots {
                    continue;
                }
                match p.label(t_hcic)? {
                    crate::domain::PairKind::Positive => pos.push(p.cosine),
                    crate::domain::PairKind::Negative => neg.push(p.cosine),
                }
            }
            Ok((g, SortedScores::new(pos, neg)?))
        })
        .collect()
}
