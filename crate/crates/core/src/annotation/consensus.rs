//! Score aggregation: trimmed-mean identity consensus, single-image means,
//! re-binning and the uncanniness filter.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::domain::{
    AnnotationRecord, FaceId, HcicRecord, PairId, PairKind, PairRecord, RatedAttribute, TaskKind,
    MAX_SCORE,
};
use crate::error::{Error, Result};

/// Number of ratings collected per item.
pub const REQUIRED_SCORES: usize = 9;
/// Scores dropped from each end of a full set of nine.
pub const TRIM_EACH_END: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConsensusConfig {
    /// Accept item counts other than nine, trimming `floor(k / 4)` per end.
    pub allow_fallback: bool,
    /// Smallest count accepted under the fallback.
    pub min_scores: usize,
}

impl Default for ConsensusConfig {
    fn default() -> Self {
        Self {
            allow_fallback: false,
            min_scores: 5,
        }
    }
}

fn check_scores(scores: &[u8]) -> Result<()> {
    match scores.iter().find(|&&s| s > MAX_SCORE) {
        Some(&s) => Err(Error::ScoreOutOfRange(s as i64)),
        None => Ok(()),
    }
}

/// Sample standard deviation of the scores divided by the scale range.
pub fn dispersion(scores: &[u8]) -> f64 {
    let n = scores.len();
    if n < 2 {
        return 0.0;
    }
    let mean = scores.iter().map(|&s| s as f64).sum::<f64>() / n as f64;
    let var = scores
        .iter()
        .map(|&s| (s as f64 - mean).powi(2))
        .sum::<f64>()
        / (n - 1) as f64;
    var.sqrt() / MAX_SCORE as f64
}

/// Human consensus identity confidence of one pair.
///
/// Nine scores are sorted, the two lowest and two highest dropped, and the
/// mean of the remaining five divided by 4.
pub fn compute_hcic(pair_id: &PairId, scores: &[u8], cfg: &ConsensusConfig) -> Result<HcicRecord> {
    check_scores(scores)?;
    let k = scores.len();
    let fallback = k != REQUIRED_SCORES;
    if fallback && !(cfg.allow_fallback && k >= cfg.min_scores.max(1)) {
        return Err(Error::WrongScoreCount {
            expected: REQUIRED_SCORES,
            got: k,
        });
    }
    let trim = if fallback { k / 4 } else { TRIM_EACH_END };
    let mut sorted = scores.to_vec();
    sorted.sort();
    let kept = &sorted[trim..k - trim];
    let mean = kept.iter().map(|&s| s as f64).sum::<f64>() / kept.len() as f64;
    Ok(HcicRecord {
        pair_id: pair_id.clone(),
        hcic: mean / MAX_SCORE as f64,
        n_scores: k,
        dispersion: dispersion(scores),
        fallback_trim: fallback,
    })
}

/// Average single-image rating with its re-binned level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleAggregate {
    pub face_id: FaceId,
    pub attribute: RatedAttribute,
    /// Mean on the raw 0..4 scale.
    pub mean: f64,
    /// `mean / 4`
    pub normalized: f64,
    pub n_scores: usize,
    pub dispersion: f64,
    /// Age/expression level from the mean; absent for other attributes.
    pub level: Option<u8>,
}

/// Plain (untrimmed) mean of nine single-image ratings.
pub fn aggregate_single(
    face_id: &FaceId,
    attribute: RatedAttribute,
    scores: &[u8],
    cfg: &ConsensusConfig,
) -> Result<SingleAggregate> {
    check_scores(scores)?;
    let k = scores.len();
    if k != REQUIRED_SCORES && !(cfg.allow_fallback && k >= cfg.min_scores.max(1)) {
        return Err(Error::WrongScoreCount {
            expected: REQUIRED_SCORES,
            got: k,
        });
    }
    let mean = scores.iter().map(|&s| s as f64).sum::<f64>() / k as f64;
    let level = match attribute {
        RatedAttribute::Age | RatedAttribute::Expression => Some(rebin_attribute(mean)?),
        _ => None,
    };
    Ok(SingleAggregate {
        face_id: face_id.clone(),
        attribute,
        mean,
        normalized: mean / MAX_SCORE as f64,
        n_scores: k,
        dispersion: dispersion(scores),
        level,
    })
}

/// Level 0..=4 for a mean rating, bins `[0,0.8) [0.8,1.6) [1.6,2.4) [2.4,3.2) [3.2,4]`.
pub fn rebin_attribute(score: f64) -> Result<u8> {
    if !(0.0..=MAX_SCORE as f64).contains(&score) {
        return Err(Error::OutOfRange {
            value: score,
            range: "[0, 4]",
        });
    }
    const EDGES: [f64; 4] = [0.8, 1.6, 2.4, 3.2];
    Ok(EDGES.iter().take_while(|&&e| score >= e).count() as u8)
}

/// Pairs surviving the uncanniness screen.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UncannyFiltered {
    pub kept: Vec<PairRecord>,
    pub kept_positive: usize,
    pub kept_negative: usize,
    pub dropped_uncanny: usize,
    pub dropped_missing: usize,
}

/// Drops pairs where either face's normalized uncanniness is `>= max`;
/// pairs lacking a score are dropped and counted separately.
pub fn uncanny_filter(
    pairs: &[PairRecord],
    uncanniness: &HashMap<FaceId, f64>,
    max: f64,
) -> UncannyFiltered {
    let mut out = UncannyFiltered::default();
    for p in pairs {
        match (uncanniness.get(&p.left), uncanniness.get(&p.right)) {
            (Some(&a), Some(&b)) => {
                if a >= max || b >= max {
                    out.dropped_uncanny += 1;
                } else {
                    match p.intended_kind {
                        PairKind::Positive => out.kept_positive += 1,
                        PairKind::Negative => out.kept_negative += 1,
                    }
                    out.kept.push(p.clone());
                }
            }
            _ => out.dropped_missing += 1,
        }
    }
    out
}

/// Consensus over an annotation log.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub hcic: Vec<HcicRecord>,
    pub single: Vec<SingleAggregate>,
    /// Items whose score count could not be aggregated.
    pub skipped: Vec<String>,
}

/// Groups the log by item (ignoring repeated annotation ids) and aggregates.
pub fn aggregate_log(records: &[AnnotationRecord], cfg: &ConsensusConfig) -> Result<Aggregates> {
    let mut seen = std::collections::HashSet::new();
    let mut pairs: BTreeMap<&str, Vec<u8>> = BTreeMap::new();
    let mut singles: BTreeMap<(&str, RatedAttribute), Vec<u8>> = BTreeMap::new();
    for r in records {
        if !seen.insert(&r.annotation_id) {
            continue;
        }
        r.validate()?;
        match (r.task_kind, r.attribute) {
            (TaskKind::PairIdentity, _) => pairs.entry(&r.item_ref).or_default().push(r.score),
            (TaskKind::SingleAttribute, Some(a)) => {
                singles.entry((&r.item_ref, a)).or_default().push(r.score)
            }
            (TaskKind::SingleAttribute, None) => unreachable!("validated"),
        }
    }
    let mut out = Aggregates::default();
    for (item, scores) in pairs {
        match compute_hcic(&PairId(item.to_owned()), &scores, cfg) {
            Ok(h) => out.hcic.push(h),
            Err(Error::WrongScoreCount { .. }) => out.skipped.push(item.to_owned()),
            Err(e) => return Err(e),
        }
    }
    for ((item, attribute), scores) in singles {
        match aggregate_single(&FaceId(item.to_owned()), attribute, &scores, cfg) {
            Ok(s) => out.single.push(s),
            Err(Error::WrongScoreCount { .. }) => {
                out.skipped.push(format!("{item}/{}", attribute.name()))
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
