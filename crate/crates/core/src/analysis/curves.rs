//! FNMR/FMR sweeps per stratum and FNMR at matched FMR.

use num_rational::Ratio;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{AnalyzerConfig, AttributeKind, DemographicGroup, PairKind};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::similarity::ScoredPair;

/// Error rates at one threshold, kept as exact counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub threshold: f64,
    pub false_rejects: u64,
    pub positives: u64,
    pub false_accepts: u64,
    pub negatives: u64,
    pub fnmr: f64,
    pub fmr: f64,
}

impl CurvePoint {
    fn new(
        threshold: f64,
        false_rejects: u64,
        positives: u64,
        false_accepts: u64,
        negatives: u64,
    ) -> Self {
        let fnmr = Ratio::new(false_rejects, positives)
            .to_f64()
            .expect("finite ratio");
        let fmr = Ratio::new(false_accepts, negatives)
            .to_f64()
            .expect("finite ratio");
        Self {
            threshold,
            false_rejects,
            positives,
            false_accepts,
            negatives,
            fnmr,
            fmr,
        }
    }

    pub fn fnmr_exact(&self) -> Ratio<u64> {
        Ratio::new(self.false_rejects, self.positives)
    }

    pub fn fmr_exact(&self) -> Ratio<u64> {
        Ratio::new(self.false_accepts, self.negatives)
    }
}

/// Positive and negative similarities of one stratum, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedScores<T = f64> {
    pub positives: Vec<T>,
    pub negatives: Vec<T>,
}

fn sorted<T: Scalar>(mut v: Vec<T>) -> Vec<T> {
    v.sort_by(|a, b| a.partial_cmp(b).expect("similarities are not NaN"));
    v
}

impl<T: Scalar> SortedScores<T> {
    pub fn new(positives: Vec<T>, negatives: Vec<T>) -> Result<Self> {
        if positives.is_empty() || negatives.is_empty() {
            return Err(Error::EmptyStratum(format!(
                "{} positives, {} negatives",
                positives.len(),
                negatives.len()
            )));
        }
        if positives.iter().chain(&negatives).any(|x| x.is_nan()) {
            return Err(Error::InvalidInput("NaN similarity".into()));
        }
        Ok(Self {
            positives: sorted(positives),
            negatives: sorted(negatives),
        })
    }

    /// Accept iff similarity `>= t`.
    pub fn point(&self, t: T) -> CurvePoint {
        let rejected = self.positives.partition_point(|&x| x < t);
        let accepted = self.negatives.len() - self.negatives.partition_point(|&x| x < t);
        CurvePoint::new(
            t.to_f64_lossy(),
            rejected as u64,
            self.positives.len() as u64,
            accepted as u64,
            self.negatives.len() as u64,
        )
    }

    /// The operating point with the lowest threshold whose FMR is at most
    /// `fmr`. Pairs are accepted strictly above the returned `threshold`,
    /// which is the highest rejected negative similarity.
    pub fn at_fmr(&self, fmr: f64) -> MatchedPoint {
        let n = self.negatives.len();
        let allowed = ((fmr * n as f64) + 1e-9).floor() as usize;
        if allowed >= n {
            let lowest = self.positives[0].min(self.negatives[0]);
            let p = self.point(lowest);
            return MatchedPoint {
                fmr_target: fmr,
                threshold: lowest.to_f64_lossy(),
                fnmr: p.fnmr,
                fmr: p.fmr,
            };
        }
        let t = self.negatives[n - 1 - allowed];
        let rejected = self.positives.partition_point(|&x| x <= t);
        let accepted = n - self.negatives.partition_point(|&x| x <= t);
        MatchedPoint {
            fmr_target: fmr,
            threshold: t.to_f64_lossy(),
            fnmr: rejected as f64 / self.positives.len() as f64,
            fmr: accepted as f64 / n as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPoint {
    pub fmr_target: f64,
    pub threshold: f64,
    pub fnmr: f64,
    pub fmr: f64,
}

/// Error rates at every threshold in `thresholds` (strictly increasing).
pub fn fnmr_fmr<T: Scalar>(
    positives: &[T],
    negatives: &[T],
    thresholds: &[T],
) -> Result<Vec<CurvePoint>> {
    if thresholds
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
    {
        return Err(Error::InvalidInput(
            "thresholds must be strictly increasing".into(),
        ));
    }
    let s = SortedScores::new(positives.to_vec(), negatives.to_vec())?;
    Ok(thresholds.iter().map(|&t| s.point(t)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasCurve {
    pub model_id: String,
    pub attribute: AttributeKind,
    pub group: DemographicGroup,
    pub t_hcic: f64,
    pub points: Vec<CurvePoint>,
    /// Error rates at the fixed decision threshold.
    pub operating_point: CurvePoint,
}

/// One (attribute, group) cell of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Stratum {
    pub attribute: AttributeKind,
    pub group: DemographicGroup,
}

pub fn strata() -> Vec<Stratum> {
    AttributeKind::VARIED
        .iter()
        .flat_map(|&attribute| DemographicGroup::ALL.map(|group| Stratum { attribute, group }))
        .collect()
}

/// Benchmark pairs of `stratum`, split by consensus label at `t_hcic`.
pub fn stratum_scores(
    scored: &[ScoredPair],
    stratum: Stratum,
    t_hcic: f64,
    cfg: &AnalyzerConfig,
) -> Result<SortedScores> {
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for p in scored {
        if p.right_group.is_some()
            || p.group != stratum.group
            || p.varied_attribute != stratum.attribute
        {
            continue;
        }
        if p.is_self_slot && !cfg.include_self_slots {
            continue;
        }
        match p.label(t_hcic)? {
            PairKind::Positive => pos.push(p.cosine),
            PairKind::Negative => neg.push(p.cosine),
        }
    }
    SortedScores::new(pos, neg).map_err(|e| match e {
        Error::EmptyStratum(why) => Error::EmptyStratum(format!(
            "{}/{} at t_hcic {t_hcic}: {why}",
            stratum.attribute, stratum.group
        )),
        other => other,
    })
}

/// Curves for every stratum and every configured `t_hcic`. Empty strata are
/// skipped and listed in the returned notes.
pub fn stratified_curves(
    model_id: &str,
    scored: &[ScoredPair],
    cfg: &AnalyzerConfig,
) -> Result<(Vec<BiasCurve>, Vec<String>)> {
    let grid = cfg.threshold_sweep.values();
    let jobs: Vec<(f64, Stratum)> = cfg
        .all_t_hcic()
        .into_iter()
        .flat_map(|t| strata().into_iter().map(move |s| (t, s)))
        .collect();
    let results: Vec<Result<std::result::Result<BiasCurve, String>>> = jobs
        .par_iter()
        .map(
            |&(t_hcic, stratum)| match stratum_scores(scored, stratum, t_hcic, cfg) {
                Ok(s) => Ok(Ok(BiasCurve {
                    model_id: model_id.into(),
                    attribute: stratum.attribute,
                    group: stratum.group,
                    t_hcic,
                    points: grid.iter().map(|&t| s.point(t)).collect(),
                    operating_point: s.point(cfg.fixed_threshold),
                })),
                Err(Error::EmptyStratum(why)) => Ok(Err(format!("{model_id}: skipped {why}"))),
                Err(e) => Err(e),
            },
        )
        .collect();
    let (mut curves, mut notes) = (Vec::new(), Vec::new());
    for r in results {
        match r? {
            Ok(c) => curves.push(c),
            Err(n) => notes.push(n),
        }
    }
    Ok((curves, notes))
}

/// FNMR of one stratum at a target FMR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedFnmr {
    pub model_id: String,
    pub t_hcic: f64,
    pub attribute: AttributeKind,
    pub group: DemographicGroup,
    #[serde(flatten)]
    pub point: MatchedPoint,
}

pub fn matched_fnmr(
    model_id: &str,
    scored: &[ScoredPair],
    t_hcic: f64,
    cfg: &AnalyzerConfig,
) -> Result<Vec<MatchedFnmr>> {
    let mut out = Vec::new();
    for stratum in strata() {
        let s = match stratum_scores(scored, stratum, t_hcic, cfg) {
            Ok(s) => s,
            Err(Error::EmptyStratum(_)) => continue,
            Err(e) => return Err(e),
        };
        for &f in &cfg.fmr_grid {
            out.push(MatchedFnmr {
                model_id: model_id.into(),
                t_hcic,
                attribute: stratum.attribute,
                group: stratum.group,
                point: s.at_fmr(f),
            });
        }
    }
    Ok(out)
}

/// True when `target` has strictly the highest FNMR in every attribute and
/// at every FMR level present in `matched`.
pub fn dominates(matched: &[MatchedFnmr], target: DemographicGroup) -> bool {
    let mut any = false;
    for m in matched.iter().filter(|m| m.group == target) {
        any = true;
        let beaten = matched.iter().any(|o| {
            o.group != target
                && o.attribute == m.attribute
                && o.point.fmr_target == m.point.fmr_target
                && o.point.fnmr >= m.point.fnmr
        });
        if beaten {
            return false;
        }
    }
    any
}
