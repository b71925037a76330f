//! Similarity scoring, consensus-labelled error curves and distribution
//! statistics.

pub mod curves;
pub mod report;
pub mod similarity;
pub mod stats;

pub use curves::{
    dominates, fnmr_fmr, matched_fnmr, strata, stratified_curves, BiasCurve, CurvePoint,
    MatchedFnmr, MatchedPoint, SortedScores, Stratum,
};
pub use similarity::{cosine_similarity, label_from_hcic, score_pairs, ScoredPair, ScoringInputs};
pub use stats::{
    bootstrap_gap, group_scores, grouping_medians, null_gap_test, quantile, similarity_boxstats,
    BoxStat, GapEstimate, Grouping, NullGapTest,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{AnalyzerConfig, AttributeKind, DemographicGroup};
use crate::error::{Error, Result};

/// Between-group gap of one attribute at one FMR level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeGap {
    pub attribute: AttributeKind,
    #[serde(flatten)]
    pub estimate: GapEstimate,
}

/// Everything computed for one embedding model (`analysis.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelAnalysis {
    pub model_id: String,
    pub curves: Vec<BiasCurve>,
    pub matched: Vec<MatchedFnmr>,
    /// Bootstrap intervals at the primary `t_hcic`.
    pub gaps: Vec<AttributeGap>,
    /// Pooled gap test over all attributes at the primary `t_hcic`.
    pub null_test: Option<NullGapTest>,
    pub boxstats: Vec<BoxStat>,
    pub grouping_medians: BTreeMap<Grouping, f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub config: AnalyzerConfig,
    pub models: Vec<ModelAnalysis>,
}

/// Curves, matched-FMR table, gap estimates and box statistics for one model.
/// `benchmark` pairs must carry consensus scores; `diagnostic` (cross-group)
/// pairs feed only the box statistics.
pub fn analyze_model(
    model_id: &str,
    benchmark: &[ScoredPair],
    diagnostic: &[ScoredPair],
    cfg: &AnalyzerConfig,
) -> Result<ModelAnalysis> {
    cfg.validate()?;
    let (curves, mut notes) = stratified_curves(model_id, benchmark, cfg)?;
    let mut matched = Vec::new();
    for t in cfg.all_t_hcic() {
        matched.extend(matched_fnmr(model_id, benchmark, t, cfg)?);
    }

    let mut gaps = Vec::new();
    for attribute in AttributeKind::VARIED {
        let mut groups = Vec::new();
        for group in DemographicGroup::ALL {
            match curves::stratum_scores(benchmark, Stratum { attribute, group }, cfg.t_hcic, cfg) {
                Ok(s) => groups.push(s),
                Err(Error::EmptyStratum(_)) => {}
                Err(e) => return Err(e),
            }
        }
        if groups.len() < 2 {
            continue;
        }
        for &f in &cfg.fmr_grid {
            let label = format!("{model_id}/{attribute}/{f}");
            let estimate = bootstrap_gap(
                &groups,
                &[f],
                cfg.bootstrap_resamples,
                cfg.bootstrap_seed,
                &label,
            );
            gaps.push(AttributeGap {
                attribute,
                estimate,
            });
        }
    }

    let null_test = match group_scores(benchmark, cfg.t_hcic, cfg.include_self_slots) {
        Ok(g) => {
            let groups: Vec<SortedScores> = g.into_iter().map(|(_, s)| s).collect();
            Some(null_gap_test(
                &groups,
                &cfg.null_fmr_levels,
                cfg.bootstrap_resamples,
                cfg.bootstrap_seed,
                model_id,
            ))
        }
        Err(Error::EmptyStratum(why)) => {
            notes.push(format!("{model_id}: no pooled gap test ({why})"));
            None
        }
        Err(e) => return Err(e),
    };

    let all: Vec<ScoredPair> = benchmark.iter().chain(diagnostic).cloned().collect();
    Ok(ModelAnalysis {
        model_id: model_id.into(),
        curves,
        matched,
        gaps,
        null_test,
        boxstats: similarity_boxstats(model_id, &all),
        grouping_medians: grouping_medians(&all),
        notes,
    })
}

pub use report::{emit_report, fmt17};
