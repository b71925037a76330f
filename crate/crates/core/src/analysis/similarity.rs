//! Embedding similarity and per-pair scoring.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::domain::{
    AttributeKind, DemographicGroup, EmbeddingVector, FaceId, HcicRecord, PairId, PairKind,
    PairRecord,
};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::scalar::Scalar;

/// `a.b / (|a| |b|)`, clamped to [-1, 1].
pub fn cosine_similarity<T: Scalar>(a: &EmbeddingVector<T>, b: &EmbeddingVector<T>) -> Result<T> {
    if a.model_id != b.model_id {
        return Err(Error::ModelMismatch(a.model_id.clone(), b.model_id.clone()));
    }
    if a.values.len() != b.values.len() {
        return Err(Error::DimensionMismatch {
            expected: a.values.len(),
            got: b.values.len(),
        });
    }
    let (na, nb) = (norm(&a.values), norm(&b.values));
    for (v, n) in [(a, na), (b, nb)] {
        if n.is_nan() || n <= T::zero() {
            return Err(Error::ZeroNorm(v.face_id.0.clone()));
        }
    }
    Ok((dot(&a.values, &b.values) / (na * nb))
        .max(-T::one())
        .min(T::one()))
}

/// A pair scored by one model, with the metadata used for stratification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPair {
    pub pair_id: PairId,
    pub model_id: String,
    pub cosine: f64,
    /// Consensus score; absent for diagnostic pairs that are never rated.
    pub hcic: Option<f64>,
    pub group: DemographicGroup,
    pub right_group: Option<DemographicGroup>,
    pub varied_attribute: AttributeKind,
    /// Generation-time intent; reported only, never used as ground truth.
    pub intended_kind: PairKind,
    pub same_seed: bool,
    pub is_self_slot: bool,
    /// Attribute-value bucket of the varied face (e.g. `"15"` degrees or level `"3"`).
    pub bucket: Option<String>,
}

impl ScoredPair {
    /// Ground truth from consensus: positive iff `hcic <= t_hcic`.
    pub fn label(&self, t_hcic: f64) -> Result<PairKind> {
        let h = self
            .hcic
            .ok_or_else(|| Error::MissingHcic(self.pair_id.0.clone()))?;
        Ok(label_from_hcic(h, t_hcic))
    }
}

pub fn label_from_hcic(hcic: f64, t_hcic: f64) -> PairKind {
    if hcic <= t_hcic {
        PairKind::Positive
    } else {
        PairKind::Negative
    }
}

/// Per-face inputs for scoring one model's pairs.
pub struct ScoringInputs<'a> {
    pub embeddings: &'a HashMap<FaceId, EmbeddingVector>,
    pub hcic: &'a HashMap<PairId, HcicRecord>,
    /// Absolute pose of each face in degrees.
    pub pose: &'a HashMap<FaceId, f64>,
    /// Lighting direction name of each face.
    pub lighting: &'a HashMap<FaceId, String>,
    /// Re-binned consensus level per face for age and expression.
    pub levels: &'a HashMap<(FaceId, AttributeKind), u8>,
}

fn bucket(p: &PairRecord, inputs: &ScoringInputs<'_>) -> Option<String> {
    match p.varied_attribute {
        AttributeKind::Pose => {
            let l = inputs.pose.get(&p.left)?;
            let r = inputs.pose.get(&p.right)?;
            Some(format!("{:.0}", (l - r).abs()))
        }
        AttributeKind::Lighting => inputs.lighting.get(&p.right).cloned(),
        a @ (AttributeKind::Age | AttributeKind::Expression) => inputs
            .levels
            .get(&(p.right.clone(), a))
            .map(|l| l.to_string()),
        _ => None,
    }
}

/// Scores `pairs` with one model. `require_hcic` rejects pairs lacking a
/// consensus record.
pub fn score_pairs(
    model_id: &str,
    pairs: &[PairRecord],
    inputs: &ScoringInputs<'_>,
    require_hcic: bool,
) -> Result<Vec<ScoredPair>> {
    let embedding = |id: &FaceId| {
        inputs
            .embeddings
            .get(id)
            .filter(|e| e.model_id == model_id)
            .ok_or_else(|| Error::MissingEmbedding {
                face_id: id.0.clone(),
                model_id: model_id.into(),
            })
    };
    pairs
        .iter()
        .map(|p| {
            let hcic = inputs.hcic.get(&p.pair_id).map(|h| h.hcic);
            if require_hcic && hcic.is_none() {
                return Err(Error::MissingHcic(p.pair_id.0.clone()));
            }
            Ok(ScoredPair {
                pair_id: p.pair_id.clone(),
                model_id: model_id.into(),
                cosine: cosine_similarity(embedding(&p.left)?, embedding(&p.right)?)?,
                hcic,
                group: p.group,
                right_group: p.right_group,
                varied_attribute: p.varied_attribute,
                intended_kind: p.intended_kind,
                same_seed: p.left_seed == p.right_seed,
                is_self_slot: p.is_self_slot,
                bucket: bucket(p, inputs),
            })
        })
        .collect()
}
