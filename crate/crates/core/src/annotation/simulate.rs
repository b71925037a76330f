//! Simulated raters driven by the stand-in world's ground truth.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::domain::{
    AnnotationId, AnnotationRecord, PairRecord, RatedAttribute, TaskKind, WorkerId, MAX_SCORE,
};
use crate::error::{Error, Result};
use crate::world::{keyed_rng, World};

use super::consensus::REQUIRED_SCORES;

/// Start of the deterministic logical clock used for simulated timestamps.
pub const SIMULATED_EPOCH_MS: u64 = 1_700_000_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedAnnotator {
    pub worker_id: WorkerId,
    /// Per-rating noise on the normalized scale.
    pub sigma: f64,
    /// Constant offset of this rater.
    pub bias: f64,
}

impl SimulatedAnnotator {
    /// Quantized score for a normalized truth in [0, 1]; the noise draw is
    /// keyed by `(world_seed, worker, item_key)`.
    pub fn score(&self, world_seed: u64, item_key: &str, truth: f64) -> u8 {
        let noise: f64 = if self.sigma > 0.0 {
            let mut rng = keyed_rng(world_seed, &["annotate", self.worker_id.as_str(), item_key]);
            let n: f64 = StandardNormal.sample(&mut rng);
            self.sigma * n
        } else {
            0.0
        };
        let raw = (truth + self.bias + noise).clamp(0.0, 1.0);
        (MAX_SCORE as f64 * raw).round() as u8
    }
}

/// The workers `sim-0 .. sim-{n-1}` with biases drawn from the world seed.
pub fn annotator_pool(
    world_seed: u64,
    n: usize,
    sigma: f64,
    bias_sd: f64,
) -> Vec<SimulatedAnnotator> {
    (0..n)
        .map(|i| {
            let worker_id = WorkerId(format!("sim-{i}"));
            let bias = if bias_sd > 0.0 {
                let mut rng = keyed_rng(world_seed, &["worker-bias", worker_id.as_str()]);
                let n: f64 = StandardNormal.sample(&mut rng);
                bias_sd * n
            } else {
                0.0
            };
            SimulatedAnnotator {
                worker_id,
                sigma,
                bias,
            }
        })
        .collect()
}

/// Nine raters with the world's calibrated noise.
pub fn default_pool(world: &World) -> Vec<SimulatedAnnotator> {
    let s = world.spec();
    annotator_pool(
        s.rng_seed,
        REQUIRED_SCORES,
        s.annotator_sigma,
        s.annotator_bias_sd,
    )
}

fn rate_item(
    pool: &[SimulatedAnnotator],
    world_seed: u64,
    kind: TaskKind,
    item: &str,
    attribute: Option<RatedAttribute>,
    truth: f64,
    item_index: usize,
) -> Vec<AnnotationRecord> {
    let key = match attribute {
        Some(a) => format!("{item}/{}", a.name()),
        None => item.to_owned(),
    };
    pool.iter()
        .enumerate()
        .map(|(w, a)| AnnotationRecord {
            annotation_id: AnnotationId::derive(&a.worker_id, item, attribute),
            task_kind: kind,
            item_ref: item.to_owned(),
            attribute,
            worker_id: a.worker_id.clone(),
            score: a.score(world_seed, &key, truth),
            timestamp: SIMULATED_EPOCH_MS + (item_index * pool.len() + w) as u64,
        })
        .collect()
}

/// Every rater scores every pair against the world's true identity distance.
pub fn simulate_pair_annotations(
    world: &World,
    dataset: &Dataset,
    pairs: &[PairRecord],
    pool: &[SimulatedAnnotator],
) -> Result<Vec<AnnotationRecord>> {
    let seed = world.spec().rng_seed;
    let per_pair: Vec<Vec<AnnotationRecord>> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let left = dataset
                .get(&p.left)
                .ok_or_else(|| Error::UnknownItem(p.left.0.clone()))?;
            let right = dataset
                .get(&p.right)
                .ok_or_else(|| Error::UnknownItem(p.right.0.clone()))?;
            let truth = world.true_pair_distance(left, right)?;
            Ok(rate_item(
                pool,
                seed,
                TaskKind::PairIdentity,
                p.pair_id.as_str(),
                None,
                truth,
                i,
            ))
        })
        .collect::<Result<_>>()?;
    Ok(per_pair.into_iter().flatten().collect())
}

/// Every rater scores each listed attribute of every face.
pub fn simulate_single_annotations(
    world: &World,
    dataset: &Dataset,
    attributes: &[RatedAttribute],
    pool: &[SimulatedAnnotator],
) -> Result<Vec<AnnotationRecord>> {
    let seed = world.spec().rng_seed;
    let faces = dataset.faces();
    let per_face: Vec<Vec<AnnotationRecord>> = faces
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let truth = world.true_attributes(&f.latent)?;
            let mut out = Vec::with_capacity(attributes.len() * pool.len());
            for (j, &a) in attributes.iter().enumerate() {
                let index = i * attributes.len() + j;
                out.extend(rate_item(
                    pool,
                    seed,
                    TaskKind::SingleAttribute,
                    f.face_id.as_str(),
                    Some(a),
                    truth.rated(a),
                    index,
                ));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(per_face.into_iter().flatten().collect())
}
