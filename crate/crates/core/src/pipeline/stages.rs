//! What each stage reads and writes.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{AnnotationMode, EmbeddingSource};
use super::{Pipeline, Stage};
use crate::analysis::{analyze_model, emit_report, score_pairs, Analysis, ScoringInputs};
use crate::annotation::{
    aggregate_log, annotator_pool, collect_items, simulate_pair_annotations,
    simulate_single_annotations, uncanny_filter, Aggregates, SingleAggregate, TaskQueue,
};
use crate::controller::{
    make_attribute_sequence, make_lighting_sequence, make_pose_sequence, make_prototypes,
    DirectionSet, Labels, SequenceStatus, TrainingEntry, TrainingSet,
};
use crate::curation::{maxmin_filter, screen_seeds, MeshTable, SeedPool, SeedScreening};
use crate::dataset::Dataset;
use crate::domain::{
    AnnotationRecord, AttributeKind, DemographicGroup, EmbeddingVector, FaceId, FaceRecord, Gender,
    HcicRecord, PairId, PairRecord, RatedAttribute, SeedId,
};
use crate::error::{Error, Result};
use crate::jsonl::{read_json, read_jsonl, write_json, write_jsonl};
use crate::pairs::{
    build_cross_group_pairs, build_negative_pairs, build_positive_pairs, summarize,
};
use crate::world::{World, WorldSpec};

pub(super) const WORLD: &str = "world.json";
pub(super) const TRAINING: &str = "training.jsonl";
pub(super) const DIRECTIONS: &str = "directions.json";
pub(super) const PROTOTYPES: &str = "prototypes.jsonl";
pub(super) const PROTOTYPE_FAILURES: &str = "prototype_failures.jsonl";
pub(super) const SCREENING: &str = "screening.jsonl";
pub(super) const SEEDS: &str = "seeds.json";
pub(super) const FACES: &str = "faces.jsonl";
pub(super) const SEQUENCES: &str = "sequences.jsonl";
pub(super) const PAIRS: &str = "pairs.jsonl";
pub(super) const CROSS_PAIRS: &str = "cross_pairs.jsonl";
pub(super) const PAIR_SUMMARY: &str = "pair_summary.json";
pub(super) const ANNOTATIONS: &str = "annotations.jsonl";
pub(super) const HCIC: &str = "hcic.jsonl";
pub(super) const SINGLE: &str = "single.jsonl";
pub(super) const FILTERED_PAIRS: &str = "filtered_pairs.jsonl";
pub(super) const AGGREGATE_REPORT: &str = "aggregate_report.json";
pub(super) const EMBEDDINGS_DIR: &str = "embeddings";
pub(super) const ANALYSIS: &str = "analysis.json";
pub(super) const REPORT_DIR: &str = "report";

/// A seed whose prototypes could not be placed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrototypeFailure {
    pub seed_id: SeedId,
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub prototype: FaceId,
    pub attribute: AttributeKind,
    pub distance: f64,
    pub status: SequenceStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub pairs: usize,
    pub kept_positive: usize,
    pub kept_negative: usize,
    pub dropped_uncanny: usize,
    pub dropped_missing_uncanniness: usize,
    pub dropped_missing_hcic: usize,
    pub fallback_trimmed: usize,
    pub skipped_items: Vec<String>,
    /// Median over pairs of the score standard deviation, in range units.
    pub median_pair_dispersion: Option<f64>,
}

fn rel_embeddings(model_id: &str) -> String {
    format!("{EMBEDDINGS_DIR}/{model_id}.jsonl")
}

impl Pipeline {
    fn world(&self) -> Result<World> {
        World::new(read_json::<WorldSpec>(&self.path(WORLD))?)
    }

    fn dataset(&self) -> Result<Dataset> {
        Dataset::new(read_jsonl(&self.path(FACES))?)
    }

    /// Queue over every benchmark pair and single-image item, with
    /// `annotations.jsonl` replayed and opened for appending.
    pub fn annotation_queue(&self) -> Result<TaskQueue> {
        let dataset = self.dataset()?;
        let pairs: Vec<PairRecord> = read_jsonl(&self.path(PAIRS))?;
        let items = collect_items(&dataset, &pairs, &self.cfg.annotation.single_attributes)?;
        TaskQueue::new(items, self.cfg.annotation.queue)?.with_log(&self.path(ANNOTATIONS))
    }

    fn embedding_models(&self) -> Result<Vec<String>> {
        match self.cfg.embedding.source {
            EmbeddingSource::Standin => Ok(self
                .cfg
                .embedding
                .models
                .iter()
                .map(|m| m.model_id.clone())
                .collect()),
            EmbeddingSource::External => {
                let dir = self.cfg.embedding.external_dir.as_ref().expect("validated");
                jsonl_stems(dir)
            }
        }
    }

    pub(super) fn inputs(&self, stage: Stage) -> Result<Vec<String>> {
        let v = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        Ok(match stage {
            Stage::World => vec![],
            Stage::Sample => v(&[WORLD]),
            Stage::Directions => v(&[TRAINING]),
            Stage::Prototypes => v(&[WORLD, DIRECTIONS]),
            Stage::Curate => v(&[WORLD, PROTOTYPES]),
            Stage::Variants => v(&[PROTOTYPES, SEEDS, DIRECTIONS]),
            Stage::Pairs => v(&[FACES]),
            Stage::Annotate => match self.cfg.annotation.mode {
                AnnotationMode::Simulate => v(&[WORLD, FACES, PAIRS]),
                AnnotationMode::Serve => v(&[FACES, PAIRS, ANNOTATIONS]),
            },
            Stage::Aggregate => v(&[ANNOTATIONS, PAIRS]),
            Stage::Embed => v(&[WORLD, FACES]),
            Stage::Analyze => {
                let mut i = v(&[FACES, FILTERED_PAIRS, CROSS_PAIRS, HCIC, SINGLE]);
                i.extend(self.embedding_models()?.iter().map(|m| rel_embeddings(m)));
                i
            }
            Stage::Report => v(&[ANALYSIS]),
        })
    }

    /// Runs one stage and returns the paths it wrote, relative to the output root.
    pub(super) fn execute(&self, stage: Stage) -> Result<Vec<String>> {
        match stage {
            Stage::World => {
                let spec = WorldSpec::generate(&self.cfg.world)?;
                write_json(&self.path(WORLD), &spec)?;
                Ok(vec![WORLD.into()])
            }
            Stage::Sample => self.sample(),
            Stage::Directions => {
                let train: TrainingSet = TrainingSet::new(read_jsonl(&self.path(TRAINING))?)?;
                let dirs = DirectionSet::fit(
                    &train,
                    &self.cfg.directions.svm,
                    &self.cfg.directions.regressor,
                )?;
                write_json(&self.path(DIRECTIONS), &dirs)?;
                Ok(vec![DIRECTIONS.into()])
            }
            Stage::Prototypes => self.prototypes(),
            Stage::Curate => self.curate(),
            Stage::Variants => self.variants(),
            Stage::Pairs => self.pairs(),
            Stage::Annotate => self.annotate(),
            Stage::Aggregate => self.aggregate(),
            Stage::Embed => self.embed(),
            Stage::Analyze => self.analyze(),
            Stage::Report => {
                let analysis: Analysis = read_json(&self.path(ANALYSIS))?;
                let written = emit_report(&analysis, &self.path(REPORT_DIR))?;
                Ok(written
                    .into_iter()
                    .map(|p| {
                        p.strip_prefix(&self.out)
                            .unwrap_or(&p)
                            .to_string_lossy()
                            .replace('\\', "/")
                    })
                    .collect())
            }
        }
    }

    fn sample(&self) -> Result<Vec<String>> {
        let world = self.world()?;
        let latents = world.sample_latents("training", self.cfg.sample.count)?;
        let entries = latents
            .into_iter()
            .map(|z| {
                let t = world.true_attributes(&z)?;
                let gender = if t.gender >= 0.5 {
                    Gender::Male
                } else {
                    Gender::Female
                };
                Ok(TrainingEntry {
                    latent: z,
                    labels: Labels {
                        gender,
                        race: t.race,
                        age: t.age,
                        expression: t.expression,
                    },
                    image_ref: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        write_jsonl(&self.path(TRAINING), &entries)?;
        Ok(vec![TRAINING.into()])
    }

    fn prototypes(&self) -> Result<Vec<String>> {
        let world = self.world()?;
        let dirs: DirectionSet = read_json(&self.path(DIRECTIONS))?;
        let cfg = &self.cfg.prototypes;
        let latents = world.sample_latents("seeds", cfg.candidates)?;
        let results: Vec<std::result::Result<Vec<FaceRecord>, PrototypeFailure>> = latents
            .par_iter()
            .enumerate()
            .map(|(i, z)| {
                let seed_id = SeedId(i as u64);
                make_prototypes(seed_id, z, &dirs.gender, &dirs.race, &cfg.placement).map_err(|e| {
                    PrototypeFailure {
                        seed_id,
                        kind: e.kind().into(),
                        message: e.to_string(),
                    }
                })
            })
            .collect();
        let (mut faces, mut failures) = (Vec::new(), Vec::new());
        for r in results {
            match r {
                Ok(f) => faces.extend(f),
                Err(f) => failures.push(f),
            }
        }
        write_jsonl(&self.path(PROTOTYPES), &faces)?;
        write_jsonl(&self.path(PROTOTYPE_FAILURES), &failures)?;
        Ok(vec![PROTOTYPES.into(), PROTOTYPE_FAILURES.into()])
    }

    fn rater_pool(&self, world: &World) -> Vec<crate::annotation::SimulatedAnnotator> {
        let s = world.spec();
        annotator_pool(
            s.rng_seed,
            self.cfg.annotation.workers,
            s.annotator_sigma,
            s.annotator_bias_sd,
        )
    }

    fn curate(&self) -> Result<Vec<String>> {
        let world = self.world()?;
        let protos: Vec<FaceRecord> = read_jsonl(&self.path(PROTOTYPES))?;
        let dataset = Dataset::new(protos)?;
        let pool = self.rater_pool(&world);
        let ratings =
            simulate_single_annotations(&world, &dataset, &[RatedAttribute::Uncanniness], &pool)?;
        let consensus = crate::annotation::ConsensusConfig {
            allow_fallback: true,
            min_scores: 1,
        };
        let agg = aggregate_log(&ratings, &consensus)?;
        let uncanny: HashMap<&FaceId, f64> = agg
            .single
            .iter()
            .map(|s| (&s.face_id, s.normalized))
            .collect();

        let mut by_seed: BTreeMap<SeedId, Vec<&FaceRecord>> = BTreeMap::new();
        for p in dataset.prototypes() {
            by_seed.entry(p.seed_id).or_default().push(p);
        }
        let mut screening = Vec::new();
        let mut mesh = MeshTable::new();
        for (seed, faces) in &by_seed {
            if faces.len() != DemographicGroup::ALL.len() {
                continue;
            }
            let mut agree = 0usize;
            let mut unc = Vec::with_capacity(faces.len());
            let mut rows = Vec::with_capacity(faces.len());
            for f in faces {
                unc.push(uncanny[&f.face_id]);
                agree += (world.true_attributes(&f.latent)?.perceived_group() == f.group) as usize;
                rows.push(world.mesh_features(f)?);
            }
            screening.push(SeedScreening {
                seed_id: *seed,
                uncanniness: unc,
                agreement: agree as f64 / faces.len() as f64,
            });
            mesh.insert(*seed, rows);
        }
        let c = &self.cfg.curation;
        let screened = screen_seeds(&screening, c.screen_keep, c.uncanny_max)?;
        let pool: SeedPool =
            maxmin_filter(&screened, &mesh, c.final_seeds, c.initial_seed.map(SeedId))?;
        write_jsonl(&self.path(SCREENING), &screening)?;
        write_json(&self.path(SEEDS), &pool)?;
        Ok(vec![SCREENING.into(), SEEDS.into()])
    }

    fn variants(&self) -> Result<Vec<String>> {
        let protos: Vec<FaceRecord> = read_jsonl(&self.path(PROTOTYPES))?;
        let pool: SeedPool = read_json(&self.path(SEEDS))?;
        let dirs: DirectionSet = read_json(&self.path(DIRECTIONS))?;
        let keep: std::collections::HashSet<SeedId> = pool.filtered.iter().copied().collect();
        let chosen: Vec<&FaceRecord> = protos
            .iter()
            .filter(|p| keep.contains(&p.seed_id))
            .collect();
        let cfg = &self.cfg.variants;
        let per_proto: Vec<(Vec<FaceRecord>, Vec<SequenceReport>)> = chosen
            .par_iter()
            .map(|&p| {
                let mut faces = vec![p.clone()];
                let mut reports = Vec::new();
                let extras = make_pose_sequence(p)?
                    .into_iter()
                    .chain(make_lighting_sequence(p)?);
                faces.extend(extras.filter(|f| !f.is_prototype()));
                for (model, spec, attribute) in [
                    (&dirs.age, &cfg.age, AttributeKind::Age),
                    (&dirs.expression, &cfg.expression, AttributeKind::Expression),
                ] {
                    let s = make_attribute_sequence(p, model, spec)?;
                    faces.extend(s.faces.into_iter().filter(|f| !f.is_prototype()));
                    reports.push(SequenceReport {
                        prototype: p.face_id.clone(),
                        attribute,
                        distance: s.distance,
                        status: s.status,
                    });
                }
                Ok((faces, reports))
            })
            .collect::<Result<_>>()?;
        let (mut faces, mut reports) = (Vec::new(), Vec::new());
        for (f, r) in per_proto {
            faces.extend(f);
            reports.extend(r);
        }
        let dataset = Dataset::new(faces)?;
        write_jsonl(&self.path(FACES), dataset.faces())?;
        write_jsonl(&self.path(SEQUENCES), &reports)?;
        Ok(vec![FACES.into(), SEQUENCES.into()])
    }

    fn pairs(&self) -> Result<Vec<String>> {
        let dataset = self.dataset()?;
        let c = &self.cfg.pairs;
        let mut pairs = build_positive_pairs(&dataset)?;
        pairs.extend(build_negative_pairs(&dataset, c.n_other, c.rng_seed)?);
        let cross = build_cross_group_pairs(&dataset, c.cross_group_other, c.rng_seed)?;
        write_jsonl(&self.path(PAIRS), &pairs)?;
        write_jsonl(&self.path(CROSS_PAIRS), &cross)?;
        write_json(&self.path(PAIR_SUMMARY), &summarize(&pairs))?;
        Ok(vec![PAIRS.into(), CROSS_PAIRS.into(), PAIR_SUMMARY.into()])
    }

    fn annotate(&self) -> Result<Vec<String>> {
        match self.cfg.annotation.mode {
            AnnotationMode::Serve => {
                // ratings come from the hub; only check the log parses
                let _: Vec<AnnotationRecord> = read_jsonl(&self.path(ANNOTATIONS))?;
                Ok(vec![])
            }
            AnnotationMode::Simulate => {
                let world = self.world()?;
                let dataset = self.dataset()?;
                let pairs: Vec<PairRecord> = read_jsonl(&self.path(PAIRS))?;
                let pool = self.rater_pool(&world);
                let mut records = simulate_pair_annotations(&world, &dataset, &pairs, &pool)?;
                let offset = records.len() as u64;
                let mut singles = simulate_single_annotations(
                    &world,
                    &dataset,
                    &self.cfg.annotation.single_attributes,
                    &pool,
                )?;
                for r in &mut singles {
                    r.timestamp += offset;
                }
                records.extend(singles);
                write_jsonl(&self.path(ANNOTATIONS), &records)?;
                Ok(vec![ANNOTATIONS.into()])
            }
        }
    }

    fn aggregate(&self) -> Result<Vec<String>> {
        let records: Vec<AnnotationRecord> = read_jsonl(&self.path(ANNOTATIONS))?;
        let pairs: Vec<PairRecord> = read_jsonl(&self.path(PAIRS))?;
        let Aggregates {
            hcic,
            single,
            skipped,
        } = aggregate_log(&records, &self.cfg.annotation.consensus)?;
        let uncanny: HashMap<FaceId, f64> = single
            .iter()
            .filter(|s| s.attribute == RatedAttribute::Uncanniness)
            .map(|s| (s.face_id.clone(), s.normalized))
            .collect();
        let rated: std::collections::HashSet<&PairId> = hcic.iter().map(|h| &h.pair_id).collect();
        let (with_hcic, without): (Vec<PairRecord>, Vec<PairRecord>) = pairs
            .iter()
            .cloned()
            .partition(|p| rated.contains(&p.pair_id));
        let filtered = uncanny_filter(&with_hcic, &uncanny, self.cfg.analysis.uncanny_max);
        let mut disp: Vec<f64> = hcic.iter().map(|h| h.dispersion).collect();
        disp.sort_by(f64::total_cmp);
        let report = AggregateReport {
            pairs: pairs.len(),
            kept_positive: filtered.kept_positive,
            kept_negative: filtered.kept_negative,
            dropped_uncanny: filtered.dropped_uncanny,
            dropped_missing_uncanniness: filtered.dropped_missing,
            dropped_missing_hcic: without.len(),
            fallback_trimmed: hcic.iter().filter(|h| h.fallback_trim).count(),
            skipped_items: skipped,
            median_pair_dispersion: (!disp.is_empty())
                .then(|| crate::analysis::quantile(&disp, 0.5)),
        };
        write_jsonl(&self.path(HCIC), &hcic)?;
        write_jsonl(&self.path(SINGLE), &single)?;
        write_jsonl(&self.path(FILTERED_PAIRS), &filtered.kept)?;
        write_json(&self.path(AGGREGATE_REPORT), &report)?;
        Ok(vec![
            HCIC.into(),
            SINGLE.into(),
            FILTERED_PAIRS.into(),
            AGGREGATE_REPORT.into(),
        ])
    }

    fn embed(&self) -> Result<Vec<String>> {
        let dataset = self.dataset()?;
        let mut written = Vec::new();
        match self.cfg.embedding.source {
            EmbeddingSource::Standin => {
                let world = self.world()?;
                for model in &self.cfg.embedding.models {
                    let embedder = world.embedder(model.clone())?;
                    let vectors: Vec<EmbeddingVector> = dataset
                        .faces()
                        .par_iter()
                        .map(|f| embedder.embed(f))
                        .collect::<Result<_>>()?;
                    let rel = rel_embeddings(&model.model_id);
                    write_jsonl(&self.path(&rel), &vectors)?;
                    written.push(rel);
                }
            }
            EmbeddingSource::External => {
                let dir = self.cfg.embedding.external_dir.as_ref().expect("validated");
                for model_id in jsonl_stems(dir)? {
                    let vectors: Vec<EmbeddingVector> =
                        read_jsonl(&dir.join(format!("{model_id}.jsonl")))?;
                    check_external(&dataset, &model_id, &vectors)?;
                    let rel = rel_embeddings(&model_id);
                    write_jsonl(&self.path(&rel), &vectors)?;
                    written.push(rel);
                }
                if written.is_empty() {
                    return Err(Error::MissingArtifact(dir.join("<model_id>.jsonl")));
                }
            }
        }
        Ok(written)
    }

    fn analyze(&self) -> Result<Vec<String>> {
        let dataset = self.dataset()?;
        let pairs: Vec<PairRecord> = read_jsonl(&self.path(FILTERED_PAIRS))?;
        let cross: Vec<PairRecord> = read_jsonl(&self.path(CROSS_PAIRS))?;
        let hcic: HashMap<PairId, HcicRecord> = read_jsonl::<HcicRecord>(&self.path(HCIC))?
            .into_iter()
            .map(|h| (h.pair_id.clone(), h))
            .collect();
        let single: Vec<SingleAggregate> = read_jsonl(&self.path(SINGLE))?;
        let levels: HashMap<(FaceId, AttributeKind), u8> = single
            .iter()
            .filter_map(|s| {
                let a = match s.attribute {
                    RatedAttribute::Age => AttributeKind::Age,
                    RatedAttribute::Expression => AttributeKind::Expression,
                    _ => return None,
                };
                s.level.map(|l| ((s.face_id.clone(), a), l))
            })
            .collect();
        let pose: HashMap<FaceId, f64> = dataset
            .faces()
            .iter()
            .map(|f| (f.face_id.clone(), f.pose_deg))
            .collect();
        let lighting: HashMap<FaceId, String> = dataset
            .faces()
            .iter()
            .map(|f| {
                (
                    f.face_id.clone(),
                    format!("{:?}", f.light.direction).to_lowercase(),
                )
            })
            .collect();
        let mut models = Vec::new();
        for model_id in self.embedding_models()? {
            let embeddings: HashMap<FaceId, EmbeddingVector> =
                read_jsonl::<EmbeddingVector>(&self.path(&rel_embeddings(&model_id)))?
                    .into_iter()
                    .map(|e| (e.face_id.clone(), e))
                    .collect();
            let inputs = ScoringInputs {
                embeddings: &embeddings,
                hcic: &hcic,
                pose: &pose,
                lighting: &lighting,
                levels: &levels,
            };
            let benchmark = score_pairs(&model_id, &pairs, &inputs, true)?;
            let diagnostic = score_pairs(&model_id, &cross, &inputs, false)?;
            models.push(analyze_model(
                &model_id,
                &benchmark,
                &diagnostic,
                &self.cfg.analysis,
            )?);
        }
        write_json(
            &self.path(ANALYSIS),
            &Analysis {
                config: self.cfg.analysis.clone(),
                models,
            },
        )?;
        Ok(vec![ANALYSIS.into()])
    }
}

fn jsonl_stems(dir: &std::path::Path) -> Result<Vec<String>> {
    let rd = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut stems = Vec::new();
    for entry in rd {
        let p = entry.map_err(|e| Error::io(dir, e))?.path();
        if p.extension().is_some_and(|e| e == "jsonl") {
            if let Some(s) = p.file_stem().and_then(|s| s.to_str()) {
                stems.push(s.to_owned());
            }
        }
    }
    stems.sort();
    Ok(stems)
}

fn check_external(dataset: &Dataset, model_id: &str, vectors: &[EmbeddingVector]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    let dim = vectors.first().map(|v| v.values.len()).unwrap_or(0);
    for v in vectors {
        if v.model_id != model_id {
            return Err(Error::ModelMismatch(model_id.into(), v.model_id.clone()));
        }
        if v.values.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: v.values.len(),
            });
        }
        if dataset.get(&v.face_id).is_none() {
            return Err(Error::UnknownItem(v.face_id.0.clone()));
        }
        seen.insert(&v.face_id);
    }
    if let Some(f) = dataset.faces().iter().find(|f| !seen.contains(&f.face_id)) {
        return Err(Error::MissingEmbedding {
            face_id: f.face_id.0.clone(),
            model_id: model_id.into(),
        });
    }
    Ok(())
}
