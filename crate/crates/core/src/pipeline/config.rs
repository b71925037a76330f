//! Run configuration, read from TOML or JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::annotation::{ConsensusConfig, QueueConfig};
use crate::controller::{PrototypeConfig, RegressorConfig, SvmConfig, TraversalSpec};
use crate::domain::{AnalyzerConfig, RatedAttribute};
use crate::error::{Error, Result};
use crate::world::{ModelSpec, WorldParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    /// Labelled latents used to fit directions.
    pub count: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self { count: 5000 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DirectionsConfig {
    pub svm: SvmConfig,
    pub regressor: RegressorConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrototypesConfig {
    /// Candidate seeds drawn before curation.
    pub candidates: usize,
    pub placement: PrototypeConfig,
}

impl Default for PrototypesConfig {
    fn default() -> Self {
        Self {
            candidates: 60,
            placement: PrototypeConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurationConfig {
    /// Seeds kept by screening.
    pub screen_keep: usize,
    /// Seeds kept by max-min filtering.
    pub final_seeds: usize,
    pub uncanny_max: f64,
    /// Seed the max-min selection starts from; defaults to the best screened seed.
    pub initial_seed: Option<u64>,
}

impl Default for CurationConfig {
    fn default() -> Self {
        Self {
            screen_keep: 40,
            final_seeds: 20,
            uncanny_max: 0.8,
            initial_seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VariantsConfig {
    pub age: TraversalSpec,
    pub expression: TraversalSpec,
}

impl Default for VariantsConfig {
    fn default() -> Self {
        Self {
            age: TraversalSpec::age(),
            expression: TraversalSpec::expression(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PairsConfig {
    /// Other same-group prototypes each prototype is paired against.
    pub n_other: usize,
    /// Other-group prototypes per prototype for the diagnostic pairs.
    pub cross_group_other: usize,
    pub rng_seed: u64,
}

impl Default for PairsConfig {
    fn default() -> Self {
        Self {
            n_other: 3,
            cross_group_other: 1,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnotationMode {
    /// Simulated raters score every item.
    Simulate,
    /// Ratings are collected through the hub; the stage only checks the log.
    Serve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotationConfig {
    pub mode: AnnotationMode,
    pub workers: usize,
    pub single_attributes: Vec<RatedAttribute>,
    pub queue: QueueConfig,
    pub consensus: ConsensusConfig,
    pub host: String,
    pub port: u16,
    /// Directory served under `/images`.
    pub image_dir: Option<PathBuf>,
}

impl Default for AnnotationConfig {
    fn default() -> Self {
        Self {
            mode: AnnotationMode::Simulate,
            workers: 9,
            single_attributes: RatedAttribute::ALL.to_vec(),
            queue: QueueConfig::default(),
            consensus: ConsensusConfig::default(),
            host: "127.0.0.1".into(),
            port: 8080,
            image_dir: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingSource {
    /// Stand-in models over the synthetic world.
    Standin,
    /// `<model_id>.jsonl` files produced by an external recognizer.
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingConfig {
    pub source: EmbeddingSource,
    pub models: Vec<ModelSpec>,
    pub external_dir: Option<PathBuf>,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        let model = |id: &str, key: u64, group_gain: f64, pose_gain: f64| ModelSpec {
            model_id: id.into(),
            key,
            group_gain,
            pose_gain,
            ..ModelSpec::default()
        };
        Self {
            source: EmbeddingSource::Standin,
            models: vec![
                model("model1", 1, 0.35, 1.2),
                model("model2", 2, 0.3, 1.0),
                model("model3", 3, 0.4, 1.4),
            ],
            external_dir: None,
        }
    }
}

/// The whole run; every field has a documented default.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Output root; overridden by `--out` and `BIASBENCH_OUT`.
    pub out_dir: Option<PathBuf>,
    /// Worker threads for intra-stage parallelism; 0 uses every core.
    pub threads: usize,
    pub world: WorldParams,
    pub sample: SampleConfig,
    pub directions: DirectionsConfig,
    pub prototypes: PrototypesConfig,
    pub curation: CurationConfig,
    pub variants: VariantsConfig,
    pub pairs: PairsConfig,
    pub annotation: AnnotationConfig,
    pub embedding: EmbeddingConfig,
    pub analysis: AnalyzerConfig,
}

impl PipelineConfig {
    /// Parses `.json` files as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.curation;
        if c.final_seeds == 0
            || c.final_seeds > c.screen_keep
            || c.screen_keep > self.prototypes.candidates
        {
            return Err(Error::Config(
                "seed counts must satisfy 0 < final_seeds <= screen_keep <= prototypes.candidates"
                    .into(),
            ));
        }
        if self.sample.count < 2 {
            return Err(Error::Config("sample.count must be at least 2".into()));
        }
        if self.annotation.workers == 0 {
            return Err(Error::Config("annotation.workers must be positive".into()));
        }
        match self.embedding.source {
            EmbeddingSource::Standin if self.embedding.models.is_empty() => {
                return Err(Error::Config(
                    "embedding.models must list at least one model".into(),
                ))
            }
            EmbeddingSource::External if self.embedding.external_dir.is_none() => {
                return Err(Error::Config(
                    "embedding.external_dir is required for external embeddings".into(),
                ))
            }
            _ => {}
        }
        let mut ids: Vec<&str> = self
            .embedding
            .models
            .iter()
            .map(|m| m.model_id.as_str())
            .collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("embedding model ids must be unique".into()));
        }
        self.variants.age.validate()?;
        self.variants.expression.validate()?;
        self.analysis.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        PipelineConfig::default().validate().unwrap();
    }

    #[test]
    fn toml_and_json_agree() {
        let dir = tempfile::tempdir().unwrap();
        let t = dir.path().join("c.toml");
        std::fs::write(
            &t,
            "threads = 2\n[curation]\nfinal_seeds = 10\n[pairs]\nn_other = 2\n",
        )
        .unwrap();
        let j = dir.path().join("c.json");
        std::fs::write(
            &j,
            r#"{"threads": 2, "curation": {"final_seeds": 10}, "pairs": {"n_other": 2}}"#,
        )
        .unwrap();
        let a = PipelineConfig::load(&t).unwrap();
        assert_eq!(a, PipelineConfig::load(&j).unwrap());
        assert_eq!(
            (a.threads, a.curation.final_seeds, a.curation.screen_keep),
            (2, 10, 40)
        );
    }

    #[test]
    fn unknown_fields_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let t = dir.path().join("c.toml");
        std::fs::write(&t, "[pairs]\nnother = 2\n").unwrap();
        assert!(matches!(PipelineConfig::load(&t), Err(Error::Config(_))));
        std::fs::write(&t, "[curation]\nfinal_seeds = 50\n").unwrap();
        assert!(matches!(PipelineConfig::load(&t), Err(Error::Config(_))));
    }
}
