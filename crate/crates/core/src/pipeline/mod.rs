//! Stage orchestration with content-hash caching.

pub mod config;
mod stages;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::jsonl::{read_json, write_json};

pub use config::{AnnotationMode, EmbeddingSource, PipelineConfig};
pub use stages::{AggregateReport, PrototypeFailure, SequenceReport};

pub const MANIFEST: &str = "manifest.json";
pub const ERROR_REPORT: &str = "error.json";
pub const DEFAULT_OUT_DIR: &str = "biasbench-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    World,
    Sample,
    Directions,
    Prototypes,
    Curate,
    Variants,
    Pairs,
    Annotate,
    Aggregate,
    Embed,
    Analyze,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 12] = [
        Stage::World,
        Stage::Sample,
        Stage::Directions,
        Stage::Prototypes,
        Stage::Curate,
        Stage::Variants,
        Stage::Pairs,
        Stage::Annotate,
        Stage::Aggregate,
        Stage::Embed,
        Stage::Analyze,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::World => "world",
            Stage::Sample => "sample",
            Stage::Directions => "directions",
            Stage::Prototypes => "prototypes",
            Stage::Curate => "curate",
            Stage::Variants => "variants",
            Stage::Pairs => "pairs",
            Stage::Annotate => "annotate",
            Stage::Aggregate => "aggregate",
            Stage::Embed => "embed",
            Stage::Analyze => "analyze",
            Stage::Report => "report",
        }
    }

    /// Parses a comma-separated list (or `all`) into stages in pipeline order.
    pub fn parse_list(s: &str) -> Result<Vec<Stage>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "all" {
                out.extend(Stage::ALL);
            } else {
                out.push(part.parse()?);
            }
        }
        if out.is_empty() {
            return Err(Error::Config("no stages given".into()));
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown stage `{s}`")))
    }
}

/// Output root: `--out`, then `BIASBENCH_OUT`, then the config, then a default.
pub fn resolve_out_dir(
    flag: Option<PathBuf>,
    env: Option<PathBuf>,
    cfg: &PipelineConfig,
) -> PathBuf {
    flag.or(env)
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn file_hash(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StageRecord {
    pub fingerprint: String,
    /// Relative path -> SHA-256 of each output written.
    pub outputs: BTreeMap<String, String>,
}

/// Per-stage fingerprints of the last successful run (`manifest.json`).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub stages: BTreeMap<Stage, StageRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Ran,
    Cached,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunReport {
    pub stages: Vec<(Stage, StageStatus)>,
}

/// Machine-readable failure written to `error.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub stage: Option<Stage>,
    pub kind: String,
    pub message: String,
}

pub struct Pipeline {
    cfg: PipelineConfig,
    out: PathBuf,
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig, out: impl Into<PathBuf>) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            out: out.into(),
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn out_dir(&self) -> &Path {
        &self.out
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.out.join(rel)
    }

    fn manifest(&self) -> Result<Manifest> {
        let p = self.path(MANIFEST);
        if p.exists() {
            read_json(&p)
        } else {
            Ok(Manifest::default())
        }
    }

    fn fingerprint(&self, stage: Stage, inputs: &[String]) -> Result<String> {
        let mut h = Sha256::new();
        h.update(stage.name().as_bytes());
        h.update(serde_json::to_vec(&self.stage_config(stage))?);
        for rel in inputs {
            let p = self.path(rel);
            if !p.exists() {
                return Err(Error::MissingArtifact(p));
            }
            h.update(rel.as_bytes());
            h.update(file_hash(&p)?.as_bytes());
        }
        Ok(hex::encode(h.finalize()))
    }

    fn stage_config(&self, stage: Stage) -> serde_json::Value {
        let c = &self.cfg;
        let v = match stage {
            Stage::World => serde_json::to_value(&c.world),
            Stage::Sample => serde_json::to_value(&c.sample),
            Stage::Directions => serde_json::to_value(&c.directions),
            Stage::Prototypes => serde_json::to_value(&c.prototypes),
            Stage::Curate => serde_json::to_value((&c.curation, c.annotation.workers)),
            Stage::Variants => serde_json::to_value(&c.variants),
            Stage::Pairs => serde_json::to_value(&c.pairs),
            Stage::Annotate => serde_json::to_value((
                c.annotation.mode,
                c.annotation.workers,
                &c.annotation.single_attributes,
            )),
            Stage::Aggregate => {
                serde_json::to_value((&c.annotation.consensus, c.analysis.uncanny_max))
            }
            Stage::Embed => serde_json::to_value(&c.embedding),
            Stage::Analyze | Stage::Report => serde_json::to_value(&c.analysis),
        };
        v.expect("configs serialize")
    }

    fn cached(&self, record: Option<&StageRecord>, fingerprint: &str) -> Result<bool> {
        let Some(r) = record else { return Ok(false) };
        if r.fingerprint != fingerprint {
            return Ok(false);
        }
        for (rel, hash) in &r.outputs {
            let p = self.path(rel);
            if !p.exists() || &file_hash(&p)? != hash {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Runs `stages` in pipeline order, skipping stages whose inputs,
    /// configuration and outputs are unchanged since the last run.
    pub fn run(&self, stages: &[Stage]) -> std::result::Result<RunReport, (Option<Stage>, Error)> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.cfg.threads)
            .build()
            .map_err(|e| (None, Error::Config(format!("thread pool: {e}"))))?;
        pool.install(|| {
            std::fs::create_dir_all(&self.out).map_err(|e| (None, Error::io(&self.out, e)))?;
            let mut manifest = self.manifest().map_err(|e| (None, e))?;
            let mut ordered = stages.to_vec();
            ordered.sort();
            ordered.dedup();
            let mut report = RunReport::default();
            for stage in ordered {
                let status = self
                    .run_stage(stage, &mut manifest)
                    .map_err(|e| (Some(stage), e))?;
                report.stages.push((stage, status));
            }
            Ok(report)
        })
    }

    fn run_stage(&self, stage: Stage, manifest: &mut Manifest) -> Result<StageStatus> {
        let inputs = self.inputs(stage)?;
        let fingerprint = self.fingerprint(stage, &inputs)?;
        if self.cached(manifest.stages.get(&stage), &fingerprint)? {
            return Ok(StageStatus::Cached);
        }
        let written = self.execute(stage)?;
        let mut outputs = BTreeMap::new();
        for rel in written {
            let h = file_hash(&self.path(&rel))?;
            outputs.insert(rel, h);
        }
        manifest.stages.insert(
            stage,
            StageRecord {
                fingerprint,
                outputs,
            },
        );
        write_json(&self.path(MANIFEST), manifest)?;
        Ok(StageStatus::Ran)
    }

    /// Like [`Pipeline::run`], but on failure writes `error.json` into the
    /// output directory before returning the error.
    pub fn run_reporting(&self, stages: &[Stage]) -> Result<RunReport> {
        match self.run(stages) {
            Ok(r) => {
                let p = self.path(ERROR_REPORT);
                if p.exists() {
                    std::fs::remove_file(&p).map_err(|e| Error::io(&p, e))?;
                }
                Ok(r)
            }
            Err((stage, e)) => {
                let report = ErrorReport {
                    stage,
                    kind: e.kind().into(),
                    message: e.to_string(),
                };
                let _ = std::fs::create_dir_all(&self.out);
                let _ = write_json(&self.path(ERROR_REPORT), &report);
                Err(e)
            }
        }
    }
}
