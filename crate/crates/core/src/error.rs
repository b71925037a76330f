use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("variant index {index} out of range for {face_id}")]
    VariantIndexOutOfRange { face_id: String, index: u8 },

    #[error("inconsistent record {id}: {reason}")]
    Inconsistent { id: String, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("training set for {0} contains a single class")]
    SingleClass(String),

    #[error("solver did not converge within {iterations} iterations (gap {gap:e})")]
    NotConverged { iterations: usize, gap: f64 },

    #[error("degenerate direction for {0}: fitted weight has zero norm")]
    DegenerateDirection(String),

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("target {target} unreachable within distance {max_distance}")]
    TargetUnreachable { target: f64, max_distance: f64 },

    #[error("requested {requested} seeds but pool holds {available}")]
    PoolTooSmall { requested: usize, available: usize },

    #[error("missing mesh features for seed {0}")]
    MissingMesh(u64),

    #[error("prototype {face_id} is missing its {attribute} sequence")]
    MissingSequence { face_id: String, attribute: String },

    #[error("group {group} has {available} prototypes, need at least {required}")]
    InsufficientPrototypes {
        group: String,
        required: usize,
        available: usize,
    },

    #[error("score {0} outside 0..=4")]
    ScoreOutOfRange(i64),

    #[error("value {value} outside {range}")]
    OutOfRange { value: f64, range: &'static str },

    #[error("worker {worker} was not assigned item {item}")]
    UnassignedSubmission { worker: String, item: String },

    #[error("unknown item `{0}`")]
    UnknownItem(String),

    #[error("unknown task kind `{0}`")]
    UnknownTaskKind(String),

    #[error("expected {expected} scores, got {got}")]
    WrongScoreCount { expected: usize, got: usize },

    #[error("zero-norm embedding for {0}")]
    ZeroNorm(String),

    #[error("embeddings for different models: {0} vs {1}")]
    ModelMismatch(String, String),

    #[error("missing HCIC for pair {0}")]
    MissingHcic(String),

    #[error("missing embedding for face {face_id} under model {model_id}")]
    MissingEmbedding { face_id: String, model_id: String },

    #[error("stratum {0} needs at least one positive and one negative pair")]
    EmptyStratum(String),

    #[error("missing artifact {}", .0.display())]
    MissingArtifact(PathBuf),

    #[error("config: {0}")]
    Config(String),

    #[error("stage `{stage}` failed: {reason}")]
    Stage { stage: String, reason: String },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {} line {line}: {source}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag for error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DuplicateId(_) => "duplicate_id",
            Error::VariantIndexOutOfRange { .. } => "variant_index_out_of_range",
            Error::Inconsistent { .. } => "inconsistent_record",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidInput(_) => "invalid_input",
            Error::SingleClass(_) => "single_class",
            Error::NotConverged { .. } => "not_converged",
            Error::DegenerateDirection(_) => "degenerate_direction",
            Error::RankDeficient => "rank_deficient",
            Error::TargetUnreachable { .. } => "target_unreachable",
            Error::PoolTooSmall { .. } => "pool_too_small",
            Error::MissingMesh(_) => "missing_mesh",
            Error::MissingSequence { .. } => "missing_sequence",
            Error::InsufficientPrototypes { .. } => "insufficient_prototypes",
            Error::ScoreOutOfRange(_) => "score_out_of_range",
            Error::OutOfRange { .. } => "out_of_range",
            Error::UnassignedSubmission { .. } => "unassigned_submission",
            Error::UnknownItem(_) => "unknown_item",
            Error::UnknownTaskKind(_) => "unknown_task_kind",
            Error::WrongScoreCount { .. } => "wrong_score_count",
            Error::ZeroNorm(_) => "zero_norm",
            Error::ModelMismatch(..) => "model_mismatch",
            Error::MissingHcic(_) => "missing_hcic",
            Error::MissingEmbedding { .. } => "missing_embedding",
            Error::EmptyStratum(_) => "empty_stratum",
            Error::MissingArtifact(_) => "missing_artifact",
            Error::Config(_) => "config",
            Error::Stage { .. } => "stage_failure",
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
