//! Experimental benchmarking of face-verification bias with synthetic,
//! attribute-controlled face pairs and human-consensus ground truth.
//!
//! The numerical kernels (linear SVM, ridge regression, traversals, max-min
//! selection, cosine similarity) are generic over [`Scalar`]; records
//! exchanged between pipeline stages use `f64`.

pub mod analysis;
pub mod annotation;
pub mod controller;
pub mod curation;
pub mod dataset;
pub mod domain;
pub mod error;
pub mod jsonl;
pub mod linalg;
pub mod pairs;
pub mod pipeline;
pub mod scalar;
pub mod world;

pub use dataset::{register_dataset, Dataset};
pub use domain::*;
pub use error::{Error, Result};
pub use scalar::Scalar;

pub type DirectionModelF32 = controller::DirectionModel<f32>;
pub type DirectionModelF64 = controller::DirectionModel<f64>;
pub type LatentCodeF32 = domain::LatentCode<f32>;
pub type LatentCodeF64 = domain::LatentCode<f64>;
pub type EmbeddingVectorF32 = domain::EmbeddingVector<f32>;
pub type EmbeddingVectorF64 = domain::EmbeddingVector<f64>;
