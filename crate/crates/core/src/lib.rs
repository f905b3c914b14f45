//! Multi-label drought-impact recognition for short texts.
//!
//! The crate covers the whole pipeline: ingesting labeled report titles and
//! social-media posts ([`corpus`]), cleaning and tokenizing them
//! ([`preprocess`]), weak labels from a keyword table ([`keywords`]), a
//! transformer encoder with a sigmoid multi-label head ([`classifier`]) and
//! the measurements used to judge it ([`evaluate`]).
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`). The aliases at
//! the crate root pick `f32` for models and `f64` for metrics.

pub mod classifier;
pub mod corpus;
pub mod error;
pub mod evaluate;
pub mod keywords;
pub mod preprocess;
pub mod scalar;
pub mod seed;

pub use crate::corpus::{Category, Document, DocumentSet, LabelVector, RawCategory, RawLabelVector9, Source};
pub use crate::error::{Error, Result};
pub use crate::keywords::KeywordTable;
pub use crate::scalar::Scalar;

/// Single-precision model, the default for training and inference.
pub type Model = classifier::Model<f32>;
/// Double-precision model, used for gradient verification.
pub type Model64 = classifier::Model<f64>;
pub type Checkpoint = classifier::Checkpoint<f32>;
pub type Checkpoint64 = classifier::Checkpoint<f64>;
pub type PredictionBatch = classifier::PredictionBatch<f32>;
pub type MetricsReport = evaluate::MetricsReport<f64>;
pub type ClassMetrics = evaluate::ClassMetrics<f64>;
