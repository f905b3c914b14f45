//! Transformer encoder with a two-layer multi-label head, plus training,
//! inference, persistence and gradient verification.
//!
//! The head reads the pooled start-marker representation, applies a ReLU
//! dense layer of `head_hidden` units and a sigmoid output per category.

mod checkpoint;
mod config;
mod encoder;
mod gradcheck;
mod head;
mod layers;
mod loss;
mod model;
mod optim;
mod pretrained;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, TrainingMetadata};
pub use config::{EncoderDims, EncoderSpec, ModelConfig};
pub use encoder::{Encoder, EncoderCache, EncoderLayer};
pub use gradcheck::{gradient_check, gradient_check_model, GradientReport};
pub use head::Head;
pub use layers::{LayerNorm, Linear};
pub use loss::{compute_loss, loss_gradient, sigmoid, PROB_EPSILON};
pub use model::{build_model, predict, Model, PredictionBatch};
pub use optim::Adam;
pub use pretrained::{pretrained_dir, ENCODER_DIR_ENV};
pub use train::{batch_loss, train, train_step, train_with_observer, EpochRecord};
