//! Checkpoint directories: weights, configuration, vocabulary and the
//! training history that picked them.

use std::path::Path;

use safetensors::SafeTensors;
use serde::{Deserialize, Serialize};

use super::config::{EncoderDims, ModelConfig};
use super::encoder::Encoder;
use super::head::Head;
use super::model::Model;
use super::pretrained::{fill_tensors, tensors_to_bytes};
use super::train::EpochRecord;
use crate::corpus::Category;
use crate::error::{Error, Result};
use crate::preprocess::{VocabKind, Vocabulary};
use crate::scalar::Scalar;

const WEIGHTS: &str = "weights.safetensors";
const CONFIG: &str = "config.json";
const VOCAB: &str = "vocab.txt";
const METADATA: &str = "metadata.json";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    /// 0 means the untrained initial weights scored best.
    pub selected_epoch: usize,
    pub validation: Option<EpochRecord>,
    pub history: Vec<EpochRecord>,
}

/// A trained model together with how it was selected.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint<T> {
    pub model: Model<T>,
    pub metadata: TrainingMetadata,
}

#[derive(Serialize, Deserialize)]
struct StoredConfig {
    model: ModelConfig,
    encoder: EncoderDims,
    vocab_kind: VocabKind,
    dtype: String,
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn save_checkpoint<T: Scalar>(checkpoint: &Checkpoint<T>, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let model = &checkpoint.model;
    write(&dir.join(WEIGHTS), &tensors_to_bytes(&model.named_tensors())?)?;
    let cfg = StoredConfig {
        model: model.config.clone(),
        encoder: model.encoder.dims.clone(),
        vocab_kind: model.vocab.kind(),
        dtype: format!("{:?}", T::DTYPE),
    };
    write(&dir.join(CONFIG), &serde_json::to_vec_pretty(&cfg)?)?;
    model.vocab.save(dir.join(VOCAB))?;
    write(&dir.join(METADATA), &serde_json::to_vec_pretty(&checkpoint.metadata)?)
}

pub fn load_checkpoint<T: Scalar>(dir: impl AsRef<Path>) -> Result<Checkpoint<T>> {
    let dir = dir.as_ref();
    for file in [WEIGHTS, CONFIG, VOCAB] {
        if !dir.join(file).is_file() {
            return Err(Error::Checkpoint(format!("{} has no {file}", dir.display())));
        }
    }
    let cfg: StoredConfig = serde_json::from_slice(&read(&dir.join(CONFIG))?)?;
    if cfg.model.num_labels != Category::COUNT {
        return Err(Error::DimensionMismatch { expected: Category::COUNT, found: cfg.model.num_labels });
    }
    cfg.encoder.validate(cfg.model.max_len)?;
    let vocab = Vocabulary::load(dir.join(VOCAB), cfg.vocab_kind)?;
    if vocab.len() != cfg.encoder.vocab_size {
        return Err(Error::DimensionMismatch { expected: cfg.encoder.vocab_size, found: vocab.len() });
    }
    let hidden = cfg.encoder.hidden;
    let mut model = Model {
        head: Head::zeros(hidden, cfg.model.head_hidden, cfg.model.num_labels),
        encoder: Encoder::zeros(cfg.encoder),
        config: cfg.model,
        vocab,
    };
    let bytes = read(&dir.join(WEIGHTS))?;
    let st = SafeTensors::deserialize(&bytes).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let views = model.named_tensors_mut();
    if st.len() != views.len() {
        return Err(Error::Checkpoint(format!("expected {} tensors, found {}", views.len(), st.len())));
    }
    fill_tensors(&st, views)?;
    let metadata_path = dir.join(METADATA);
    let metadata = if metadata_path.is_file() {
        serde_json::from_slice(&read(&metadata_path)?)?
    } else {
        TrainingMetadata::default()
    };
    Ok(Checkpoint { model, metadata })
}
