use serde::{Deserialize, Serialize};

use crate::corpus::Category;
use crate::error::{Error, Result};

/// Which encoder to put under the head.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EncoderSpec {
    /// 12 layers, 768 hidden, 12 heads; weights come from disk.
    PretrainedBaseUncased,
    /// Randomly initialized encoder of any size.
    Tiny { layers: usize, hidden: usize, heads: usize, intermediate: usize },
}

impl EncoderSpec {
    pub fn tiny() -> Self {
        EncoderSpec::Tiny { layers: 2, hidden: 128, heads: 2, intermediate: 256 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub encoder: EncoderSpec,
    pub head_hidden: usize,
    pub num_labels: usize,
    pub max_len: usize,
    pub threshold: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Train only the head.
    pub freeze_encoder: bool,
}

impl ModelConfig {
    pub fn tiny() -> Self {
        ModelConfig {
            encoder: EncoderSpec::tiny(),
            head_hidden: 50,
            num_labels: Category::COUNT,
            max_len: 48,
            threshold: 0.5,
            learning_rate: 1e-3,
            batch_size: 32,
            epochs: 30,
            seed: 0,
            freeze_encoder: false,
        }
    }

    pub fn pretrained() -> Self {
        ModelConfig {
            encoder: EncoderSpec::PretrainedBaseUncased,
            learning_rate: 2e-5,
            epochs: 4,
            ..ModelConfig::tiny()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return bad(format!("threshold must lie in (0, 1), got {}", self.threshold));
        }
        if self.head_hidden == 0 {
            return bad("head_hidden must be positive".into());
        }
        if self.num_labels != Category::COUNT {
            return Err(Error::DimensionMismatch { expected: Category::COUNT, found: self.num_labels });
        }
        if self.max_len < 3 {
            return bad(format!("max_len must be at least 3, got {}", self.max_len));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if let EncoderSpec::Tiny { layers, hidden, heads, intermediate } = self.encoder {
            if hidden == 0 || heads == 0 || intermediate == 0 || hidden % heads != 0 {
                return bad(format!("tiny encoder needs hidden divisible by heads, got {hidden}/{heads}"));
            }
            let _ = layers;
        }
        Ok(())
    }
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig::tiny()
    }
}

/// Concrete encoder shape, recorded in checkpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncoderDims {
    pub vocab_size: usize,
    pub hidden: usize,
    pub layers: usize,
    pub heads: usize,
    pub intermediate: usize,
    pub max_positions: usize,
    pub type_vocab_size: usize,
    pub layer_norm_eps: f64,
}

impl EncoderDims {
    pub fn head_dim(&self) -> usize {
        self.hidden / self.heads
    }

    pub fn validate(&self, max_len: usize) -> Result<()> {
        if self.hidden == 0 || self.heads == 0 || !self.hidden.is_multiple_of(self.heads) {
            return Err(Error::InvalidConfig(format!("hidden {} not divisible by heads {}", self.hidden, self.heads)));
        }
        if self.max_positions < max_len {
            return Err(Error::InvalidConfig(format!(
                "max_len {max_len} exceeds the encoder's {} positions",
                self.max_positions
            )));
        }
        if self.type_vocab_size == 0 || self.vocab_size == 0 {
            return Err(Error::InvalidConfig("empty embedding table".into()));
        }
        Ok(())
    }
}
