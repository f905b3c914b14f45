use ndarray::{Array1, Array2, ArrayViewD, ArrayViewMutD, Axis};
use rayon::prelude::*;

use super::config::{EncoderDims, EncoderSpec, ModelConfig};
use super::encoder::Encoder;
use super::head::Head;
use super::layers::Tensors;
use super::loss::sigmoid;
use super::pretrained;
use crate::corpus::{Category, Document, DocumentSet, LabelVector};
use crate::error::{Error, Result};
use crate::preprocess::{clean_text, tokenize, CleaningConfig, TokenizedInput, Vocabulary};
use crate::scalar::Scalar;
use crate::seed;

/// Encoder, head, vocabulary and the configuration they were built from.
#[derive(Clone, Debug, PartialEq)]
pub struct Model<T> {
    pub config: ModelConfig,
    pub vocab: Vocabulary,
    pub encoder: Encoder<T>,
    pub head: Head<T>,
}

/// Per-document probabilities and thresholded labels.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionBatch<T> {
    pub ids: Vec<String>,
    /// `[documents, 7]`, canonical category order.
    pub probabilities: Array2<T>,
    pub labels: Vec<LabelVector>,
    pub threshold: f64,
}

impl<T: Scalar> PredictionBatch<T> {
    /// A label is positive iff its probability is at least `threshold`.
    pub fn from_probabilities(ids: Vec<String>, probabilities: Array2<T>, threshold: f64) -> Self {
        let cut = T::lit(threshold);
        let labels =
            probabilities.rows().into_iter().map(|row| LabelVector(std::array::from_fn(|k| row[k] >= cut))).collect();
        PredictionBatch { ids, probabilities, labels, threshold }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

fn head_rng(cfg: &ModelConfig) -> rand_chacha::ChaCha8Rng {
    seed::rng(seed::stage_seed(cfg.seed, "head-init"))
}

impl<T: Scalar> Model<T> {
    /// Randomly initialized tiny encoder over a whole-word vocabulary.
    pub fn tiny(config: ModelConfig, vocab: Vocabulary) -> Result<Self> {
        config.validate()?;
        let EncoderSpec::Tiny { layers, hidden, heads, intermediate } = config.encoder else {
            return Err(Error::InvalidConfig("Model::tiny needs a tiny encoder spec".into()));
        };
        let dims = EncoderDims {
            vocab_size: vocab.len(),
            hidden,
            layers,
            heads,
            intermediate,
            max_positions: config.max_len,
            type_vocab_size: 2,
            layer_norm_eps: 1e-12,
        };
        dims.validate(config.max_len)?;
        let mut rng = seed::rng(seed::stage_seed(config.seed, "encoder-init"));
        let encoder = Encoder::random(dims, &mut rng);
        let head = Head::new(hidden, config.head_hidden, config.num_labels, &mut head_rng(&config));
        Ok(Model { config, vocab, encoder, head })
    }

    /// Pretrained encoder read from `dir` with a freshly initialized head.
    pub fn from_pretrained_dir(config: ModelConfig, dir: &std::path::Path) -> Result<Self> {
        config.validate()?;
        let (encoder, vocab) = pretrained::load_encoder::<T>(dir)?;
        encoder.dims.validate(config.max_len)?;
        let head = Head::new(encoder.hidden(), config.head_hidden, config.num_labels, &mut head_rng(&config));
        Ok(Model { config, vocab, encoder, head })
    }

    /// Same shapes, all parameters zero; used as a gradient accumulator.
    pub fn zeros_like(&self) -> Self {
        Model {
            config: self.config.clone(),
            vocab: self.vocab.clone(),
            encoder: self.encoder.zeros_like(),
            head: self.head.zeros_like(),
        }
    }

    pub fn named_tensors(&self) -> Vec<(String, ArrayViewD<'_, T>)> {
        let mut out = Vec::new();
        self.encoder.tensors("", &mut out);
        self.head.tensors("head", &mut out);
        out
    }

    pub fn named_tensors_mut(&mut self) -> Vec<(String, ArrayViewMutD<'_, T>)> {
        let mut out = Vec::new();
        self.encoder.tensors_mut("", &mut out);
        self.head.tensors_mut("head", &mut out);
        out
    }

    pub fn num_params(&self) -> usize {
        self.named_tensors().iter().map(|(_, t)| t.len()).sum()
    }

    /// Cleans then tokenizes; `clean_text` on the document wins when set.
    pub fn encode_document(&self, doc: &Document, cleaning: &CleaningConfig) -> Result<TokenizedInput> {
        let text = match &doc.clean_text {
            Some(c) => c.clone(),
            None => clean_text(&doc.text, cleaning),
        };
        tokenize(&text, &self.vocab, self.config.max_len)
    }

    pub fn encode_documents(&self, docs: &DocumentSet) -> Result<Vec<TokenizedInput>> {
        let cleaning = CleaningConfig::default();
        docs.iter()
            .map(|d| {
                self.encode_document(d, &cleaning).map_err(|e| match e {
                    Error::OverLength { .. } => Error::InvalidArgument(format!("document {:?}: {e}", d.id)),
                    other => other,
                })
            })
            .collect()
    }

    pub fn pooled(&self, input: &TokenizedInput) -> Array1<T> {
        self.encoder.forward(input.active_ids()).pooled
    }

    /// Pooled features, one row per input.
    pub fn features(&self, inputs: &[TokenizedInput]) -> Array2<T> {
        let rows: Vec<Array1<T>> = inputs.par_iter().map(|i| self.pooled(i)).collect();
        let mut out = Array2::zeros((inputs.len(), self.encoder.hidden()));
        for (mut dst, src) in out.axis_iter_mut(Axis(0)).zip(rows) {
            dst.assign(&src);
        }
        out
    }

    /// Probabilities `[inputs, 7]` without updating any weight.
    pub fn forward(&self, inputs: &[TokenizedInput]) -> Array2<T> {
        self.head.forward(&self.features(inputs)).logits.mapv(sigmoid)
    }
}

/// Builds a model from its configuration. Tiny encoders need `vocab`;
/// the pretrained encoder reads weights and vocabulary from the directory
/// named by the encoder-directory environment variable.
pub fn build_model<T: Scalar>(cfg: ModelConfig, vocab: Option<Vocabulary>) -> Result<Model<T>> {
    match cfg.encoder {
        EncoderSpec::Tiny { .. } => {
            let vocab = vocab.ok_or_else(|| Error::InvalidConfig("a tiny encoder needs a vocabulary".into()))?;
            Model::tiny(cfg, vocab)
        }
        EncoderSpec::PretrainedBaseUncased => {
            if vocab.is_some() {
                return Err(Error::InvalidConfig("the pretrained encoder brings its own vocabulary".into()));
            }
            let dir = pretrained::pretrained_dir()?;
            Model::from_pretrained_dir(cfg, &dir)
        }
    }
}

/// Thresholded predictions for every document.
pub fn predict<T: Scalar>(model: &Model<T>, docs: &DocumentSet, threshold: f64) -> Result<PredictionBatch<T>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidConfig(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    let inputs = model.encode_documents(docs)?;
    let probabilities = model.forward(&inputs);
    debug_assert_eq!(probabilities.ncols(), Category::COUNT);
    Ok(PredictionBatch::from_probabilities(docs.ids().map(str::to_string).collect(), probabilities, threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::ModelConfig;
    use crate::corpus::Source;

    fn vocab() -> Vocabulary {
        Vocabulary::whole_word(["dry", "wells", "fire", "crops"]).unwrap()
    }

    fn docs() -> DocumentSet {
        DocumentSet::new(vec![
            Document::new("a", "Dry wells", Source::Tweet),
            Document::new("b", "fire!", Source::Tweet),
            Document::new("c", "crops crops crops", Source::Tweet),
            Document::new("d", "unknown words only", Source::Tweet),
        ])
        .unwrap()
    }

    #[test]
    fn shape_contract() {
        let m: Model<f32> = build_model(ModelConfig::tiny(), Some(vocab())).unwrap();
        let p = predict(&m, &docs(), 0.5).unwrap();
        assert_eq!(p.probabilities.dim(), (4, 7));
        assert!(p.probabilities.iter().all(|&v| v > 0.0 && v < 1.0));
        for (row, labels) in p.probabilities.rows().into_iter().zip(&p.labels) {
            for c in Category::ALL {
                assert_eq!(labels[c], row[c.index()] >= 0.5);
            }
        }
    }

    #[test]
    fn zero_head_predicts_every_label() {
        let mut m: Model<f32> = build_model(ModelConfig::tiny(), Some(vocab())).unwrap();
        m.head = m.head.zeros_like();
        let p = predict(&m, &docs(), 0.5).unwrap();
        assert!(p.probabilities.iter().all(|&v| v == 0.5));
        assert!(p.labels.iter().all(|l| l.count() == 7));
    }

    #[test]
    fn inference_is_repeatable() {
        let m: Model<f32> = build_model(ModelConfig::tiny(), Some(vocab())).unwrap();
        assert_eq!(predict(&m, &docs(), 0.5).unwrap(), predict(&m, &docs(), 0.5).unwrap());
    }

    #[test]
    fn over_length_documents_fail() {
        let m: Model<f32> = build_model(ModelConfig { max_len: 4, ..ModelConfig::tiny() }, Some(vocab())).unwrap();
        assert!(predict(&m, &docs(), 0.5).is_err());
    }

    #[test]
    fn missing_vocabulary_or_weights() {
        assert!(build_model::<f32>(ModelConfig::tiny(), None).is_err());
        assert!(build_model::<f32>(ModelConfig::pretrained(), Some(vocab())).is_err());
    }
}
