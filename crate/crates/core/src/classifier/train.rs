//! Mini-batch fine-tuning with Adam and best-epoch selection on the
//! validation set.

use ndarray::{Array2, ArrayViewD, ArrayViewMutD, Axis};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checkpoint::{Checkpoint, TrainingMetadata};
use super::encoder::Encoder;
use super::head::Head;
use super::layers::Tensors;
use super::loss::{compute_loss, loss_gradient, sigmoid};
use super::model::{Model, PredictionBatch};
use super::optim::Adam;
use crate::corpus::{Category, DocumentSet, LabelVector};
use crate::error::{Error, Result};
use crate::evaluate::evaluate_predictions;
use crate::preprocess::TokenizedInput;
use crate::scalar::Scalar;
use crate::seed;

/// Sequences per gradient shard. Shards are summed in a fixed order so the
/// result does not depend on the thread count.
const SHARD: usize = 8;

/// Training loss and validation scores after one epoch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub micro_f1: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

impl EpochRecord {
    fn beats(&self, other: &EpochRecord) -> bool {
        self.macro_f1 > other.macro_f1 || (self.macro_f1 == other.macro_f1 && self.macro_recall > other.macro_recall)
    }
}

pub(crate) fn targets<T: Scalar>(labels: &[LabelVector]) -> Array2<T> {
    Array2::from_shape_fn((labels.len(), Category::COUNT), |(i, k)| if labels[i].0[k] { T::one() } else { T::zero() })
}

/// Mean cross-entropy of the model on `inputs`.
pub fn batch_loss<T: Scalar>(model: &Model<T>, inputs: &[TokenizedInput], targets: &Array2<T>) -> T {
    compute_loss(model.forward(inputs).view(), targets.view())
}

struct Gradients<T> {
    encoder: Option<Encoder<T>>,
    head: Head<T>,
}

/// Loss and parameter gradients for one batch. The encoder part is left
/// out when it is frozen.
fn gradients<T: Scalar>(model: &Model<T>, inputs: &[TokenizedInput], targets: &Array2<T>) -> (T, Gradients<T>) {
    let caches: Vec<_> = inputs.par_iter().map(|i| model.encoder.forward(i.active_ids())).collect();
    let mut features = Array2::zeros((inputs.len(), model.encoder.hidden()));
    for (mut row, c) in features.axis_iter_mut(Axis(0)).zip(&caches) {
        row.assign(&c.pooled);
    }
    let head_cache = model.head.forward(&features);
    let probs = head_cache.logits.mapv(sigmoid);
    let loss = compute_loss(probs.view(), targets.view());
    let d_logits = loss_gradient(probs.view(), targets.view(), probs.len());
    let mut head = model.head.zeros_like();
    let d_features = model.head.backward(&head_cache, &d_logits, &mut head);
    if model.config.freeze_encoder {
        return (loss, Gradients { encoder: None, head });
    }
    let d_chunks: Vec<_> = d_features.axis_chunks_iter(Axis(0), SHARD).collect();
    let shards: Vec<Encoder<T>> = caches
        .par_chunks(SHARD)
        .zip(d_chunks.into_par_iter())
        .map(|(chunk, d)| {
            let mut g = model.encoder.zeros_like();
            for (cache, row) in chunk.iter().zip(d.rows()) {
                model.encoder.backward(cache, &row.to_owned(), &mut g);
            }
            g
        })
        .collect();
    let mut shards = shards.into_iter();
    let mut encoder = shards.next().expect("non-empty batch");
    for s in shards {
        let mut dst = Vec::new();
        encoder.tensors_mut("", &mut dst);
        let mut src = Vec::new();
        s.tensors("", &mut src);
        for ((_, mut a), (_, b)) in dst.into_iter().zip(src) {
            a += &b;
        }
    }
    (loss, Gradients { encoder: Some(encoder), head })
}

/// One optimizer update on a batch; returns the loss before the update.
pub fn train_step<T: Scalar>(
    model: &mut Model<T>,
    optimizer: &mut Adam<T>,
    inputs: &[TokenizedInput],
    targets: &Array2<T>,
) -> T {
    assert!(!inputs.is_empty(), "empty batch");
    assert_eq!(inputs.len(), targets.nrows(), "input/target count mismatch");
    let (loss, grads) = gradients(model, inputs, targets);
    let mut params: Vec<(String, ArrayViewMutD<'_, T>)> = Vec::new();
    let mut flat: Vec<(String, ArrayViewD<'_, T>)> = Vec::new();
    if let Some(enc) = &grads.encoder {
        model.encoder.tensors_mut("", &mut params);
        enc.tensors("", &mut flat);
    }
    model.head.tensors_mut("head", &mut params);
    grads.head.tensors("head", &mut flat);
    optimizer.step(params.into_iter().map(|(_, p)| p).collect(), flat.into_iter().map(|(_, g)| g).collect());
    loss
}

fn score<T: Scalar>(
    model: &Model<T>,
    epoch: usize,
    train_loss: f64,
    inputs: &[TokenizedInput],
    ids: &[String],
    truth: &[LabelVector],
) -> Result<EpochRecord> {
    let batch = PredictionBatch::from_probabilities(ids.to_vec(), model.forward(inputs), model.config.threshold);
    let report = evaluate_predictions::<f64>(truth, &batch.labels)?;
    Ok(EpochRecord {
        epoch,
        train_loss,
        micro_f1: report.micro().f1,
        macro_precision: report.macro_avg().precision,
        macro_recall: report.macro_avg().recall,
        macro_f1: report.macro_avg().f1,
    })
}

pub fn train<T: Scalar>(model: Model<T>, train: &DocumentSet, validation: &DocumentSet) -> Result<Checkpoint<T>> {
    train_with_observer(model, train, validation, |_| {})
}

/// Trains for `config.epochs` epochs and keeps the weights with the best
/// validation macro-F1 (macro recall breaks ties). The untrained weights
/// compete as epoch 0, so zero epochs returns the model unchanged.
pub fn train_with_observer<T: Scalar>(
    mut model: Model<T>,
    train: &DocumentSet,
    validation: &DocumentSet,
    mut observer: impl FnMut(&EpochRecord),
) -> Result<Checkpoint<T>> {
    model.config.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if validation.is_empty() {
        return Err(Error::InvalidArgument("validation set is empty".into()));
    }
    if let Some(id) = validation.ids().find(|id| train.get(id).is_some()) {
        return Err(Error::InvalidArgument(format!("document {id:?} is in both training and validation sets")));
    }
    let train_targets = targets::<T>(&train.label_matrix()?);
    let val_truth = validation.label_matrix()?;
    let train_inputs = model.encode_documents(train)?;
    let val_inputs = model.encode_documents(validation)?;
    let val_ids: Vec<String> = validation.ids().map(str::to_string).collect();

    let initial_loss = batch_loss(&model, &train_inputs, &train_targets).to_f64().unwrap_or(f64::NAN);
    let mut best_record = score(&model, 0, initial_loss, &val_inputs, &val_ids, &val_truth)?;
    observer(&best_record);
    let mut history = vec![best_record.clone()];
    let mut best = model.clone();

    let mut optimizer = Adam::new(model.config.learning_rate);
    let mut rng = seed::rng(seed::stage_seed(model.config.seed, "shuffle"));
    let mut order: Vec<usize> = (0..train_inputs.len()).collect();
    let batch_size = model.config.batch_size;
    for epoch in 1..=model.config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(batch_size) {
            let inputs: Vec<TokenizedInput> = batch.iter().map(|&i| train_inputs[i].clone()).collect();
            let t = train_targets.select(Axis(0), batch);
            let loss = train_step(&mut model, &mut optimizer, &inputs, &t);
            total += loss.to_f64().unwrap_or(f64::NAN) * batch.len() as f64;
        }
        let record = score(&model, epoch, total / order.len() as f64, &val_inputs, &val_ids, &val_truth)?;
        observer(&record);
        if record.beats(&best_record) {
            best_record = record.clone();
            best = model.clone();
        }
        history.push(record);
    }
    Ok(Checkpoint {
        model: best,
        metadata: TrainingMetadata { selected_epoch: best_record.epoch, validation: Some(best_record), history },
    })
}
