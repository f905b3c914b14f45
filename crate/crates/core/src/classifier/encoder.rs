//! BERT-style encoder: summed embeddings, post-norm self-attention blocks
//! with exact GELU feed-forward, and a tanh pooler over the start marker.
//!
//! Sequences are processed at their active length. Padding positions are
//! masked out of attention as keys and the pooler reads position 0, so
//! dropping them gives the same pooled output as masked attention.

use ndarray::{s, Array1, Array2, ArrayViewD, ArrayViewMutD, Axis, Zip};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::config::EncoderDims;
use super::layers::{gelu, gelu_grad, softmax_rows, LayerNorm, Linear, NormCache, Tensors};
use crate::scalar::Scalar;

const INIT_STD: f64 = 0.02;

#[derive(Clone, Debug, PartialEq)]
pub struct EncoderLayer<T> {
    pub query: Linear<T>,
    pub key: Linear<T>,
    pub value: Linear<T>,
    pub attention_output: Linear<T>,
    pub attention_norm: LayerNorm<T>,
    pub intermediate: Linear<T>,
    pub output: Linear<T>,
    pub output_norm: LayerNorm<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Encoder<T> {
    pub dims: EncoderDims,
    pub word_embeddings: Array2<T>,
    pub position_embeddings: Array2<T>,
    pub token_type_embeddings: Array2<T>,
    pub embedding_norm: LayerNorm<T>,
    pub layers: Vec<EncoderLayer<T>>,
    pub pooler: Linear<T>,
}

struct LayerCache<T> {
    input: Array2<T>,
    query: Array2<T>,
    key: Array2<T>,
    value: Array2<T>,
    attention: Vec<Array2<T>>,
    context: Array2<T>,
    attention_norm: NormCache<T>,
    attended: Array2<T>,
    pre_activation: Array2<T>,
    activation: Array2<T>,
    output_norm: NormCache<T>,
}

/// Everything the backward pass needs from one forward pass.
pub struct EncoderCache<T> {
    ids: Vec<u32>,
    embedding_norm: NormCache<T>,
    layers: Vec<LayerCache<T>>,
    start: Array2<T>,
    pub pooled: Array1<T>,
}

fn normal_matrix<T: Scalar>(rows: usize, cols: usize, rng: &mut impl Rng) -> Array2<T> {
    let dist = Normal::new(0.0, INIT_STD).expect("positive std");
    Array2::from_shape_simple_fn((rows, cols), || T::lit(dist.sample(rng)))
}

impl<T: Scalar> EncoderLayer<T> {
    fn random(dims: &EncoderDims, rng: &mut impl Rng) -> Self {
        let (h, i) = (dims.hidden, dims.intermediate);
        let eps = T::lit(dims.layer_norm_eps);
        EncoderLayer {
            query: Linear::normal(h, h, INIT_STD, rng),
            key: Linear::normal(h, h, INIT_STD, rng),
            value: Linear::normal(h, h, INIT_STD, rng),
            attention_output: Linear::normal(h, h, INIT_STD, rng),
            attention_norm: LayerNorm::new(h, eps),
            intermediate: Linear::normal(h, i, INIT_STD, rng),
            output: Linear::normal(i, h, INIT_STD, rng),
            output_norm: LayerNorm::new(h, eps),
        }
    }

    fn zeros_like(&self) -> Self {
        EncoderLayer {
            query: self.query.zeros_like(),
            key: self.key.zeros_like(),
            value: self.value.zeros_like(),
            attention_output: self.attention_output.zeros_like(),
            attention_norm: self.attention_norm.zeros_like(),
            intermediate: self.intermediate.zeros_like(),
            output: self.output.zeros_like(),
            output_norm: self.output_norm.zeros_like(),
        }
    }

    fn forward(&self, x: Array2<T>, heads: usize) -> (Array2<T>, LayerCache<T>) {
        let n = x.nrows();
        let width = x.ncols() / heads;
        let scale = T::one() / T::from_usize(width).expect("width").sqrt();
        let query = self.query.forward(&x);
        let key = self.key.forward(&x);
        let value = self.value.forward(&x);
        let mut context = Array2::zeros((n, x.ncols()));
        let mut attention = Vec::with_capacity(heads);
        for h in 0..heads {
            let cols = s![.., h * width..(h + 1) * width];
            let mut scores = query.slice(cols).dot(&key.slice(cols).t()) * scale;
            softmax_rows(&mut scores);
            context.slice_mut(cols).assign(&scores.dot(&value.slice(cols)));
            attention.push(scores);
        }
        let projected = self.attention_output.forward(&context);
        let (attended, attention_norm) = self.attention_norm.forward(&(&x + &projected));
        let pre_activation = self.intermediate.forward(&attended);
        let activation = pre_activation.mapv(gelu);
        let ff = self.output.forward(&activation);
        let (out, output_norm) = self.output_norm.forward(&(&attended + &ff));
        let cache = LayerCache {
            input: x,
            query,
            key,
            value,
            attention,
            context,
            attention_norm,
            attended,
            pre_activation,
            activation,
            output_norm,
        };
        (out, cache)
    }

    fn backward(
        &self,
        cache: &LayerCache<T>,
        d_out: &Array2<T>,
        heads: usize,
        grad: &mut EncoderLayer<T>,
    ) -> Array2<T> {
        let d_sum2 = self.output_norm.backward(&cache.output_norm, d_out, &mut grad.output_norm);
        let mut d_act = self.output.backward(&cache.activation, &d_sum2, &mut grad.output);
        Zip::from(&mut d_act).and(&cache.pre_activation).for_each(|d, &a| *d *= gelu_grad(a));
        let d_attended = &d_sum2 + &self.intermediate.backward(&cache.attended, &d_act, &mut grad.intermediate);
        let d_sum1 = self.attention_norm.backward(&cache.attention_norm, &d_attended, &mut grad.attention_norm);
        let d_context = self.attention_output.backward(&cache.context, &d_sum1, &mut grad.attention_output);

        let width = cache.input.ncols() / heads;
        let scale = T::one() / T::from_usize(width).expect("width").sqrt();
        let mut d_query = Array2::zeros(cache.query.raw_dim());
        let mut d_key = Array2::zeros(cache.key.raw_dim());
        let mut d_value = Array2::zeros(cache.value.raw_dim());
        for (h, probs) in cache.attention.iter().enumerate() {
            let cols = s![.., h * width..(h + 1) * width];
            let d_ctx = d_context.slice(cols);
            let d_probs = d_ctx.dot(&cache.value.slice(cols).t());
            d_value.slice_mut(cols).assign(&probs.t().dot(&d_ctx));
            let row_dot = (&d_probs * probs).sum_axis(Axis(1)).insert_axis(Axis(1));
            let d_scores = (probs * &(&d_probs - &row_dot)) * scale;
            d_query.slice_mut(cols).assign(&d_scores.dot(&cache.key.slice(cols)));
            d_key.slice_mut(cols).assign(&d_scores.t().dot(&cache.query.slice(cols)));
        }
        let mut d_input = d_sum1;
        d_input += &self.query.backward(&cache.input, &d_query, &mut grad.query);
        d_input += &self.key.backward(&cache.input, &d_key, &mut grad.key);
        d_input += &self.value.backward(&cache.input, &d_value, &mut grad.value);
        d_input
    }
}

impl<T> Tensors<T> for EncoderLayer<T> {
    fn tensors<'a>(&'a self, p: &str, out: &mut Vec<(String, ArrayViewD<'a, T>)>) {
        self.query.tensors(&format!("{p}.attention.self.query"), out);
        self.key.tensors(&format!("{p}.attention.self.key"), out);
        self.value.tensors(&format!("{p}.attention.self.value"), out);
        self.attention_output.tensors(&format!("{p}.attention.output.dense"), out);
        self.attention_norm.tensors(&format!("{p}.attention.output.LayerNorm"), out);
        self.intermediate.tensors(&format!("{p}.intermediate.dense"), out);
        self.output.tensors(&format!("{p}.output.dense"), out);
        self.output_norm.tensors(&format!("{p}.output.LayerNorm"), out);
    }

    fn tensors_mut<'a>(&'a mut self, p: &str, out: &mut Vec<(String, ArrayViewMutD<'a, T>)>) {
        self.query.tensors_mut(&format!("{p}.attention.self.query"), out);
        self.key.tensors_mut(&format!("{p}.attention.self.key"), out);
        self.value.tensors_mut(&format!("{p}.attention.self.value"), out);
        self.attention_output.tensors_mut(&format!("{p}.attention.output.dense"), out);
        self.attention_norm.tensors_mut(&format!("{p}.attention.output.LayerNorm"), out);
        self.intermediate.tensors_mut(&format!("{p}.intermediate.dense"), out);
        self.output.tensors_mut(&format!("{p}.output.dense"), out);
        self.output_norm.tensors_mut(&format!("{p}.output.LayerNorm"), out);
    }
}

impl<T: Scalar> Encoder<T> {
    /// Random initialization: N(0, 0.02) weights and embeddings, zero
    /// biases, unit layer-norm gains.
    pub fn random(dims: EncoderDims, rng: &mut impl Rng) -> Self {
        let h = dims.hidden;
        Encoder {
            word_embeddings: normal_matrix(dims.vocab_size, h, rng),
            position_embeddings: normal_matrix(dims.max_positions, h, rng),
            token_type_embeddings: normal_matrix(dims.type_vocab_size, h, rng),
            embedding_norm: LayerNorm::new(h, T::lit(dims.layer_norm_eps)),
            layers: (0..dims.layers).map(|_| EncoderLayer::random(&dims, rng)).collect(),
            pooler: Linear::normal(h, h, INIT_STD, rng),
            dims,
        }
    }

    /// All-zero parameters of the given shape, ready to be filled from disk.
    pub fn zeros(dims: EncoderDims) -> Self {
        let h = dims.hidden;
        let eps = T::lit(dims.layer_norm_eps);
        let layer = EncoderLayer {
            query: Linear::zeros(h, h),
            key: Linear::zeros(h, h),
            value: Linear::zeros(h, h),
            attention_output: Linear::zeros(h, h),
            attention_norm: LayerNorm::new(h, eps),
            intermediate: Linear::zeros(h, dims.intermediate),
            output: Linear::zeros(dims.intermediate, h),
            output_norm: LayerNorm::new(h, eps),
        };
        Encoder {
            word_embeddings: Array2::zeros((dims.vocab_size, h)),
            position_embeddings: Array2::zeros((dims.max_positions, h)),
            token_type_embeddings: Array2::zeros((dims.type_vocab_size, h)),
            embedding_norm: LayerNorm::new(h, eps),
            layers: vec![layer; dims.layers],
            pooler: Linear::zeros(h, h),
            dims,
        }
    }

    pub fn zeros_like(&self) -> Self {
        Encoder {
            dims: self.dims.clone(),
            word_embeddings: Array2::zeros(self.word_embeddings.raw_dim()),
            position_embeddings: Array2::zeros(self.position_embeddings.raw_dim()),
            token_type_embeddings: Array2::zeros(self.token_type_embeddings.raw_dim()),
            embedding_norm: self.embedding_norm.zeros_like(),
            layers: self.layers.iter().map(EncoderLayer::zeros_like).collect(),
            pooler: self.pooler.zeros_like(),
        }
    }

    pub fn hidden(&self) -> usize {
        self.dims.hidden
    }

    /// Pooled representation for the active (unpadded) ids of one sequence.
    pub fn forward(&self, ids: &[u32]) -> EncoderCache<T> {
        let n = ids.len();
        assert!(n > 0 && n <= self.dims.max_positions, "sequence length {n} out of range");
        let mut emb = self.position_embeddings.slice(s![..n, ..]).to_owned();
        for (mut row, &id) in emb.rows_mut().into_iter().zip(ids) {
            row += &self.word_embeddings.row(id as usize);
            row += &self.token_type_embeddings.row(0);
        }
        let (mut x, embedding_norm) = self.embedding_norm.forward(&emb);
        let mut layers = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let (next, cache) = layer.forward(x, self.dims.heads);
            layers.push(cache);
            x = next;
        }
        let start = x.slice(s![0..1, ..]).to_owned();
        let pooled = self.pooler.forward(&start).row(0).mapv(|v| v.tanh());
        EncoderCache { ids: ids.to_vec(), embedding_norm, layers, start, pooled }
    }

    /// Accumulates gradients for one sequence given d(loss)/d(pooled).
    pub fn backward(&self, cache: &EncoderCache<T>, d_pooled: &Array1<T>, grad: &mut Encoder<T>) {
        let d_pre = Zip::from(d_pooled).and(&cache.pooled).map_collect(|&d, &p| d * (T::one() - p * p));
        let d_start = self.pooler.backward(&cache.start, &d_pre.insert_axis(Axis(0)), &mut grad.pooler);
        let n = cache.ids.len();
        let mut d_x = Array2::zeros((n, self.dims.hidden));
        d_x.row_mut(0).assign(&d_start.row(0));
        for (layer, (lcache, lgrad)) in self.layers.iter().zip(cache.layers.iter().zip(grad.layers.iter_mut())).rev() {
            d_x = layer.backward(lcache, &d_x, self.dims.heads, lgrad);
        }
        let d_emb = self.embedding_norm.backward(&cache.embedding_norm, &d_x, &mut grad.embedding_norm);
        for (i, (&id, row)) in cache.ids.iter().zip(d_emb.rows()).enumerate() {
            let mut w = grad.word_embeddings.row_mut(id as usize);
            w += &row;
            let mut p = grad.position_embeddings.row_mut(i);
            p += &row;
            let mut t = grad.token_type_embeddings.row_mut(0);
            t += &row;
        }
    }
}

impl<T> Tensors<T> for Encoder<T> {
    fn tensors<'a>(&'a self, _prefix: &str, out: &mut Vec<(String, ArrayViewD<'a, T>)>) {
        out.push(("embeddings.word_embeddings.weight".into(), self.word_embeddings.view().into_dyn()));
        out.push(("embeddings.position_embeddings.weight".into(), self.position_embeddings.view().into_dyn()));
        out.push(("embeddings.token_type_embeddings.weight".into(), self.token_type_embeddings.view().into_dyn()));
        self.embedding_norm.tensors("embeddings.LayerNorm", out);
        for (i, layer) in self.layers.iter().enumerate() {
            layer.tensors(&format!("encoder.layer.{i}"), out);
        }
        self.pooler.tensors("pooler.dense", out);
    }

    fn tensors_mut<'a>(&'a mut self, _prefix: &str, out: &mut Vec<(String, ArrayViewMutD<'a, T>)>) {
        out.push(("embeddings.word_embeddings.weight".into(), self.word_embeddings.view_mut().into_dyn()));
        out.push(("embeddings.position_embeddings.weight".into(), self.position_embeddings.view_mut().into_dyn()));
        out.push(("embeddings.token_type_embeddings.weight".into(), self.token_type_embeddings.view_mut().into_dyn()));
        self.embedding_norm.tensors_mut("embeddings.LayerNorm", out);
        for (i, layer) in self.layers.iter_mut().enumerate() {
            layer.tensors_mut(&format!("encoder.layer.{i}"), out);
        }
        self.pooler.tensors_mut("pooler.dense", out);
    }
}
