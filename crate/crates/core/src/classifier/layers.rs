use ndarray::{Array1, Array2, ArrayViewD, ArrayViewMutD, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::scalar::Scalar;

/// Named views over every parameter tensor, in a fixed order.
pub(crate) trait Tensors<T> {
    fn tensors<'a>(&'a self, prefix: &str, out: &mut Vec<(String, ArrayViewD<'a, T>)>);
    fn tensors_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, ArrayViewMutD<'a, T>)>);
}

/// Affine map with PyTorch weight layout `[out, in]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Linear<T> {
    pub weight: Array2<T>,
    pub bias: Array1<T>,
}

impl<T: Scalar> Linear<T> {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Linear { weight: Array2::zeros((outputs, inputs)), bias: Array1::zeros(outputs) }
    }

    pub(crate) fn normal(inputs: usize, outputs: usize, std: f64, rng: &mut impl Rng) -> Self {
        let dist = Normal::new(0.0, std).expect("positive std");
        let weight = Array2::from_shape_simple_fn((outputs, inputs), || T::lit(dist.sample(rng)));
        Linear { weight, bias: Array1::zeros(outputs) }
    }

    /// Glorot-uniform weights, zero bias.
    pub(crate) fn glorot(inputs: usize, outputs: usize, rng: &mut impl Rng) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit);
        let weight = Array2::from_shape_simple_fn((outputs, inputs), || T::lit(dist.sample(rng)));
        Linear { weight, bias: Array1::zeros(outputs) }
    }

    pub fn inputs(&self) -> usize {
        self.weight.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weight.nrows()
    }

    pub fn zeros_like(&self) -> Self {
        Linear::zeros(self.inputs(), self.outputs())
    }

    pub fn forward(&self, x: &Array2<T>) -> Array2<T> {
        x.dot(&self.weight.t()) + &self.bias
    }

    /// Accumulates parameter gradients into `grad` and returns d(loss)/d(x).
    pub fn backward(&self, x: &Array2<T>, dy: &Array2<T>, grad: &mut Linear<T>) -> Array2<T> {
        grad.weight += &dy.t().dot(x);
        grad.bias += &dy.sum_axis(Axis(0));
        dy.dot(&self.weight)
    }

    pub fn num_params(&self) -> usize {
        self.weight.len() + self.bias.len()
    }
}

impl<T> Tensors<T> for Linear<T> {
    fn tensors<'a>(&'a self, prefix: &str, out: &mut Vec<(String, ArrayViewD<'a, T>)>) {
        out.push((format!("{prefix}.weight"), self.weight.view().into_dyn()));
        out.push((format!("{prefix}.bias"), self.bias.view().into_dyn()));
    }

    fn tensors_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, ArrayViewMutD<'a, T>)>) {
        out.push((format!("{prefix}.weight"), self.weight.view_mut().into_dyn()));
        out.push((format!("{prefix}.bias"), self.bias.view_mut().into_dyn()));
    }
}

/// Row-wise layer normalization.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerNorm<T> {
    pub gamma: Array1<T>,
    pub beta: Array1<T>,
    pub eps: T,
}

pub(crate) struct NormCache<T> {
    normalized: Array2<T>,
    inv_std: Array1<T>,
}

impl<T: Scalar> LayerNorm<T> {
    pub fn new(width: usize, eps: T) -> Self {
        LayerNorm { gamma: Array1::ones(width), beta: Array1::zeros(width), eps }
    }

    pub fn zeros_like(&self) -> Self {
        LayerNorm { gamma: Array1::zeros(self.gamma.len()), beta: Array1::zeros(self.beta.len()), eps: self.eps }
    }

    pub(crate) fn forward(&self, x: &Array2<T>) -> (Array2<T>, NormCache<T>) {
        let width = T::from_usize(x.ncols()).expect("width");
        let mut normalized = x.clone();
        let mut inv_std = Array1::zeros(x.nrows());
        for (mut row, inv) in normalized.rows_mut().into_iter().zip(inv_std.iter_mut()) {
            let mean = row.sum() / width;
            row.mapv_inplace(|v| v - mean);
            let var = row.iter().fold(T::zero(), |acc, &v| acc + v * v) / width;
            *inv = T::one() / (var + self.eps).sqrt();
            let s = *inv;
            row.mapv_inplace(|v| v * s);
        }
        let y = &normalized * &self.gamma + &self.beta;
        (y, NormCache { normalized, inv_std })
    }

    pub(crate) fn backward(&self, cache: &NormCache<T>, dy: &Array2<T>, grad: &mut LayerNorm<T>) -> Array2<T> {
        grad.gamma += &(dy * &cache.normalized).sum_axis(Axis(0));
        grad.beta += &dy.sum_axis(Axis(0));
        let width = T::from_usize(dy.ncols()).expect("width");
        let mut dx = dy * &self.gamma;
        for ((mut row, xhat), &inv) in dx.rows_mut().into_iter().zip(cache.normalized.rows()).zip(cache.inv_std.iter())
        {
            let sum = row.sum();
            let dot = row.iter().zip(xhat.iter()).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
            for (d, &xh) in row.iter_mut().zip(xhat.iter()) {
                *d = inv / width * (width * *d - sum - xh * dot);
            }
        }
        dx
    }
}

impl<T> Tensors<T> for LayerNorm<T> {
    fn tensors<'a>(&'a self, prefix: &str, out: &mut Vec<(String, ArrayViewD<'a, T>)>) {
        out.push((format!("{prefix}.weight"), self.gamma.view().into_dyn()));
        out.push((format!("{prefix}.bias"), self.beta.view().into_dyn()));
    }

    fn tensors_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, ArrayViewMutD<'a, T>)>) {
        out.push((format!("{prefix}.weight"), self.gamma.view_mut().into_dyn()));
        out.push((format!("{prefix}.bias"), self.beta.view_mut().into_dyn()));
    }
}

pub(crate) fn gelu<T: Scalar>(x: T) -> T {
    let half = T::lit(0.5);
    half * x * (T::one() + (x * T::lit(std::f64::consts::FRAC_1_SQRT_2)).erf())
}

pub(crate) fn gelu_grad<T: Scalar>(x: T) -> T {
    let half = T::lit(0.5);
    let cdf = half * (T::one() + (x * T::lit(std::f64::consts::FRAC_1_SQRT_2)).erf());
    let pdf = (-half * x * x).exp() * T::lit(1.0 / (2.0 * std::f64::consts::PI).sqrt());
    cdf + x * pdf
}

/// Row-wise softmax, max-shifted.
pub(crate) fn softmax_rows<T: Scalar>(x: &mut Array2<T>) {
    for mut row in x.rows_mut() {
        let max = row.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
}
