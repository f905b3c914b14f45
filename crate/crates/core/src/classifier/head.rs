use ndarray::{Array2, ArrayViewD, ArrayViewMutD, Zip};
use rand::Rng;

use super::layers::{Linear, Tensors};
use super::loss::sigmoid;
use crate::scalar::Scalar;

/// ReLU dense layer followed by a per-category sigmoid output.
#[derive(Clone, Debug, PartialEq)]
pub struct Head<T> {
    pub dense: Linear<T>,
    pub output: Linear<T>,
}

/// Intermediate values of one head pass.
pub struct HeadCache<T> {
    pub features: Array2<T>,
    pub pre_activation: Array2<T>,
    pub hidden: Array2<T>,
    pub logits: Array2<T>,
}

impl<T: Scalar> Head<T> {
    pub fn new(inputs: usize, hidden: usize, labels: usize, rng: &mut impl Rng) -> Self {
        Head { dense: Linear::glorot(inputs, hidden, rng), output: Linear::glorot(hidden, labels, rng) }
    }

    pub fn zeros(inputs: usize, hidden: usize, labels: usize) -> Self {
        Head { dense: Linear::zeros(inputs, hidden), output: Linear::zeros(hidden, labels) }
    }

    pub fn zeros_like(&self) -> Self {
        Head { dense: self.dense.zeros_like(), output: self.output.zeros_like() }
    }

    pub fn num_params(&self) -> usize {
        self.dense.num_params() + self.output.num_params()
    }

    pub fn forward(&self, features: &Array2<T>) -> HeadCache<T> {
        let pre_activation = self.dense.forward(features);
        let hidden = pre_activation.mapv(|v| v.max(T::zero()));
        let logits = self.output.forward(&hidden);
        HeadCache { features: features.clone(), pre_activation, hidden, logits }
    }

    /// Sigmoid probabilities for a batch of pooled features.
    pub fn probabilities(&self, features: &Array2<T>) -> Array2<T> {
        self.forward(features).logits.mapv(sigmoid)
    }

    /// Backpropagates `d_logits`; returns d(loss)/d(features).
    pub fn backward(&self, cache: &HeadCache<T>, d_logits: &Array2<T>, grad: &mut Head<T>) -> Array2<T> {
        let mut d_hidden = self.output.backward(&cache.hidden, d_logits, &mut grad.output);
        Zip::from(&mut d_hidden).and(&cache.pre_activation).for_each(|d, &a| {
            if a <= T::zero() {
                *d = T::zero();
            }
        });
        self.dense.backward(&cache.features, &d_hidden, &mut grad.dense)
    }
}

impl<T> Tensors<T> for Head<T> {
    fn tensors<'a>(&'a self, prefix: &str, out: &mut Vec<(String, ArrayViewD<'a, T>)>) {
        self.dense.tensors(&format!("{prefix}.dense"), out);
        self.output.tensors(&format!("{prefix}.output"), out);
    }

    fn tensors_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, ArrayViewMutD<'a, T>)>) {
        self.dense.tensors_mut(&format!("{prefix}.dense"), out);
        self.output.tensors_mut(&format!("{prefix}.output"), out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_head_gives_one_half() {
        let head = Head::<f32>::zeros(32, 50, 7);
        let p = head.probabilities(&Array2::from_elem((4, 32), 0.3));
        assert_eq!(p.dim(), (4, 7));
        assert!(p.iter().all(|&v| v == 0.5));
    }

    #[test]
    fn parameter_count() {
        let head = Head::<f64>::zeros(768, 50, 7);
        assert_eq!(head.num_params(), (768 * 50 + 50) + (50 * 7 + 7));
    }
}
