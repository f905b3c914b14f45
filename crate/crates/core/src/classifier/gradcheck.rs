//! Finite-difference verification of the hand-written backward passes.

use ndarray::{Array2, ArrayViewMutD};
use rand::Rng;
use serde::Serialize;

use super::head::Head;
use super::layers::Tensors;
use super::loss::{compute_loss, loss_gradient, sigmoid};
use super::model::Model;
use crate::preprocess::TokenizedInput;
use crate::seed;

const STEP: f64 = 1e-4;
const FLOOR: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradientReport {
    pub max_relative_error: f64,
    /// Parameter entries compared.
    pub checked: usize,
    /// Tensor name and flat index of the worst entry.
    pub worst: Option<(String, usize)>,
}

impl GradientReport {
    fn record(&mut self, name: &str, index: usize, analytic: f64, numeric: f64) {
        let err = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FLOOR);
        self.checked += 1;
        if err > self.max_relative_error || self.worst.is_none() {
            self.max_relative_error = err;
            self.worst = Some((name.to_string(), index));
        }
    }
}

fn empty_report() -> GradientReport {
    GradientReport { max_relative_error: 0.0, checked: 0, worst: None }
}

fn head_loss(head: &Head<f64>, features: &Array2<f64>, targets: &Array2<f64>) -> f64 {
    compute_loss(head.probabilities(features).view(), targets.view())
}

fn perturbed(view: &mut ArrayViewMutD<'_, f64>, index: usize, delta: f64) -> f64 {
    let cell = view.iter_mut().nth(index).expect("index in range");
    let old = *cell;
    *cell = old + delta;
    old
}

fn restore(view: &mut ArrayViewMutD<'_, f64>, index: usize, value: f64) {
    *view.iter_mut().nth(index).expect("index in range") = value;
}

/// Compares every head parameter gradient with a central difference of
/// step 1e-4 on the mean cross-entropy of `features` against `targets`.
pub fn gradient_check(head: &Head<f64>, features: &Array2<f64>, targets: &Array2<f64>) -> GradientReport {
    let cache = head.forward(features);
    let probs = cache.logits.mapv(sigmoid);
    let d_logits = loss_gradient(probs.view(), targets.view(), probs.len());
    let mut grad = head.zeros_like();
    head.backward(&cache, &d_logits, &mut grad);
    let mut analytic = Vec::new();
    grad.tensors("head", &mut analytic);

    let mut probe = head.clone();
    let mut report = empty_report();
    for (t, (name, a)) in analytic.iter().enumerate() {
        for (i, &g) in a.iter().enumerate() {
            let numeric = {
                let mut eval = |delta: f64| {
                    let mut views = Vec::new();
                    probe.tensors_mut("head", &mut views);
                    let old = perturbed(&mut views[t].1, i, delta);
                    drop(views);
                    let loss = head_loss(&probe, features, targets);
                    let mut views = Vec::new();
                    probe.tensors_mut("head", &mut views);
                    restore(&mut views[t].1, i, old);
                    loss
                };
                (eval(STEP) - eval(-STEP)) / (2.0 * STEP)
            };
            report.record(name, i, g, numeric);
        }
    }
    report
}

/// Full-model check: the head over pooled features, plus up to
/// `per_tensor` randomly chosen entries of every encoder tensor.
pub fn gradient_check_model(
    model: &Model<f64>,
    inputs: &[TokenizedInput],
    targets: &Array2<f64>,
    per_tensor: usize,
) -> GradientReport {
    let features = model.features(inputs);
    let mut report = gradient_check(&model.head, &features, targets);

    let caches: Vec<_> = inputs.iter().map(|i| model.encoder.forward(i.active_ids())).collect();
    let head_cache = model.head.forward(&features);
    let probs = head_cache.logits.mapv(sigmoid);
    let d_logits = loss_gradient(probs.view(), targets.view(), probs.len());
    let mut head_grad = model.head.zeros_like();
    let d_features = model.head.backward(&head_cache, &d_logits, &mut head_grad);
    let mut grad = model.encoder.zeros_like();
    for (cache, row) in caches.iter().zip(d_features.rows()) {
        model.encoder.backward(cache, &row.to_owned(), &mut grad);
    }
    let mut analytic = Vec::new();
    grad.tensors("", &mut analytic);

    let mut rng = seed::rng(seed::stage_seed(model.config.seed, "gradient-check"));
    let mut probe = model.clone();
    for (t, (name, a)) in analytic.iter().enumerate() {
        let picks: Vec<usize> = if a.len() <= per_tensor {
            (0..a.len()).collect()
        } else {
            (0..per_tensor).map(|_| rng.gen_range(0..a.len())).collect()
        };
        for i in picks {
            let g = *a.iter().nth(i).expect("index in range");
            let mut eval = |delta: f64| {
                let mut views = Vec::new();
                probe.encoder.tensors_mut("", &mut views);
                let old = perturbed(&mut views[t].1, i, delta);
                drop(views);
                let loss = compute_loss(probe.forward(inputs).view(), targets.view());
                let mut views = Vec::new();
                probe.encoder.tensors_mut("", &mut views);
                restore(&mut views[t].1, i, old);
                loss
            };
            let numeric = (eval(STEP) - eval(-STEP)) / (2.0 * STEP);
            report.record(name, i, g, numeric);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn batch(seed_value: u64) -> (Head<f64>, Array2<f64>, Array2<f64>) {
        let mut rng = seed::rng(seed_value);
        let head = Head::new(6, 5, 7, &mut rng);
        let dist = Normal::new(0.0, 1.0).unwrap();
        let features = Array2::from_shape_simple_fn((2, 6), || dist.sample(&mut rng));
        let targets = Array2::from_shape_fn((2, 7), |(i, k)| ((i + k) % 3 == 0) as u8 as f64);
        (head, features, targets)
    }

    #[test]
    fn head_gradients_match() {
        let (head, features, targets) = batch(1);
        let report = gradient_check(&head, &features, &targets);
        assert_eq!(report.checked, head.num_params());
        assert!(report.max_relative_error < 1e-4, "{report:?}");
        assert_eq!(gradient_check(&head, &features, &targets), report);
    }

    #[test]
    fn saturated_outputs_stay_finite() {
        let (mut head, features, _) = batch(2);
        head.output.bias.fill(1e3);
        let targets = Array2::zeros((2, 7));
        let report = gradient_check(&head, &features, &targets);
        assert!(report.max_relative_error.is_finite());
    }
}
