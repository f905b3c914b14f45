use ndarray::{ArrayD, ArrayViewD, ArrayViewMutD, Zip};

use crate::scalar::Scalar;

/// Adam with bias correction.
#[derive(Clone, Debug)]
pub struct Adam<T> {
    pub learning_rate: T,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
    step: i32,
    first: Vec<ArrayD<T>>,
    second: Vec<ArrayD<T>>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(learning_rate: f64) -> Self {
        Adam {
            learning_rate: T::lit(learning_rate),
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            epsilon: T::lit(1e-8),
            step: 0,
            first: Vec::new(),
            second: Vec::new(),
        }
    }

    pub fn steps(&self) -> i32 {
        self.step
    }

    /// One update; `params` and `grads` must list tensors in the same order
    /// on every call.
    pub fn step(&mut self, params: Vec<ArrayViewMutD<'_, T>>, grads: Vec<ArrayViewD<'_, T>>) {
        assert_eq!(params.len(), grads.len(), "parameter/gradient count mismatch");
        if self.first.is_empty() {
            self.first = grads.iter().map(|g| ArrayD::zeros(g.raw_dim())).collect();
            self.second = self.first.clone();
        }
        self.step += 1;
        let c1 = T::one() - self.beta1.powi(self.step);
        let c2 = T::one() - self.beta2.powi(self.step);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.learning_rate, self.epsilon);
        for (((mut p, g), m), v) in params.into_iter().zip(grads).zip(&mut self.first).zip(&mut self.second) {
            Zip::from(&mut p).and(&g).and(m).and(v).for_each(|p, &g, m, v| {
                *m = b1 * *m + (T::one() - b1) * g;
                *v = b2 * *v + (T::one() - b2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *p -= lr * m_hat / (v_hat.sqrt() + eps);
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut w = array![1.0f64, -2.0].into_dyn();
        let g = array![0.5f64, -3.0].into_dyn();
        let mut adam = Adam::new(0.1);
        adam.step(vec![w.view_mut()], vec![g.view()]);
        assert!((w[[0]] - 0.9).abs() < 1e-6);
        assert!((w[[1]] + 1.9).abs() < 1e-6);
    }

    #[test]
    fn minimizes_quadratic() {
        let mut w = array![3.0f64].into_dyn();
        let mut adam = Adam::new(0.05);
        for _ in 0..2000 {
            let g = w.mapv(|x| 2.0 * (x - 1.0));
            adam.step(vec![w.view_mut()], vec![g.view()]);
        }
        assert!((w[[0]] - 1.0).abs() < 1e-2);
    }
}
