use ndarray::{Array2, ArrayView2, Zip};

use crate::scalar::Scalar;

/// Probabilities are clamped to `[ε, 1 − ε]` before taking logs.
pub const PROB_EPSILON: f64 = 1e-7;

pub fn sigmoid<T: Scalar>(z: T) -> T {
    let p = if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    };
    p.max(T::lit(PROB_EPSILON)).min(T::one() - T::lit(PROB_EPSILON))
}

/// Mean binary cross-entropy over every (document, category) cell.
pub fn compute_loss<T: Scalar>(probabilities: ArrayView2<'_, T>, targets: ArrayView2<'_, T>) -> T {
    assert_eq!(probabilities.dim(), targets.dim(), "probability/target shape mismatch");
    let eps = T::lit(PROB_EPSILON);
    let n = probabilities.len();
    if n == 0 {
        return T::zero();
    }
    let total = Zip::from(&probabilities).and(&targets).fold(T::zero(), |acc, &p, &t| {
        let p = p.max(eps).min(T::one() - eps);
        acc - (t * p.ln() + (T::one() - t) * (T::one() - p).ln())
    });
    total / T::from_usize(n).expect("count")
}

/// d(mean loss)/d(logits) for sigmoid outputs, `scale` cells in the mean.
///
/// Inside the clamp band this is `(p − t) / scale`; where a probability
/// sits on the clamp the loss is flat and the gradient is zero.
pub fn loss_gradient<T: Scalar>(
    probabilities: ArrayView2<'_, T>,
    targets: ArrayView2<'_, T>,
    scale: usize,
) -> Array2<T> {
    let lo = T::lit(PROB_EPSILON);
    let hi = T::one() - lo;
    let denom = T::from_usize(scale.max(1)).expect("count");
    Zip::from(&probabilities).and(&targets).map_collect(
        |&p, &t| {
            if p > lo && p < hi {
                (p - t) / denom
            } else {
                T::zero()
            }
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn anchors() {
        let half = Array2::from_elem((3, 7), 0.5f64);
        let t = Array2::from_shape_fn((3, 7), |(i, j)| ((i + j) % 2) as f64);
        assert_abs_diff_eq!(compute_loss(half.view(), t.view()), std::f64::consts::LN_2, epsilon = 1e-12);
        let l = compute_loss(array![[0.9, 0.1]].view(), array![[1.0, 0.0]].view());
        assert_abs_diff_eq!(l, -(0.9f64.ln()), epsilon = 1e-12);
        assert_abs_diff_eq!(l, 0.10536, epsilon = 1e-5);
    }

    #[test]
    fn exact_predictions_are_near_zero() {
        let t = array![[1.0f64, 0.0, 1.0]];
        assert!(compute_loss(t.view(), t.view()) < 1e-5);
        let g = loss_gradient(t.view(), t.view(), 3);
        assert!(g.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn sigmoid_stays_open() {
        for z in [-1000.0f32, -40.0, 0.0, 40.0, 1000.0] {
            let p = sigmoid(z);
            assert!(p > 0.0 && p < 1.0, "{z} -> {p}");
        }
        assert_eq!(sigmoid(0.0f64), 0.5);
    }
}
