use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor};

/// Keeps `-ln` finite when a predicted probability underflows to zero.
pub const PROB_CLIP: f64 = 1e-12;

fn validate<T: Scalar>(pred: &Tensor<T>, target: usize) -> Result<()> {
    if target >= pred.len() {
        return Err(Error::TargetOutOfRange {
            target,
            classes: pred.len(),
        });
    }
    let sum: f64 = pred.data().iter().map(|p| p.as_f64()).sum();
    if sum.is_nan() || (sum - 1.0).abs() > 1e-4 {
        return Err(Error::NotNormalized { sum });
    }
    Ok(())
}

/// Categorical cross-entropy of a probability vector against a class index.
pub fn cross_entropy_loss<T: Scalar>(pred: &Tensor<T>, target: usize) -> Result<T> {
    validate(pred, target)?;
    Ok(-(pred.data()[target] + T::of(PROB_CLIP)).ln())
}

/// Loss together with its gradient with respect to `pred`.
pub fn cross_entropy_with_grad<T: Scalar>(pred: &Tensor<T>, target: usize) -> Result<(T, Tensor<T>)> {
    let loss = cross_entropy_loss(pred, target)?;
    let mut grad = Tensor::zeros(pred.shape());
    grad.data_mut()[target] = -T::one() / (pred.data()[target] + T::of(PROB_CLIP));
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_prediction_is_zero() {
        let p = Tensor::vector(vec![0.0f64, 1.0, 0.0]).unwrap();
        assert!(cross_entropy_loss(&p, 1).unwrap().abs() < 1e-9);
    }

    #[test]
    fn uniform_over_seven() {
        let p = Tensor::filled(&[7], 1.0f64 / 7.0);
        let l = cross_entropy_loss(&p, 3).unwrap();
        assert!((l - 1.945910).abs() < 1e-6);
        assert!((l - 7f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn bad_inputs() {
        let p = Tensor::filled(&[7], 1.0f64 / 7.0);
        assert!(matches!(cross_entropy_loss(&p, 7), Err(Error::TargetOutOfRange { .. })));
        let q = Tensor::filled(&[3], 0.5f64);
        assert!(matches!(cross_entropy_loss(&q, 0), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn zero_probability_stays_finite() {
        let p = Tensor::vector(vec![1.0f32, 0.0]).unwrap();
        let l = cross_entropy_loss(&p, 1).unwrap();
        assert!(l.is_finite() && l > 20.0);
    }
}
