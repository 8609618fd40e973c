use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmsPropConfig {
    pub learning_rate: f64,
    pub rho: f64,
    pub epsilon: f64,
    pub momentum: f64,
}

impl Default for RmsPropConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            rho: 0.9,
            epsilon: 1e-7,
            momentum: 0.0,
        }
    }
}

/// Per-parameter running mean of squared gradients.
///
/// ```text
/// acc   <- rho·acc + (1 - rho)·g²
/// param <- param - lr·g / (sqrt(acc) + eps)
/// ```
///
/// With a non-zero momentum the step is accumulated into a velocity buffer
/// first; at the default of zero no velocity is kept.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState<T: Scalar> {
    pub config: RmsPropConfig,
    accumulators: Vec<Tensor<T>>,
    velocity: Vec<Tensor<T>>,
}

impl<T: Scalar> OptimizerState<T> {
    pub fn new<'a>(config: RmsPropConfig, params: impl IntoIterator<Item = &'a Tensor<T>>) -> Self {
        let accumulators: Vec<Tensor<T>> =
            params.into_iter().map(|p| Tensor::zeros(p.shape())).collect();
        let velocity = if config.momentum != 0.0 {
            accumulators.clone()
        } else {
            Vec::new()
        };
        Self {
            config,
            accumulators,
            velocity,
        }
    }

    pub fn accumulators(&self) -> &[Tensor<T>] {
        &self.accumulators
    }

    /// Updates every parameter in place from its gradient.
    pub fn step(&mut self, params: &mut [&mut Tensor<T>], grads: &[Tensor<T>]) -> Result<()> {
        if params.len() != self.accumulators.len() || grads.len() != params.len() {
            return Err(Error::ShapeMismatch {
                op: "rmsprop parameter count",
                left: vec![params.len(), grads.len()],
                right: vec![self.accumulators.len()],
            });
        }
        for (i, (param, grad)) in params.iter_mut().zip(grads).enumerate() {
            let velocity = self.velocity.get_mut(i);
            rmsprop_step(param, grad, &mut self.accumulators[i], velocity, &self.config)?;
        }
        Ok(())
    }
}

pub fn rmsprop_step<T: Scalar>(
    param: &mut Tensor<T>,
    grad: &Tensor<T>,
    acc: &mut Tensor<T>,
    velocity: Option<&mut Tensor<T>>,
    cfg: &RmsPropConfig,
) -> Result<()> {
    for other in [grad, &*acc] {
        if other.shape() != param.shape() {
            return Err(Error::ShapeMismatch {
                op: "rmsprop",
                left: param.shape().to_vec(),
                right: other.shape().to_vec(),
            });
        }
    }
    let (lr, rho, eps) = (T::of(cfg.learning_rate), T::of(cfg.rho), T::of(cfg.epsilon));
    let keep = T::one() - rho;
    let step = |g: T, a: &mut T| {
        *a = rho * *a + keep * g * g;
        lr * g / (a.sqrt() + eps)
    };
    match velocity {
        None => {
            for ((p, &g), a) in param
                .data_mut()
                .iter_mut()
                .zip(grad.data())
                .zip(acc.data_mut())
            {
                *p = *p - step(g, a);
            }
        }
        Some(vel) => {
            let mom = T::of(cfg.momentum);
            for (((p, &g), a), v) in param
                .data_mut()
                .iter_mut()
                .zip(grad.data())
                .zip(acc.data_mut())
                .zip(vel.data_mut())
            {
                *v = mom * *v + step(g, a);
                *p = *p - *v;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> Tensor<f64> {
        Tensor::vector(vec![v]).unwrap()
    }

    #[test]
    fn zero_gradient_only_decays() {
        let cfg = RmsPropConfig::default();
        let mut p = scalar(0.7);
        let mut acc = scalar(0.5);
        rmsprop_step(&mut p, &scalar(0.0), &mut acc, None, &cfg).unwrap();
        assert_eq!(p.data(), &[0.7]);
        assert!((acc.data()[0] - 0.45).abs() < 1e-15);
    }

    #[test]
    fn first_unit_step() {
        let cfg = RmsPropConfig::default();
        let mut p = scalar(0.0);
        let mut acc = scalar(0.0);
        rmsprop_step(&mut p, &scalar(1.0), &mut acc, None, &cfg).unwrap();
        assert!((acc.data()[0] - 0.1).abs() < 1e-15);
        assert!((p.data()[0] + 0.00316228).abs() < 1e-8);
    }

    #[test]
    fn two_unit_steps() {
        let cfg = RmsPropConfig::default();
        let mut p = scalar(0.0);
        let mut acc = scalar(0.0);
        for _ in 0..2 {
            rmsprop_step(&mut p, &scalar(1.0), &mut acc, None, &cfg).unwrap();
        }
        assert!((acc.data()[0] - 0.19).abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch() {
        let cfg = RmsPropConfig::default();
        let mut p = scalar(0.0);
        let mut acc = scalar(0.0);
        let g = Tensor::vector(vec![1.0, 2.0]).unwrap();
        assert!(rmsprop_step(&mut p, &g, &mut acc, None, &cfg).is_err());
    }

    #[test]
    fn accumulators_stay_nonnegative() {
        let cfg = RmsPropConfig::default();
        let mut p = Tensor::vector(vec![0.0f64; 4]).unwrap();
        let mut state = OptimizerState::new(cfg, [&p]);
        for i in 0..50 {
            let g = Tensor::vector(vec![(i as f64).sin(), -3.0, 0.0, 1e-9]).unwrap();
            state.step(&mut [&mut p], &[g]).unwrap();
            assert!(state.accumulators()[0].data().iter().all(|&a| a >= 0.0));
        }
    }
}
