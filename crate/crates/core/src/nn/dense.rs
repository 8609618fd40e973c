use crate::error::{Error, Result};
use crate::tensor::{matvec_into, matvec_t_acc, outer_acc, Activation, Scalar, Tensor};

/// Fully connected layer `activation(W·x + b)` on a flat vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T: Scalar> {
    /// `[out×in]`
    pub weights: Tensor<T>,
    pub bias: Tensor<T>,
    pub activation: Option<Activation>,
}

impl<T: Scalar> Dense<T> {
    pub fn new(weights: Tensor<T>, bias: Tensor<T>, activation: Option<Activation>) -> Result<Self> {
        let (out, _) = weights.dims2()?;
        if bias.shape() != [out] {
            return Err(Error::ShapeMismatch {
                op: "dense bias",
                left: weights.shape().to_vec(),
                right: bias.shape().to_vec(),
            });
        }
        Ok(Self {
            weights,
            bias,
            activation,
        })
    }

    pub fn zeros(inputs: usize, outputs: usize, activation: Option<Activation>) -> Self {
        Self {
            weights: Tensor::zeros(&[outputs, inputs]),
            bias: Tensor::zeros(&[outputs]),
            activation,
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.shape()[1]
    }

    pub fn outputs(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let n = self.inputs();
        if x.len() != n {
            return Err(Error::ShapeMismatch {
                op: "dense",
                left: x.shape().to_vec(),
                right: self.weights.shape().to_vec(),
            });
        }
        let mut y = vec![T::zero(); self.outputs()];
        matvec_into(self.weights.data(), n, x.data(), &mut y);
        for (v, &b) in y.iter_mut().zip(self.bias.data()) {
            *v = *v + b;
            if let Some(f) = self.activation {
                *v = f.apply(*v);
            }
        }
        Ok(Tensor::from_parts(vec![y.len()], y))
    }

    /// Returns `(d_weights, d_bias, d_input)` given the forward input and
    /// output.
    pub fn backward(
        &self,
        x: &Tensor<T>,
        y: &Tensor<T>,
        upstream: &Tensor<T>,
    ) -> Result<(Tensor<T>, Tensor<T>, Tensor<T>)> {
        let (m, n) = (self.outputs(), self.inputs());
        if x.len() != n || y.len() != m || upstream.len() != m {
            return Err(Error::CacheMismatch(format!(
                "dense [{m}×{n}] got input {:?}, output {:?}, upstream {:?}",
                x.shape(),
                y.shape(),
                upstream.shape()
            )));
        }
        let da: Vec<T> = match self.activation {
            None => upstream.data().to_vec(),
            Some(f) => upstream
                .data()
                .iter()
                .zip(y.data())
                .map(|(&g, &y)| g * f.derivative_from_output(y))
                .collect(),
        };
        let mut dw = vec![T::zero(); m * n];
        outer_acc(&mut dw, &da, x.data());
        let mut dx = vec![T::zero(); n];
        matvec_t_acc(self.weights.data(), n, &da, &mut dx);
        Ok((
            Tensor::from_parts(vec![m, n], dw),
            Tensor::from_parts(vec![m], da),
            Tensor::from_parts(x.shape().to_vec(), dx),
        ))
    }
}

/// Numerically stable softmax over a flat vector.
pub fn softmax<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    let max = x
        .data()
        .iter()
        .copied()
        .fold(T::neg_infinity(), |a, b| a.max(b));
    let exps: Vec<T> = x.data().iter().map(|&v| (v - max).exp()).collect();
    let sum: T = exps.iter().copied().sum();
    Tensor::from_parts(
        x.shape().to_vec(),
        exps.into_iter().map(|e| e / sum).collect(),
    )
}

/// Vector-Jacobian product of softmax given its output `y`.
pub fn softmax_backward<T: Scalar>(y: &Tensor<T>, upstream: &Tensor<T>) -> Result<Tensor<T>> {
    if y.len() != upstream.len() {
        return Err(Error::CacheMismatch(format!(
            "softmax output {:?}, upstream {:?}",
            y.shape(),
            upstream.shape()
        )));
    }
    let dot: T = y
        .data()
        .iter()
        .zip(upstream.data())
        .map(|(&a, &b)| a * b)
        .sum();
    Ok(Tensor::from_parts(
        y.shape().to_vec(),
        y.data()
            .iter()
            .zip(upstream.data())
            .map(|(&y, &g)| y * (g - dot))
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(d: &[f64]) -> Tensor<f64> {
        Tensor::vector(d.to_vec()).unwrap()
    }

    #[test]
    fn identity_relu() {
        let d = Dense::new(Tensor::identity(2), Tensor::zeros(&[2]), Some(Activation::Relu)).unwrap();
        assert_eq!(d.forward(&v(&[1., -1.])).unwrap().data(), &[1., 0.]);
    }

    #[test]
    fn affine_by_hand() {
        let d = Dense::new(Tensor::matrix(1, 2, vec![1., 1.]).unwrap(), v(&[1.]), None).unwrap();
        assert_eq!(d.forward(&v(&[2., 3.])).unwrap().data(), &[6.]);
    }

    #[test]
    fn wrong_input_length() {
        let d = Dense::<f64>::zeros(3, 2, None);
        assert!(d.forward(&v(&[1., 2.])).is_err());
    }

    #[test]
    fn identity_jacobian_passes_gradient_through() {
        let d = Dense::new(Tensor::identity(3), Tensor::zeros(&[3]), None).unwrap();
        let x = v(&[0.3, -0.2, 5.0]);
        let y = d.forward(&x).unwrap();
        let g = v(&[1.5, -2.0, 0.25]);
        let (_, _, dx) = d.backward(&x, &y, &g).unwrap();
        assert_eq!(dx, g);
    }

    #[test]
    fn softmax_cases() {
        let y = softmax(&v(&[0.; 7]));
        assert!(y.data().iter().all(|&p| (p - 1.0 / 7.0).abs() < 1e-15));

        let y = softmax(&v(&[1000., 0.]));
        assert!(y.data().iter().all(|p| p.is_finite()));
        assert!((y.data()[0] - 1.0).abs() < 1e-12 && y.data()[1] < 1e-300);

        let y = softmax(&v(&[2f64.ln(), 0.]));
        assert!((y.data()[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((y.data()[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn softmax_f32_does_not_overflow() {
        let y = softmax(&Tensor::vector(vec![1000.0f32, 0.0]).unwrap());
        assert_eq!(y.data(), &[1.0, 0.0]);
    }

    proptest! {
        #[test]
        fn softmax_is_a_distribution(x in proptest::collection::vec(-30.0f64..30.0, 1..12)) {
            let y = softmax(&v(&x));
            let sum: f64 = y.data().iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-6);
            prop_assert!(y.data().iter().all(|&p| p > 0.0 && p <= 1.0));
        }
    }
}
