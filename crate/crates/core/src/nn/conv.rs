use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor};

/// Valid-padding 1D cross-correlation over a `[len×in_ch]` sequence.
///
/// Kernels are stored `[k×in_ch×out_ch]` so the innermost loop runs over
/// output channels contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv1d<T: Scalar> {
    pub kernels: Tensor<T>,
    pub bias: Tensor<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvShape {
    pub size: usize,
    pub in_ch: usize,
    pub out_ch: usize,
}

pub fn conv_output_len(len: usize, size: usize) -> Option<usize> {
    (len >= size && size > 0).then(|| len - size + 1)
}

impl<T: Scalar> Conv1d<T> {
    pub fn new(kernels: Tensor<T>, bias: Tensor<T>) -> Result<Self> {
        let conv = Self { kernels, bias };
        let s = conv.geometry()?;
        if conv.bias.shape() != [s.out_ch] {
            return Err(Error::ShapeMismatch {
                op: "conv1d bias",
                left: conv.kernels.shape().to_vec(),
                right: conv.bias.shape().to_vec(),
            });
        }
        Ok(conv)
    }

    pub fn zeros(size: usize, in_ch: usize, out_ch: usize) -> Self {
        Self {
            kernels: Tensor::zeros(&[size, in_ch, out_ch]),
            bias: Tensor::zeros(&[out_ch]),
        }
    }

    pub fn geometry(&self) -> Result<ConvShape> {
        match *self.kernels.shape() {
            [size, in_ch, out_ch] => Ok(ConvShape {
                size,
                in_ch,
                out_ch,
            }),
            _ => Err(Error::InvalidTensor(format!(
                "conv kernels must be [k×in×out], got {:?}",
                self.kernels.shape()
            ))),
        }
    }

    fn check_input(&self, x: &Tensor<T>) -> Result<(ConvShape, usize, usize)> {
        let s = self.geometry()?;
        let (len, ch) = x.dims2()?;
        if ch != s.in_ch {
            return Err(Error::ShapeMismatch {
                op: "conv1d",
                left: x.shape().to_vec(),
                right: self.kernels.shape().to_vec(),
            });
        }
        let out_len = conv_output_len(len, s.size).ok_or(Error::InputTooShort {
            what: "conv kernel",
            len,
            size: s.size,
        })?;
        Ok((s, len, out_len))
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let (s, _, out_len) = self.check_input(x)?;
        let (xd, kd, bd) = (x.data(), self.kernels.data(), self.bias.data());
        let mut out = vec![T::zero(); out_len * s.out_ch];
        for (t, row) in out.chunks_exact_mut(s.out_ch).enumerate() {
            row.copy_from_slice(bd);
            for j in 0..s.size {
                for c in 0..s.in_ch {
                    let xv = xd[(t + j) * s.in_ch + c];
                    let krow = &kd[(j * s.in_ch + c) * s.out_ch..][..s.out_ch];
                    for (o, &k) in row.iter_mut().zip(krow) {
                        *o = *o + xv * k;
                    }
                }
            }
        }
        Ok(Tensor::from_parts(vec![out_len, s.out_ch], out))
    }

    /// Returns `(d_kernels, d_bias, d_input)`.
    pub fn backward(
        &self,
        x: &Tensor<T>,
        upstream: &Tensor<T>,
    ) -> Result<(Tensor<T>, Tensor<T>, Tensor<T>)> {
        let (s, len, out_len) = self.check_input(x)?;
        if upstream.shape() != [out_len, s.out_ch] {
            return Err(Error::CacheMismatch(format!(
                "conv1d upstream {:?}, expected [{out_len}, {}]",
                upstream.shape(),
                s.out_ch
            )));
        }
        let (xd, kd, gd) = (x.data(), self.kernels.data(), upstream.data());
        let mut dk = vec![T::zero(); kd.len()];
        let mut db = vec![T::zero(); s.out_ch];
        let mut dx = vec![T::zero(); len * s.in_ch];
        for (t, g) in gd.chunks_exact(s.out_ch).enumerate() {
            for (d, &gv) in db.iter_mut().zip(g) {
                *d = *d + gv;
            }
            for j in 0..s.size {
                for c in 0..s.in_ch {
                    let xi = (t + j) * s.in_ch + c;
                    let xv = xd[xi];
                    let off = (j * s.in_ch + c) * s.out_ch;
                    for (d, &gv) in dk[off..off + s.out_ch].iter_mut().zip(g) {
                        *d = *d + xv * gv;
                    }
                    dx[xi] = dx[xi] + dot(&kd[off..off + s.out_ch], g);
                }
            }
        }
        Ok((
            Tensor::from_parts(self.kernels.shape().to_vec(), dk),
            Tensor::from_parts(vec![s.out_ch], db),
            Tensor::from_parts(vec![len, s.in_ch], dx),
        ))
    }
}

/// Dot product with eight independent partial sums, which lets the
/// compiler vectorize the reduction.
#[inline]
fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut lanes = [T::zero(); 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: T = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .fold(T::zero(), |acc, (&x, &y)| acc + x * y);
    for (xa, xb) in ca.zip(cb) {
        for i in 0..8 {
            lanes[i] = lanes[i] + xa[i] * xb[i];
        }
    }
    lanes.iter().fold(tail, |acc, &l| acc + l)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(kernel: &[f64]) -> Conv1d<f64> {
        Conv1d::new(
            Tensor::new(vec![kernel.len(), 1, 1], kernel.to_vec()).unwrap(),
            Tensor::zeros(&[1]),
        )
        .unwrap()
    }

    fn seq(d: &[f64]) -> Tensor<f64> {
        Tensor::matrix(d.len(), 1, d.to_vec()).unwrap()
    }

    #[test]
    fn identity_kernel_picks_centre() {
        let y = single(&[0., 1., 0.]).forward(&seq(&[1., 2., 3., 4.])).unwrap();
        assert_eq!(y.data(), &[2., 3.]);
    }

    #[test]
    fn difference_kernel_is_not_flipped() {
        let y = single(&[1., 0., -1.]).forward(&seq(&[1., 2., 3., 4.])).unwrap();
        assert_eq!(y.data(), &[-2., -2.]);
    }

    #[test]
    fn short_input_is_rejected() {
        let err = single(&[1., 1., 1.]).forward(&seq(&[1., 1.])).unwrap_err();
        assert!(matches!(err, Error::InputTooShort { len: 2, size: 3, .. }));
    }

    #[test]
    fn output_length_matches_formula() {
        let conv = Conv1d::<f64>::zeros(3, 2, 4);
        for len in 1..=50 {
            let x = Tensor::zeros(&[len, 2]);
            match conv.forward(&x) {
                Ok(y) => assert_eq!(y.shape(), &[len - 2, 4]),
                Err(_) => assert!(len < 3),
            }
        }
    }

    #[test]
    fn bias_is_added_per_channel() {
        let conv = Conv1d::new(
            Tensor::zeros(&[1, 1, 2]),
            Tensor::vector(vec![0.5, -1.0]).unwrap(),
        )
        .unwrap();
        let y = conv.forward(&seq(&[3., 4.])).unwrap();
        assert_eq!(y.data(), &[0.5, -1.0, 0.5, -1.0]);
    }
}
