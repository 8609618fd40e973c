use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor};

/// Valid-padding average pooling along the time axis of `[len×ch]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AvgPool1d {
    pub pool: usize,
    pub stride: usize,
}

impl Default for AvgPool1d {
    fn default() -> Self {
        Self { pool: 3, stride: 2 }
    }
}

impl AvgPool1d {
    pub fn output_len(&self, len: usize) -> Option<usize> {
        (self.pool > 0 && self.stride > 0 && len >= self.pool)
            .then(|| (len - self.pool) / self.stride + 1)
    }

    fn out_len_or_err(&self, len: usize) -> Result<usize> {
        self.output_len(len).ok_or(Error::InputTooShort {
            what: "pool window",
            len,
            size: self.pool,
        })
    }

    pub fn forward<T: Scalar>(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let (len, ch) = x.dims2()?;
        let out_len = self.out_len_or_err(len)?;
        let inv = T::one() / T::of(self.pool as f64);
        let xd = x.data();
        let mut out = vec![T::zero(); out_len * ch];
        for (i, row) in out.chunks_exact_mut(ch).enumerate() {
            let start = i * self.stride;
            for w in 0..self.pool {
                let src = &xd[(start + w) * ch..][..ch];
                for (o, &v) in row.iter_mut().zip(src) {
                    *o = *o + v;
                }
            }
            row.iter_mut().for_each(|o| *o = *o * inv);
        }
        Ok(Tensor::from_parts(vec![out_len, ch], out))
    }

    /// Spreads each window's upstream gradient evenly over its inputs;
    /// samples past the last full window receive zero.
    pub fn backward<T: Scalar>(&self, input_len: usize, upstream: &Tensor<T>) -> Result<Tensor<T>> {
        let out_len = self.out_len_or_err(input_len)?;
        let (ulen, ch) = upstream.dims2()?;
        if ulen != out_len {
            return Err(Error::CacheMismatch(format!(
                "avgpool upstream length {ulen}, expected {out_len}"
            )));
        }
        let inv = T::one() / T::of(self.pool as f64);
        let mut dx = vec![T::zero(); input_len * ch];
        for (i, g) in upstream.data().chunks_exact(ch).enumerate() {
            let start = i * self.stride;
            for w in 0..self.pool {
                let dst = &mut dx[(start + w) * ch..][..ch];
                for (d, &gv) in dst.iter_mut().zip(g) {
                    *d = *d + gv * inv;
                }
            }
        }
        Ok(Tensor::from_parts(vec![input_len, ch], dx))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(d: &[f64]) -> Tensor<f64> {
        Tensor::matrix(d.len(), 1, d.to_vec()).unwrap()
    }

    #[test]
    fn pools_valid_windows() {
        let y = AvgPool1d::default().forward(&seq(&[1., 2., 3., 4., 5.])).unwrap();
        assert_eq!(y.data(), &[2., 4.]);
    }

    #[test]
    fn constant_in_constant_out() {
        let y = AvgPool1d::default().forward(&seq(&[1.5; 11])).unwrap();
        assert!(y.data().iter().all(|&v| (v - 1.5).abs() < 1e-15));
    }

    #[test]
    fn exact_window_gives_mean() {
        let y = AvgPool1d::default().forward(&seq(&[1., 5., 9.])).unwrap();
        assert_eq!(y.data(), &[5.]);
    }

    #[test]
    fn short_input_rejected() {
        assert!(AvgPool1d::default().forward(&seq(&[1., 2.])).is_err());
    }

    #[test]
    fn backward_spreads_over_windows_and_drops_tail() {
        // len 5 -> windows [0..3) and [2..5); a len-6 input drops index 5.
        let g = seq(&[3., 6.]);
        let dx = AvgPool1d::default().backward(5, &g).unwrap();
        assert_eq!(dx.data(), &[1., 1., 3., 2., 2.]);
        let dx = AvgPool1d::default().backward(6, &g).unwrap();
        assert_eq!(dx.data(), &[1., 1., 3., 2., 2., 0.]);
    }

    #[test]
    fn output_length_matches_formula() {
        let pool = AvgPool1d::default();
        for len in 1..=50usize {
            let x = Tensor::<f64>::zeros(&[len, 2]);
            // Brute force: count window starts whose window fits.
            let expected = (0..len).step_by(2).filter(|s| s + 3 <= len).count();
            match pool.forward(&x) {
                Ok(y) => assert_eq!(y.shape(), &[expected, 2]),
                Err(_) => assert_eq!(expected, 0),
            }
        }
    }
}
