use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor};

/// Reduces a `[len×ch]` sequence to exactly `steps` time steps by averaging
/// contiguous segments. The first `len % steps` segments are one sample
/// longer than the rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SequenceChunk {
    pub steps: usize,
}

impl SequenceChunk {
    /// `(start, length)` of every segment.
    pub fn segments(&self, len: usize) -> Result<Vec<(usize, usize)>> {
        if self.steps == 0 || len < self.steps {
            return Err(Error::InputTooShort {
                what: "recurrent step count",
                len,
                size: self.steps,
            });
        }
        let base = len / self.steps;
        let extra = len % self.steps;
        let mut start = 0;
        Ok((0..self.steps)
            .map(|i| {
                let n = base + usize::from(i < extra);
                let seg = (start, n);
                start += n;
                seg
            })
            .collect())
    }

    pub fn forward<T: Scalar>(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let (len, ch) = x.dims2()?;
        let xd = x.data();
        let mut out = vec![T::zero(); self.steps * ch];
        for ((start, n), row) in self.segments(len)?.into_iter().zip(out.chunks_exact_mut(ch)) {
            for t in start..start + n {
                for (o, &v) in row.iter_mut().zip(&xd[t * ch..(t + 1) * ch]) {
                    *o = *o + v;
                }
            }
            let inv = T::one() / T::of(n as f64);
            row.iter_mut().for_each(|o| *o = *o * inv);
        }
        Ok(Tensor::from_parts(vec![self.steps, ch], out))
    }

    pub fn backward<T: Scalar>(&self, input_len: usize, upstream: &Tensor<T>) -> Result<Tensor<T>> {
        let (steps, ch) = upstream.dims2()?;
        if steps != self.steps {
            return Err(Error::CacheMismatch(format!(
                "chunk upstream has {steps} steps, expected {}",
                self.steps
            )));
        }
        let mut dx = vec![T::zero(); input_len * ch];
        for ((start, n), g) in self
            .segments(input_len)?
            .into_iter()
            .zip(upstream.data().chunks_exact(ch))
        {
            let inv = T::one() / T::of(n as f64);
            for t in start..start + n {
                for (d, &gv) in dx[t * ch..(t + 1) * ch].iter_mut().zip(g) {
                    *d = gv * inv;
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
    fn equal_length_is_identity() {
        let x = seq(&[1., 2., 3., 4., 5., 6., 7., 8., 9., 10.]);
        assert_eq!(SequenceChunk { steps: 10 }.forward(&x).unwrap(), x);
    }

    #[test]
    fn averages_segments() {
        let y = SequenceChunk { steps: 2 }.forward(&seq(&[1., 2., 3., 4.])).unwrap();
        assert_eq!(y.data(), &[1.5, 3.5]);
    }

    #[test]
    fn constant_stays_constant() {
        let y = SequenceChunk { steps: 4 }.forward(&seq(&[2.5; 13])).unwrap();
        assert!(y.data().iter().all(|&v| (v - 2.5).abs() < 1e-15));
    }

    #[test]
    fn leading_segments_take_remainder() {
        let segs = SequenceChunk { steps: 3 }.segments(8).unwrap();
        assert_eq!(segs, vec![(0, 3), (3, 3), (6, 2)]);
    }

    #[test]
    fn too_short_is_error() {
        assert!(SequenceChunk { steps: 10 }.forward(&seq(&[1.; 9])).is_err());
    }
}
