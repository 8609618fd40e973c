use rand::RngCore;

use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Inverted dropout: survivors are scaled by `1/(1-rate)` at train time, so
/// inference is the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dropout {
    rate: f64,
}

/// Which elements survived. `None` means every element was kept unscaled
/// (inference, or a zero rate).
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMask {
    keep: Option<Vec<bool>>,
    scale: f64,
}

impl DropoutMask {
    pub fn is_identity(&self) -> bool {
        self.keep.is_none()
    }

    pub fn kept(&self) -> Option<&[bool]> {
        self.keep.as_deref()
    }

    fn apply_in_place<T: Scalar>(&self, x: &mut Tensor<T>) {
        if let Some(keep) = &self.keep {
            let scale = T::of(self.scale);
            for (v, &k) in x.data_mut().iter_mut().zip(keep) {
                *v = if k { *v * scale } else { T::zero() };
            }
        }
    }
}

impl Dropout {
    pub fn new(rate: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::InvalidRate(rate));
        }
        Ok(Self { rate })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn apply<T: Scalar, R: RngCore + ?Sized>(
        &self,
        x: &Tensor<T>,
        mode: Mode,
        rng: &mut R,
    ) -> (Tensor<T>, DropoutMask) {
        self.apply_owned(x.clone(), mode, rng)
    }

    /// Like [`Dropout::apply`], reusing the input buffer for the output.
    pub fn apply_owned<T: Scalar, R: RngCore + ?Sized>(
        &self,
        mut x: Tensor<T>,
        mode: Mode,
        rng: &mut R,
    ) -> (Tensor<T>, DropoutMask) {
        if mode == Mode::Infer || self.rate == 0.0 {
            let mask = DropoutMask {
                keep: None,
                scale: 1.0,
            };
            return (x, mask);
        }
        // Each element gets 16 random bits and is dropped when they fall
        // below rate·2^16. Bits are drawn in fixed-size blocks.
        let threshold = (self.rate * 65_536.0).round() as u32;
        let mut keep = Vec::with_capacity(x.len());
        let mut block = [0u8; 4096];
        while keep.len() < x.len() {
            let take = (2 * (x.len() - keep.len())).min(block.len());
            // Whole 32-bit words keep the stream independent of block size.
            let fill = take.next_multiple_of(4).min(block.len());
            rng.fill_bytes(&mut block[..fill]);
            keep.extend(
                block[..take]
                    .chunks_exact(2)
                    .map(|b| u32::from(u16::from_le_bytes([b[0], b[1]])) >= threshold),
            );
        }
        let mask = DropoutMask {
            keep: Some(keep),
            scale: 1.0 / (1.0 - self.rate),
        };
        mask.apply_in_place(&mut x);
        (x, mask)
    }

    pub fn backward<T: Scalar>(&self, mask: &DropoutMask, upstream: &Tensor<T>) -> Result<Tensor<T>> {
        self.backward_owned(mask, upstream.clone())
    }

    pub fn backward_owned<T: Scalar>(&self, mask: &DropoutMask, mut upstream: Tensor<T>) -> Result<Tensor<T>> {
        if let Some(keep) = &mask.keep {
            if keep.len() != upstream.len() {
                return Err(Error::CacheMismatch(format!(
                    "dropout mask has {} entries, upstream {}",
                    keep.len(),
                    upstream.len()
                )));
            }
        }
        mask.apply_in_place(&mut upstream);
        Ok(upstream)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn infer_is_identity() {
        let x = Tensor::vector(vec![1.0f64, -2.0, 3.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (y, mask) = Dropout::new(0.3).unwrap().apply(&x, Mode::Infer, &mut rng);
        assert_eq!(y, x);
        assert!(mask.is_identity());
    }

    #[test]
    fn zero_rate_keeps_everything() {
        let x = Tensor::vector(vec![1.0f64; 50]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (y, mask) = Dropout::new(0.0).unwrap().apply(&x, Mode::Train, &mut rng);
        assert_eq!(y, x);
        assert!(mask.is_identity());
    }

    #[test]
    fn invalid_rates() {
        assert!(matches!(Dropout::new(1.0), Err(Error::InvalidRate(_))));
        assert!(Dropout::new(-0.1).is_err());
        assert!(Dropout::new(f64::NAN).is_err());
    }

    #[test]
    fn inverted_dropout_preserves_mean() {
        let x = Tensor::filled(&[100_000], 1.0f64);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (y, mask) = Dropout::new(0.3).unwrap().apply(&x, Mode::Train, &mut rng);
        let mean = y.data().iter().sum::<f64>() / y.len() as f64;
        assert!((0.98..=1.02).contains(&mean), "mean {mean}");
        let dropped = mask.kept().unwrap().iter().filter(|k| !**k).count() as f64;
        assert!((dropped / 1e5 - 0.3).abs() < 0.01);
    }

    #[test]
    fn expectation_over_many_masks() {
        let x = Tensor::vector(vec![0.5f64, -1.5, 2.0]).unwrap();
        let drop = Dropout::new(0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut sum = [0.0f64; 3];
        let trials = 20_000;
        for _ in 0..trials {
            let (y, _) = drop.apply(&x, Mode::Train, &mut rng);
            for (s, v) in sum.iter_mut().zip(y.data()) {
                *s += v;
            }
        }
        for (s, &v) in sum.iter().zip(x.data()) {
            let mean = s / trials as f64;
            assert!((mean - v).abs() <= 0.02 * v.abs(), "{mean} vs {v}");
        }
    }

    #[test]
    fn backward_reuses_mask() {
        let x = Tensor::filled(&[64], 1.0f64);
        let drop = Dropout::new(0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (y, mask) = drop.apply(&x, Mode::Train, &mut rng);
        let g = drop.backward(&mask, &x).unwrap();
        assert_eq!(g, y);
    }
}
