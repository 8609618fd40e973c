use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor};

fn uniform<T: Scalar, R: Rng + ?Sized>(shape: &[usize], limit: f64, rng: &mut R) -> Result<Tensor<T>> {
    let n = shape.iter().product();
    let data = (0..n)
        .map(|_| T::of((2.0 * rng.random::<f64>() - 1.0) * limit))
        .collect();
    Tensor::new(shape.to_vec(), data)
}

/// Uniform on `[-√(6/fan_in), √(6/fan_in)]`.
pub fn he_uniform<T: Scalar, R: Rng + ?Sized>(
    shape: &[usize],
    fan_in: usize,
    rng: &mut R,
) -> Result<Tensor<T>> {
    if fan_in == 0 {
        return Err(Error::ZeroFan("he_uniform fan_in"));
    }
    uniform(shape, (6.0 / fan_in as f64).sqrt(), rng)
}

/// Uniform on `[-√(6/(fan_in+fan_out)), √(6/(fan_in+fan_out))]`.
pub fn glorot_uniform<T: Scalar, R: Rng + ?Sized>(
    shape: &[usize],
    fan_in: usize,
    fan_out: usize,
    rng: &mut R,
) -> Result<Tensor<T>> {
    if fan_in + fan_out == 0 {
        return Err(Error::ZeroFan("glorot_uniform fan_in + fan_out"));
    }
    uniform(shape, (6.0 / (fan_in + fan_out) as f64).sqrt(), rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn he_bounds_and_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t: Tensor<f64> = he_uniform(&[100, 100], 6, &mut rng).unwrap();
        assert!(t.data().iter().all(|v| (-1.0..=1.0).contains(v)));
        let mean = t.data().iter().sum::<f64>() / t.len() as f64;
        assert!(mean.abs() <= 0.02, "{mean}");
        // The limit is actually approached.
        assert!(t.data().iter().any(|v| v.abs() > 0.99));
    }

    #[test]
    fn glorot_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t: Tensor<f64> = glorot_uniform(&[10_000], 3, 3, &mut rng).unwrap();
        assert!(t.data().iter().all(|v| v.abs() <= 1.0));
        assert!(t.data().iter().any(|v| v.abs() > 0.99));

        let t: Tensor<f64> = glorot_uniform(&[10_000], 64, 128, &mut rng).unwrap();
        let limit = (6.0f64 / 192.0).sqrt();
        assert!(t.data().iter().all(|v| v.abs() <= limit));
    }

    #[test]
    fn seeded_repeat_is_identical() {
        let a: Tensor<f32> = he_uniform(&[4, 5], 3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b: Tensor<f32> = he_uniform(&[4, 5], 3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        let c: Tensor<f32> = glorot_uniform(&[4, 5], 3, 2, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let d: Tensor<f32> = glorot_uniform(&[4, 5], 3, 2, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn zero_fans() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(he_uniform::<f32, _>(&[2], 0, &mut rng).is_err());
        assert!(glorot_uniform::<f32, _>(&[2], 0, 0, &mut rng).is_err());
    }
}
