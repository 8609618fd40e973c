//! Synthetic tone corpus: one fundamental frequency per emotion class, with
//! random phase, amplitude jitter and additive Gaussian noise.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::wav::write_wav;
use crate::error::{Error, Result};
use crate::label::EmotionLabel;

#[derive(Debug, Clone, PartialEq)]
pub struct ToneSpec {
    /// Tone of label code 0.
    pub base_hz: f64,
    /// Spacing between the tones of consecutive label codes.
    pub step_hz: f64,
    pub amplitude: f64,
    /// Relative amplitude jitter: each clip draws from `amplitude·(1 ± jitter)`.
    pub jitter: f64,
    pub noise_std: f64,
    pub sample_rate: u32,
    pub samples: usize,
}

impl Default for ToneSpec {
    fn default() -> Self {
        Self {
            base_hz: 500.0,
            step_hz: 1000.0,
            amplitude: 0.5,
            jitter: 0.1,
            noise_std: 0.01,
            sample_rate: 16_000,
            samples: 16_000,
        }
    }
}

impl ToneSpec {
    pub fn frequency(&self, label: EmotionLabel) -> f64 {
        self.base_hz + self.step_hz * label.code() as f64
    }

    pub fn clip<R: Rng + ?Sized>(&self, label: EmotionLabel, rng: &mut R) -> Vec<f32> {
        let f = self.frequency(label);
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let amp = self.amplitude * (1.0 + rng.random_range(-self.jitter..=self.jitter));
        let noise = Normal::new(0.0, self.noise_std).expect("noise_std is finite and non-negative");
        let w = std::f64::consts::TAU * f / self.sample_rate as f64;
        (0..self.samples)
            .map(|t| {
                let s = amp * (w * t as f64 + phase).sin() + noise.sample(rng);
                s.clamp(-1.0, 1.0) as f32
            })
            .collect()
    }
}

/// Writes `per_class` clips of every label into `dir` as
/// `SYN_<index>_<label>.wav` and returns the written paths.
pub fn write_tone_corpus(dir: impl AsRef<Path>, spec: &ToneSpec, per_class: usize, seed: u64) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut paths = Vec::with_capacity(per_class * EmotionLabel::ALL.len());
    for label in EmotionLabel::ALL {
        for i in 0..per_class {
            let path = dir.join(format!("SYN_{i:04}_{label}.wav"));
            let bytes = write_wav(&spec.clip(label, &mut rng), spec.sample_rate);
            fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
            paths.push(path);
        }
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tones_are_distinct_and_bounded() {
        let spec = ToneSpec {
            samples: 400,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let freqs: Vec<f64> = EmotionLabel::ALL.iter().map(|&l| spec.frequency(l)).collect();
        assert!(freqs.windows(2).all(|w| w[1] > w[0]));
        assert!(freqs[6] < spec.sample_rate as f64 / 2.0);
        let clip = spec.clip(EmotionLabel::Fear, &mut rng);
        assert_eq!(clip.len(), 400);
        assert!(clip.iter().all(|s| s.abs() <= 0.56 + 0.1));
    }
}
