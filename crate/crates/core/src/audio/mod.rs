//! Raw waveform ingestion: WAV decoding, dataset scanning, splitting and
//! fixed-length model input.

mod dataset;
pub mod synth;
pub mod wav;

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::label::{label_from_path, EmotionLabel};
use crate::tensor::{Scalar, Tensor};

pub use dataset::{
    read_manifest, read_manifest_file, scan_dataset, stratified_split, write_manifest, DatasetSplit, ManifestEntry, Partition,
    ScanFailure, ScanReport, SplitFractions,
};
pub use wav::{parse_wav, write_wav, DecodedWav};

#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub samples: Vec<f32>,
    pub sample_rate: u32,
    pub label: Option<EmotionLabel>,
    pub source: String,
}

impl AudioClip {
    pub fn from_wav_bytes(bytes: &[u8], source: impl Into<String>) -> Result<Self> {
        let w = parse_wav(bytes)?;
        Ok(Self {
            samples: w.samples,
            sample_rate: w.sample_rate,
            label: None,
            source: source.into(),
        })
    }

    /// Reads and decodes `path` without labelling it.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_wav_bytes(&bytes, path.display().to_string())
    }

    /// Reads `path` and labels it from its file name.
    pub fn read_labelled(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let label = label_from_path(path)?;
        let mut clip = Self::read(path)?;
        clip.label = Some(label);
        Ok(clip)
    }
}

/// Fits `samples` to exactly `target` entries as a `[target×1]` tensor.
/// Longer input is center-cropped; shorter input is zero-padded on both
/// sides, with the extra sample of an odd pad going to the end.
pub fn standardize_length<T: Scalar>(samples: &[f32], target: usize) -> Tensor<T> {
    let mut out = vec![T::zero(); target];
    let n = samples.len();
    if n >= target {
        let start = (n - target) / 2;
        for (o, &s) in out.iter_mut().zip(&samples[start..start + target]) {
            *o = T::of(s as f64);
        }
    } else {
        let left = (target - n) / 2;
        for (o, &s) in out[left..left + n].iter_mut().zip(samples) {
            *o = T::of(s as f64);
        }
    }
    Tensor::from_parts(vec![target, 1], out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_crop_and_pad() {
        let t: Tensor<f32> = standardize_length(&[0.1, 0.2, 0.3], 3);
        assert_eq!(t.data(), &[0.1, 0.2, 0.3]);
        assert_eq!(t.shape(), &[3, 1]);
        let t: Tensor<f32> = standardize_length(&[0.1, 0.2, 0.3, 0.4], 2);
        assert_eq!(t.data(), &[0.2, 0.3]);
        let t: Tensor<f32> = standardize_length(&[0.5, -0.5], 4);
        assert_eq!(t.data(), &[0.0, 0.5, -0.5, 0.0]);
        let t: Tensor<f32> = standardize_length(&[0.5, -0.5], 5);
        assert_eq!(t.data(), &[0.0, 0.5, -0.5, 0.0, 0.0]);
    }

    proptest! {
        #[test]
        fn output_has_target_length(len in 0usize..300, target in 1usize..300) {
            let samples: Vec<f32> = (0..len).map(|i| (i as f32 / 300.0) - 0.5).collect();
            let t: Tensor<f64> = standardize_length(&samples, target);
            prop_assert_eq!(t.shape(), &[target, 1]);
        }
    }
}
