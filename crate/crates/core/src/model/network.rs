use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ConvActivation, ModelConfig};
use crate::error::{Error, Result};
use crate::nn::{AvgPool1d, Conv1d, Dense, Dropout, GruCellParams, GruLayer, Layer, SequenceChunk, Sequential};
use crate::tensor::{Activation, Scalar, Tensor};
use crate::train::{glorot_uniform, grad_check, he_uniform, GradCheckReport, Sample};

/// The emotion classifier: conv → (relu) → dropout → avgpool → chunk →
/// stacked GRU → flatten → dense relu → dense → softmax.
#[derive(Debug, Clone, PartialEq)]
pub struct EmotionModel<T: Scalar> {
    pub config: ModelConfig,
    pub net: Sequential<T>,
}

/// Builds the network for `config` with freshly initialized weights: conv
/// kernels He-uniform, GRU and dense kernels Glorot-uniform, biases zero.
pub fn build_model<T: Scalar, R: Rng + ?Sized>(config: &ModelConfig, rng: &mut R) -> Result<EmotionModel<T>> {
    config.validate()?;
    let k = config.conv_kernel_size;
    let ch = config.conv_kernels;
    let units = config.gru_units;

    let mut net = Sequential::new();
    net.push(
        "conv",
        Layer::Conv1d(Conv1d::new(he_uniform(&[k, 1, ch], k, rng)?, Tensor::zeros(&[ch]))?),
    );
    if config.conv_activation == ConvActivation::Relu {
        net.push("conv_relu", Layer::Activation(Activation::Relu));
    }
    net.push("dropout", Layer::Dropout(Dropout::new(config.dropout_rate)?));
    net.push(
        "pool",
        Layer::AvgPool1d(AvgPool1d {
            pool: config.pool_size,
            stride: config.pool_stride,
        }),
    );
    net.push(
        "chunk",
        Layer::Chunk(SequenceChunk {
            steps: config.gru_steps,
        }),
    );
    for l in 0..config.gru_layers {
        let input = if l == 0 { ch } else { units };
        let mut p = GruCellParams::zeros(input, units);
        for w in [&mut p.w_xz, &mut p.w_xr, &mut p.w_xh] {
            *w = glorot_uniform(&[units, input], input, units, rng)?;
        }
        for u in [&mut p.u_hz, &mut p.u_hr, &mut p.u_hh] {
            *u = glorot_uniform(&[units, units], units, units, rng)?;
        }
        net.push(format!("gru{l}"), Layer::Gru(GruLayer::new(p)?));
    }
    net.push("flatten", Layer::Flatten);
    let flat = config.gru_steps * units;
    let dense = config.dense_units;
    net.push(
        "dense",
        Layer::Dense(Dense::new(
            glorot_uniform(&[dense, flat], flat, dense, rng)?,
            Tensor::zeros(&[dense]),
            Some(Activation::Relu),
        )?),
    );
    let classes = config.num_classes;
    net.push(
        "head",
        Layer::Dense(Dense::new(
            glorot_uniform(&[classes, dense], dense, classes, rng)?,
            Tensor::zeros(&[classes]),
            None,
        )?),
    );
    net.push("softmax", Layer::Softmax);
    Ok(EmotionModel {
        config: config.clone(),
        net,
    })
}

impl<T: Scalar> EmotionModel<T> {
    pub fn seeded(config: &ModelConfig) -> Result<Self> {
        build_model(config, &mut ChaCha8Rng::seed_from_u64(config.seed))
    }

    /// Class probabilities for one `[input_samples×1]` waveform.
    pub fn predict(&self, input: &Tensor<T>) -> Result<Tensor<T>> {
        if input.shape() != [self.config.input_samples, 1] {
            return Err(Error::ShapeMismatch {
                op: "model input",
                left: input.shape().to_vec(),
                right: vec![self.config.input_samples, 1],
            });
        }
        self.net.predict(input)
    }

    pub fn cast<U: Scalar>(&self) -> EmotionModel<U> {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut out: EmotionModel<U> =
            build_model(&self.config, &mut rng).expect("config was valid when this model was built");
        for (dst, (_, src)) in out.net.params_mut().into_iter().zip(self.net.named_params()) {
            *dst = src.cast();
        }
        out
    }
}

/// Gradient check of the full pipeline built from `config` at 64-bit, on two
/// random waveforms with random labels.
pub fn grad_check_config(config: &ModelConfig, seed: u64) -> Result<GradCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model: EmotionModel<f64> = build_model(config, &mut rng)?;
    let samples: Vec<Sample<f64>> = (0..2)
        .map(|_| {
            let wave = (0..config.input_samples)
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            Sample {
                input: Tensor::from_parts(vec![config.input_samples, 1], wave),
                label: rng.random_range(0..config.num_classes),
            }
        })
        .collect();
    grad_check(&model.net, &samples, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::param_count;

    fn tiny() -> ModelConfig {
        ModelConfig {
            input_samples: 64,
            conv_kernels: 4,
            gru_units: 4,
            dense_units: 8,
            ..Default::default()
        }
    }

    #[test]
    fn tiny_model_param_total() {
        let m: EmotionModel<f32> = EmotionModel::seeded(&tiny()).unwrap();
        assert_eq!(m.net.param_count(), param_count(&tiny()).unwrap());
    }

    #[test]
    fn seeded_build_is_deterministic() {
        let a: EmotionModel<f32> = EmotionModel::seeded(&tiny()).unwrap();
        let b: EmotionModel<f32> = EmotionModel::seeded(&tiny()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn biases_start_at_zero() {
        let m: EmotionModel<f32> = EmotionModel::seeded(&tiny()).unwrap();
        for (name, t) in m.net.named_params() {
            if name.contains(".b") {
                assert!(t.data().iter().all(|&v| v == 0.0), "{name}");
            }
        }
    }

    #[test]
    fn too_short_input_is_infeasible() {
        let cfg = ModelConfig {
            input_samples: 5,
            ..tiny()
        };
        let err = EmotionModel::<f32>::seeded(&cfg).unwrap_err();
        assert!(matches!(err, Error::InfeasibleGeometry { .. }));
    }

    #[test]
    fn predict_checks_input_shape() {
        let m: EmotionModel<f32> = EmotionModel::seeded(&tiny()).unwrap();
        assert!(m.predict(&Tensor::zeros(&[63, 1])).is_err());
        let p = m.predict(&Tensor::zeros(&[64, 1])).unwrap();
        assert_eq!(p.len(), 7);
        assert!((p.data().iter().sum::<f32>() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn cast_round_trip_preserves_f32_values() {
        let m: EmotionModel<f32> = EmotionModel::seeded(&tiny()).unwrap();
        let back: EmotionModel<f32> = m.cast::<f64>().cast();
        assert_eq!(m, back);
    }
}
