use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::fit::{accumulate_batch, Sample};
use super::loss::cross_entropy_loss;
use crate::error::Result;
use crate::nn::{Mode, Sequential};
use crate::tensor::Tensor;

pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct LayerCheck {
    pub layer: String,
    pub kind: &'static str,
    pub params: usize,
    pub max_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GradCheckReport {
    /// One entry per layer that owns parameters.
    pub layers: Vec<LayerCheck>,
    /// Worst error on the gradient with respect to the network input, which
    /// exercises the parameter-free layers too.
    pub input_max_rel_error: Option<f64>,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| l.max_rel_error)
            .fold(0.0, f64::max)
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Mean cross-entropy over `samples`, with the generator reset to `seed` so
/// every evaluation sees identical dropout masks.
fn batch_loss(net: &Sequential<f64>, samples: &[Sample<f64>], mode: Mode, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for s in samples {
        let (probs, _) = net.forward(&s.input, mode, &mut rng)?;
        total += cross_entropy_loss(&probs, s.label)?;
    }
    Ok(total / samples.len() as f64)
}

/// Compares back-propagated gradients of the mean batch loss against
/// central finite differences for every parameter and input element.
///
/// Runs in training mode; dropout masks are frozen by reseeding, so dropout
/// backward is checked as well.
pub fn grad_check(net: &Sequential<f64>, samples: &[Sample<f64>], seed: u64) -> Result<GradCheckReport> {
    let mode = Mode::Train;
    let n = samples.len() as f64;
    let batch: Vec<&Sample<f64>> = samples.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (analytic, _, _) = accumulate_batch(net, &batch, &mut rng, mode)?;

    let mut report = GradCheckReport::default();
    let mut probe = net.clone();
    let mut offset = 0;
    for (layer_idx, (name, layer)) in net.layers().enumerate() {
        let count = layer.params().len();
        if count == 0 {
            continue;
        }
        let mut worst: f64 = 0.0;
        let mut scalars = 0;
        for p in 0..count {
            let grad = &analytic[offset + p];
            for i in 0..grad.len() {
                let numeric = {
                    let perturb = |probe: &mut Sequential<f64>, delta: f64| {
                        let (_, l) = probe.layers_mut().nth(layer_idx).expect("layer index");
                        l.params_mut()[p].data_mut()[i] += delta;
                    };
                    let orig = net.layers().nth(layer_idx).unwrap().1.params()[p].data()[i];
                    perturb(&mut probe, FD_STEP);
                    let plus = batch_loss(&probe, samples, mode, seed)?;
                    perturb(&mut probe, -2.0 * FD_STEP);
                    let minus = batch_loss(&probe, samples, mode, seed)?;
                    let (_, l) = probe.layers_mut().nth(layer_idx).unwrap();
                    l.params_mut()[p].data_mut()[i] = orig;
                    (plus - minus) / (2.0 * FD_STEP)
                };
                worst = worst.max(relative_error(grad.data()[i] / n, numeric));
                scalars += 1;
            }
        }
        offset += count;
        report.layers.push(LayerCheck {
            layer: name.to_string(),
            kind: layer.kind(),
            params: scalars,
            max_rel_error: worst,
        });
    }

    // Input gradient, one sample at a time.
    let mut worst_input: f64 = 0.0;
    for (k, s) in samples.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Replay the generator up to this sample so its dropout mask matches.
        for earlier in &samples[..k] {
            net.forward(&earlier.input, mode, &mut rng)?;
        }
        let replay = rng.clone();
        let (probs, caches) = net.forward(&s.input, mode, &mut rng)?;
        let (_, g) = super::loss::cross_entropy_with_grad(&probs, s.label)?;
        let grads = net.backward(&caches, &g)?;
        let loss_at = |x: &Tensor<f64>| -> Result<f64> {
            let mut r = replay.clone();
            let (p, _) = net.forward(x, mode, &mut r)?;
            cross_entropy_loss(&p, s.label)
        };
        let mut x = s.input.clone();
        for i in 0..x.len() {
            let orig = x.data()[i];
            x.data_mut()[i] = orig + FD_STEP;
            let plus = loss_at(&x)?;
            x.data_mut()[i] = orig - FD_STEP;
            let minus = loss_at(&x)?;
            x.data_mut()[i] = orig;
            let numeric = (plus - minus) / (2.0 * FD_STEP);
            worst_input = worst_input.max(relative_error(grads.input.data()[i], numeric));
        }
        report.input_max_rel_error = Some(worst_input);
    }
    Ok(report)
}
