use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::loss::cross_entropy_with_grad;
use super::optim::{OptimizerState, RmsPropConfig};
use crate::error::{Error, Result};
use crate::nn::{Mode, Sequential};
use crate::tensor::{Scalar, Tensor};

/// One labelled model input.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T: Scalar> {
    pub input: Tensor<T>,
    pub label: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: RmsPropConfig,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            batch_size: 20,
            optimizer: RmsPropConfig::default(),
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_acc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainRunLog {
    pub seed: u64,
    pub config: String,
    pub epochs: Vec<EpochRecord>,
}

impl TrainRunLog {
    /// Tab-separated records, one per epoch, after `#` header lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# seed={}", self.seed);
        for line in self.config.lines() {
            let _ = writeln!(out, "# {line}");
        }
        out.push_str("epoch\ttrain_loss\ttrain_acc\tval_acc\n");
        for e in &self.epochs {
            let val = e.val_acc.map_or_else(|| "-".to_string(), |v| v.to_string());
            let _ = writeln!(out, "{}\t{}\t{}\t{}", e.epoch, e.train_loss, e.train_acc, val);
        }
        out
    }
}

pub fn argmax<T: Scalar>(xs: &[T]) -> usize {
    xs.iter()
        .enumerate()
        .fold((0, T::neg_infinity()), |(bi, bv), (i, &v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        })
        .0
}

/// Predicted class for every sample (inference mode).
pub fn predict_classes<T: Scalar>(net: &Sequential<T>, samples: &[Sample<T>]) -> Result<Vec<usize>> {
    samples
        .iter()
        .map(|s| net.predict(&s.input).map(|p| argmax(p.data())))
        .collect()
}

pub fn accuracy<T: Scalar>(net: &Sequential<T>, samples: &[Sample<T>]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let preds = predict_classes(net, samples)?;
    let hits = preds
        .iter()
        .zip(samples)
        .filter(|(p, s)| **p == s.label)
        .count();
    Ok(hits as f64 / samples.len() as f64)
}

/// Gradients of the summed batch loss, one tensor per parameter.
pub(crate) fn accumulate_batch<T: Scalar>(
    net: &Sequential<T>,
    batch: &[&Sample<T>],
    rng: &mut ChaCha8Rng,
    mode: Mode,
) -> Result<(Vec<Tensor<T>>, f64, usize)> {
    let mut sums: Vec<Tensor<T>> = net
        .named_params()
        .iter()
        .map(|(_, t)| Tensor::zeros(t.shape()))
        .collect();
    let mut loss_sum = 0.0;
    let mut hits = 0;
    for sample in batch {
        let (probs, caches) = net.forward(&sample.input, mode, rng)?;
        if argmax(probs.data()) == sample.label {
            hits += 1;
        }
        let (loss, grad) = cross_entropy_with_grad(&probs, sample.label)?;
        loss_sum += loss.as_f64();
        let grads = net.backward(&caches, &grad)?;
        for (sum, g) in sums.iter_mut().zip(grads.params.iter().flatten()) {
            sum.add_assign(g)?;
        }
    }
    Ok((sums, loss_sum, hits))
}

/// Mini-batch training with per-epoch reshuffling. Every random choice
/// (shuffle order, dropout masks) comes from one generator seeded with
/// `cfg.seed`, so a run is reproducible bit for bit.
pub fn fit<T: Scalar>(
    net: &mut Sequential<T>,
    train: &[Sample<T>],
    validation: &[Sample<T>],
    cfg: &FitConfig,
    config_snapshot: &str,
) -> Result<TrainRunLog> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if cfg.batch_size == 0 {
        return Err(Error::InvalidConfig("batch_size must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut optimizer = OptimizerState::new(cfg.optimizer, net.named_params().into_iter().map(|(_, t)| t));
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut log = TrainRunLog {
        seed: cfg.seed,
        config: config_snapshot.to_string(),
        epochs: Vec::with_capacity(cfg.epochs),
    };

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_total = 0.0;
        let mut hits_total = 0;
        // The trailing partial batch is trained, not dropped.
        for (b, idx) in order.chunks(cfg.batch_size).enumerate() {
            let batch: Vec<&Sample<T>> = idx.iter().map(|&i| &train[i]).collect();
            let non_finite = || Error::NonFiniteLoss {
                epoch,
                batch: b + 1,
            };
            // Overflowing logits surface as NaN probabilities.
            let (mut grads, loss_sum, hits) =
                accumulate_batch(net, &batch, &mut rng, Mode::Train).map_err(|e| match e {
                    Error::NotNormalized { sum } if !sum.is_finite() => non_finite(),
                    e => e,
                })?;
            if !loss_sum.is_finite() {
                return Err(non_finite());
            }
            let inv = T::one() / T::of(batch.len() as f64);
            grads.iter_mut().for_each(|g| g.scale(inv));
            optimizer.step(&mut net.params_mut(), &grads)?;
            loss_total += loss_sum;
            hits_total += hits;
        }
        let val_acc = if validation.is_empty() {
            None
        } else {
            Some(accuracy(net, validation)?)
        };
        let record = EpochRecord {
            epoch,
            train_loss: loss_total / train.len() as f64,
            train_acc: hits_total as f64 / train.len() as f64,
            val_acc,
        };
        log::info!(
            "epoch {epoch}: loss {:.5} train_acc {:.4} val_acc {}",
            record.train_loss,
            record.train_acc,
            val_acc.map_or("-".into(), |v| format!("{v:.4}"))
        );
        log.epochs.push(record);
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Dense, Layer};
    use crate::tensor::Activation;
    use crate::train::init::glorot_uniform;

    fn toy_net(seed: u64) -> Sequential<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w1 = glorot_uniform(&[8, 2], 2, 8, &mut rng).unwrap();
        let w2 = glorot_uniform(&[2, 8], 8, 2, &mut rng).unwrap();
        Sequential::new()
            .with(
                "hidden",
                Layer::Dense(Dense::new(w1, Tensor::zeros(&[8]), Some(Activation::Relu)).unwrap()),
            )
            .with("head", Layer::Dense(Dense::new(w2, Tensor::zeros(&[2]), None).unwrap()))
            .with("softmax", Layer::Softmax)
    }

    /// Two clusters on either side of the line x + y = 0.
    fn separable() -> Vec<Sample<f64>> {
        (0..20)
            .map(|i| {
                let class = i % 2;
                let sign = if class == 0 { 1.0 } else { -1.0 };
                let jitter = (i as f64 * 0.37).sin() * 0.5;
                Sample {
                    input: Tensor::vector(vec![sign * 3.0 + jitter, sign * 2.5 - jitter]).unwrap(),
                    label: class,
                }
            })
            .collect()
    }

    #[test]
    fn zero_learning_rate_leaves_params() {
        let mut net = toy_net(1);
        let before = net.clone();
        let cfg = FitConfig {
            epochs: 1,
            batch_size: 20,
            optimizer: RmsPropConfig {
                learning_rate: 0.0,
                ..Default::default()
            },
            seed: 3,
        };
        fit(&mut net, &separable()[..1], &[], &cfg, "").unwrap();
        assert_eq!(net, before);
    }

    #[test]
    fn separable_toy_reaches_full_accuracy() {
        let data = separable();
        let mut net = toy_net(5);
        let log = fit(&mut net, &data, &[], &FitConfig::default(), "").unwrap();
        assert_eq!(log.epochs.len(), 20);
        assert_eq!(accuracy(&net, &data).unwrap(), 1.0);
        let losses: Vec<f64> = log.epochs.iter().map(|e| e.train_loss).collect();
        for w in losses[1..].windows(2) {
            assert!(w[1] <= w[0], "{losses:?}");
        }
    }

    #[test]
    fn same_seed_same_log() {
        let data = separable();
        let run = || {
            let mut net = toy_net(2);
            fit(&mut net, &data, &data[..4], &FitConfig::default(), "toy").unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a, b);
        assert_eq!(a.to_tsv(), b.to_tsv());
    }

    #[test]
    fn empty_dataset() {
        let mut net = toy_net(0);
        assert!(matches!(
            fit(&mut net, &[], &[], &FitConfig::default(), ""),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn non_finite_loss_aborts() {
        let mut net = toy_net(0);
        let huge = Sample {
            input: Tensor::vector(vec![f64::MAX, f64::MAX]).unwrap(),
            label: 0,
        };
        match fit(&mut net, &[huge], &[], &FitConfig::default(), "") {
            Err(Error::NonFiniteLoss { epoch: 1, batch: 1 }) => {}
            other => panic!("{other:?}"),
        }
    }
}
