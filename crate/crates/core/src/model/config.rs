use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::nn::{conv_output_len, AvgPool1d};
use crate::train::{FitConfig, RmsPropConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    F32,
    F64,
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        })
    }
}

impl FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "f32" | "32" => Ok(Precision::F32),
            "f64" | "64" => Ok(Precision::F64),
            _ => Err(format!("expected f32 or f64, got {s:?}")),
        }
    }
}

/// Non-linearity applied to the convolution output before dropout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvActivation {
    Relu,
    None,
}

impl fmt::Display for ConvActivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConvActivation::Relu => "relu",
            ConvActivation::None => "none",
        })
    }
}

impl FromStr for ConvActivation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "relu" => Ok(ConvActivation::Relu),
            "none" | "linear" => Ok(ConvActivation::None),
            _ => Err(format!("expected relu or none, got {s:?}")),
        }
    }
}

/// Architecture and training hyperparameters.
///
/// Read from and written to a flat `key = value` text file whose keys are
/// exactly the field names below.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub input_samples: usize,
    pub conv_kernels: usize,
    pub conv_kernel_size: usize,
    pub conv_activation: ConvActivation,
    pub dropout_rate: f64,
    pub pool_size: usize,
    pub pool_stride: usize,
    pub gru_layers: usize,
    pub gru_units: usize,
    pub gru_steps: usize,
    pub dense_units: usize,
    pub num_classes: usize,
    pub precision: Precision,
    pub seed: u64,

    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub rho: f64,
    pub epsilon: f64,
    pub test_fraction: f64,
    /// Share of the non-test clips held out for per-epoch validation.
    pub validation_fraction: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            input_samples: 16_000,
            conv_kernels: 128,
            conv_kernel_size: 3,
            conv_activation: ConvActivation::Relu,
            dropout_rate: 0.3,
            pool_size: 3,
            pool_stride: 2,
            gru_layers: 3,
            gru_units: 64,
            gru_steps: 10,
            dense_units: 256,
            num_classes: 7,
            precision: Precision::F32,
            seed: 42,
            epochs: 20,
            batch_size: 20,
            learning_rate: 0.001,
            rho: 0.9,
            epsilon: 1e-7,
            test_fraction: 0.2,
            validation_fraction: 0.1,
        }
    }
}

/// Sequence lengths through the front end of the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Geometry {
    pub input: usize,
    pub conv: usize,
    pub pooled: usize,
    pub steps: usize,
}

macro_rules! config_fields {
    ($m:ident) => {
        $m!(
            input_samples,
            conv_kernels,
            conv_kernel_size,
            conv_activation,
            dropout_rate,
            pool_size,
            pool_stride,
            gru_layers,
            gru_units,
            gru_steps,
            dense_units,
            num_classes,
            precision,
            seed,
            epochs,
            batch_size,
            learning_rate,
            rho,
            epsilon,
            test_fraction,
            validation_fraction
        )
    };
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("input_samples", self.input_samples),
            ("conv_kernels", self.conv_kernels),
            ("conv_kernel_size", self.conv_kernel_size),
            ("pool_size", self.pool_size),
            ("pool_stride", self.pool_stride),
            ("gru_layers", self.gru_layers),
            ("gru_units", self.gru_units),
            ("gru_steps", self.gru_steps),
            ("dense_units", self.dense_units),
            ("epochs", self.epochs),
            ("batch_size", self.batch_size),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidConfig(format!("{name} must be positive")));
        }
        if self.num_classes < 2 {
            return Err(Error::InvalidConfig("num_classes must be at least 2".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::InvalidConfig(format!(
                "dropout_rate {} outside [0, 1)",
                self.dropout_rate
            )));
        }
        for (name, v) in [
            ("test_fraction", self.test_fraction),
            ("validation_fraction", self.validation_fraction),
        ] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!("{name} {v} outside [0, 1)")));
            }
        }
        for (name, v) in [
            ("learning_rate", self.learning_rate),
            ("rho", self.rho),
            ("epsilon", self.epsilon),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be a non-negative number")));
            }
        }
        self.geometry().map(|_| ())
    }

    /// Length of the signal after conv and pooling, checked against the
    /// number of recurrent steps.
    pub fn geometry(&self) -> Result<Geometry> {
        let pool = AvgPool1d {
            pool: self.pool_size,
            stride: self.pool_stride,
        };
        let conv = conv_output_len(self.input_samples, self.conv_kernel_size).unwrap_or(0);
        let pooled = pool.output_len(conv).unwrap_or(0);
        if pooled < self.gru_steps || pooled == 0 {
            return Err(Error::InfeasibleGeometry {
                input: self.input_samples,
                conv_len: conv,
                pooled_len: pooled,
                steps: self.gru_steps,
            });
        }
        Ok(Geometry {
            input: self.input_samples,
            conv,
            pooled,
            steps: self.gru_steps,
        })
    }

    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            optimizer: RmsPropConfig {
                learning_rate: self.learning_rate,
                rho: self.rho,
                epsilon: self.epsilon,
                momentum: 0.0,
            },
            seed: self.seed,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        macro_rules! emit {
            ($($f:ident),*) => {
                $( let _ = writeln!(out, "{} = {}", stringify!($f), self.$f); )*
            };
        }
        config_fields!(emit);
        out
    }

    /// Parses `key = value` lines; `#` starts a comment. Keys not listed
    /// keep their defaults; unknown keys are rejected.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::ConfigParse { line: line_no, msg };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            macro_rules! assign {
                ($($f:ident),*) => {
                    match key {
                        $( stringify!($f) => {
                            cfg.$f = value
                                .parse()
                                .map_err(|e| err(format!("{key}: {e}")))?;
                        } )*
                        _ => return Err(err(format!("unknown key {key:?}"))),
                    }
                };
            }
            config_fields!(assign);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Closed-form trainable parameter count: conv `(k·in+1)·out`, each GRU
/// layer `3·(units·(in+units)+units)`, dense `(in+1)·out`, and the
/// classifier head `(in+1)·classes`.
pub fn param_count(config: &ModelConfig) -> Result<usize> {
    config.validate()?;
    let conv = (config.conv_kernel_size + 1) * config.conv_kernels;
    let u = config.gru_units;
    let gru: usize = (0..config.gru_layers)
        .map(|l| {
            let input = if l == 0 { config.conv_kernels } else { u };
            3 * (u * (input + u) + u)
        })
        .sum();
    let dense = (config.gru_steps * u + 1) * config.dense_units;
    let head = (config.dense_units + 1) * config.num_classes;
    Ok(conv + gru + dense + head)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let cfg = ModelConfig {
            gru_units: 7,
            precision: Precision::F64,
            conv_activation: ConvActivation::None,
            learning_rate: 0.0025,
            ..Default::default()
        };
        assert_eq!(ModelConfig::from_text(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn unknown_key_rejected() {
        let err = ModelConfig::from_text("gru_unit = 3\n").unwrap_err();
        assert!(matches!(err, Error::ConfigParse { line: 1, .. }), "{err}");
    }

    #[test]
    fn comments_and_blank_lines() {
        let cfg = ModelConfig::from_text("# tiny\n\ninput_samples = 64  # one tick\ngru_units=4\n").unwrap();
        assert_eq!(cfg.input_samples, 64);
        assert_eq!(cfg.gru_units, 4);
    }

    #[test]
    fn bad_value_reports_line() {
        let err = ModelConfig::from_text("seed = 1\ndropout_rate = lots\n").unwrap_err();
        assert!(matches!(err, Error::ConfigParse { line: 2, .. }));
    }

    #[test]
    fn conv_term() {
        // Only the conv contribution changes with conv size.
        let base = ModelConfig::default();
        let a = param_count(&base).unwrap();
        let b = param_count(&ModelConfig {
            conv_kernel_size: 4,
            ..base.clone()
        })
        .unwrap();
        assert_eq!(b - a, 128);
        assert_eq!((3 + 1) * 128, 512);
    }

    #[test]
    fn gru_term_by_hand() {
        // One layer, 2 units, input 3: 3·(2·5+2) = 36.
        let cfg = ModelConfig {
            conv_kernels: 3,
            gru_layers: 1,
            gru_units: 2,
            ..Default::default()
        };
        let conv = 4 * 3;
        let dense = (10 * 2 + 1) * 256;
        let head = 257 * 7;
        assert_eq!(param_count(&cfg).unwrap(), conv + 36 + dense + head);
    }

    #[test]
    fn zero_sizes_rejected() {
        let cfg = ModelConfig {
            input_samples: 0,
            conv_kernels: 0,
            gru_units: 0,
            dense_units: 0,
            ..Default::default()
        };
        assert!(param_count(&cfg).is_err());
    }

    #[test]
    fn infeasible_geometry_names_lengths() {
        let cfg = ModelConfig {
            input_samples: 5,
            ..Default::default()
        };
        match cfg.geometry() {
            Err(Error::InfeasibleGeometry {
                conv_len: 3,
                pooled_len: 1,
                steps: 10,
                ..
            }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn default_geometry() {
        let g = ModelConfig::default().geometry().unwrap();
        assert_eq!((g.conv, g.pooled), (15_998, 7_998));
    }
}
