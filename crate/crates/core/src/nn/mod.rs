//! Layers with hand-written forward and backward passes, and a
//! [`Sequential`] container that chains them.

mod chunk;
mod conv;
mod dense;
mod dropout;
mod gru;
mod pool;

pub use chunk::SequenceChunk;
pub use conv::{conv_output_len, Conv1d, ConvShape};
pub use dense::{softmax, softmax_backward, Dense};
pub use dropout::{Dropout, DropoutMask, Mode};
pub use gru::{gru_cell_step, GruCache, GruCellParams, GruGrads, GruLayer, GruStepCache, GRU_PARAM_NAMES};
pub use pool::AvgPool1d;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::{Activation, Scalar, Tensor};

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Layer<T: Scalar> {
    Conv1d(Conv1d<T>),
    Activation(Activation),
    Dropout(Dropout),
    AvgPool1d(AvgPool1d),
    Chunk(SequenceChunk),
    Gru(GruLayer<T>),
    Flatten,
    Dense(Dense<T>),
    Softmax,
}

/// State saved by a forward call for the matching backward call.
#[derive(Debug, Clone)]
pub enum Cache<T: Scalar> {
    Conv1d { input: Tensor<T> },
    Activation { output: Tensor<T> },
    /// ReLU only needs to know which outputs were positive.
    Relu { active: Vec<bool> },
    Dropout { mask: DropoutMask },
    AvgPool1d { input_len: usize },
    Chunk { input_len: usize },
    Gru(GruCache<T>),
    Flatten { shape: Vec<usize> },
    Dense { input: Tensor<T>, output: Tensor<T> },
    Softmax { output: Tensor<T> },
}

/// Gradients of one layer: one tensor per parameter (same order and shapes
/// as [`Layer::params`]) plus the gradient with respect to the layer input.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads<T: Scalar> {
    pub params: Vec<Tensor<T>>,
    pub input: Tensor<T>,
}

impl<T: Scalar> Layer<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            Layer::Conv1d(_) => "conv1d",
            Layer::Activation(Activation::Relu) => "relu",
            Layer::Activation(Activation::Sigmoid) => "sigmoid",
            Layer::Activation(Activation::Tanh) => "tanh",
            Layer::Dropout(_) => "dropout",
            Layer::AvgPool1d(_) => "avgpool1d",
            Layer::Chunk(_) => "chunk",
            Layer::Gru(_) => "gru",
            Layer::Flatten => "flatten",
            Layer::Dense(_) => "dense",
            Layer::Softmax => "softmax",
        }
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            Layer::Conv1d(_) => &["kernels", "bias"],
            Layer::Gru(_) => &GRU_PARAM_NAMES,
            Layer::Dense(_) => &["weights", "bias"],
            _ => &[],
        }
    }

    pub fn params(&self) -> Vec<&Tensor<T>> {
        match self {
            Layer::Conv1d(c) => vec![&c.kernels, &c.bias],
            Layer::Gru(g) => g.params.tensors().to_vec(),
            Layer::Dense(d) => vec![&d.weights, &d.bias],
            _ => Vec::new(),
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor<T>> {
        match self {
            Layer::Conv1d(c) => vec![&mut c.kernels, &mut c.bias],
            Layer::Gru(g) => g.params.tensors_mut().into_iter().collect(),
            Layer::Dense(d) => vec![&mut d.weights, &mut d.bias],
            _ => Vec::new(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|t| t.len()).sum()
    }

    pub fn forward<R: Rng + ?Sized>(
        &self,
        x: &Tensor<T>,
        mode: Mode,
        rng: &mut R,
    ) -> Result<(Tensor<T>, Cache<T>)> {
        self.forward_owned(x.clone(), mode, rng)
    }

    /// Forward pass that may reuse the input buffer for the output.
    pub fn forward_owned<R: Rng + ?Sized>(
        &self,
        mut x: Tensor<T>,
        mode: Mode,
        rng: &mut R,
    ) -> Result<(Tensor<T>, Cache<T>)> {
        Ok(match self {
            Layer::Conv1d(c) => (c.forward(&x)?, Cache::Conv1d { input: x }),
            Layer::Activation(Activation::Relu) => {
                let active: Vec<bool> = x.data().iter().map(|&v| v > T::zero()).collect();
                for v in x.data_mut() {
                    *v = v.max(T::zero());
                }
                (x, Cache::Relu { active })
            }
            Layer::Activation(f) => {
                for v in x.data_mut() {
                    *v = f.apply(*v);
                }
                (x.clone(), Cache::Activation { output: x })
            }
            Layer::Dropout(d) => {
                let (y, mask) = d.apply_owned(x, mode, rng);
                (y, Cache::Dropout { mask })
            }
            Layer::AvgPool1d(p) => (
                p.forward(&x)?,
                Cache::AvgPool1d {
                    input_len: x.dims2()?.0,
                },
            ),
            Layer::Chunk(c) => (
                c.forward(&x)?,
                Cache::Chunk {
                    input_len: x.dims2()?.0,
                },
            ),
            Layer::Gru(g) => {
                let (y, cache) = g.forward(&x, None)?;
                (y, Cache::Gru(cache))
            }
            Layer::Flatten => {
                let shape = x.shape().to_vec();
                let n = x.len();
                (x.reshape(vec![n])?, Cache::Flatten { shape })
            }
            Layer::Dense(d) => {
                let y = d.forward(&x)?;
                (
                    y.clone(),
                    Cache::Dense {
                        input: x,
                        output: y,
                    },
                )
            }
            Layer::Softmax => {
                let y = softmax(&x);
                (y.clone(), Cache::Softmax { output: y })
            }
        })
    }

    pub fn backward(&self, cache: &Cache<T>, upstream: &Tensor<T>) -> Result<LayerGrads<T>> {
        self.backward_owned(cache, upstream.clone())
    }

    /// Backward pass that may reuse the upstream buffer for the input gradient.
    pub fn backward_owned(&self, cache: &Cache<T>, mut upstream: Tensor<T>) -> Result<LayerGrads<T>> {
        let input_only = |input| LayerGrads {
            params: Vec::new(),
            input,
        };
        let mismatch = |cached: usize, upstream: &Tensor<T>| {
            Error::CacheMismatch(format!(
                "activation cache has {cached} entries, upstream {:?}",
                upstream.shape()
            ))
        };
        Ok(match (self, cache) {
            (Layer::Conv1d(c), Cache::Conv1d { input }) => {
                let (dk, db, dx) = c.backward(input, &upstream)?;
                LayerGrads {
                    params: vec![dk, db],
                    input: dx,
                }
            }
            (Layer::Activation(Activation::Relu), Cache::Relu { active }) => {
                if active.len() != upstream.len() {
                    return Err(mismatch(active.len(), &upstream));
                }
                for (g, &on) in upstream.data_mut().iter_mut().zip(active) {
                    if !on {
                        *g = T::zero();
                    }
                }
                input_only(upstream)
            }
            (Layer::Activation(f), Cache::Activation { output }) => {
                if output.shape() != upstream.shape() {
                    return Err(mismatch(output.len(), &upstream));
                }
                for (g, &y) in upstream.data_mut().iter_mut().zip(output.data()) {
                    *g = *g * f.derivative_from_output(y);
                }
                input_only(upstream)
            }
            (Layer::Dropout(d), Cache::Dropout { mask }) => input_only(d.backward_owned(mask, upstream)?),
            (Layer::AvgPool1d(p), Cache::AvgPool1d { input_len }) => {
                input_only(p.backward(*input_len, &upstream)?)
            }
            (Layer::Chunk(c), Cache::Chunk { input_len }) => {
                input_only(c.backward(*input_len, &upstream)?)
            }
            (Layer::Gru(g), Cache::Gru(cache)) => {
                let grads = g.backward(cache, &upstream)?;
                LayerGrads {
                    params: grads.params.tensors().into_iter().cloned().collect(),
                    input: grads.input,
                }
            }
            (Layer::Flatten, Cache::Flatten { shape }) => input_only(upstream.reshape(shape.clone())?),
            (Layer::Dense(d), Cache::Dense { input, output }) => {
                let (dw, db, dx) = d.backward(input, output, &upstream)?;
                LayerGrads {
                    params: vec![dw, db],
                    input: dx,
                }
            }
            (Layer::Softmax, Cache::Softmax { output }) => {
                input_only(softmax_backward(output, &upstream)?)
            }
            (layer, _) => {
                return Err(Error::CacheMismatch(format!(
                    "cache was not produced by a {} layer",
                    layer.kind()
                )))
            }
        })
    }
}

/// Layers applied in order, each with a name used for parameter export and
/// gradient-check reports.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Sequential<T: Scalar> {
    layers: Vec<(String, Layer<T>)>,
}

impl<T: Scalar> Sequential<T> {
    pub fn new() -> Self {
        Self { layers: Vec::new() }
    }

    pub fn push(&mut self, name: impl Into<String>, layer: Layer<T>) -> &mut Self {
        self.layers.push((name.into(), layer));
        self
    }

    pub fn with(mut self, name: impl Into<String>, layer: Layer<T>) -> Self {
        self.push(name, layer);
        self
    }

    pub fn layers(&self) -> impl Iterator<Item = (&str, &Layer<T>)> {
        self.layers.iter().map(|(n, l)| (n.as_str(), l))
    }

    pub fn layers_mut(&mut self) -> impl Iterator<Item = (&str, &mut Layer<T>)> {
        self.layers.iter_mut().map(|(n, l)| (n.as_str(), l))
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|(_, l)| l.param_count()).sum()
    }

    /// `(layer.param, tensor)` pairs in declaration order.
    pub fn named_params(&self) -> Vec<(String, &Tensor<T>)> {
        self.layers
            .iter()
            .flat_map(|(name, layer)| {
                layer
                    .param_names()
                    .iter()
                    .zip(layer.params())
                    .map(move |(p, t)| (format!("{name}.{p}"), t))
            })
            .collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor<T>> {
        self.layers
            .iter_mut()
            .flat_map(|(_, l)| l.params_mut())
            .collect()
    }

    pub fn forward<R: Rng + ?Sized>(
        &self,
        x: &Tensor<T>,
        mode: Mode,
        rng: &mut R,
    ) -> Result<(Tensor<T>, Vec<Cache<T>>)> {
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut cur = x.clone();
        for (_, layer) in &self.layers {
            let (next, cache) = layer.forward_owned(cur, mode, rng)?;
            caches.push(cache);
            cur = next;
        }
        Ok((cur, caches))
    }

    /// Inference-mode forward pass that keeps no caches.
    pub fn predict(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        // Dropout ignores the generator in inference mode.
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut cur = x.clone();
        for (_, layer) in &self.layers {
            cur = layer.forward_owned(cur, Mode::Infer, &mut rng)?.0;
        }
        Ok(cur)
    }

    /// Back-propagates `upstream` (gradient w.r.t. the network output)
    /// through every layer.
    pub fn backward(&self, caches: &[Cache<T>], upstream: &Tensor<T>) -> Result<NetGrads<T>> {
        if caches.len() != self.layers.len() {
            return Err(Error::CacheMismatch(format!(
                "{} caches for {} layers",
                caches.len(),
                self.layers.len()
            )));
        }
        let mut params = Vec::with_capacity(self.layers.len());
        let mut cur = upstream.clone();
        for ((_, layer), cache) in self.layers.iter().zip(caches).rev() {
            let g = layer.backward_owned(cache, cur)?;
            cur = g.input;
            params.push(g.params);
        }
        params.reverse();
        Ok(NetGrads { params, input: cur })
    }
}

/// Gradients of a whole network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetGrads<T: Scalar> {
    /// Per layer, one tensor per parameter.
    pub params: Vec<Vec<Tensor<T>>>,
    /// Gradient with respect to the network input.
    pub input: Tensor<T>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_kind_is_checked() {
        let layer = Layer::<f64>::Softmax;
        let cache = Cache::Chunk { input_len: 3 };
        assert!(matches!(
            layer.backward(&cache, &Tensor::zeros(&[3])),
            Err(Error::CacheMismatch(_))
        ));
    }

    #[test]
    fn flatten_round_trips_shape() {
        let x = Tensor::<f64>::matrix(2, 3, (0..6).map(f64::from).collect()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (y, cache) = Layer::Flatten.forward(&x, Mode::Train, &mut rng).unwrap();
        assert_eq!(y.shape(), &[6]);
        let g = Layer::Flatten.backward(&cache, &y).unwrap();
        assert_eq!(g.input, x);
    }

    #[test]
    fn gradient_shapes_mirror_parameters() {
        let net = Sequential::<f64>::new()
            .with("conv", Layer::Conv1d(Conv1d::zeros(3, 1, 2)))
            .with("pool", Layer::AvgPool1d(AvgPool1d::default()))
            .with("chunk", Layer::Chunk(SequenceChunk { steps: 2 }))
            .with("gru", Layer::Gru(GruLayer::new(GruCellParams::zeros(2, 3)).unwrap()))
            .with("flat", Layer::Flatten)
            .with("dense", Layer::Dense(Dense::zeros(6, 4, None)))
            .with("softmax", Layer::Softmax);
        let x = Tensor::zeros(&[12, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (y, caches) = net.forward(&x, Mode::Train, &mut rng).unwrap();
        assert_eq!(y.shape(), &[4]);
        let grads = net.backward(&caches, &Tensor::filled(&[4], 1.0)).unwrap();
        for ((_, layer), g) in net.layers().zip(&grads.params) {
            let shapes: Vec<_> = layer.params().iter().map(|t| t.shape().to_vec()).collect();
            let gshapes: Vec<_> = g.iter().map(|t| t.shape().to_vec()).collect();
            assert_eq!(shapes, gshapes, "{}", layer.kind());
        }
        assert_eq!(grads.input.shape(), x.shape());
    }
}
