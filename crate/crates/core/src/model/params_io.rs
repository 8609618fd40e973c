//! Binary parameter container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic    8 bytes  "SERMODEL"
//! version  u32      1
//! config   u32 length + UTF-8 `key = value` text
//! count    u32      number of tensors
//! tensor*  u16 name length, name bytes, u32 rank, u32 dims[rank],
//!          f32 data[product(dims)]
//! ```

use std::fs;
use std::path::Path;

use super::config::ModelConfig;
use super::network::EmotionModel;
use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor};

pub const MAGIC: &[u8; 8] = b"SERMODEL";
pub const VERSION: u32 = 1;

pub fn encode_params<T: Scalar>(model: &EmotionModel<T>) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    let cfg = model.config.to_text();
    out.extend_from_slice(&(cfg.len() as u32).to_le_bytes());
    out.extend_from_slice(cfg.as_bytes());
    let params = model.net.named_params();
    out.extend_from_slice(&(params.len() as u32).to_le_bytes());
    for (name, t) in params {
        out.extend_from_slice(&(name.len() as u16).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&(t.shape().len() as u32).to_le_bytes());
        for &d in t.shape() {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in t.data() {
            out.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::MalformedParams(format!("truncated while reading {what}")))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn str(&mut self, n: usize, what: &str) -> Result<&'a str> {
        std::str::from_utf8(self.take(n, what)?)
            .map_err(|_| Error::MalformedParams(format!("{what} is not UTF-8")))
    }
}

/// Decodes a parameter file into a model at precision `T`, checking every
/// tensor name and shape against the architecture its config describes.
pub fn decode_params<T: Scalar>(bytes: &[u8]) -> Result<EmotionModel<T>> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(8, "magic")? != MAGIC {
        return Err(Error::MalformedParams("bad magic".into()));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::MalformedParams(format!("unsupported version {version}")));
    }
    let cfg_len = r.u32("config length")? as usize;
    let config = ModelConfig::from_text(r.str(cfg_len, "config")?)?;
    let mut model: EmotionModel<T> = EmotionModel::seeded(&config)?;
    let count = r.u32("tensor count")? as usize;
    let expected: Vec<(String, Vec<usize>)> = model
        .net
        .named_params()
        .into_iter()
        .map(|(n, t)| (n, t.shape().to_vec()))
        .collect();
    if count != expected.len() {
        return Err(Error::MalformedParams(format!(
            "{count} tensors, architecture needs {}",
            expected.len()
        )));
    }
    for ((want_name, want_shape), slot) in expected.into_iter().zip(model.net.params_mut()) {
        let name_len = r.u16("name length")? as usize;
        let name = r.str(name_len, "tensor name")?;
        if name != want_name {
            return Err(Error::MalformedParams(format!("expected {want_name}, found {name}")));
        }
        let rank = r.u32("rank")? as usize;
        let shape = (0..rank)
            .map(|_| r.u32("dims").map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        if shape != want_shape {
            return Err(Error::MalformedParams(format!(
                "{name} has shape {shape:?}, expected {want_shape:?}"
            )));
        }
        let n: usize = shape.iter().product();
        let raw = r.take(n * 4, name)?;
        let data = raw
            .chunks_exact(4)
            .map(|c| T::of(f32::from_le_bytes(c.try_into().unwrap()) as f64))
            .collect();
        *slot = Tensor::new(shape, data)?;
    }
    if r.pos != bytes.len() {
        return Err(Error::MalformedParams("trailing bytes".into()));
    }
    Ok(model)
}

pub fn save_params<T: Scalar>(model: &EmotionModel<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_params(model)).map_err(|e| Error::io(path, e))
}

pub fn load_params<T: Scalar>(path: impl AsRef<Path>) -> Result<EmotionModel<T>> {
    let path = path.as_ref();
    decode_params(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> EmotionModel<f32> {
        EmotionModel::seeded(&ModelConfig {
            input_samples: 40,
            conv_kernels: 3,
            gru_layers: 2,
            gru_units: 2,
            gru_steps: 4,
            dense_units: 5,
            seed: 9,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn round_trip() {
        let m = tiny();
        let bytes = encode_params(&m);
        assert_eq!(&bytes[..8], MAGIC);
        assert_eq!(decode_params::<f32>(&bytes).unwrap(), m);
    }

    #[test]
    fn corruption_is_detected() {
        let bytes = encode_params(&tiny());
        assert!(decode_params::<f32>(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_params::<f32>(&bad).is_err());
        let mut extra = bytes;
        extra.push(0);
        assert!(decode_params::<f32>(&extra).is_err());
    }
}
