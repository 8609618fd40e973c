//! Model configuration, assembly and the parameter file format.

mod config;
mod network;
mod params_io;

pub use config::{param_count, ConvActivation, Geometry, ModelConfig, Precision};
pub use network::{build_model, grad_check_config, EmotionModel};
pub use params_io::{decode_params, encode_params, load_params, save_params, MAGIC, VERSION};
