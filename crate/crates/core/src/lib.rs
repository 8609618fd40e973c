pub mod analyzer;
pub mod audio;
pub mod cli;
pub mod error;
pub mod label;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod tensor;
pub mod train;
