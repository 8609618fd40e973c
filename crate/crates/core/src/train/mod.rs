//! Loss, optimizer, initializers, the training loop and gradient checks.

mod fit;
mod gradcheck;
mod init;
mod loss;
mod optim;

pub use fit::{accuracy, argmax, fit, predict_classes, EpochRecord, FitConfig, Sample, TrainRunLog};
pub use gradcheck::{grad_check, relative_error, GradCheckReport, LayerCheck, FD_STEP};
pub use init::{glorot_uniform, he_uniform};
pub use loss::{cross_entropy_loss, cross_entropy_with_grad, PROB_CLIP};
pub use optim::{rmsprop_step, OptimizerState, RmsPropConfig};

pub use crate::model::param_count;
