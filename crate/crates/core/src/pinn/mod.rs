//! Physics-informed network interpolator.

mod adam;
mod io;
mod loss;
mod mlp;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use io::{model_from_text, model_to_text};
pub use loss::{loss_and_grads, DataPoint, LossBreakdown};
pub use mlp::{glorot_init, mlp_forward, mlp_second_derivs, pde_residual, Input, MlpParams, INPUT_DIM};
pub use train::{
    norm_for, pinn_predict, predict_at, train_pinn, CollocationSet, LossLogEntry, NormSpec, TrainConfig, TrainReport,
    TrainedPinn, NORM_HALF_RANGE,
};
