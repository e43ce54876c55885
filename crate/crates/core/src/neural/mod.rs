//! Layers, losses, optimizer and training loop for the MLP and LSTM
//! forecasters and their stochastic variants. All gradients are analytic.

mod adam;
mod checkpoint;
mod layers;
mod loss;
mod lstm;
mod model;
mod params;
mod train;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use layers::{
    bbb_dense_forward, dense_forward, dropconnect_forward, dropout_forward, flipout_dense_forward,
    Activation, DenseCache, DenseKind, DenseNoise, DenseWeights, UqDense,
};
pub use loss::{
    gaussian_nll_loss, gaussian_nll_with_grad, kl_gaussian, kl_gaussian_with_grad, mse_loss,
    mse_with_grad, LOG_VAR_MAX, LOG_VAR_MIN,
};
pub use lstm::{lstm_sequence, lstm_sequence_backward, lstm_step, LstmTape};
pub use model::{
    build_model, Architecture, GaussianHeadOutput, Model, ModelConfig, ModelNoise, Tape, UqMethod,
    DROPCONNECT_P, DROPOUT_P, ENSEMBLE_SIZE, MAX_HORIZON, MC_SAMPLES,
};
pub use params::{
    sigmoid, softplus, softplus_inv, DenseParams, LstmParams, VariationalDenseParams, INIT_SIGMA,
};
pub use train::{objective, train, LossKind, TrainConfig, BATCH_SIZE, EPOCHS, LEARNING_RATE};
