//! A small neural-network engine: dense, 1-D convolution, max-pool, and LSTM
//! layers with hand-written reverse-mode gradients, half-MSE loss, plain SGD,
//! and an early-stopping monitor. No computation graph — the three presets
//! are the whole zoo.

mod activation;
mod backward;
mod early_stopping;
mod forward;
pub mod init;
pub mod io;
mod loss;
mod network;
mod optimizer;
mod tensor;
mod weights;

pub use activation::Activation;
pub use backward::{backward, backward_into};
pub use early_stopping::{early_stopping_decision, StopDecision};
pub use forward::{forward, Tape, LSTM_CELL_CLIP};
pub use init::init_weights;
pub use loss::{mse_loss, mse_loss_batch, mse_output_grad};
pub use network::{Architecture, FeatureShape, LayerSpec, NetworkConfig, Padding};
pub use optimizer::{sgd_step, sgd_update};
pub use tensor::Tensor;
pub use weights::{GradientBuffer, LayerParams, NetworkWeights};
