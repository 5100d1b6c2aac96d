//! deepfilter: a state-estimation laboratory.
//!
//! Simulates linear, nonlinear, and regime-switching stochastic systems,
//! runs Kalman / extended Kalman baselines, and trains small neural networks
//! (dense, convolutional, recurrent) that map a sliding window of noisy
//! observations to the hidden state. Everything is deterministic given seeds.

pub mod dynamics;
pub mod error;
pub mod filters;
pub mod neural;
pub mod pipeline;
pub mod rng;

pub use error::{Error, Result};
