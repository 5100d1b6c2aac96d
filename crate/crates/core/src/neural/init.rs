//! Weight initialization: Glorot-uniform kernels, zero biases, and an LSTM
//! forget-gate bias of 1.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::rng::init_rng;

use super::network::{LayerSpec, NetworkConfig};
use super::weights::{LayerParams, NetworkWeights};

fn glorot_fill(rng: &mut ChaCha8Rng, block: &mut [f64], fan_in: usize, fan_out: usize) {
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    for v in block.iter_mut() {
        let u: f64 = rng.random();
        *v = bound * (2.0 * u - 1.0);
    }
}

/// Deterministic initialization from `seed`.
pub fn init_weights(config: &NetworkConfig, seed: u64) -> Result<NetworkWeights> {
    config.validate()?;
    let mut rng = init_rng(seed);
    let mut weights = NetworkWeights::zeros(config);
    for (spec, params) in config.layers.iter().zip(&mut weights.layers) {
        match (spec, params) {
            (
                LayerSpec::Dense { input, output, .. },
                LayerParams::Dense { w, .. },
            ) => {
                glorot_fill(&mut rng, w, *input, *output);
            }
            (
                LayerSpec::Conv1d {
                    in_channels,
                    out_channels,
                    kernel,
                    ..
                },
                LayerParams::Conv1d { w, .. },
            ) => {
                glorot_fill(&mut rng, w, in_channels * kernel, out_channels * kernel);
            }
            (
                LayerSpec::Lstm { input, hidden },
                LayerParams::Lstm { w_ih, w_hh, b },
            ) => {
                glorot_fill(&mut rng, w_ih, *input, *hidden);
                glorot_fill(&mut rng, w_hh, *hidden, *hidden);
                // forget-gate bias 1 keeps early memories alive
                for u in 0..*hidden {
                    b[hidden + u] = 1.0;
                }
            }
            _ => {}
        }
    }
    Ok(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::network::Architecture;

    #[test]
    fn deterministic_in_seed() {
        let config = NetworkConfig::preset(Architecture::Cnn, 50, 1, 1).unwrap();
        let a = init_weights(&config, 7).unwrap();
        let b = init_weights(&config, 7).unwrap();
        assert_eq!(a, b);
        let c = init_weights(&config, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn dnn_biases_start_at_zero() {
        let config = NetworkConfig::preset(Architecture::Dnn, 50, 1, 1).unwrap();
        let w = init_weights(&config, 3).unwrap();
        for layer in w.layers() {
            if let LayerParams::Dense { b, .. } = layer {
                assert!(b.iter().all(|&v| v == 0.0));
            }
        }
        assert_eq!(w.param_count(), 381);
    }

    #[test]
    fn lstm_forget_bias_is_one() {
        let config = NetworkConfig::preset(Architecture::Rnn, 50, 1, 1).unwrap();
        let w = init_weights(&config, 3).unwrap();
        let LayerParams::Lstm { b, .. } = &w.layers()[0] else {
            panic!("expected lstm first");
        };
        let h = 16;
        assert!(b[..h].iter().all(|&v| v == 0.0));
        assert!(b[h..2 * h].iter().all(|&v| v == 1.0));
        assert!(b[2 * h..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn kernel_entries_respect_glorot_bound() {
        let config = NetworkConfig::preset(Architecture::Dnn, 50, 1, 1).unwrap();
        let w = init_weights(&config, 11).unwrap();
        let LayerParams::Dense { w: w0, .. } = &w.layers()[1] else {
            panic!("expected dense");
        };
        let bound = (6.0_f64 / (50 + 5) as f64).sqrt();
        assert!(w0.iter().all(|v| v.abs() <= bound));
        assert!(w0.iter().any(|v| v.abs() > bound * 0.5));
    }
}
