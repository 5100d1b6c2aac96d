//! Plain stochastic gradient descent.

use crate::error::{Error, Result};

use super::weights::{GradientBuffer, NetworkWeights};

/// In-place update theta <- theta - gamma * g.
pub fn sgd_step(
    weights: &mut NetworkWeights,
    grads: &GradientBuffer,
    gamma: f64,
) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Usage(format!(
            "learning rate must lie in (0, 1), got {gamma}"
        )));
    }
    if weights.layers.len() != grads.layers.len() {
        return Err(Error::Usage("gradient shape does not match weights".into()));
    }
    for (wl, gl) in weights.layers.iter_mut().zip(&grads.layers) {
        let gblocks = gl.blocks();
        let wblocks = wl.blocks_mut();
        if wblocks.len() != gblocks.len() {
            return Err(Error::Usage("gradient shape does not match weights".into()));
        }
        for ((_, wv), (_, gv)) in wblocks.into_iter().zip(gblocks) {
            if wv.len() != gv.len() {
                return Err(Error::Usage("gradient block size mismatch".into()));
            }
            for (w, g) in wv.iter_mut().zip(gv) {
                *w -= gamma * g;
            }
        }
    }
    Ok(())
}

/// Functional form returning the updated weights.
pub fn sgd_update(
    weights: &NetworkWeights,
    grads: &GradientBuffer,
    gamma: f64,
) -> Result<NetworkWeights> {
    let mut next = weights.clone();
    sgd_step(&mut next, grads, gamma)?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::network::{Architecture, NetworkConfig};
    use crate::neural::weights::LayerParams;

    fn tiny() -> (NetworkConfig, NetworkWeights) {
        let config = NetworkConfig::preset(Architecture::Dnn, 2, 1, 1).unwrap();
        let weights = NetworkWeights::zeros(&config);
        (config, weights)
    }

    #[test]
    fn update_arithmetic() {
        let (config, mut weights) = tiny();
        if let LayerParams::Dense { w, .. } = &mut weights.layers[1] {
            w[0] = 1.0;
        }
        let mut grads = GradientBuffer::zeros(&config);
        if let LayerParams::Dense { w, .. } = &mut grads.layers[1] {
            w[0] = 2.0;
        }
        sgd_step(&mut weights, &grads, 0.1).unwrap();
        if let LayerParams::Dense { w, .. } = &weights.layers[1] {
            assert!((w[0] - 0.8).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let (config, mut weights) = tiny();
        if let LayerParams::Dense { w, .. } = &mut weights.layers[1] {
            w[0] = 0.123456789;
        }
        let before = weights.clone();
        let grads = GradientBuffer::zeros(&config);
        sgd_step(&mut weights, &grads, 0.5).unwrap();
        assert_eq!(weights, before);
    }

    #[test]
    fn gamma_range_enforced() {
        let (config, mut weights) = tiny();
        let grads = GradientBuffer::zeros(&config);
        assert!(sgd_step(&mut weights, &grads, 0.0).is_err());
        assert!(sgd_step(&mut weights, &grads, 1.0).is_err());
    }
}
