//! Half squared-error loss.

use crate::error::{Error, Result};

/// Per-sample loss 0.5 * ||output - target||^2.
pub fn mse_loss(output: &[f64], target: &[f64]) -> Result<f64> {
    if output.len() != target.len() {
        return Err(Error::Usage(format!(
            "loss shapes differ: {} vs {}",
            output.len(),
            target.len()
        )));
    }
    let mut acc = 0.0;
    for (o, t) in output.iter().zip(target) {
        let d = o - t;
        acc += d * d;
    }
    Ok(0.5 * acc)
}

/// Gradient of [`mse_loss`] w.r.t. the output: output - target.
pub fn mse_output_grad(output: &[f64], target: &[f64], grad: &mut [f64]) {
    for ((g, o), t) in grad.iter_mut().zip(output).zip(target) {
        *g = o - t;
    }
}

/// Mean of per-sample losses.
pub fn mse_loss_batch(pairs: &[(&[f64], &[f64])]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Usage("empty batch".into()));
    }
    let mut acc = 0.0;
    for (o, t) in pairs {
        acc += mse_loss(o, t)?;
    }
    Ok(acc / pairs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_arithmetic() {
        assert_eq!(mse_loss(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse_loss(&[1.0, 2.0], &[0.0, 0.0]).unwrap(), 2.5);
        let batch = mse_loss_batch(&[(&[1.0, 2.0][..], &[1.0, 2.0][..]), (&[1.0, 2.0][..], &[0.0, 0.0][..])])
            .unwrap();
        assert_eq!(batch, 1.25);
    }

    #[test]
    fn gradient_is_residual() {
        let mut g = [0.0; 2];
        mse_output_grad(&[3.0, -1.0], &[1.0, 1.0], &mut g);
        assert_eq!(g, [2.0, -2.0]);
    }
}
