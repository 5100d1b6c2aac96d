//! Deep-filter training: window the in-sample paths, shuffle globally, run
//! minibatch SGD on the half-MSE loss, optionally early-stop on a validation
//! split.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::dynamics::{generate_dataset, ModelSpec, PathSet};
use crate::error::{Error, Result};
use crate::neural::{
    backward_into, early_stopping_decision, forward, init_weights, mse_loss, mse_output_grad,
    sgd_step, GradientBuffer, NetworkConfig, NetworkWeights, StopDecision, Tensor,
};
use crate::rng::shuffle_rng;

use super::window::{fill_window, scored_range};

/// Fixed chunk width for parallel gradient accumulation. Partial sums are
/// reduced in chunk order, so results do not depend on the thread count.
const GRAD_CHUNK: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarlyStoppingConfig {
    pub patience: usize,
    /// Fraction of training paths reserved for validation.
    pub validation_fraction: f64,
}

impl Default for EarlyStoppingConfig {
    fn default() -> Self {
        EarlyStoppingConfig {
            patience: 3,
            validation_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    /// Window length n0.
    pub n0: usize,
    /// Horizon N: paths carry N+1 points.
    pub horizon: usize,
    /// Number of in-sample paths.
    pub n_paths: usize,
    /// SGD learning rate.
    pub gamma: f64,
    pub epochs: usize,
    pub minibatch: usize,
    pub early_stopping: Option<EarlyStoppingConfig>,
    /// Keep parallel reductions in a fixed order.
    pub reproducible: bool,
    /// Take every k-th window (1 = all windows; larger for smoke runs).
    pub window_stride: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            n0: 50,
            horizon: 1000,
            n_paths: 5000,
            gamma: 0.1,
            epochs: 2,
            minibatch: 32,
            early_stopping: None,
            reproducible: true,
            window_stride: 1,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n0 == 0 || self.n0 > self.horizon {
            return Err(Error::Config(format!(
                "window length {} must lie in 1..=horizon ({})",
                self.n0, self.horizon
            )));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config(format!(
                "learning rate must lie in (0, 1), got {}",
                self.gamma
            )));
        }
        if self.n_paths == 0 {
            return Err(Error::Config("n_paths must be >= 1".into()));
        }
        if self.minibatch == 0 {
            return Err(Error::Config("minibatch must be >= 1".into()));
        }
        if self.window_stride == 0 {
            return Err(Error::Config("window stride must be >= 1".into()));
        }
        if let Some(es) = &self.early_stopping {
            if es.patience == 0 {
                return Err(Error::Config("patience must be >= 1".into()));
            }
            if !(0.0 < es.validation_fraction && es.validation_fraction < 1.0) {
                return Err(Error::Config(
                    "validation fraction must lie in (0, 1)".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Where the weights came from; everything needed to reproduce them.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub model: ModelSpec,
    pub tconfig: TrainingConfig,
    pub seed: u64,
    /// Mean training loss per completed epoch.
    pub epoch_losses: Vec<f64>,
    /// Validation loss per epoch (early stopping only).
    pub validation_losses: Vec<f64>,
    /// Best epoch whose weights were restored, when training stopped early.
    pub stopped_early_at: Option<usize>,
}

/// Frozen weights plus the windowing metadata needed to apply them.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedFilter {
    pub config: NetworkConfig,
    pub weights: NetworkWeights,
    pub provenance: Provenance,
}

impl TrainedFilter {
    pub fn n0(&self) -> usize {
        self.provenance.tconfig.n0
    }
}

/// Generate the in-sample set from `model` (path seeds seed..seed+n_paths-1)
/// and train on it.
pub fn train(
    model: &ModelSpec,
    config: &NetworkConfig,
    tconfig: &TrainingConfig,
    seed: u64,
) -> Result<TrainedFilter> {
    tconfig.validate()?;
    let set = generate_dataset(model, tconfig.n_paths, tconfig.horizon, seed)?;
    train_on_pathset(&set, config, tconfig, seed)
}

/// Train on an existing path set. `seed` drives initialization and shuffling.
pub fn train_on_pathset(
    set: &PathSet,
    config: &NetworkConfig,
    tconfig: &TrainingConfig,
    seed: u64,
) -> Result<TrainedFilter> {
    tconfig.validate()?;
    config.validate()?;
    let m1 = set.model.state_dim();
    let m2 = set.model.obs_dim();
    if config.input_channels != m2 || config.output_dim != m1 {
        return Err(Error::Config(format!(
            "network ({} channels -> {}) does not fit model ({m2} -> {m1})",
            config.input_channels, config.output_dim
        )));
    }
    if config.input_window != tconfig.n0 {
        return Err(Error::Config(format!(
            "network window {} != training window {}",
            config.input_window, tconfig.n0
        )));
    }
    if set.paths.is_empty() {
        return Err(Error::Config("empty path set".into()));
    }
    for p in &set.paths {
        if p.len() != set.horizon + 1 {
            return Err(Error::Config("path length does not match horizon".into()));
        }
    }

    let n0 = tconfig.n0;
    let mut weights = init_weights(config, seed)?;

    // validation split: the trailing fraction of paths
    let n_val = match &tconfig.early_stopping {
        Some(es) => {
            let v = ((set.paths.len() as f64) * es.validation_fraction).ceil() as usize;
            v.clamp(1, set.paths.len() - 1)
        }
        None => 0,
    };
    let n_train = set.paths.len() - n_val;
    let train_paths = &set.paths[..n_train];
    let val_paths = &set.paths[n_train..];

    // global window index list over training paths
    let window_range = scored_range(set.horizon + 1, n0)?;
    let mut indices: Vec<(u32, u32)> = Vec::new();
    for p in 0..n_train {
        let mut k = window_range.start;
        while k < window_range.end {
            indices.push((p as u32, k as u32));
            k += tconfig.window_stride;
        }
    }

    let mut provenance = Provenance {
        model: set.model.clone(),
        tconfig: tconfig.clone(),
        seed,
        epoch_losses: Vec::new(),
        validation_losses: Vec::new(),
        stopped_early_at: None,
    };

    if tconfig.epochs == 0 {
        return Ok(TrainedFilter {
            config: config.clone(),
            weights,
            provenance,
        });
    }

    let mut shuffle = shuffle_rng(seed);
    let n_chunks = tconfig.minibatch.div_ceil(GRAD_CHUNK);
    let mut partials: Vec<(GradientBuffer, f64)> = (0..n_chunks)
        .map(|_| (GradientBuffer::zeros(config), 0.0))
        .collect();
    let mut grads = GradientBuffer::zeros(config);

    let mut best_weights = weights.clone();
    let mut best_epoch: Option<usize> = None;
    let mut best_val = f64::INFINITY;

    'epochs: for epoch in 0..tconfig.epochs {
        indices.shuffle(&mut shuffle);
        let mut epoch_loss_sum = 0.0;
        let mut epoch_samples = 0usize;

        for (batch_idx, batch) in indices.chunks(tconfig.minibatch).enumerate() {
            let chunks: Vec<&[(u32, u32)]> = batch.chunks(GRAD_CHUNK).collect();
            let active = chunks.len();
            let step_result: Result<()> = partials[..active]
                .par_iter_mut()
                .zip(chunks.into_par_iter())
                .try_for_each(|((buf, loss_sum), chunk)| {
                    buf.reset();
                    *loss_sum = 0.0;
                    let mut window = Tensor::zeros(vec![n0, m2]);
                    let mut out_grad = vec![0.0; m1];
                    for &(p, k) in chunk {
                        let path = &train_paths[p as usize];
                        fill_window(path, k as usize, n0, window.values_mut());
                        let (output, tape) = forward(&weights, config, &window)?;
                        let target = path.state(k as usize);
                        *loss_sum += mse_loss(output.values(), target)?;
                        mse_output_grad(output.values(), target, &mut out_grad);
                        backward_into(&weights, config, &tape, &out_grad, buf)?;
                    }
                    Ok(())
                });

            let diverged_detail = match step_result {
                Ok(()) => {
                    // reduce partial gradients in chunk order
                    grads.reset();
                    let mut batch_loss = 0.0;
                    for (buf, loss_sum) in &partials[..active] {
                        grads.add(buf)?;
                        batch_loss += loss_sum;
                    }
                    batch_loss /= batch.len() as f64;
                    if batch_loss.is_finite() && grads.is_finite() {
                        grads.scale(1.0 / batch.len() as f64);
                        sgd_step(&mut weights, &grads, tconfig.gamma)?;
                        epoch_loss_sum += batch_loss * batch.len() as f64;
                        epoch_samples += batch.len();
                        None
                    } else {
                        Some(format!("non-finite minibatch loss {batch_loss}"))
                    }
                }
                Err(e) => Some(e.to_string()),
            };

            if let Some(detail) = diverged_detail {
                if tconfig.early_stopping.is_some() {
                    // rescue: fall back to the best weights seen so far
                    weights = best_weights;
                    provenance.stopped_early_at = Some(best_epoch.unwrap_or(0));
                    break 'epochs;
                }
                return Err(Error::TrainingDiverged {
                    epoch,
                    batch: batch_idx,
                    detail,
                });
            }
        }

        provenance
            .epoch_losses
            .push(epoch_loss_sum / epoch_samples.max(1) as f64);

        if let Some(es) = &tconfig.early_stopping {
            let val_loss = validation_loss(&weights, config, val_paths, n0, &window_range)?;
            provenance.validation_losses.push(val_loss);
            if val_loss.is_finite() && val_loss < best_val {
                best_val = val_loss;
                best_epoch = Some(epoch);
                best_weights = weights.clone();
            }
            let stop = !val_loss.is_finite()
                || matches!(
                    early_stopping_decision(&provenance.validation_losses, es.patience),
                    StopDecision::Stop { .. }
                );
            if stop {
                weights = best_weights;
                provenance.stopped_early_at = Some(best_epoch.unwrap_or(0));
                break 'epochs;
            }
        }
    }

    weights.check_finite()?;
    Ok(TrainedFilter {
        config: config.clone(),
        weights,
        provenance,
    })
}

fn validation_loss(
    weights: &NetworkWeights,
    config: &NetworkConfig,
    val_paths: &[crate::dynamics::SamplePath],
    n0: usize,
    window_range: &std::ops::Range<usize>,
) -> Result<f64> {
    if val_paths.is_empty() {
        return Err(Error::Config("empty validation split".into()));
    }
    let m2 = config.input_channels;
    let per_path: Vec<f64> = val_paths
        .par_iter()
        .map(|path| -> Result<f64> {
            let mut window = Tensor::zeros(vec![n0, m2]);
            let mut sum = 0.0;
            for k in window_range.clone() {
                fill_window(path, k, n0, window.values_mut());
                match forward(weights, config, &window) {
                    Ok((output, _)) => sum += mse_loss(output.values(), path.state(k))?,
                    Err(Error::Numerical(_)) => sum += f64::INFINITY,
                    Err(e) => return Err(e),
                }
            }
            Ok(sum)
        })
        .collect::<Result<_>>()?;
    let total: f64 = per_path.iter().sum();
    Ok(total / (val_paths.len() * window_range.len()) as f64)
}
