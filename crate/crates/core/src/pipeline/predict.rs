//! Out-of-sample application of a trained filter.

use rayon::prelude::*;

use crate::dynamics::{PathSet, SamplePath};
use crate::error::{Error, Result};
use crate::neural::{forward, Tensor};

use super::metric::relative_error;
use super::train::TrainedFilter;
use super::window::{fill_window, scored_range, scored_truth};

/// Estimates over the scored range of one path, flattened row-major.
/// Reads only the observations — never the states.
pub fn predict(filter: &TrainedFilter, path: &SamplePath) -> Result<Vec<f64>> {
    let n0 = filter.n0();
    let m2 = filter.config.input_channels;
    let m1 = filter.config.output_dim;
    if path.obs_dim != m2 {
        return Err(Error::Usage(format!(
            "path observation dim {} does not match network ({m2})",
            path.obs_dim
        )));
    }
    let range = scored_range(path.len(), n0)?;
    let mut window = Tensor::zeros(vec![n0, m2]);
    let mut out = Vec::with_capacity(range.len() * m1);
    for k in range {
        fill_window(path, k, n0, window.values_mut());
        let (output, _) = forward(&filter.weights, &filter.config, &window)?;
        out.extend_from_slice(output.values());
    }
    Ok(out)
}

/// Per-path estimates for a whole set, in path order.
pub fn predict_pathset(filter: &TrainedFilter, set: &PathSet) -> Result<Vec<Vec<f64>>> {
    set.paths
        .par_iter()
        .map(|p| predict(filter, p))
        .collect()
}

/// Relative error of the filter on a path set.
pub fn evaluate_filter(filter: &TrainedFilter, set: &PathSet) -> Result<f64> {
    let n0 = filter.n0();
    let est = predict_pathset(filter, set)?;
    let truth: Vec<Vec<f64>> = set
        .paths
        .iter()
        .map(|p| scored_truth(p, n0))
        .collect::<Result<_>>()?;
    relative_error(&est, &truth, set.model.state_dim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{generate_dataset, ModelKind, ModelSpec};
    use crate::neural::{init_weights, Architecture, LayerParams, NetworkConfig};
    use crate::pipeline::train::{Provenance, TrainingConfig};

    fn zero_head_filter(n0: usize) -> TrainedFilter {
        let model = ModelSpec::preset(ModelKind::Linear1D);
        let config = NetworkConfig::preset(Architecture::Dnn, n0, 1, 1).unwrap();
        let mut weights = init_weights(&config, 2).unwrap();
        if let LayerParams::Dense { w, b } = weights.layers.last_mut().unwrap() {
            w.fill(0.0);
            b.fill(0.0);
        }
        TrainedFilter {
            config,
            weights,
            provenance: Provenance {
                model,
                tconfig: TrainingConfig {
                    n0,
                    horizon: 60,
                    n_paths: 1,
                    epochs: 0,
                    ..TrainingConfig::default()
                },
                seed: 2,
                epoch_losses: vec![],
                validation_losses: vec![],
                stopped_early_at: None,
            },
        }
    }

    #[test]
    fn zero_output_head_predicts_zero() {
        let filter = zero_head_filter(10);
        let model = ModelSpec::preset(ModelKind::Linear1D);
        let set = generate_dataset(&model, 2, 60, 5).unwrap();
        let est = predict(&filter, &set.paths[0]).unwrap();
        assert_eq!(est.len(), 51);
        assert!(est.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn estimates_never_read_the_states() {
        let filter = zero_head_filter(10);
        let model = ModelSpec::preset(ModelKind::Linear1D);
        let set = generate_dataset(&model, 1, 60, 5).unwrap();
        let mut corrupted = set.paths[0].clone();
        let base = predict(&filter, &set.paths[0]).unwrap();
        for v in corrupted.states.iter_mut() {
            *v = f64::NAN;
        }
        let after = predict(&filter, &corrupted).unwrap();
        assert_eq!(base, after);
    }

    #[test]
    fn scored_count_matches_window_arithmetic() {
        let filter = zero_head_filter(50);
        let model = ModelSpec::preset(ModelKind::Linear1D);
        let mut f = filter;
        f.provenance.tconfig.horizon = 1000;
        let set = generate_dataset(&model, 1, 1000, 5).unwrap();
        let est = predict(&f, &set.paths[0]).unwrap();
        assert_eq!(est.len(), 951);
    }
}
