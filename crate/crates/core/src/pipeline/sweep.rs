//! Nominal-vs-actual robustness sweeps.
//!
//! The estimator stays parameterized by the nominal model; only the test
//! data's observation noise sigma0 varies. The same base seed is reused at
//! every sweep point (common random numbers), so curves reflect the noise
//! level and not sampling variation.

use crate::dynamics::{generate_dataset, ModelKind, ModelSpec};
use crate::error::{Error, Result};
use crate::filters::{run_ekf, run_kalman, EkfModel, LinearGaussianModel};

use super::metric::relative_error;
use super::predict::evaluate_filter;
use super::train::TrainedFilter;
use super::window::scored_truth;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub sigma0_am: f64,
    pub rel_err_pct: f64,
}

/// Score a trained filter against data generated at each actual sigma0.
pub fn robustness_sweep(
    filter: &TrainedFilter,
    nominal: &ModelSpec,
    sigma0_am_values: &[f64],
    n_paths: usize,
    base_seed: u64,
) -> Result<Vec<SweepPoint>> {
    let horizon = filter.provenance.tconfig.horizon;
    let mut out = Vec::with_capacity(sigma0_am_values.len());
    for &sigma0_am in sigma0_am_values {
        let actual = nominal.with_sigma0(sigma0_am);
        let set = generate_dataset(&actual, n_paths, horizon, base_seed)?;
        let rel_err_pct = evaluate_filter(filter, &set)?;
        out.push(SweepPoint {
            sigma0_am,
            rel_err_pct,
        });
    }
    Ok(out)
}

/// Classical baseline applicable to a model kind, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaselineKind {
    Kalman,
    ExtendedKalman,
}

impl BaselineKind {
    pub fn for_model(kind: ModelKind) -> Option<BaselineKind> {
        if kind.is_linear() {
            Some(BaselineKind::Kalman)
        } else if kind.is_nonlinear() {
            Some(BaselineKind::ExtendedKalman)
        } else {
            // no recursive dynamics for the switching systems
            None
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BaselineKind::Kalman => "kf",
            BaselineKind::ExtendedKalman => "ekf",
        }
    }
}

/// Relative error of the nominal-parameterized KF/EKF on one generated set.
pub fn baseline_error(
    nominal: &ModelSpec,
    baseline: BaselineKind,
    sigma0_am: f64,
    n_paths: usize,
    horizon: usize,
    n0: usize,
    base_seed: u64,
) -> Result<f64> {
    let actual = nominal.with_sigma0(sigma0_am);
    let set = generate_dataset(&actual, n_paths, horizon, base_seed)?;
    let est: Vec<Vec<f64>> = match baseline {
        BaselineKind::Kalman => {
            let model = LinearGaussianModel::from_model_spec(nominal)?;
            set.paths
                .iter()
                .map(|p| run_kalman(&model, p, n0))
                .collect::<Result<_>>()?
        }
        BaselineKind::ExtendedKalman => {
            let model = EkfModel::from_model_spec(nominal)?;
            set.paths
                .iter()
                .map(|p| run_ekf(&model, p, n0))
                .collect::<Result<_>>()?
        }
    };
    let truth: Vec<Vec<f64>> = set
        .paths
        .iter()
        .map(|p| scored_truth(p, n0))
        .collect::<Result<_>>()?;
    relative_error(&est, &truth, nominal.state_dim())
}

/// Baseline sweep over the actual sigma0 values.
pub fn baseline_sweep(
    nominal: &ModelSpec,
    baseline: BaselineKind,
    sigma0_am_values: &[f64],
    n_paths: usize,
    horizon: usize,
    n0: usize,
    base_seed: u64,
) -> Result<Vec<SweepPoint>> {
    if BaselineKind::for_model(nominal.kind) != Some(baseline) {
        return Err(Error::Config(format!(
            "{} does not apply to {}",
            baseline.label(),
            nominal.kind
        )));
    }
    sigma0_am_values
        .iter()
        .map(|&sigma0_am| {
            baseline_error(nominal, baseline, sigma0_am, n_paths, horizon, n0, base_seed).map(
                |rel_err_pct| SweepPoint {
                    sigma0_am,
                    rel_err_pct,
                },
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::simulate_path;
    use crate::neural::{init_weights, Architecture, NetworkConfig};
    use crate::pipeline::train::{Provenance, TrainingConfig};

    #[test]
    fn empty_sweep_is_empty() {
        let model = ModelSpec::preset(ModelKind::Linear1D);
        let config = NetworkConfig::preset(Architecture::Dnn, 10, 1, 1).unwrap();
        let filter = TrainedFilter {
            weights: init_weights(&config, 0).unwrap(),
            config,
            provenance: Provenance {
                model: model.clone(),
                tconfig: TrainingConfig {
                    n0: 10,
                    horizon: 50,
                    n_paths: 1,
                    epochs: 0,
                    ..TrainingConfig::default()
                },
                seed: 0,
                epoch_losses: vec![],
                validation_losses: vec![],
                stopped_early_at: None,
            },
        };
        let pts = robustness_sweep(&filter, &model, &[], 2, 1).unwrap();
        assert!(pts.is_empty());
    }

    #[test]
    fn common_random_numbers_share_the_state_paths() {
        // same base seed: only the observation noise scale differs
        let nominal = ModelSpec::preset(ModelKind::Linear1D);
        let a = simulate_path(&nominal.with_sigma0(0.5), 50, 7, false).unwrap();
        let b = simulate_path(&nominal.with_sigma0(2.0), 50, 7, false).unwrap();
        assert_eq!(a.states, b.states);
        assert_ne!(a.observations, b.observations);
        // and the noise draw itself is shared: y - x scales exactly
        for n in 0..=50 {
            let va = (a.observations[n] - a.states[n]) / 0.5;
            let vb = (b.observations[n] - b.states[n]) / 2.0;
            assert!((va - vb).abs() < 1e-12);
        }
    }

    #[test]
    fn baseline_applicability() {
        assert_eq!(
            BaselineKind::for_model(ModelKind::Linear2D),
            Some(BaselineKind::Kalman)
        );
        assert_eq!(
            BaselineKind::for_model(ModelKind::NonLinear1D),
            Some(BaselineKind::ExtendedKalman)
        );
        assert_eq!(BaselineKind::for_model(ModelKind::Switching1D), None);
        let swt = ModelSpec::preset(ModelKind::Switching1D);
        assert!(baseline_sweep(&swt, BaselineKind::Kalman, &[0.5], 1, 50, 10, 0).is_err());
    }
}
