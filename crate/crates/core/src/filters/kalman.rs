//! Discrete-time Kalman filter with Joseph-form covariance updates.

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{ModelKind, ModelSpec, SamplePath};
use crate::error::{Error, Result};
use crate::pipeline::scored_range;

/// Maximum admissible condition number of the innovation covariance.
pub const MAX_INNOVATION_CONDITION: f64 = 1e12;

/// Time-invariant linear-Gaussian state-space model in its filtering role.
///
/// State x_{n+1} = F x_n + w_n with w ~ N(0, Q); observation y_n = H x_n + v_n
/// with v ~ N(0, R). `h` is the observation matrix as applied (already
/// transposed where the generating model uses H').
#[derive(Debug, Clone, PartialEq)]
pub struct LinearGaussianModel {
    pub f: DMatrix<f64>,
    pub q_cov: DMatrix<f64>,
    pub h: DMatrix<f64>,
    pub r_cov: DMatrix<f64>,
    pub x0_mean: DVector<f64>,
    pub p0: DMatrix<f64>,
}

impl LinearGaussianModel {
    /// Kalman parameterization of a linear system spec: F = I + 0.1 eta F0,
    /// Q = eta sigma^2 G G', H = H0', R = sigma0^2 I, x0 known exactly.
    pub fn from_model_spec(spec: &ModelSpec) -> Result<Self> {
        spec.validate()?;
        if !spec.kind.is_linear() {
            return Err(Error::Config(format!(
                "Kalman baseline applies to linear kinds only, got {}",
                spec.kind
            )));
        }
        let m1 = spec.state_dim();
        let f = match spec.kind {
            ModelKind::Linear1D => DMatrix::from_element(1, 1, 1.0 + 0.1 * spec.eta),
            _ => DMatrix::identity(m1, m1) + 0.1 * spec.eta * &spec.f_matrix,
        };
        let q_cov = spec.eta * spec.sigma * spec.sigma * (&spec.g_matrix * spec.g_matrix.transpose());
        let h = spec.h_matrix.transpose();
        let r_cov = DMatrix::identity(m1, m1) * (spec.sigma0 * spec.sigma0);
        Ok(LinearGaussianModel {
            f,
            q_cov,
            h,
            r_cov,
            x0_mean: spec.x0.clone(),
            p0: DMatrix::zeros(m1, m1),
        })
    }

    pub fn state_dim(&self) -> usize {
        self.f.nrows()
    }
}

/// Filtering state: posterior mean and covariance after `step` observations.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub step: usize,
}

impl FilterState {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>, step: usize) -> Self {
        FilterState { mean, cov, step }
    }

    /// Covariance sanity: symmetric within 1e-10, non-negative diagonal.
    pub fn check(&self) -> Result<()> {
        let n = self.cov.nrows();
        for i in 0..n {
            if self.cov[(i, i)] < -1e-10 {
                return Err(Error::Numerical(format!(
                    "negative covariance diagonal at {i}: {}",
                    self.cov[(i, i)]
                )));
            }
            for j in (i + 1)..n {
                if (self.cov[(i, j)] - self.cov[(j, i)]).abs() > 1e-10 {
                    return Err(Error::Numerical("covariance asymmetry".into()));
                }
            }
        }
        Ok(())
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Measurement update (Joseph form). Shared by the KF and the EKF.
pub(crate) fn measurement_update(
    pred_mean: DVector<f64>,
    pred_cov: DMatrix<f64>,
    h: &DMatrix<f64>,
    r_cov: &DMatrix<f64>,
    y: &DVector<f64>,
    step: usize,
) -> Result<FilterState> {
    let s = h * &pred_cov * h.transpose() + r_cov;
    let s_inv = s.clone().try_inverse().ok_or_else(|| {
        Error::Numerical(format!("singular innovation covariance at step {step}"))
    })?;
    let cond = s.norm() * s_inv.norm();
    if !cond.is_finite() || cond > MAX_INNOVATION_CONDITION {
        return Err(Error::Numerical(format!(
            "ill-conditioned innovation covariance at step {step} (cond {cond:.3e})"
        )));
    }
    let gain = &pred_cov * h.transpose() * &s_inv;
    let innovation = y - h * &pred_mean;
    let mean = &pred_mean + &gain * innovation;
    let ikh = DMatrix::identity(pred_cov.nrows(), pred_cov.ncols()) - &gain * h;
    let mut cov = &ikh * &pred_cov * ikh.transpose() + &gain * r_cov * gain.transpose();
    symmetrize(&mut cov);
    Ok(FilterState { mean, cov, step })
}

/// One predict–update cycle: propagate through F, then assimilate `y`.
pub fn kalman_step(
    state: &FilterState,
    model: &LinearGaussianModel,
    y: &DVector<f64>,
) -> Result<FilterState> {
    let pred_mean = &model.f * &state.mean;
    let mut pred_cov = &model.f * &state.cov * model.f.transpose() + &model.q_cov;
    symmetrize(&mut pred_cov);
    measurement_update(pred_mean, pred_cov, &model.h, &model.r_cov, y, state.step + 1)
}

/// Update-only step for time 0, where the prior (x0_mean, p0) already refers
/// to the current instant.
pub fn kalman_update_at_origin(
    model: &LinearGaussianModel,
    y: &DVector<f64>,
) -> Result<FilterState> {
    measurement_update(
        model.x0_mean.clone(),
        model.p0.clone(),
        &model.h,
        &model.r_cov,
        y,
        0,
    )
}

/// Run the filter over a whole observation record, returning the posterior
/// state after every y_n (n = 0..=N).
pub fn filter_sequence(
    model: &LinearGaussianModel,
    observations: &[DVector<f64>],
) -> Result<Vec<FilterState>> {
    let mut out = Vec::with_capacity(observations.len());
    for (n, y) in observations.iter().enumerate() {
        let next = if n == 0 {
            kalman_update_at_origin(model, y)?
        } else {
            kalman_step(out.last().unwrap(), model, y)?
        };
        out.push(next);
    }
    Ok(out)
}

fn path_observations(path: &SamplePath) -> Vec<DVector<f64>> {
    (0..path.len())
        .map(|n| DVector::from_row_slice(path.observation(n)))
        .collect()
}

/// Kalman estimates over the scored window range (internal steps
/// n0-1..=N-1), flattened row-major, aligned with the windowed estimators.
pub fn run_kalman(model: &LinearGaussianModel, path: &SamplePath, n0: usize) -> Result<Vec<f64>> {
    if path.obs_dim != model.h.nrows() {
        return Err(Error::Usage(format!(
            "path observation dim {} does not match model ({})",
            path.obs_dim,
            model.h.nrows()
        )));
    }
    let states = filter_sequence(model, &path_observations(path))?;
    let range = scored_range(path.len(), n0)?;
    let m1 = model.state_dim();
    let mut out = Vec::with_capacity(range.len() * m1);
    for n in range {
        out.extend_from_slice(states[n].mean.as_slice());
    }
    Ok(out)
}
