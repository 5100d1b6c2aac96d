//! Classical baselines: Kalman filter (linear systems) and extended Kalman
//! filter (nonlinear systems). The switching systems have no recursive
//! baseline; only the windowed neural estimators apply there.

mod ekf;
mod kalman;

pub use ekf::{ekf_sequence, ekf_step, run_ekf, EkfModel};
pub use kalman::{
    filter_sequence, kalman_step, kalman_update_at_origin, run_kalman, FilterState,
    LinearGaussianModel, MAX_INNOVATION_CONDITION,
};
