//! Observation windowing.
//!
//! A path with points 0..=N yields one sample per scored step. Internally the
//! scored steps are the 0-based indices n0-1..=N-1 (the window y[k-n0+1..=k]
//! predicts x[k]); reports label them with the 1-based kappa = n0..N.

use std::ops::Range;

use crate::dynamics::SamplePath;
use crate::error::{Error, Result};
use crate::neural::Tensor;

/// One (window, target) training pair.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedSample {
    /// (n0 x m2) observations, oldest step first.
    pub input: Tensor,
    /// State at the window's final step.
    pub target: Vec<f64>,
    /// 1-based step label, n0 <= kappa <= N.
    pub kappa: usize,
    pub source_seed: u64,
}

/// Internal scored indices: n0-1..path_len-1, one per window.
pub fn scored_range(path_len: usize, n0: usize) -> Result<Range<usize>> {
    if n0 == 0 {
        return Err(Error::Usage("window length must be >= 1".into()));
    }
    if path_len < n0 + 1 {
        return Err(Error::Usage(format!(
            "path with {path_len} points is too short for window {n0}"
        )));
    }
    Ok(n0 - 1..path_len - 1)
}

/// Number of windows per path.
pub fn windows_per_path(path_len: usize, n0: usize) -> Result<usize> {
    Ok(scored_range(path_len, n0)?.len())
}

/// Copy the window ending at internal step `k` into `buf` (n0 * m2 values,
/// oldest step first).
#[inline]
pub fn fill_window(path: &SamplePath, k: usize, n0: usize, buf: &mut [f64]) {
    let m2 = path.obs_dim;
    debug_assert_eq!(buf.len(), n0 * m2);
    let start = (k + 1 - n0) * m2;
    buf.copy_from_slice(&path.observations[start..start + n0 * m2]);
}

/// All windows of one path.
pub fn make_windows(path: &SamplePath, n0: usize) -> Result<Vec<WindowedSample>> {
    let range = scored_range(path.len(), n0)?;
    let m2 = path.obs_dim;
    let mut out = Vec::with_capacity(range.len());
    for k in range {
        let mut buf = vec![0.0; n0 * m2];
        fill_window(path, k, n0, &mut buf);
        out.push(WindowedSample {
            input: Tensor::new(vec![n0, m2], buf)?,
            target: path.state(k).to_vec(),
            kappa: k + 1,
            source_seed: path.seed,
        });
    }
    Ok(out)
}

/// Truth states over the scored range, flattened row-major.
pub fn scored_truth(path: &SamplePath, n0: usize) -> Result<Vec<f64>> {
    let range = scored_range(path.len(), n0)?;
    let m1 = path.state_dim;
    let mut out = Vec::with_capacity(range.len() * m1);
    for k in range {
        out.extend_from_slice(path.state(k));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_path(values: Vec<f64>) -> SamplePath {
        SamplePath {
            state_dim: 1,
            obs_dim: 1,
            states: values.clone(),
            observations: values,
            regimes: None,
            seed: 17,
        }
    }

    #[test]
    fn default_geometry_gives_951_windows() {
        // N = 1000 -> 1001 points, n0 = 50
        assert_eq!(windows_per_path(1001, 50).unwrap(), 951);
    }

    #[test]
    fn window_equal_to_path_length_gives_one_sample() {
        let path = synthetic_path((1..=6).map(f64::from).collect());
        let windows = make_windows(&path, 5).unwrap();
        assert_eq!(windows.len(), 1);
        assert_eq!(windows[0].input.values(), &[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(windows[0].kappa, 5);
    }

    #[test]
    fn counting_path_window_is_one_through_fifty() {
        // y_n = n under 1-based labels: stored values are 1, 2, 3, ...
        let path = synthetic_path((1..=60).map(f64::from).collect());
        let windows = make_windows(&path, 50).unwrap();
        let first = &windows[0];
        assert_eq!(first.kappa, 50);
        let expected: Vec<f64> = (1..=50).map(f64::from).collect();
        assert_eq!(first.input.values(), expected.as_slice());
        assert_eq!(first.target, vec![50.0]);
    }

    #[test]
    fn short_path_is_a_usage_error() {
        let path = synthetic_path(vec![1.0, 2.0, 3.0]);
        assert!(make_windows(&path, 5).is_err());
    }
}
