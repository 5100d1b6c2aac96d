//! The relative-error score.
//!
//! Over all (path, step) pairs of the scored range:
//!   A     = mean |est - truth|
//!   Sigma = mean (|est| + |truth|)
//! and the score is 100 * A / Sigma, with |.| the absolute value for scalar
//! steps and the Euclidean norm for vector steps. Symmetric, scale invariant,
//! and bounded by [0, 100] whenever Sigma > 0.

use crate::error::{Error, Result};

fn step_norm(v: &[f64]) -> f64 {
    match v.len() {
        1 => v[0].abs(),
        _ => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
    }
}

/// Relative error in percent. `est[p]` and `truth[p]` are the flattened
/// step-major sequences of path `p`, `dim` values per step.
pub fn relative_error(est: &[Vec<f64>], truth: &[Vec<f64>], dim: usize) -> Result<f64> {
    if dim == 0 {
        return Err(Error::Usage("step dimension must be >= 1".into()));
    }
    if est.len() != truth.len() {
        return Err(Error::Usage(format!(
            "path counts differ: {} vs {}",
            est.len(),
            truth.len()
        )));
    }
    if est.is_empty() {
        return Err(Error::Usage("no paths to score".into()));
    }
    let mut abs_diff_sum = 0.0;
    let mut magnitude_sum = 0.0;
    let mut steps = 0usize;
    for (e, t) in est.iter().zip(truth) {
        if e.len() != t.len() || e.len() % dim != 0 || e.is_empty() {
            return Err(Error::Usage(format!(
                "sequence lengths differ or are not a multiple of dim: {} vs {}",
                e.len(),
                t.len()
            )));
        }
        for (es, ts) in e.chunks_exact(dim).zip(t.chunks_exact(dim)) {
            let diff: Vec<f64> = es.iter().zip(ts).map(|(a, b)| a - b).collect();
            abs_diff_sum += step_norm(&diff);
            magnitude_sum += step_norm(es) + step_norm(ts);
            steps += 1;
        }
    }
    let a = abs_diff_sum / steps as f64;
    let sigma = magnitude_sum / steps as f64;
    if sigma == 0.0 {
        return Err(Error::UndefinedMetric(
            "all estimates and truths are zero".into(),
        ));
    }
    Ok(100.0 * a / sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_match_scores_zero() {
        let a = vec![vec![1.0, -2.0, 3.0]];
        assert_eq!(relative_error(&a, &a.clone(), 1).unwrap(), 0.0);
    }

    #[test]
    fn hand_computed_fifty_percent() {
        // single path, estimates all 3, truths all 1: A = 2, Sigma = 4
        let est = vec![vec![3.0; 10]];
        let truth = vec![vec![1.0; 10]];
        assert_abs_diff_eq!(relative_error(&est, &truth, 1).unwrap(), 50.0, epsilon = 1e-12);
    }

    #[test]
    fn symmetric_and_scale_invariant() {
        let est = vec![vec![3.0, -1.5, 0.25, 4.0]];
        let truth = vec![vec![1.0, 2.0, -0.5, 3.5]];
        let ab = relative_error(&est, &truth, 1).unwrap();
        let ba = relative_error(&truth, &est, 1).unwrap();
        assert_abs_diff_eq!(ab, ba, epsilon = 1e-12);
        let scale = |v: &Vec<f64>| v.iter().map(|x| x * 7.25).collect::<Vec<f64>>();
        let est_s = vec![scale(&est[0])];
        let truth_s = vec![scale(&truth[0])];
        assert_abs_diff_eq!(
            relative_error(&est_s, &truth_s, 1).unwrap(),
            ab,
            epsilon = 1e-12
        );
    }

    #[test]
    fn zero_normalizer_is_undefined() {
        let z = vec![vec![0.0; 4]];
        assert!(matches!(
            relative_error(&z, &z.clone(), 1),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn mismatched_shapes_rejected() {
        let a = vec![vec![1.0, 2.0]];
        let b = vec![vec![1.0, 2.0, 3.0]];
        assert!(relative_error(&a, &b, 1).is_err());
        let c = vec![vec![1.0, 2.0], vec![3.0]];
        assert!(relative_error(&a, &c, 1).is_err());
    }

    #[test]
    fn vector_steps_use_euclidean_norm() {
        // one step: est (3,4), truth (0,0): A = 5, Sigma = 5
        let est = vec![vec![3.0, 4.0]];
        let truth = vec![vec![0.0, 0.0]];
        assert_abs_diff_eq!(relative_error(&est, &truth, 2).unwrap(), 100.0, epsilon = 1e-12);
    }
}
