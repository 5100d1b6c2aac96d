//! Monte Carlo sample-path generation for the six systems.
//!
//! State recursions (u_n, v_n are independent standard Gaussians):
//!
//! - Linear1D:     x_{n+1} = (1 + 0.1 eta) x_n + sqrt(eta) sigma u_n,      y_n = x_n + sigma0 v_n
//! - Linear2D:     x_{n+1} = (I + 0.1 eta F) x_n + sqrt(eta) sigma G u_n,  y_n = H' x_n + sigma0 v_n
//! - NonLinear1D:  x_{n+1} = x_n + eta sin(5 x_n) + sqrt(eta) sigma u_n,   y_n = x_n + sigma0 v_n
//! - NonLinear2D:  x_{n+1} = x_n + eta sin(5 F x_n) + sqrt(eta) sigma G u_n (sin elementwise)
//! - Switching1D:  x_n = sin(n eta alpha_n + sigma u_n),                   y_n = x_n + sigma0 v_n
//! - Switching2D:  (x_n, xbar_n) = (sin, cos)(n eta alpha_n + sigma u_n) with one shared u_n;
//!                 (y_n, ybar_n) = H (x_n, xbar_n) + sigma0 (2-vector noise)

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::noise_rng;

use super::ctmc::simulate_markov_chain;
use super::model::{ModelKind, ModelSpec};

/// One realization: state sequence, observation sequence, optional regimes.
///
/// Rows are stored flat (row-major over steps) so a 5000-path set stays cheap.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub state_dim: usize,
    pub obs_dim: usize,
    /// x_0..x_N, flattened; length (N+1) * state_dim.
    pub states: Vec<f64>,
    /// y_0..y_N, flattened; length (N+1) * obs_dim.
    pub observations: Vec<f64>,
    /// alpha_0..alpha_N for switching systems.
    pub regimes: Option<Vec<f64>>,
    pub seed: u64,
}

impl SamplePath {
    /// Number of time points, N+1.
    pub fn len(&self) -> usize {
        self.states.len() / self.state_dim
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, n: usize) -> &[f64] {
        &self.states[n * self.state_dim..(n + 1) * self.state_dim]
    }

    pub fn observation(&self, n: usize) -> &[f64] {
        &self.observations[n * self.obs_dim..(n + 1) * self.obs_dim]
    }
}

/// A batch of paths from one model.
#[derive(Debug, Clone)]
pub struct PathSet {
    pub model: ModelSpec,
    /// N: every path has N+1 points.
    pub horizon: usize,
    pub paths: Vec<SamplePath>,
}

impl PathSet {
    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }
}

struct NoiseSource {
    rng: ChaCha8Rng,
    zero: bool,
}

impl NoiseSource {
    fn fill(&mut self, buf: &mut [f64]) {
        if self.zero {
            buf.fill(0.0);
        } else {
            for v in buf.iter_mut() {
                *v = StandardNormal.sample(&mut self.rng);
            }
        }
    }

    fn scalar(&mut self) -> f64 {
        if self.zero {
            0.0
        } else {
            StandardNormal.sample(&mut self.rng)
        }
    }
}

/// Simulate one path. `zero_noise` forces u_n = v_n = 0 (test hook only).
pub fn simulate_path(
    model: &ModelSpec,
    horizon: usize,
    seed: u64,
    zero_noise: bool,
) -> Result<SamplePath> {
    model.validate()?;
    if horizon < 1 {
        return Err(Error::Usage("horizon must be >= 1".into()));
    }
    let m1 = model.state_dim();
    let m2 = model.obs_dim();
    let mut noise = NoiseSource {
        rng: noise_rng(seed),
        zero: zero_noise,
    };

    let mut states = vec![0.0; (horizon + 1) * m1];
    let mut observations = vec![0.0; (horizon + 1) * m2];
    let mut regimes = None;

    let sqrt_eta = model.eta.sqrt();
    let mut u = vec![0.0; m1];
    let mut v = vec![0.0; m2];

    match model.kind {
        ModelKind::Linear1D => {
            let a = 1.0 + 0.1 * model.eta;
            let se = sqrt_eta * model.sigma;
            let mut x = model.x0[0];
            for n in 0..=horizon {
                states[n] = x;
                noise.fill(&mut v);
                observations[n] = x + model.sigma0 * v[0];
                if n < horizon {
                    noise.fill(&mut u);
                    x = a * x + se * u[0];
                }
            }
        }
        ModelKind::Linear2D => {
            // drift matrix I + 0.1 eta F, extracted once
            let mut a = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    a[i][j] = f64::from(i == j) + 0.1 * model.eta * model.f_matrix[(i, j)];
                }
            }
            let g = mat2(&model.g_matrix);
            let ht = mat2_transpose(&model.h_matrix);
            let se = sqrt_eta * model.sigma;
            let mut x = [model.x0[0], model.x0[1]];
            for n in 0..=horizon {
                states[2 * n] = x[0];
                states[2 * n + 1] = x[1];
                noise.fill(&mut v);
                observations[2 * n] = ht[0][0] * x[0] + ht[0][1] * x[1] + model.sigma0 * v[0];
                observations[2 * n + 1] = ht[1][0] * x[0] + ht[1][1] * x[1] + model.sigma0 * v[1];
                if n < horizon {
                    noise.fill(&mut u);
                    let gx = [
                        g[0][0] * u[0] + g[0][1] * u[1],
                        g[1][0] * u[0] + g[1][1] * u[1],
                    ];
                    x = [
                        a[0][0] * x[0] + a[0][1] * x[1] + se * gx[0],
                        a[1][0] * x[0] + a[1][1] * x[1] + se * gx[1],
                    ];
                }
            }
        }
        ModelKind::NonLinear1D => {
            let se = sqrt_eta * model.sigma;
            let mut x = model.x0[0];
            for n in 0..=horizon {
                states[n] = x;
                noise.fill(&mut v);
                observations[n] = x + model.sigma0 * v[0];
                if n < horizon {
                    noise.fill(&mut u);
                    x = x + model.eta * (5.0 * x).sin() + se * u[0];
                }
            }
        }
        ModelKind::NonLinear2D => {
            let f = mat2(&model.f_matrix);
            let g = mat2(&model.g_matrix);
            let ht = mat2_transpose(&model.h_matrix);
            let se = sqrt_eta * model.sigma;
            let mut x = [model.x0[0], model.x0[1]];
            for n in 0..=horizon {
                states[2 * n] = x[0];
                states[2 * n + 1] = x[1];
                noise.fill(&mut v);
                observations[2 * n] = ht[0][0] * x[0] + ht[0][1] * x[1] + model.sigma0 * v[0];
                observations[2 * n + 1] = ht[1][0] * x[0] + ht[1][1] * x[1] + model.sigma0 * v[1];
                if n < horizon {
                    noise.fill(&mut u);
                    let fx = [
                        f[0][0] * x[0] + f[0][1] * x[1],
                        f[1][0] * x[0] + f[1][1] * x[1],
                    ];
                    let gu = [
                        g[0][0] * u[0] + g[0][1] * u[1],
                        g[1][0] * u[0] + g[1][1] * u[1],
                    ];
                    x = [
                        x[0] + model.eta * (5.0 * fx[0]).sin() + se * gu[0],
                        x[1] + model.eta * (5.0 * fx[1]).sin() + se * gu[1],
                    ];
                }
            }
        }
        ModelKind::Switching1D => {
            let alpha = regime_sequence(model, horizon, seed, zero_noise)?;
            for n in 0..=horizon {
                let un = noise.scalar();
                let x = ((n as f64) * model.eta * alpha[n] + model.sigma * un).sin();
                states[n] = x;
                noise.fill(&mut v);
                observations[n] = x + model.sigma0 * v[0];
            }
            regimes = Some(alpha);
        }
        ModelKind::Switching2D => {
            let alpha = regime_sequence(model, horizon, seed, zero_noise)?;
            let h = mat2(&model.h_matrix);
            for n in 0..=horizon {
                let un = noise.scalar();
                let theta = (n as f64) * model.eta * alpha[n] + model.sigma * un;
                let x = [theta.sin(), theta.cos()];
                states[2 * n] = x[0];
                states[2 * n + 1] = x[1];
                noise.fill(&mut v);
                observations[2 * n] = h[0][0] * x[0] + h[0][1] * x[1] + model.sigma0 * v[0];
                observations[2 * n + 1] = h[1][0] * x[0] + h[1][1] * x[1] + model.sigma0 * v[1];
            }
            regimes = Some(alpha);
        }
    }

    Ok(SamplePath {
        state_dim: m1,
        obs_dim: m2,
        states,
        observations,
        regimes,
        seed,
    })
}

fn regime_sequence(
    model: &ModelSpec,
    horizon: usize,
    seed: u64,
    zero_noise: bool,
) -> Result<Vec<f64>> {
    let q = model.generator_q.as_ref().expect("validated switching model");
    if zero_noise {
        // the zero-noise hook freezes the chain in its first regime value
        return Ok(vec![model.regime_values[0]; horizon + 1]);
    }
    simulate_markov_chain(q, &model.regime_values, model.eta, horizon, seed)
}

fn mat2(m: &nalgebra::DMatrix<f64>) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

fn mat2_transpose(m: &nalgebra::DMatrix<f64>) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(1, 0)]], [m[(0, 1)], m[(1, 1)]]]
}

/// Generate `n_paths` independent paths with seeds base_seed..base_seed+n_paths-1.
///
/// Paths are generated in parallel; the result is a pure function of the
/// arguments regardless of scheduling.
pub fn generate_dataset(
    model: &ModelSpec,
    n_paths: usize,
    horizon: usize,
    base_seed: u64,
) -> Result<PathSet> {
    if n_paths < 1 {
        return Err(Error::Usage("n_paths must be >= 1".into()));
    }
    model.validate()?;
    let paths: Vec<SamplePath> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| simulate_path(model, horizon, base_seed.wrapping_add(i), false))
        .collect::<Result<_>>()?;
    Ok(PathSet {
        model: model.clone(),
        horizon,
        paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn linear1d_zero_noise_recursion() {
        let model = ModelSpec::preset(ModelKind::Linear1D);
        let path = simulate_path(&model, 5, 1, true).unwrap();
        assert_abs_diff_eq!(path.states[1], 1.0005, epsilon = 1e-15);
        assert_abs_diff_eq!(path.states[2], 1.0005 * 1.0005, epsilon = 1e-15);
        assert!(path.observations.iter().zip(&path.states).all(|(y, x)| y == x));
    }

    #[test]
    fn nonlinear1d_zero_noise_drift() {
        let model = ModelSpec::preset(ModelKind::NonLinear1D);
        let path = simulate_path(&model, 1, 1, true).unwrap();
        assert_abs_diff_eq!(path.states[1], 1.0 + 0.005 * 5.0_f64.sin(), epsilon = 1e-15);
    }

    #[test]
    fn switching1d_noise_free_closed_form() {
        // zero generator plus a single regime value pins alpha = 1
        let mut model = ModelSpec::preset(ModelKind::Switching1D);
        model.sigma = 0.0;
        model.sigma0 = 0.0;
        model.generator_q = Some(nalgebra::DMatrix::zeros(1, 1));
        model.regime_values = vec![1.0];
        let path = simulate_path(&model, 200, 3, false).unwrap();
        assert_abs_diff_eq!(path.states[200], 1.0_f64.sin(), epsilon = 1e-12);
        assert_eq!(path.regimes.as_ref().unwrap().len(), 201);
    }

    #[test]
    fn simulate_path_is_deterministic() {
        for kind in ModelKind::ALL {
            let model = ModelSpec::preset(kind);
            let a = simulate_path(&model, 50, 123, false).unwrap();
            let b = simulate_path(&model, 50, 123, false).unwrap();
            assert_eq!(a, b, "{kind}");
            let c = simulate_path(&model, 50, 124, false).unwrap();
            assert_ne!(a.states, c.states, "{kind}");
        }
    }

    #[test]
    fn observation_noise_variance_matches_sigma0() {
        // over 1e5 draws the sample variance of y - x is sigma0^2 within 3 SE
        let model = ModelSpec::preset(ModelKind::Linear1D);
        let n: usize = 100;
        let paths = 1000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut count = 0usize;
        for seed in 0..paths {
            let p = simulate_path(&model, n, seed, false).unwrap();
            for i in 0..=n {
                let d = p.observations[i] - p.states[i];
                sum += d;
                sum_sq += d * d;
                count += 1;
            }
        }
        let mean = sum / count as f64;
        let var = sum_sq / count as f64 - mean * mean;
        let sigma0_sq = model.sigma0 * model.sigma0;
        // var of the sample variance of N(0, s^2) is ~ 2 s^4 / n
        let se = (2.0 * sigma0_sq * sigma0_sq / count as f64).sqrt();
        assert!(
            (var - sigma0_sq).abs() < 3.0 * se,
            "var {var} vs {sigma0_sq} (se {se})"
        );
    }

    #[test]
    fn switching2d_shared_noise_stays_on_circle() {
        let model = ModelSpec::preset(ModelKind::Switching2D);
        let path = simulate_path(&model, 400, 11, false).unwrap();
        for n in 0..=400 {
            let s = path.state(n);
            assert_abs_diff_eq!(s[0] * s[0] + s[1] * s[1], 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn regimes_live_in_state_space() {
        let model = ModelSpec::preset(ModelKind::Switching1D);
        let path = simulate_path(&model, 2000, 5, false).unwrap();
        let alpha = path.regimes.as_ref().unwrap();
        assert!(alpha.iter().all(|&a| a == 1.0 || a == 2.0));
    }

    #[test]
    fn dataset_is_deterministic_and_seeded() {
        let model = ModelSpec::preset(ModelKind::Linear1D);
        let a = generate_dataset(&model, 8, 30, 100).unwrap();
        let b = generate_dataset(&model, 8, 30, 100).unwrap();
        assert_eq!(a.paths, b.paths);
        let seeds: Vec<u64> = a.paths.iter().map(|p| p.seed).collect();
        assert_eq!(seeds, (100..108).collect::<Vec<u64>>());
        // degenerate batch equals a single simulate_path call
        let single = generate_dataset(&model, 1, 30, 77).unwrap();
        assert_eq!(single.paths[0], simulate_path(&model, 30, 77, false).unwrap());
    }

    #[test]
    fn path_lengths_are_consistent() {
        let model = ModelSpec::preset(ModelKind::Switching2D);
        let set = generate_dataset(&model, 3, 25, 0).unwrap();
        for p in &set.paths {
            assert_eq!(p.len(), 26);
            assert_eq!(p.states.len(), 26 * 2);
            assert_eq!(p.observations.len(), 26 * 2);
            assert_eq!(p.regimes.as_ref().unwrap().len(), 26);
        }
    }
}
