//! Continuous-time Markov chain regime simulation.
//!
//! The chain is simulated exactly through its exponential holding times and
//! then sampled on the grid t = n*eta, so discretization introduces no error.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::error::Result;
use crate::rng::regime_rng;

use super::model::validate_generator;

/// Sample the regime process alpha_0..alpha_horizon on the grid t = n*eta.
///
/// alpha_0 is drawn uniformly from `regime_values`; state `i` holds for an
/// Exp(-q_ii) time and then jumps to `j != i` with probability q_ij / (-q_ii).
pub fn simulate_markov_chain(
    q: &DMatrix<f64>,
    regime_values: &[f64],
    eta: f64,
    horizon: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut rng = regime_rng(seed);
    simulate_markov_chain_with(q, regime_values, eta, horizon, &mut rng)
}

pub(crate) fn simulate_markov_chain_with(
    q: &DMatrix<f64>,
    regime_values: &[f64],
    eta: f64,
    horizon: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    validate_generator(q, regime_values)?;
    let k = regime_values.len();

    let mut out = Vec::with_capacity(horizon + 1);
    let mut state = rng.random_range(0..k);
    let mut t = 0.0_f64;

    while out.len() <= horizon {
        let rate = -q[(state, state)];
        if rate <= 0.0 {
            // absorbing state: hold forever
            while out.len() <= horizon {
                out.push(regime_values[state]);
            }
            break;
        }
        let hold: f64 = Exp::new(rate).expect("rate > 0").sample(rng);
        let t_jump = t + hold;
        // grid points strictly before the jump belong to the current state
        while out.len() <= horizon && (out.len() as f64) * eta < t_jump {
            out.push(regime_values[state]);
        }
        // jump to j != i with probability q_ij / rate
        let mut u = rng.random::<f64>() * rate;
        let mut next = state;
        for j in 0..k {
            if j == state {
                continue;
            }
            let w = q[(state, j)];
            if u < w {
                next = j;
                break;
            }
            u -= w;
        }
        if next == state {
            // numerical leftover: take the last positive-rate neighbor
            next = (0..k)
                .rev()
                .find(|&j| j != state && q[(state, j)] > 0.0)
                .unwrap_or(state);
        }
        state = next;
        t = t_jump;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symmetric_q() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[-2.0, 2.0, 2.0, -2.0])
    }

    #[test]
    fn zero_generator_is_constant() {
        let q = DMatrix::zeros(2, 2);
        for seed in 0..8 {
            let alpha = simulate_markov_chain(&q, &[1.0, 2.0], 0.005, 500, seed).unwrap();
            assert_eq!(alpha.len(), 501);
            assert!(alpha.iter().all(|&a| a == alpha[0]));
        }
    }

    #[test]
    fn invalid_generator_rejected() {
        let q = DMatrix::from_row_slice(2, 2, &[-2.0, 2.0 + 1e-6, 2.0, -2.0]);
        assert!(simulate_markov_chain(&q, &[1.0, 2.0], 0.005, 10, 0).is_err());
        let q = DMatrix::from_row_slice(2, 2, &[2.0, -2.0, -2.0, 2.0]);
        assert!(simulate_markov_chain(&q, &[1.0, 2.0], 0.005, 10, 0).is_err());
    }

    #[test]
    fn values_come_from_state_space() {
        let alpha = simulate_markov_chain(&symmetric_q(), &[1.0, 2.0], 0.005, 20_000, 7).unwrap();
        assert!(alpha.iter().all(|&a| a == 1.0 || a == 2.0));
    }

    #[test]
    fn occupancy_and_sojourn_match_generator() {
        // stationary occupancy of the symmetric chain is 1/2; holding rate 2
        // means a mean sojourn of 0.5 time units = 100 steps at eta = 0.005
        let n = 1_000_000;
        let alpha = simulate_markov_chain(&symmetric_q(), &[1.0, 2.0], 0.005, n, 42).unwrap();
        let occ1 = alpha.iter().filter(|&&a| a == 1.0).count() as f64 / alpha.len() as f64;
        assert!((occ1 - 0.5).abs() < 0.01, "occupancy {occ1}");

        let mut runs = Vec::new();
        let mut len = 1usize;
        for w in alpha.windows(2) {
            if w[0] == w[1] {
                len += 1;
            } else {
                runs.push(len);
                len = 1;
            }
        }
        let mean_run = runs.iter().sum::<usize>() as f64 / runs.len() as f64;
        assert!(
            (mean_run - 100.0).abs() < 5.0,
            "mean sojourn {mean_run} steps"
        );
    }

    #[test]
    fn deterministic_in_seed() {
        let a = simulate_markov_chain(&symmetric_q(), &[1.0, 2.0], 0.005, 5000, 9).unwrap();
        let b = simulate_markov_chain(&symmetric_q(), &[1.0, 2.0], 0.005, 5000, 9).unwrap();
        assert_eq!(a, b);
        let c = simulate_markov_chain(&symmetric_q(), &[1.0, 2.0], 0.005, 5000, 10).unwrap();
        assert_ne!(a, c);
    }
}
