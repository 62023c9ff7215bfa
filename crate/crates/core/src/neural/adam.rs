use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Adam hyperparameters. Defaults are the published ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        AdamState {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }
}

/// One bias-corrected Adam update.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, config: &AdamConfig) -> Result<()> {
    if grads.len() != params.len() || state.m.len() != params.len() || state.v.len() != params.len() {
        return Err(Error::DimensionMismatch {
            context: "adam buffers",
            expected: params.len(),
            actual: grads.len(),
        });
    }
    state.t += 1;
    let t = state.t as f64;
    let c1 = 1.0 - libm::pow(config.beta1, t);
    let c2 = 1.0 - libm::pow(config.beta2, t);
    let (b1, b2) = (config.beta1, config.beta2);
    for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(&mut state.m).zip(&mut state.v) {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= config.learning_rate * m_hat / (libm::sqrt(v_hat) + config.epsilon);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_from_fresh_state_is_a_no_op() {
        let mut p = vec![0.5, -1.5];
        let mut s = AdamState::new(2);
        adam_step(&mut p, &[0.0, 0.0], &mut s, &AdamConfig::default()).unwrap();
        assert_eq!(p, vec![0.5, -1.5]);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn first_step_matches_formula() {
        // m = 0.1, v = 0.001; m_hat = 1, v_hat = 1; step = lr / (1 + eps)
        let mut p = vec![0.0];
        let mut s = AdamState::new(1);
        adam_step(&mut p, &[1.0], &mut s, &AdamConfig::default()).unwrap();
        let m_hat = (0.1f64) / (1.0 - 0.9);
        let v_hat = (0.001f64) / (1.0 - 0.999);
        let expected = -0.001 * m_hat / (v_hat.sqrt() + 1e-8);
        assert!((p[0] - expected).abs() < 1e-15);
        assert!((p[0] + 0.001).abs() < 1e-10);
    }

    #[test]
    fn mismatched_buffers_error() {
        let mut s = AdamState::new(2);
        assert!(adam_step(&mut [0.0], &[0.0], &mut s, &AdamConfig::default()).is_err());
    }
}
