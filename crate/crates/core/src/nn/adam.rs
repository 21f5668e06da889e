use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First/second moment estimates for a list of parameter tensors.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub config: AdamConfig,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: u64,
}

impl AdamState {
    pub fn new(config: AdamConfig, shapes: &[usize]) -> Self {
        Self {
            config,
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// One bias-corrected Adam update over every parameter tensor.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::dim("adam_step tensors", self.m.len(), params.len().max(grads.len())));
        }
        for (i, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.len() != self.m[i].len() || g.len() != self.m[i].len() {
                return Err(Error::dim("adam_step tensor", self.m[i].len(), p.len().max(g.len())));
            }
        }
        self.t += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let bc1 = 1.0 - beta1.powi(self.t as i32);
        let bc2 = 1.0 - beta2.powi(self.t as i32);
        for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let m = &mut self.m[i];
            let v = &mut self.v[i];
            for j in 0..p.len() {
                m[j] = beta1 * m[j] + (1.0 - beta1) * g[j];
                v[j] = beta2 * v[j] + (1.0 - beta2) * g[j] * g[j];
                let m_hat = m[j] / bc1;
                let v_hat = v[j] / bc2;
                p[j] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_matches_hand_evaluation() {
        let mut state = AdamState::new(AdamConfig::default(), &[1]);
        let mut p = [0.0];
        state.step(&mut [&mut p[..]], &[&[1.0][..]]).unwrap();
        // m̂ = 1, v̂ = 1  =>  Δ = -lr / (1 + ε)
        assert!((p[0] - (-0.001 / (1.0 + 1e-8))).abs() < 1e-18);
        assert!((p[0] - (-0.000999999995)).abs() < 1e-10);
        assert_eq!(state.steps(), 1);
    }

    #[test]
    fn zero_gradients_leave_params_unchanged() {
        let mut state = AdamState::new(AdamConfig::default(), &[3]);
        let mut p = [0.5, -1.0, 2.0];
        for _ in 0..10 {
            state.step(&mut [&mut p[..]], &[&[0.0, 0.0, 0.0][..]]).unwrap();
        }
        assert_eq!(p, [0.5, -1.0, 2.0]);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let mut state = AdamState::new(AdamConfig::default(), &[2]);
        let mut p = [0.0; 3];
        assert!(state.step(&mut [&mut p[..]], &[&[0.0; 3][..]]).is_err());
        assert_eq!(state.steps(), 0);
    }
}
