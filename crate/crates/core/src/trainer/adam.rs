use serde::{Deserialize, Serialize};

use crate::error::{Result, ScfError};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamSettings {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamSettings {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta1 > 0.0 && self.beta1 < 1.0 && self.beta2 > 0.0 && self.beta2 < 1.0) {
            return Err(ScfError::config(format!(
                "Adam betas must lie in (0, 1), got {} and {}",
                self.beta1, self.beta2
            )));
        }
        if !(self.epsilon > 0.0) || !(self.learning_rate > 0.0) {
            return Err(ScfError::config("Adam epsilon and learning rate must be positive"));
        }
        Ok(())
    }
}

/// First and second moment estimates for a flat parameter vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            step: 0,
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }

    /// Bias-corrected Adam step, in place.
    pub fn update(&mut self, params: &mut [f64], grads: &[f64], settings: &AdamSettings) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.step += 1;
        let AdamSettings {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = *settings;
        let c1 = 1.0 - beta1.powi(self.step as i32);
        let c2 = 1.0 - beta2.powi(self.step as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g;
            self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_learning_rate() {
        let s = AdamSettings::default();
        for g in [1e-3, 0.5, -3.0, 250.0] {
            let mut p = [1.0];
            let mut st = AdamState::new(1);
            st.update(&mut p, &[g], &s);
            // m_hat = g, v_hat = g^2
            let expected = 1.0 - s.learning_rate * g / (g.abs() + s.epsilon);
            assert!((p[0] - expected).abs() < 1e-15);
            assert!(((1.0 - p[0]).abs() - s.learning_rate).abs() < 1e-7);
        }
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = [0.3, -2.0];
        let mut st = AdamState::new(2);
        for _ in 0..100 {
            st.update(&mut p, &[0.0, 0.0], &AdamSettings::default());
        }
        assert_eq!(p, [0.3, -2.0]);
    }

    #[test]
    fn identical_entries_stay_identical() {
        let mut p = [0.7, 0.7];
        let mut st = AdamState::new(2);
        for k in 0..50 {
            let g = (k as f64 * 0.3).sin();
            st.update(&mut p, &[g, g], &AdamSettings::default());
            assert_eq!(p[0], p[1]);
        }
    }

    #[test]
    fn settings_validation() {
        assert!(AdamSettings::default().validate().is_ok());
        let bad = AdamSettings {
            beta1: 1.0,
            ..AdamSettings::default()
        };
        assert!(bad.validate().is_err());
        let bad = AdamSettings {
            epsilon: 0.0,
            ..AdamSettings::default()
        };
        assert!(bad.validate().is_err());
    }
}
