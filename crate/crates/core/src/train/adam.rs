use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        AdamState {
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }
}

/// One bias-corrected Adam update in place.
pub fn adam_step(theta: &mut [f64], grad: &[f64], state: &mut AdamState, lr: f64, cfg: &AdamConfig) {
    assert_eq!(theta.len(), grad.len());
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for i in 0..theta.len() {
        let g = grad[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        let mh = state.m[i] / c1;
        let vh = state.v[i] / c2;
        theta[i] -= lr * mh / (vh.sqrt() + cfg.eps);
    }
}

/// Linear ramp from `lr_start` at epoch 0 to `lr_end` at the last epoch.
pub fn lr_schedule(epoch: usize, epochs: usize, lr_start: f64, lr_end: f64) -> f64 {
    if epochs <= 1 || epoch == 0 {
        return lr_start;
    }
    if epoch >= epochs - 1 {
        return lr_end;
    }
    lr_start + (lr_end - lr_start) * epoch as f64 / (epochs - 1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_endpoints_are_exact() {
        assert_eq!(lr_schedule(0, 25_000, 0.01, 1e-5), 0.01);
        assert_eq!(lr_schedule(24_999, 25_000, 0.01, 1e-5), 1e-5);
        let mid = lr_schedule(12_500, 25_000, 0.01, 1e-5);
        assert!((mid - 0.005005).abs() < 1e-6);
    }

    #[test]
    fn first_step_has_magnitude_lr() {
        let mut th = vec![0.0, 1.0, -2.0];
        let g = [3.0, -0.5, 1e-3];
        let mut st = AdamState::new(3);
        adam_step(&mut th, &g, &mut st, 0.01, &AdamConfig::default());
        assert!((th[0] + 0.01).abs() < 1e-9);
        assert!((th[1] - 1.01).abs() < 1e-9);
        assert!((th[2] + 2.01).abs() < 1e-7);
    }

    #[test]
    fn zero_gradient_leaves_theta() {
        let mut th = vec![0.3; 5];
        let mut st = AdamState::new(5);
        for _ in 0..10 {
            adam_step(&mut th, &[0.0; 5], &mut st, 0.01, &AdamConfig::default());
        }
        assert_eq!(th, vec![0.3; 5]);
    }

    #[test]
    fn update_is_invariant_to_loss_scale() {
        let g = [0.2, -0.04, 1.5, 7e-3];
        let g1000: Vec<f64> = g.iter().map(|x| x * 1000.0).collect();
        let (mut a, mut b) = (vec![0.0; 4], vec![0.0; 4]);
        let (mut sa, mut sb) = (AdamState::new(4), AdamState::new(4));
        adam_step(&mut a, &g, &mut sa, 0.01, &AdamConfig::default());
        adam_step(&mut b, &g1000, &mut sb, 0.01, &AdamConfig::default());
        for i in 0..4 {
            assert!((a[i] - b[i]).abs() <= 1e-5 * a[i].abs());
        }
    }
}
