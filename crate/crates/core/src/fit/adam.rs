use alloc::vec;
use alloc::vec::Vec;

use crate::splat::PARAM_COUNT;

/// Adam with a separate learning rate per parameter slot.
#[derive(Clone, Debug)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u32,
    m: Vec<[f64; PARAM_COUNT]>,
    v: Vec<[f64; PARAM_COUNT]>,
}

impl Adam {
    pub fn new(splats: usize) -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-15,
            step: 0,
            m: vec![[0.0; PARAM_COUNT]; splats],
            v: vec![[0.0; PARAM_COUNT]; splats],
        }
    }

    /// Returns the update to add to each parameter.
    pub fn step(&mut self, grads: &[[f64; PARAM_COUNT]], lr: &[f64; PARAM_COUNT]) -> Vec<[f64; PARAM_COUNT]> {
        assert_eq!(grads.len(), self.m.len());
        self.step += 1;
        let bc1 = 1.0 - libm::pow(self.beta1, self.step as f64);
        let bc2 = 1.0 - libm::pow(self.beta2, self.step as f64);
        let mut out = vec![[0.0; PARAM_COUNT]; grads.len()];
        for (k, g) in grads.iter().enumerate() {
            for i in 0..PARAM_COUNT {
                let m = self.beta1 * self.m[k][i] + (1.0 - self.beta1) * g[i];
                let v = self.beta2 * self.v[k][i] + (1.0 - self.beta2) * g[i] * g[i];
                self.m[k][i] = m;
                self.v[k][i] = v;
                let m_hat = m / bc1;
                let v_hat = v / bc2;
                out[k][i] = -lr[i] * m_hat / (libm::sqrt(v_hat) + self.eps);
            }
        }
        out
    }
}
