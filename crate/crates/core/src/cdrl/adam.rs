use serde::{Deserialize, Serialize};

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(n_params: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// One descent step on `params` along `grads`.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len(), "parameter count changed");
        assert_eq!(grads.len(), self.m.len(), "gradient length mismatch");
        self.t += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.t as i32);
        let c2 = 1.0 - b2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = b1 * self.m[i] + (1.0 - b1) * g;
            self.v[i] = b2 * self.v[i] + (1.0 - b2) * g * g;
            let mhat = self.m[i] / c1;
            let vhat = self.v[i] / c2;
            params[i] -= self.lr * mhat / (vhat.sqrt() + self.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut adam = Adam::new(3, 0.1);
        let mut p = vec![1.0, -2.0, 3.0];
        for _ in 0..10 {
            adam.step(&mut p, &[0.0; 3]);
        }
        assert_eq!(p, vec![1.0, -2.0, 3.0]);
    }

    #[test]
    fn constant_gradient_step_approaches_lr() {
        let mut adam = Adam::new(2, 0.01);
        let mut p = vec![0.0, 0.0];
        let mut prev = p.clone();
        for _ in 0..2000 {
            prev.copy_from_slice(&p);
            adam.step(&mut p, &[3.0, -0.5]);
        }
        assert!(((prev[0] - p[0]) - 0.01).abs() < 1e-6);
        assert!(((p[1] - prev[1]) - 0.01).abs() < 1e-6);
    }

    #[test]
    fn first_step_is_lr_times_sign() {
        let mut adam = Adam::new(1, 0.05);
        let mut p = vec![0.0];
        adam.step(&mut p, &[1e-3]);
        assert!((p[0] + 0.05).abs() < 1e-6);
    }

    #[test]
    fn quadratic_bowl() {
        let mut adam = Adam::new(1, 0.01);
        let mut x = vec![1.0];
        let mut hit = None;
        for k in 1..=500 {
            let g = 2.0 * x[0];
            adam.step(&mut x, &[g]);
            if x[0].abs() < 1e-3 {
                hit = Some(k);
                break;
            }
        }
        // scalar reference run in double precision reaches the band at step 269
        assert_eq!(hit, Some(269));
    }
}
