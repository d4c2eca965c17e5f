//! Nearly-constant-velocity target kinematics in the plane.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numerics::{sample_gaussian, Mat, RngStream};

/// True kinematic state of one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetState {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    /// Slots since spawn.
    pub age: u64,
    pub id: u64,
    /// Slot index at which the target appeared.
    pub spawn_slot: u64,
}

impl TargetState {
    pub fn new(id: u64, spawn_slot: u64, pos: (f64, f64), vel: (f64, f64)) -> Self {
        Self {
            x: pos.0,
            y: pos.1,
            vx: vel.0,
            vy: vel.1,
            age: 0,
            id,
            spawn_slot,
        }
    }

    pub fn kinematics(&self) -> [f64; 4] {
        [self.x, self.y, self.vx, self.vy]
    }

    pub fn range(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionParams {
    /// Revisit interval T in seconds.
    pub revisit_interval: f64,
    /// Maneuverability noise variance σ²_w, (m/s²)².
    pub sigma_w2: f64,
}

/// Constant-velocity transition over `t` seconds.
pub fn transition_matrix(t: f64) -> Mat {
    let mut f = Mat::identity(4);
    f[(0, 2)] = t;
    f[(1, 3)] = t;
    f
}

/// Discrete white-noise-acceleration covariance over `t` seconds.
pub fn process_noise_cov(t: f64, sigma_w2: f64) -> Mat {
    let p = t.powi(4) / 4.0 * sigma_w2;
    let c = t.powi(3) / 2.0 * sigma_w2;
    let v = t * t * sigma_w2;
    Mat::from_rows(&[
        [p, 0.0, c, 0.0],
        [0.0, p, 0.0, c],
        [c, 0.0, v, 0.0],
        [0.0, c, 0.0, v],
    ])
}

/// Advances a target one revisit interval: `x ← F x + w`, `w ~ N(0, Q)`.
pub fn step_target(s: &TargetState, p: &MotionParams, rng: &mut RngStream) -> Result<TargetState> {
    let f = transition_matrix(p.revisit_interval);
    let mean = f.mul_vec(&s.kinematics())?;
    let q = process_noise_cov(p.revisit_interval, p.sigma_w2);
    let next = sample_gaussian(&mean, &q, rng)?;
    Ok(TargetState {
        x: next[0],
        y: next[1],
        vx: next[2],
        vy: next[3],
        age: s.age + 1,
        ..s.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_interval_is_identity() {
        assert_eq!(transition_matrix(0.0), Mat::identity(4));
    }

    #[test]
    fn table_revisit_interval() {
        let f = transition_matrix(2.5);
        assert_eq!(f[(0, 2)], 2.5);
        assert_eq!(f[(1, 3)], 2.5);
        assert_eq!(f.trace(), 4.0);
    }

    #[test]
    fn unit_step_moves_by_velocity() {
        let out = transition_matrix(1.0).mul_vec(&[0.0, 0.0, 10.0, -4.0]).unwrap();
        assert_eq!(out, vec![10.0, -4.0, 10.0, -4.0]);
    }

    #[test]
    fn process_noise_substitution() {
        assert_eq!(process_noise_cov(2.5, 0.0), Mat::zeros(4, 4));
        let q = process_noise_cov(1.0, 16.0);
        let want = Mat::from_rows(&[
            [4.0, 0.0, 8.0, 0.0],
            [0.0, 4.0, 0.0, 8.0],
            [8.0, 0.0, 16.0, 0.0],
            [0.0, 8.0, 0.0, 16.0],
        ]);
        assert_eq!(q, want);
    }

    #[test]
    fn deterministic_step_without_noise() {
        let s = TargetState::new(7, 3, (0.0, 0.0), (10.0, 0.0));
        let p = MotionParams {
            revisit_interval: 2.5,
            sigma_w2: 0.0,
        };
        let mut rng = RngStream::new(0);
        let n = step_target(&s, &p, &mut rng).unwrap();
        assert_eq!(n.kinematics(), [25.0, 0.0, 10.0, 0.0]);
        assert_eq!((n.id, n.spawn_slot, n.age), (7, 3, 1));
    }

    #[test]
    fn noise_covariance_monte_carlo() {
        let p = MotionParams {
            revisit_interval: 2.5,
            sigma_w2: 16.0,
        };
        let q = process_noise_cov(p.revisit_interval, p.sigma_w2);
        let origin = TargetState::new(0, 0, (0.0, 0.0), (0.0, 0.0));
        let mut rng = RngStream::new(77);
        let n = 100_000;
        let mut acc = [[0.0; 4]; 4];
        for _ in 0..n {
            let k = step_target(&origin, &p, &mut rng).unwrap().kinematics();
            for i in 0..4 {
                for j in 0..4 {
                    acc[i][j] += k[i] * k[j];
                }
            }
        }
        for (i, j) in [(0, 0), (1, 1), (2, 2), (3, 3), (0, 2), (1, 3)] {
            let emp = acc[i][j] / n as f64;
            assert!((emp / q[(i, j)] - 1.0).abs() < 0.05, "({i},{j}) {emp}");
        }
    }

    // Eigenvalues of each 2x2 [[a, c], [c, b]] block via its characteristic
    // polynomial λ² − (a+b)λ + (ab − c²).
    fn block_eigenvalues(q: &Mat, i: usize, j: usize) -> (f64, f64) {
        let (a, b, c) = (q[(i, i)], q[(j, j)], q[(i, j)]);
        let tr = a + b;
        let det = a * b - c * c;
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        ((tr - disc) / 2.0, (tr + disc) / 2.0)
    }

    proptest! {
        #[test]
        fn semigroup(t1 in 0.0f64..10.0, t2 in 0.0f64..10.0) {
            let lhs = transition_matrix(t1 + t2);
            let rhs = transition_matrix(t1).mul(&transition_matrix(t2)).unwrap();
            prop_assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-12 * (1.0 + t1 + t2));
        }

        #[test]
        fn process_noise_is_psd_and_symmetric(t in 0.0f64..10.0, s in 0.0f64..100.0) {
            let q = process_noise_cov(t, s);
            prop_assert_eq!(q.clone(), q.transpose());
            for (i, j) in [(0, 2), (1, 3)] {
                let (lo, _) = block_eigenvalues(&q, i, j);
                prop_assert!(lo >= -1e-12 * q.max_abs().max(1.0));
            }
        }

        #[test]
        fn noiseless_step_is_linear(a in -1e4f64..1e4, b in -1e4f64..1e4, va in -300f64..300.0, k in -3.0f64..3.0) {
            let p = MotionParams { revisit_interval: 2.5, sigma_w2: 0.0 };
            let mut rng = RngStream::new(0);
            let s1 = TargetState::new(0, 0, (a, b), (va, -va));
            let s2 = TargetState::new(0, 0, (k * a, k * b), (k * va, -k * va));
            let n1 = step_target(&s1, &p, &mut rng).unwrap().kinematics();
            let n2 = step_target(&s2, &p, &mut rng).unwrap().kinematics();
            for i in 0..4 {
                prop_assert!((n2[i] - k * n1[i]).abs() <= 1e-9 * (1.0 + n1[i].abs()));
            }
        }
    }
}
