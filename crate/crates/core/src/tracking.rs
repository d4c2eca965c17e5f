//! Per-target extended Kalman filter on polar measurements, and the
//! position-variance tracking cost.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::{process_noise_cov, transition_matrix, MotionParams, TargetState};
use crate::numerics::{wrap_angle, Mat, RngStream};
use crate::sensing::{jacobian, meas_noise_cov, measure_fn, noisy_measurement, snr_track, Measurement, SnrModel};

/// Predicted positions closer than this to the radar have no usable bearing.
const DEGENERATE_RANGE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    /// `[x, y, vx, vy]`
    pub estimate: [f64; 4],
    pub covariance: Mat,
    /// Last tracking cost, m².
    pub cost: f64,
    pub target_id: u64,
    /// Dwell used on the last update, seconds.
    pub dwell_last: f64,
}

/// Everything `track_step` needs besides the track and the truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingModels {
    pub motion: MotionParams,
    pub snr: SnrModel,
    /// Floor applied to the dwell before computing SNR, seconds.
    pub min_dwell: f64,
}

/// A fresh track: zero state, identity covariance.
pub fn init_track(target_id: u64) -> Track {
    let covariance = Mat::identity(4);
    Track {
        estimate: [0.0; 4],
        cost: tracking_cost(&covariance),
        covariance,
        target_id,
        dwell_last: 0.0,
    }
}

/// `trace(E P Eᵀ)` with `E` selecting the position block.
pub fn tracking_cost(p: &Mat) -> f64 {
    p[(0, 0)] + p[(1, 1)]
}

/// `x̂ = F x`, `P = F P Fᵀ + Q`, symmetrized.
pub fn ekf_predict(track: &Track, f: &Mat, q: &Mat) -> Result<(Vec<f64>, Mat)> {
    let x = f.mul_vec(&track.estimate)?;
    let p = f
        .mul(&track.covariance)?
        .mul(&f.transpose())?
        .add(q)?
        .symmetrize();
    Ok((x, p))
}

/// Linear Kalman correction for an arbitrary-dimension model:
/// `K = P Hᵀ S⁻¹`, `x ← x + K ν`, `P ← (I − K H) P`, symmetrized.
///
/// Fails with [`Error::NotPositiveDefinite`] when `S = H P Hᵀ + R` cannot be
/// inverted.
pub fn kalman_correct(
    x_pred: &[f64],
    p_pred: &Mat,
    innovation: &[f64],
    h: &Mat,
    r: &Mat,
) -> Result<(Vec<f64>, Mat)> {
    let pht = p_pred.mul(&h.transpose())?;
    let s = h.mul(&pht)?.add(r)?.symmetrize();
    let k = pht.mul(&s.invert_spd()?)?;
    let dx = k.mul_vec(innovation)?;
    let x = x_pred.iter().zip(dx).map(|(a, b)| a + b).collect();
    let ikh = Mat::identity(p_pred.rows()).sub(&k.mul(h)?)?;
    let p = ikh.mul(p_pred)?.symmetrize();
    Ok((x, p))
}

/// Polar-measurement EKF update linearized at the predicted state.
/// The azimuth innovation is wrapped to (−π, π].
pub fn ekf_update(
    x_pred: &[f64],
    p_pred: &Mat,
    z: &Measurement,
    h: &Mat,
    r: &Mat,
) -> Result<(Vec<f64>, Mat)> {
    let (rp, ap) = measure_fn(x_pred[0], x_pred[1])?;
    let nu = [z.range - rp, wrap_angle(z.azimuth - ap)];
    kalman_correct(x_pred, p_pred, &nu, h, r)
}

/// One revisit of a confirmed track: predict over the revisit interval,
/// observe the true target with dwell `tau`, update, recompute the cost.
///
/// A track still sitting on the radar (fresh tracks start at the origin) has
/// no bearing to linearize about; that update is linearized at the
/// measurement's Cartesian position instead, with innovation
/// `H (z_xy − x̂)`. A singular innovation covariance skips the correction.
pub fn track_step(
    track: &Track,
    truth: &TargetState,
    tau: f64,
    models: &TrackingModels,
    rng: &mut RngStream,
) -> Result<Track> {
    let t = models.motion.revisit_interval;
    let f = transition_matrix(t);
    let q = process_noise_cov(t, models.motion.sigma_w2);
    let (x_pred, p_pred) = ekf_predict(track, &f, &q)?;

    let snr = snr_track(&models.snr, tau.max(models.min_dwell), truth.range());
    let r = meas_noise_cov(&models.snr, snr)?;
    let z = noisy_measurement(truth, &r, rng)?;

    let corrected = if x_pred[0].hypot(x_pred[1]) < DEGENERATE_RANGE {
        let (zx, zy) = z.to_cartesian();
        let h = jacobian(zx, zy)?;
        let nu = h.mul_vec(&[zx - x_pred[0], zy - x_pred[1], 0.0, 0.0])?;
        kalman_correct(&x_pred, &p_pred, &nu, &h, &r)
    } else {
        let h = jacobian(x_pred[0], x_pred[1])?;
        ekf_update(&x_pred, &p_pred, &z, &h, &r)
    };

    let (x, p) = match corrected {
        Ok(v) => v,
        Err(Error::NotPositiveDefinite { .. }) => {
            warn!(
                "target {}: singular innovation covariance, prediction only",
                track.target_id
            );
            (x_pred, p_pred)
        }
        Err(e) => return Err(e),
    };

    Ok(Track {
        estimate: [x[0], x[1], x[2], x[3]],
        cost: tracking_cost(&p),
        covariance: p,
        target_id: track.target_id,
        dwell_last: tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::Origin;
    use proptest::prelude::*;

    fn models() -> TrackingModels {
        TrackingModels {
            motion: MotionParams {
                revisit_interval: 2.5,
                sigma_w2: 16.0,
            },
            snr: SnrModel {
                snr0: 100.0,
                tau0: 1.0,
                r0: 3000.0,
                sigma_r0_sq: 16.0,
                sigma_th0_sq: 1e-6,
            },
            min_dwell: 2.5e-4,
        }
    }

    fn random_spd(rng: &mut RngStream, n: usize, jitter: f64) -> Mat {
        let a = Mat::new(n, n, (0..n * n).map(|_| rng.uniform(-2.0, 2.0)).collect()).unwrap();
        a.mul(&a.transpose())
            .unwrap()
            .add(&Mat::identity(n).scale(jitter))
            .unwrap()
            .symmetrize()
    }

    #[test]
    fn identity_prediction() {
        let mut t = init_track(0);
        t.estimate = [1.0, 2.0, 3.0, 4.0];
        let (x, p) = ekf_predict(&t, &Mat::identity(4), &Mat::zeros(4, 4)).unwrap();
        assert_eq!(x, t.estimate.to_vec());
        assert_eq!(p, t.covariance);
    }

    #[test]
    fn zero_prior_covariance_predicts_process_noise() {
        let mut t = init_track(0);
        t.covariance = Mat::zeros(4, 4);
        let q = process_noise_cov(2.5, 16.0);
        let (_, p) = ekf_predict(&t, &transition_matrix(2.5), &q).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn prediction_matches_explicit_triple_product() {
        let mut rng = RngStream::new(12);
        for _ in 0..50 {
            let mut t = init_track(0);
            t.covariance = random_spd(&mut rng, 4, 0.1);
            t.estimate = [rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3), 3.0, -2.0];
            let f = transition_matrix(rng.uniform(0.1, 5.0));
            let q = process_noise_cov(2.0, rng.uniform(0.0, 20.0));
            let (x, p) = ekf_predict(&t, &f, &q).unwrap();
            for i in 0..4 {
                let xi: f64 = (0..4).map(|k| f[(i, k)] * t.estimate[k]).sum();
                assert!((x[i] - xi).abs() < 1e-10 * (1.0 + xi.abs()));
                for j in 0..4 {
                    let mut s = q[(i, j)];
                    for a in 0..4 {
                        for b in 0..4 {
                            s += f[(i, a)] * t.covariance[(a, b)] * f[(j, b)];
                        }
                    }
                    assert!((p[(i, j)] - s).abs() < 1e-10 * (1.0 + s.abs()));
                }
            }
        }
    }

    #[test]
    fn uninformative_measurement_leaves_prediction() {
        let x_pred = vec![3000.0, 100.0, 10.0, 0.0];
        let p_pred = Mat::identity(4).scale(50.0);
        let z = Measurement {
            range: 3500.0,
            azimuth: 0.2,
            origin: Origin::FalseAlarm,
        };
        let h = jacobian(x_pred[0], x_pred[1]).unwrap();
        let r = Mat::identity(2).scale(1e12);
        let (x, p) = ekf_update(&x_pred, &p_pred, &z, &h, &r).unwrap();
        for i in 0..4 {
            assert!((x[i] - x_pred[i]).abs() < 1e-3);
        }
        assert!(p.sub(&p_pred).unwrap().max_abs() < 1e-6);
    }

    #[test]
    fn perfect_scalar_measurement_wins() {
        let h = Mat::identity(1);
        let (x, p) = kalman_correct(&[2.0], &Mat::diag(&[3.0]), &[5.0 - 2.0], &h, &Mat::zeros(1, 1)).unwrap();
        assert!((x[0] - 5.0).abs() < 1e-12);
        assert!(p[(0, 0)].abs() < 1e-12);
    }

    #[test]
    fn scalar_filter_follows_riccati_iteration() {
        let (f, q, r) = (1.0, 1.0, 2.0);
        let mut track_p = Mat::diag(&[10.0]);
        let mut x = vec![0.0];
        let mut oracle = 10.0;
        for _ in 0..50 {
            let t = Track {
                estimate: [0.0; 4],
                covariance: track_p.clone(),
                cost: 0.0,
                target_id: 0,
                dwell_last: 0.0,
            };
            let pp = Mat::diag(&[f]).mul(&t.covariance).unwrap().scale(f).add(&Mat::diag(&[q])).unwrap();
            let (nx, np) = kalman_correct(&x, &pp, &[1.0], &Mat::identity(1), &Mat::diag(&[r])).unwrap();
            x = nx;
            track_p = np;
            let prior = f * f * oracle + q;
            oracle = prior * r / (prior + r);
            assert!((track_p[(0, 0)] - oracle).abs() < 1e-12);
        }
        // closed-form steady state of the predicted variance: p² − q p − q r = 0
        let p_pred_ss = (q + (q * q + 4.0 * q * r).sqrt()) / 2.0;
        let post_ss = p_pred_ss * r / (p_pred_ss + r);
        assert!((track_p[(0, 0)] - post_ss).abs() < 1e-6);
    }

    #[test]
    fn fresh_track_examples() {
        let t = init_track(3);
        assert_eq!(t.estimate, [0.0; 4]);
        assert_eq!(t.covariance, Mat::identity(4));
        assert_eq!(t.cost, 2.0);
        let mut a = init_track(1);
        let b = init_track(2);
        a.covariance[(0, 0)] = 9.0;
        assert_eq!(b.covariance[(0, 0)], 1.0);
    }

    #[test]
    fn cost_examples() {
        assert_eq!(tracking_cost(&Mat::identity(4)), 2.0);
        assert_eq!(tracking_cost(&Mat::diag(&[1.0, 2.0, 3.0, 4.0])), 3.0);
        let mut rng = RngStream::new(4);
        let e = Mat::from_rows(&[[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]]);
        for _ in 0..20 {
            let p = random_spd(&mut rng, 4, 0.0);
            let oracle = e.mul(&p).unwrap().mul(&e.transpose()).unwrap().trace();
            assert!((tracking_cost(&p) - oracle).abs() < 1e-12);
        }
    }

    fn run(truth0: TargetState, tau: f64, steps: usize, seed: u64) -> Vec<Track> {
        let m = models();
        let mut truth = truth0;
        let mut track = init_track(truth.id);
        let mut out = Vec::new();
        let mut rng = RngStream::new(seed);
        for _ in 0..steps {
            truth = crate::motion::step_target(&truth, &m.motion, &mut rng).unwrap();
            track = track_step(&track, &truth, tau, &m, &mut rng).unwrap();
            out.push(track.clone());
        }
        out
    }

    #[test]
    fn long_dwell_on_near_target_reduces_cost() {
        let truth = TargetState::new(1, 0, (3000.0, 1000.0), (50.0, 0.0));
        let hist = run(truth, 2.5, 10, 5);
        assert!(hist.iter().any(|t| t.cost < 2.0), "{:?}", hist.iter().map(|t| t.cost).collect::<Vec<_>>());
    }

    #[test]
    fn mid_range_estimate_converges() {
        let m = models();
        let mut truth = TargetState::new(1, 0, (9000.0, 4000.0), (-150.0, 50.0));
        let mut track = init_track(1);
        let mut rng = RngStream::new(5);
        for _ in 0..12 {
            truth = crate::motion::step_target(&truth, &m.motion, &mut rng).unwrap();
            track = track_step(&track, &truth, 0.75, &m, &mut rng).unwrap();
        }
        let err = (truth.x - track.estimate[0]).hypot(truth.y - track.estimate[1]);
        assert!(err < 50.0, "position error {err}");
    }

    #[test]
    fn minimal_dwell_on_far_target_grows_cost() {
        let truth = TargetState::new(1, 0, (15_000.0, 5000.0), (0.0, -50.0));
        let hist = run(truth.clone(), 0.0, 30, 5);
        let near = run(truth, 2.5, 30, 5);
        assert!(hist.last().unwrap().cost > 100.0 * near.last().unwrap().cost);
        assert!(hist.last().unwrap().cost > 2.0);
    }

    #[test]
    fn track_steps_are_deterministic() {
        let truth = TargetState::new(1, 0, (5000.0, -2000.0), (100.0, 30.0));
        let a = run(truth.clone(), 0.7, 40, 99);
        let b = run(truth, 0.7, 40, 99);
        assert_eq!(a, b);
    }

    fn joseph(p_pred: &Mat, h: &Mat, r: &Mat) -> Mat {
        let s = h.mul(p_pred).unwrap().mul(&h.transpose()).unwrap().add(r).unwrap();
        let k = p_pred.mul(&h.transpose()).unwrap().mul(&s.invert_spd().unwrap()).unwrap();
        let ikh = Mat::identity(4).sub(&k.mul(h).unwrap()).unwrap();
        ikh.mul(p_pred)
            .unwrap()
            .mul(&ikh.transpose())
            .unwrap()
            .add(&k.mul(r).unwrap().mul(&k.transpose()).unwrap())
            .unwrap()
    }

    proptest! {
        #[test]
        fn update_never_raises_cost(seed in any::<u64>()) {
            let mut rng = RngStream::new(seed);
            let p_pred = random_spd(&mut rng, 4, 0.5);
            let x_pred = vec![rng.uniform(500.0, 2e4), rng.uniform(-2e4, 2e4), 0.0, 0.0];
            let h = jacobian(x_pred[0], x_pred[1]).unwrap();
            let r = Mat::diag(&[rng.uniform(1e-3, 1e3), rng.uniform(1e-9, 1e-2)]);
            let z = Measurement { range: 1000.0, azimuth: 0.1, origin: crate::sensing::Origin::FalseAlarm };
            let (_, p) = ekf_update(&x_pred, &p_pred, &z, &h, &r).unwrap();
            prop_assert!(tracking_cost(&p) <= tracking_cost(&p_pred) + 1e-9);
            prop_assert_eq!(p.clone(), p.transpose());
        }

        #[test]
        fn matches_joseph_form(seed in any::<u64>()) {
            let mut rng = RngStream::new(seed);
            let p_pred = random_spd(&mut rng, 4, 1.0);
            let x_pred = vec![rng.uniform(1000.0, 2e4), rng.uniform(-2e4, 2e4), 0.0, 0.0];
            let h = jacobian(x_pred[0], x_pred[1]).unwrap();
            let r = Mat::diag(&[rng.uniform(0.1, 100.0), rng.uniform(1e-8, 1e-4)]);
            let (_, p) = kalman_correct(&x_pred, &p_pred, &[0.0, 0.0], &h, &r).unwrap();
            let pj = joseph(&p_pred, &h, &r);
            prop_assert!(p.sub(&pj).unwrap().max_abs() <= 1e-6 * pj.max_abs());
        }

        #[test]
        fn sharper_measurements_never_hurt(seed in any::<u64>()) {
            let mut rng = RngStream::new(seed);
            let p_pred = random_spd(&mut rng, 4, 0.5);
            let x_pred = vec![rng.uniform(500.0, 2e4), rng.uniform(-2e4, 2e4), 0.0, 0.0];
            let h = jacobian(x_pred[0], x_pred[1]).unwrap();
            let r = Mat::diag(&[rng.uniform(1e-2, 1e3), rng.uniform(1e-8, 1e-3)]);
            let (_, p1) = kalman_correct(&x_pred, &p_pred, &[0.0, 0.0], &h, &r).unwrap();
            let (_, p2) = kalman_correct(&x_pred, &p_pred, &[0.0, 0.0], &h, &r.scale(0.5)).unwrap();
            prop_assert!(tracking_cost(&p2) <= tracking_cost(&p1) + 1e-9 * tracking_cost(&p1));
        }
    }
}
