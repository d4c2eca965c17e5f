//! Dense small-matrix algebra and seeded sampling.

mod mat;
mod rng;

pub use mat::Mat;
pub use rng::{derive_seed, splitmix64, RngStream};

use crate::error::{Error, Result};

/// Draws `mean + L u` with `L Lᵀ = cov` and `u` standard normal.
///
/// `cov` may be singular; an all-zero covariance returns `mean` exactly.
pub fn sample_gaussian(mean: &[f64], cov: &Mat, rng: &mut RngStream) -> Result<Vec<f64>> {
    if cov.rows() != mean.len() || cov.cols() != mean.len() {
        return Err(Error::DimensionMismatch(format!(
            "mean of length {} with {}x{} covariance",
            mean.len(),
            cov.rows(),
            cov.cols()
        )));
    }
    let l = cov.psd_factor()?;
    let u: Vec<f64> = (0..mean.len()).map(|_| rng.standard_normal()).collect();
    let lu = l.mul_vec(&u)?;
    Ok(mean.iter().zip(lu).map(|(m, d)| m + d).collect())
}

/// Wraps an angle to (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut w = a.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_covariance_returns_mean() {
        let mut rng = RngStream::new(1);
        let mean = [1.5, -2.0];
        let s = sample_gaussian(&mean, &Mat::zeros(2, 2), &mut rng).unwrap();
        assert_eq!(s, mean.to_vec());
    }

    #[test]
    fn monte_carlo_variances() {
        let mut rng = RngStream::new(2024);
        let cov = Mat::diag(&[16.0, 1e-6]);
        let n = 100_000;
        let mut sum = [0.0; 2];
        let mut sq = [0.0; 2];
        for _ in 0..n {
            let s = sample_gaussian(&[0.0, 0.0], &cov, &mut rng).unwrap();
            for k in 0..2 {
                sum[k] += s[k];
                sq[k] += s[k] * s[k];
            }
        }
        for (k, want) in [16.0, 1e-6].iter().enumerate() {
            let mean = sum[k] / n as f64;
            let var = sq[k] / n as f64 - mean * mean;
            assert!((var / want - 1.0).abs() < 0.05, "k={k} var={var}");
        }
    }

    #[test]
    fn same_seed_same_samples() {
        let cov = Mat::diag(&[2.0, 3.0]);
        let mut a = RngStream::new(9);
        let mut b = RngStream::new(9);
        for _ in 0..100 {
            assert_eq!(
                sample_gaussian(&[0.0, 0.0], &cov, &mut a).unwrap(),
                sample_gaussian(&[0.0, 0.0], &cov, &mut b).unwrap()
            );
        }
    }

    #[test]
    fn indefinite_covariance_is_rejected() {
        let mut rng = RngStream::new(1);
        let cov = Mat::diag(&[1.0, -4.0]);
        assert!(matches!(
            sample_gaussian(&[0.0, 0.0], &cov, &mut rng),
            Err(Error::Indefinite { .. })
        ));
    }

    #[test]
    fn angle_wrapping() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_angle(0.25), 0.25);
    }
}
