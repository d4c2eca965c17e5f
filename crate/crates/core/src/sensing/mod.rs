//! Radar observation models: polar measurements, dwell-dependent SNR and
//! noise, scanning detection, and false alarms.

mod detection;
mod scan;

pub use detection::{detection_probability, required_snr, Swerling};
pub use scan::{scan_pass, scan_snr, scan_time, tau_beam_for_budget, ScanModel};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::TargetState;
use crate::numerics::{sample_gaussian, wrap_angle, Mat, RngStream};

/// Where a measurement came from. Simulation-side ground truth only; the
/// tracker never looks at it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    Target(u64),
    FalseAlarm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    /// Meters.
    pub range: f64,
    /// Radians in (−π, π].
    pub azimuth: f64,
    pub origin: Origin,
}

impl Measurement {
    pub fn to_cartesian(&self) -> (f64, f64) {
        (
            self.range * self.azimuth.cos(),
            self.range * self.azimuth.sin(),
        )
    }

    pub fn distance_to(&self, other: &Measurement) -> f64 {
        let (ax, ay) = self.to_cartesian();
        let (bx, by) = other.to_cartesian();
        (ax - bx).hypot(ay - by)
    }
}

/// Reference values of the tracking SNR law and its noise variances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrModel {
    /// Linear SNR at the reference dwell and range.
    pub snr0: f64,
    /// Reference dwell τ₀, seconds.
    pub tau0: f64,
    /// Reference range r₀, meters.
    pub r0: f64,
    /// Range variance at unit SNR, m².
    pub sigma_r0_sq: f64,
    /// Azimuth variance at unit SNR, rad².
    pub sigma_th0_sq: f64,
}

/// Noise-free polar measurement `(range, azimuth)`, azimuth from `atan2`.
pub fn measure_fn(x: f64, y: f64) -> Result<(f64, f64)> {
    if x == 0.0 && y == 0.0 {
        return Err(Error::UndefinedBearing);
    }
    Ok((x.hypot(y), y.atan2(x)))
}

/// 2×4 Jacobian of [`measure_fn`] with respect to `[x, y, vx, vy]`.
pub fn jacobian(x: f64, y: f64) -> Result<Mat> {
    let r2 = x * x + y * y;
    if r2 == 0.0 {
        return Err(Error::UndefinedBearing);
    }
    let r = r2.sqrt();
    Ok(Mat::from_rows(&[
        [x / r, y / r, 0.0, 0.0],
        [-y / r2, x / r2, 0.0, 0.0],
    ]))
}

/// `SNR₀ · (τ/τ₀) · (r/r₀)⁻⁴`.
pub fn snr_track(m: &SnrModel, tau: f64, r: f64) -> f64 {
    let rr = m.r0 / r;
    m.snr0 * (tau / m.tau0) * (rr * rr) * (rr * rr)
}

/// `diag(σ²_{r,0}, σ²_{θ,0}) / SNR`.
pub fn meas_noise_cov(m: &SnrModel, snr: f64) -> Result<Mat> {
    if snr <= 0.0 || !snr.is_finite() {
        return Err(Error::InfiniteVariance(snr));
    }
    Ok(Mat::diag(&[m.sigma_r0_sq / snr, m.sigma_th0_sq / snr]))
}

/// `h(x) + v` with `v ~ N(0, R)`.
///
/// A negative range sample is folded to zero; azimuth is wrapped.
pub fn noisy_measurement(s: &TargetState, r: &Mat, rng: &mut RngStream) -> Result<Measurement> {
    let (range, az) = measure_fn(s.x, s.y)?;
    let z = sample_gaussian(&[range, az], r, rng)?;
    Ok(Measurement {
        range: z[0].max(0.0),
        azimuth: wrap_angle(z[1]),
        origin: Origin::Target(s.id),
    })
}
