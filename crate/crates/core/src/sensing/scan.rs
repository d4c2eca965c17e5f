use serde::{Deserialize, Serialize};

use super::{detection_probability, meas_noise_cov, noisy_measurement, Measurement, Origin, SnrModel, Swerling};
use crate::error::Result;
use crate::motion::TargetState;
use crate::numerics::RngStream;

const TAG_DETECT: u64 = 0x5343_414e_4445_5401;
const TAG_FALSE_ALARM: u64 = 0x5343_414e_4641_4c02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanModel {
    /// Phase delay between adjacent beams, degrees.
    pub phase_delay_deg: f64,
    /// Lumped radar-equation constant C, so that `SNR = C τ_beam / r⁴`.
    pub scan_const: f64,
    pub pfa: f64,
    pub swerling: Swerling,
    /// Radius of the surveillance disk, meters.
    pub region_radius: f64,
    /// Association gate T_d, meters.
    pub confirm_threshold: f64,
}

impl ScanModel {
    /// Radar-equation constant that yields `snr` at (`tau_beam`, `range`).
    pub fn calibrate_const(tau_beam: f64, range: f64, snr: f64) -> f64 {
        snr * range.powi(4) / tau_beam
    }
}

/// Time for a full 360° sweep with `tau_beam` per beam.
pub fn scan_time(phase_delay_deg: f64, tau_beam: f64) -> f64 {
    360.0 / phase_delay_deg * tau_beam
}

/// Per-beam duration when `scan_budget` seconds are available for a sweep.
pub fn tau_beam_for_budget(phase_delay_deg: f64, scan_budget: f64) -> f64 {
    scan_budget * phase_delay_deg / 360.0
}

pub fn scan_snr(sm: &ScanModel, tau_beam: f64, r: f64) -> f64 {
    let r2 = r * r;
    sm.scan_const * tau_beam / (r2 * r2)
}

/// One full scanning sweep over the untracked targets.
///
/// Each target is detected with `P_d(scan_snr)`; a detection is a noisy
/// polar measurement whose variances scale as `1/SNR_scan`. With
/// probability `P_f` one extra false-alarm return lands uniformly on the
/// surveillance disk. Nothing is returned when no beam time is available.
///
/// Random draws are keyed by `(seed, slot, target id)` so that two runs with
/// the same seed see the same detection luck for the same target.
pub fn scan_pass(
    targets: &[&TargetState],
    sm: &ScanModel,
    noise: &SnrModel,
    tau_beam: f64,
    seed: u64,
    slot: u64,
) -> Result<Vec<Measurement>> {
    let mut out = Vec::new();
    if tau_beam <= 0.0 {
        return Ok(out);
    }
    for t in targets {
        let mut rng = RngStream::derived(seed, &[TAG_DETECT, slot, t.id]);
        let u = rng.unit();
        let r = t.range();
        if r <= 0.0 {
            continue;
        }
        let snr = scan_snr(sm, tau_beam, r);
        if snr <= 0.0 {
            continue;
        }
        let pd = detection_probability(snr, sm.pfa, sm.swerling)?;
        if u < pd {
            let cov = meas_noise_cov(noise, snr)?;
            out.push(noisy_measurement(t, &cov, &mut rng)?);
        }
    }
    let mut fa = RngStream::derived(seed, &[TAG_FALSE_ALARM, slot]);
    if fa.bernoulli(sm.pfa) {
        let range = sm.region_radius * fa.unit().sqrt();
        let azimuth = fa.uniform(-std::f64::consts::PI, std::f64::consts::PI);
        out.push(Measurement {
            range,
            azimuth,
            origin: Origin::FalseAlarm,
        });
    }
    Ok(out)
}
