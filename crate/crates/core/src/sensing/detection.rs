//! SNR → detection probability via Shnidman's closed-form approximation.
//!
//! Shnidman's equation gives the SNR required for a target `(P_d, P_fa)`
//! pair. For the nonfluctuating case with a single pulse it inverts in
//! closed form; for the fluctuating cases the correction factor depends on
//! `P_d`, so the inversion is a bisection on `P_d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Swerling {
    /// Nonfluctuating (Swerling 0 / V).
    Zero,
    One,
    Two,
    Three,
    Four,
}

impl Swerling {
    pub fn from_case(case: u8) -> Option<Self> {
        Some(match case {
            0 | 5 => Swerling::Zero,
            1 => Swerling::One,
            2 => Swerling::Two,
            3 => Swerling::Three,
            4 => Swerling::Four,
            _ => return None,
        })
    }

    pub fn case(self) -> u8 {
        match self {
            Swerling::Zero => 0,
            Swerling::One => 1,
            Swerling::Two => 2,
            Swerling::Three => 3,
            Swerling::Four => 4,
        }
    }

    /// Fluctuation degrees-of-freedom parameter K (∞ for nonfluctuating).
    fn k(self, pulses: f64) -> Option<f64> {
        match self {
            Swerling::Zero => None,
            Swerling::One => Some(1.0),
            Swerling::Two => Some(pulses),
            Swerling::Three => Some(2.0),
            Swerling::Four => Some(2.0 * pulses),
        }
    }
}

const PULSES: f64 = 1.0;

fn eta_term(p: f64) -> f64 {
    (-0.8 * (4.0 * p * (1.0 - p)).ln()).sqrt()
}

/// Required linear SNR for `(pd, pfa)` with `pulses` noncoherently integrated
/// pulses.
pub fn required_snr(pd: f64, pfa: f64, pulses: f64, swerling: Swerling) -> f64 {
    let alpha = if pulses < 40.0 { 0.0 } else { 0.25 };
    let eta = eta_term(pfa) + (pd - 0.5).signum() * eta_term(pd);
    let x_inf = eta * (eta + 2.0 * (pulses / 2.0 + (alpha - 0.25)).sqrt());
    let c = match swerling.k(pulses) {
        None => 1.0,
        Some(k) => {
            let c1 = (((17.7006 * pd - 18.4496) * pd + 14.5339) * pd - 3.525) / k;
            let c_db = if pd <= 0.872 {
                c1
            } else {
                let c2 = ((27.31 * pd - 25.14).exp()
                    + (pd - 0.8) * (0.7 * (1e-5 / pfa).ln() + (2.0 * pulses - 20.0) / 80.0))
                    / k;
                c1 + c2
            };
            10f64.powf(c_db / 10.0)
        }
    };
    c * x_inf / pulses
}

/// Single-pulse detection probability for a square-law detector.
///
/// Returns exactly `pfa` at zero SNR and saturates at 1 for large SNR.
pub fn detection_probability(snr: f64, pfa: f64, swerling: Swerling) -> Result<f64> {
    if !(pfa > 0.0 && pfa < 1.0) {
        return Err(Error::PfaOutOfDomain(pfa));
    }
    let snr = snr.max(0.0);
    match swerling {
        Swerling::Zero => Ok(nonfluctuating(snr, pfa)),
        _ => Ok(bisect(snr, pfa, swerling)),
    }
}

fn nonfluctuating(snr: f64, pfa: f64) -> f64 {
    // X = η² + 2bη with b = sqrt(N/2 − 1/4); solve for η, then for P_d.
    let b = (PULSES / 2.0 - 0.25).sqrt();
    let x = snr * PULSES;
    let eta = -b + (b * b + x).sqrt();
    let d = eta - eta_term(pfa);
    let root = (1.0 - (-d * d / 0.8).exp()).max(0.0).sqrt();
    (0.5 * (1.0 + d.signum() * root)).clamp(0.0, 1.0)
}

fn bisect(snr: f64, pfa: f64, swerling: Swerling) -> f64 {
    let mut lo = pfa;
    let mut hi = 1.0 - 1e-12;
    if required_snr(hi, pfa, PULSES, swerling) <= snr {
        return 1.0;
    }
    if snr <= 0.0 {
        return pfa;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if required_snr(mid, pfa, PULSES, swerling) < snr {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    0.5 * (lo + hi)
}
