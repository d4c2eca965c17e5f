//! Detection probability of the scanning beam: the Shnidman curve for a
//! nonfluctuating target, and how the beam time left after tracking maps
//! to per-target detection at several ranges.
//!
//! cargo run --release --example scan_detection

use cradar::config::RunConfig;
use cradar::sensing::{detection_probability, scan_snr, scan_time, tau_beam_for_budget, Swerling};

fn main() -> cradar::Result<()> {
    println!("Pd versus single-pulse SNR");
    println!("  SNR dB   Pf 1e-4   Pf 1e-6");
    for db in (0..=20).step_by(2) {
        let snr = 10f64.powf(db as f64 / 10.0);
        let a = detection_probability(snr, 1e-4, Swerling::Zero)?;
        let b = detection_probability(snr, 1e-6, Swerling::Zero)?;
        println!("  {db:>6}   {a:>7.4}   {b:>7.4}");
    }

    let cfg = RunConfig::default();
    let sm = cfg.scan_model();
    let t0 = cfg.radar.revisit_interval_s;
    println!("\nscan budget left after tracking (T0 = {t0} s, φ = {}°)", sm.phase_delay_deg);
    println!("  tracking  τ_beam ms   Pd@5km   Pd@10km  Pd@15km");
    for tracking in [0.0, 0.5, 0.9, 0.99] {
        let budget = (1.0 - tracking) * t0;
        let tau_beam = tau_beam_for_budget(sm.phase_delay_deg, budget);
        debug_assert!((scan_time(sm.phase_delay_deg, tau_beam) - budget).abs() < 1e-12);
        let pd: Vec<String> = [5000.0, 10_000.0, 15_000.0]
            .iter()
            .map(|r| {
                detection_probability(scan_snr(&sm, tau_beam, *r), sm.pfa, sm.swerling)
                    .map(|p| format!("{p:>7.4}"))
            })
            .collect::<cradar::Result<_>>()?;
        println!("  {:>7.0}%  {:>9.3}  {}", tracking * 100.0, tau_beam * 1e3, pd.join("  "));
    }
    Ok(())
}
