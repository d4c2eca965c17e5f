//! Tracks one maneuvering target with the polar-measurement EKF at three
//! dwell times and prints the per-slot tracking cost `P₀₀ + P₁₁`.
//!
//! Tracks start at the radar with `P = I`. At long dwells the measurement
//! noise is small, the first updates drive a velocity jump of thousands of
//! m/s, and the filter can lose the target while its covariance, and so its
//! reported cost, stays small. The 90% run below shows that.
//!
//! cargo run --release --example ekf_tracking

use cradar::config::RunConfig;
use cradar::motion::{step_target, TargetState};
use cradar::numerics::RngStream;
use cradar::tracking::{init_track, track_step};

fn main() -> cradar::Result<()> {
    let cfg = RunConfig::default();
    let env = cfg.env_config();
    let models = env.tracking_models();
    let t0 = env.t0();

    for frac in [0.1, 0.5, 0.9] {
        let tau = frac * t0;
        let mut truth = TargetState::new(0, 0, (9000.0, 4000.0), (-150.0, 50.0));
        let mut track = init_track(truth.id);
        let mut motion_rng = RngStream::new(7);
        let mut meas_rng = RngStream::new(8);
        println!("dwell {tau:.2} s ({:.0}% of T0)", frac * 100.0);
        println!("  slot   range m   cost m²   position error m");
        for slot in 1..=15 {
            truth = step_target(&truth, &models.motion, &mut motion_rng)?;
            track = track_step(&track, &truth, tau, &models, &mut meas_rng)?;
            let err = (track.estimate[0] - truth.x).hypot(track.estimate[1] - truth.y);
            if slot <= 5 || slot % 5 == 0 {
                println!("  {slot:>4}  {:>8.0}  {:>8.2}  {err:>10.1}", truth.range(), track.cost);
            }
        }
    }
    Ok(())
}
