//! Trains the constrained DDPG agent and compares its trailing-window
//! utility with fixed-fraction allocations on the same seed.
//!
//! cargo run --release --example train_cdrl -- [slots] [seed]

use std::time::Instant;

use cradar::config::RunConfig;
use cradar::cdrl::Trainer;
use cradar::report::EpisodeMetrics;
use cradar::rollout::run_fixed;
use cradar::SlotReport;

fn main() -> cradar::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let slots: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(5000);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);

    let mut cfg = RunConfig::default();
    cfg.slots = slots;
    cfg.seed = seed;
    let theta = cfg.objective.theta_max;
    let window = (slots / 10).max(1) as usize;

    let mut trainer = Trainer::new(&cfg)?;
    let mut reports: Vec<SlotReport> = Vec::new();
    let start = Instant::now();
    trainer.run(slots, |t, s| {
        reports.push(s.report.clone());
        if t.slot() % 1000 == 0 {
            let tail = &reports[reports.len().saturating_sub(1000)..];
            let m = EpisodeMetrics::from_reports(tail, theta);
            println!(
                "slot {:>6}  utility {:>10.1}  usage {:.3}  lambda {:>8.1}  sigma {:.3}  {:.1} slots/s",
                t.slot(),
                m.mean_utility,
                m.mean_usage,
                t.lambda(),
                s.noise_sigma,
                t.slot() as f64 / start.elapsed().as_secs_f64()
            );
        }
        Ok(())
    })?;

    let tail = &reports[reports.len() - window..];
    let cdrl = EpisodeMetrics::from_reports(tail, theta);
    println!("\ntrailing {window} slots");
    println!("  cdrl           utility {:>10.1}  usage {:.3}  cost {:?}", cdrl.mean_utility, cdrl.mean_usage, cdrl.mean_tracking_cost);
    for f in [0.3, 0.5, 0.7, 0.9] {
        let base = run_fixed(cfg.env_config(), seed, slots, f, cfg.objective.lambda0)?;
        let m = EpisodeMetrics::from_reports(&base[base.len() - window..], theta);
        println!("  fixed {f:.1}      utility {:>10.1}  usage {:.3}  cost {:?}", m.mean_utility, m.mean_usage, m.mean_tracking_cost);
    }
    Ok(())
}
