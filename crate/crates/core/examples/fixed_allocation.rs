//! Fixed-fraction baselines: every tracked target gets an equal share of
//! `fraction × T₀`, the rest of the slot scans. Prints the tracking versus
//! scanning trade-off on one seed.
//!
//! cargo run --release --example fixed_allocation -- [slots] [seed]

use cradar::config::RunConfig;
use cradar::report::EpisodeMetrics;
use cradar::rollout::run_fixed;

fn main() -> cradar::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let slots: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);

    let cfg = RunConfig::default();
    let theta = cfg.objective.theta_max;
    println!("{slots} slots, seed {seed}");
    println!("  fraction   utility   usage   tracking cost m²   confirmation latency   n_miss");
    for f in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let reports = run_fixed(cfg.env_config(), seed, slots, f, cfg.objective.lambda0)?;
        let m = EpisodeMetrics::from_reports(&reports, theta);
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.1}"));
        println!(
            "  {f:>8.1}  {:>8.1}  {:>6.3}  {:>17}  {:>21}  {:>7.4}",
            m.mean_utility,
            m.mean_usage,
            opt(m.mean_tracking_cost),
            opt(m.mean_confirmation_latency),
            m.mean_n_miss
        );
    }
    Ok(())
}
