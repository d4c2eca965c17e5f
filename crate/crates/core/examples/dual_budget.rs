//! The Lagrangian budget constraint: projected dual ascent on λ and the
//! reward it shapes. Drives λ with a synthetic usage pattern to show it
//! rising under over-use, draining to zero under slack, and holding still
//! at the threshold.
//!
//! cargo run --release --example dual_budget

use cradar::cdrl::DualVariable;
use cradar::config::RunConfig;
use cradar::env::reward;

fn main() {
    let cfg = RunConfig::default();
    let o = &cfg.objective;
    let mut dual = DualVariable::new(o.lambda0, o.alpha, o.theta_max, 0);
    println!("Θ = {}, α = {}, λ₀ = {}", o.theta_max, o.alpha, o.lambda0);
    println!("  slot  usage     λ used   reward(U = -500)   λ next");
    let pattern = [1.2, 1.2, 1.0, 0.9, 0.9, 0.5, 0.2, 0.0, 0.9, 1.5];
    for (t, usage) in pattern.iter().enumerate() {
        let lambda = dual.lambda;
        let r = reward(-500.0, *usage, lambda, o.theta_max);
        let next = dual.update(*usage);
        println!("  {t:>4}  {usage:>5.2}  {lambda:>9.1}  {r:>17.1}  {next:>7.1}");
    }
}
