//! CSV outputs: the per-slot trace and the per-episode summary.
//!
//! Floats are written like C's `%.9g`. Entries without a track are left
//! blank. Column order is fixed per [`SCHEMA_VERSION`].

use std::io::Write;

use crate::cdrl::UpdateStats;
use crate::config::SCHEMA_VERSION;
use crate::env::SlotReport;
use crate::error::Result;

/// `%.9g`.
pub fn fmt_g9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.8e}");
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let mant = strip_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (8 - exp) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_g9).unwrap_or_default()
}

pub fn trace_header(n: usize) -> String {
    let mut cols: Vec<String> = [
        "slot", "n_targets", "n_tracked", "n_miss", "usage", "lambda", "utility", "reward",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for name in ["cost", "dwell", "dist"] {
        cols.extend((1..=n).map(|i| format!("{name}_{i}")));
    }
    cols.extend(["critic_loss", "actor_obj", "noise_sigma"].map(String::from));
    for name in ["x", "y", "xhat", "yhat"] {
        cols.extend((1..=n).map(|i| format!("{name}_{i}")));
    }
    cols.push("episode".into());
    cols.join(",")
}

/// Training-only columns.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrainColumns {
    pub stats: Option<UpdateStats>,
    pub noise_sigma: Option<f64>,
}

pub fn trace_row(r: &SlotReport, train: TrainColumns, episode: u64) -> String {
    let mut cols = vec![
        r.slot_index.to_string(),
        r.n_targets.to_string(),
        r.n_tracked.to_string(),
        r.n_miss.to_string(),
        fmt_g9(r.budget_usage),
        fmt_g9(r.lambda),
        fmt_g9(r.utility),
        fmt_g9(r.reward),
    ];
    cols.extend(r.tracks.iter().map(|t| opt(t.as_ref().map(|t| t.cost))));
    cols.extend(r.tracks.iter().map(|t| fmt_g9(t.as_ref().map_or(0.0, |t| t.dwell))));
    cols.extend(r.tracks.iter().map(|t| opt(t.as_ref().map(|t| t.true_range))));
    cols.push(opt(train.stats.map(|s| s.critic_loss)));
    cols.push(opt(train.stats.map(|s| s.actor_objective)));
    cols.push(opt(train.noise_sigma));
    cols.extend(r.tracks.iter().map(|t| opt(t.as_ref().map(|t| t.true_pos.0))));
    cols.extend(r.tracks.iter().map(|t| opt(t.as_ref().map(|t| t.true_pos.1))));
    cols.extend(r.tracks.iter().map(|t| opt(t.as_ref().map(|t| t.est_pos.0))));
    cols.extend(r.tracks.iter().map(|t| opt(t.as_ref().map(|t| t.est_pos.1))));
    cols.push(episode.to_string());
    cols.join(",")
}

pub struct TraceWriter<W: Write> {
    out: W,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(mut out: W, n: usize) -> Result<Self> {
        writeln!(out, "{}", trace_header(n))?;
        Ok(Self { out })
    }

    pub fn write(&mut self, r: &SlotReport, train: TrainColumns, episode: u64) -> Result<()> {
        writeln!(self.out, "{}", trace_row(r, train, episode))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Aggregates over one episode (or any window of slots).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeMetrics {
    pub slots: usize,
    pub mean_utility: f64,
    pub mean_reward: f64,
    pub mean_usage: f64,
    /// Fraction of slots with usage above Θ_max.
    pub violation_fraction: f64,
    /// Mean spawn-to-confirmation latency in slots; `None` without confirmations.
    pub mean_confirmation_latency: Option<f64>,
    /// Mean cost per tracked target-slot; `None` if nothing was tracked.
    pub mean_tracking_cost: Option<f64>,
    pub mean_n_miss: f64,
    pub confirmations: usize,
}

impl EpisodeMetrics {
    pub fn from_reports(reports: &[SlotReport], theta_max: f64) -> Self {
        let n = reports.len().max(1) as f64;
        let mean = |f: &dyn Fn(&SlotReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        let latencies: Vec<u64> = reports
            .iter()
            .flat_map(|r| r.confirmation_latencies.iter().copied())
            .collect();
        let costs: Vec<f64> = reports.iter().flat_map(|r| r.costs()).collect();
        Self {
            slots: reports.len(),
            mean_utility: mean(&|r| r.utility),
            mean_reward: mean(&|r| r.reward),
            mean_usage: mean(&|r| r.budget_usage),
            violation_fraction: mean(&|r| f64::from(u8::from(r.budget_usage > theta_max))),
            mean_confirmation_latency: (!latencies.is_empty())
                .then(|| latencies.iter().sum::<u64>() as f64 / latencies.len() as f64),
            mean_tracking_cost: (!costs.is_empty())
                .then(|| costs.iter().sum::<f64>() / costs.len() as f64),
            mean_n_miss: mean(&|r| r.n_miss as f64),
            confirmations: latencies.len(),
        }
    }
}

pub const SUMMARY_HEADER: &str = "episode,seed,slots,mean_utility,mean_reward,mean_usage,\
violation_fraction,mean_confirmation_latency,mean_tracking_cost,mean_n_miss,confirmations,\
schema_version";

/// Writes one row per episode and a final `mean` row averaging the
/// per-episode values (optional columns over the episodes that have them).
pub fn write_summary<W: Write>(mut out: W, rows: &[(u64, EpisodeMetrics)]) -> Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for (k, (seed, m)) in rows.iter().enumerate() {
        writeln!(
            out,
            "{k},{seed},{},{},{},{},{},{},{},{},{},{SCHEMA_VERSION}",
            m.slots,
            fmt_g9(m.mean_utility),
            fmt_g9(m.mean_reward),
            fmt_g9(m.mean_usage),
            fmt_g9(m.violation_fraction),
            opt(m.mean_confirmation_latency),
            opt(m.mean_tracking_cost),
            fmt_g9(m.mean_n_miss),
            m.confirmations,
        )?;
    }
    let n = rows.len().max(1) as f64;
    let avg = |f: &dyn Fn(&EpisodeMetrics) -> f64| rows.iter().map(|(_, m)| f(m)).sum::<f64>() / n;
    let avg_opt = |f: &dyn Fn(&EpisodeMetrics) -> Option<f64>| {
        let v: Vec<f64> = rows.iter().filter_map(|(_, m)| f(m)).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    writeln!(
        out,
        "mean,,{},{},{},{},{},{},{},{},{},{SCHEMA_VERSION}",
        rows.iter().map(|(_, m)| m.slots).sum::<usize>(),
        fmt_g9(avg(&|m| m.mean_utility)),
        fmt_g9(avg(&|m| m.mean_reward)),
        fmt_g9(avg(&|m| m.mean_usage)),
        fmt_g9(avg(&|m| m.violation_fraction)),
        opt(avg_opt(&|m| m.mean_confirmation_latency)),
        opt(avg_opt(&|m| m.mean_tracking_cost)),
        fmt_g9(avg(&|m| m.mean_n_miss)),
        rows.iter().map(|(_, m)| m.confirmations).sum::<usize>(),
    )?;
    out.flush()?;
    Ok(())
}
