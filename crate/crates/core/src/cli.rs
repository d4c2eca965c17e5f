//! `train | eval | baseline` subcommands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;

use crate::cdrl::Trainer;
use crate::config::{RunConfig, SCHEMA_VERSION};
use crate::env::SlotReport;
use crate::error::{Error, Result};
use crate::report::{write_summary, EpisodeMetrics, TraceWriter, TrainColumns};
use crate::rollout::{episode_seed, run_fixed, run_frozen};

#[derive(Debug, Parser)]
#[command(name = "cradar", version, about = "Radar dwell-time allocation: training, evaluation, baselines")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the constrained actor-critic agent.
    Train(CommonArgs),
    /// Roll out a trained policy with exploration off.
    Eval(EvalArgs),
    /// Roll out the fixed-fraction allocation.
    Baseline(BaselineArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Training slots, or slots per evaluation episode.
    #[arg(long)]
    pub slots: Option<u64>,
    /// Override any config value by dotted path, e.g. `agent.gamma=0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub episodes: u64,
}

#[derive(Debug, Clone, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Share of each slot given to tracking, in [0, 1].
    #[arg(long)]
    pub fraction: f64,
    #[arg(long, default_value_t = 1)]
    pub episodes: u64,
}

fn resolve(args: &CommonArgs, base: Option<RunConfig>) -> Result<RunConfig> {
    let mut cfg = match (&args.config, base) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(b)) => b,
        (None, None) => RunConfig::default(),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(s) = args.slots {
        cfg.slots = s;
    }
    let cfg = cfg.with_overrides(&args.set)?;
    cfg.validate()?;
    Ok(cfg)
}

fn write_resolved(out: &Path, cfg: &RunConfig, header: &[(&str, String)]) -> Result<()> {
    let mut f = BufWriter::new(File::create(out.join("config.resolved"))?);
    writeln!(f, "# schema_version = {SCHEMA_VERSION}")?;
    for (k, v) in header {
        writeln!(f, "# {k} = {v}")?;
    }
    write!(f, "{}", cfg.to_toml_string())?;
    f.flush()?;
    Ok(())
}

fn trace_file(out: &Path, n: usize) -> Result<TraceWriter<BufWriter<File>>> {
    TraceWriter::new(BufWriter::new(File::create(out.join("trace.csv"))?), n)
}

fn summary_file(out: &Path, rows: &[(u64, EpisodeMetrics)]) -> Result<()> {
    write_summary(BufWriter::new(File::create(out.join("summary.csv"))?), rows)
}

/// Trains and writes `trace.csv`, `summary.csv`, `config.resolved` and
/// `checkpoint.json` into the output directory.
pub fn cmd_train(args: &CommonArgs) -> Result<EpisodeMetrics> {
    let cfg = resolve(args, None)?;
    std::fs::create_dir_all(&args.out)?;
    write_resolved(&args.out, &cfg, &[("command", "\"train\"".into())])?;
    let mut trainer = Trainer::new(&cfg)?;
    let mut trace = trace_file(&args.out, cfg.spawn.max_targets)?;
    let ck = args.out.join("checkpoint.json");
    let every = cfg.output.checkpoint_every;
    let mut reports: Vec<SlotReport> = Vec::with_capacity(cfg.slots as usize);
    info!("training for {} slots, seed {}", cfg.slots, cfg.seed);
    trainer.run(cfg.slots, |t, s| {
        trace.write(
            &s.report,
            TrainColumns {
                stats: s.stats,
                noise_sigma: Some(s.noise_sigma),
            },
            0,
        )?;
        reports.push(s.report.clone());
        if every > 0 && t.slot() % every == 0 {
            t.save(&ck)?;
        }
        Ok(())
    })?;
    trace.finish()?;
    trainer.save(&ck)?;
    let m = EpisodeMetrics::from_reports(&reports, cfg.objective.theta_max);
    summary_file(&args.out, &[(cfg.seed, m)])?;
    Ok(m)
}

fn run_episodes<F>(cfg: &RunConfig, out: &Path, episodes: u64, mut episode: F) -> Result<Vec<(u64, EpisodeMetrics)>>
where
    F: FnMut(u64) -> Result<Vec<SlotReport>>,
{
    let mut trace = trace_file(out, cfg.spawn.max_targets)?;
    let mut rows = Vec::new();
    for k in 0..episodes {
        let seed = episode_seed(cfg.seed, k);
        let reports = episode(seed)?;
        for r in &reports {
            trace.write(r, TrainColumns::default(), k)?;
        }
        rows.push((seed, EpisodeMetrics::from_reports(&reports, cfg.objective.theta_max)));
    }
    trace.finish()?;
    summary_file(out, &rows)?;
    Ok(rows)
}

/// Frozen-policy rollouts of a checkpoint with λ held at its trained value.
pub fn cmd_eval(args: &EvalArgs) -> Result<Vec<(u64, EpisodeMetrics)>> {
    let trainer = Trainer::load(&args.checkpoint)?;
    let cfg = resolve(&args.common, Some(trainer.run.clone()))?;
    let n = cfg.spawn.max_targets;
    if trainer.agent.cfg.n_actions != n || trainer.agent.state_dim() != 2 * n + 1 {
        return Err(Error::Checkpoint(format!(
            "checkpoint agent has {} actions, configuration has {n} targets",
            trainer.agent.cfg.n_actions
        )));
    }
    std::fs::create_dir_all(&args.common.out)?;
    let lambda = trainer.lambda();
    write_resolved(
        &args.common.out,
        &cfg,
        &[
            ("command", "\"eval\"".into()),
            ("checkpoint", format!("{:?}", args.checkpoint.display().to_string())),
            ("episodes", args.episodes.to_string()),
            ("lambda", lambda.to_string()),
        ],
    )?;
    let env_cfg = cfg.env_config();
    run_episodes(&cfg, &args.common.out, args.episodes, |seed| {
        run_frozen(&trainer.agent, &trainer.codec, env_cfg, seed, cfg.slots, lambda)
    })
}

/// Fixed-fraction rollouts; λ stays at λ₀.
pub fn cmd_baseline(args: &BaselineArgs) -> Result<Vec<(u64, EpisodeMetrics)>> {
    if !(0.0..=1.0).contains(&args.fraction) {
        return Err(Error::config("fraction", "must lie in [0, 1]"));
    }
    let cfg = resolve(&args.common, None)?;
    std::fs::create_dir_all(&args.common.out)?;
    write_resolved(
        &args.common.out,
        &cfg,
        &[
            ("command", "\"baseline\"".into()),
            ("fraction", args.fraction.to_string()),
            ("episodes", args.episodes.to_string()),
        ],
    )?;
    let env_cfg = cfg.env_config();
    let lambda = cfg.objective.lambda0;
    run_episodes(&cfg, &args.common.out, args.episodes, |seed| {
        run_fixed(env_cfg, seed, cfg.slots, args.fraction, lambda)
    })
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Train(a) => cmd_train(a).map(|m| {
            println!("mean utility {:.1}, mean usage {:.3}", m.mean_utility, m.mean_usage)
        }),
        Command::Eval(a) => cmd_eval(a).map(|_| ()),
        Command::Baseline(a) => cmd_baseline(a).map(|_| ()),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config { .. } => 2,
                _ => 1,
            }
        }
    }
}
