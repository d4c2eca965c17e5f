//! Run configuration: one TOML document with sections, plus `key=value`
//! overrides addressed by dotted path (`agent.gamma=0.5`).
//!
//! Defaults reproduce the simulation table (σ²_r0 = 16 m², σ²_θ0 = 1e-6
//! rad², σ²_w = 16, r₀ = 3 km, τ₀ = 1 s, T₀ = 2.5 s, β = 2e4, Θ_max = 0.9,
//! γ = 0.9, batch 128, replay 1e6, λ₀ = α = 5000). Values the table leaves
//! open carry documented defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cdrl::{AgentConfig, DualVariable, NoiseKind};
use crate::env::{EnvConfig, SpawnConfig};
use crate::error::{Error, Result};
use crate::motion::MotionParams;
use crate::sensing::{ScanModel, SnrModel, Swerling};

/// Bumped whenever trace or summary columns change.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    /// Training slots (T_max) or evaluation slots per episode.
    pub slots: u64,
    pub radar: RadarSection,
    pub scan: ScanSection,
    pub trackinit: TrackInitSection,
    pub spawn: SpawnSection,
    pub objective: ObjectiveSection,
    pub agent: AgentSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadarSection {
    pub revisit_interval_s: f64,
    /// Maneuverability noise variance σ²_w.
    pub sigma_w2: f64,
    pub snr0: f64,
    pub tau0_s: f64,
    pub r0_m: f64,
    pub sigma_r0_sq: f64,
    pub sigma_th0_sq: f64,
    pub min_dwell_frac: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanReference {
    pub tau_beam_s: f64,
    pub range_m: f64,
    pub snr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    pub pfa: f64,
    pub phase_delay_deg: f64,
    pub swerling_case: u8,
    pub region_radius_m: f64,
    pub scan_reference: ScanReference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackInitSection {
    pub confirm_threshold_m: f64,
    pub confirm_k: usize,
    pub max_slots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpawnSection {
    pub max_targets: usize,
    pub spawn_period: u64,
    pub spawn_prob: f64,
    pub max_age: u64,
    pub spawn_range_min_m: f64,
    pub spawn_range_max_m: f64,
    pub speed_min: f64,
    pub speed_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObjectiveSection {
    pub beta: f64,
    pub theta_max: f64,
    pub lambda0: f64,
    pub alpha: f64,
    /// Moving-average window for the dual violation signal; 0 or 1 uses the
    /// instantaneous violation.
    pub dual_window: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgentSection {
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub gamma: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub soft_update: f64,
    /// "gaussian" or "ou".
    pub noise: String,
    /// Exploration σ as a fraction of T₀ at the start and end of the decay.
    pub noise_sigma_start: f64,
    pub noise_sigma_end: f64,
    /// Fraction of training over which σ decays.
    pub noise_decay_frac: f64,
    pub ou_theta: f64,
    pub cost_scale_init: f64,
    /// Reward divisor for critic targets; 0 means β.
    pub reward_scale: f64,
    pub final_layer_init: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Write a checkpoint every this many slots (0 disables periodic ones).
    pub checkpoint_every: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            slots: 20_000,
            radar: RadarSection::default(),
            scan: ScanSection::default(),
            trackinit: TrackInitSection::default(),
            spawn: SpawnSection::default(),
            objective: ObjectiveSection::default(),
            agent: AgentSection::default(),
            output: OutputSection::default(),
        }
    }
}

impl Default for RadarSection {
    fn default() -> Self {
        Self {
            revisit_interval_s: 2.5,
            sigma_w2: 16.0,
            snr0: 100.0,
            tau0_s: 1.0,
            r0_m: 3000.0,
            sigma_r0_sq: 16.0,
            sigma_th0_sq: 1e-6,
            min_dwell_frac: 1e-4,
        }
    }
}

impl Default for ScanReference {
    fn default() -> Self {
        Self {
            tau_beam_s: 1e-3,
            range_m: 3000.0,
            snr: 100.0,
        }
    }
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            pfa: 1e-4,
            phase_delay_deg: 3.0,
            swerling_case: 0,
            region_radius_m: 20_000.0,
            scan_reference: ScanReference::default(),
        }
    }
}

impl Default for TrackInitSection {
    fn default() -> Self {
        Self {
            confirm_threshold_m: 1000.0,
            confirm_k: 3,
            max_slots: 5,
        }
    }
}

impl Default for SpawnSection {
    fn default() -> Self {
        Self {
            max_targets: 5,
            spawn_period: 100,
            spawn_prob: 0.05,
            max_age: 3000,
            spawn_range_min_m: 2000.0,
            spawn_range_max_m: 18_000.0,
            speed_min: 50.0,
            speed_max: 300.0,
        }
    }
}

impl Default for ObjectiveSection {
    fn default() -> Self {
        Self {
            beta: 2e4,
            theta_max: 0.9,
            lambda0: 5000.0,
            alpha: 5000.0,
            dual_window: 0,
        }
    }
}

impl Default for AgentSection {
    fn default() -> Self {
        Self {
            actor_hidden: vec![256, 128],
            critic_hidden: vec![100, 100],
            actor_lr: 1e-3,
            critic_lr: 1e-3,
            gamma: 0.9,
            batch_size: 128,
            buffer_capacity: 1_000_000,
            soft_update: 0.005,
            noise: "gaussian".into(),
            noise_sigma_start: 0.2,
            noise_sigma_end: 0.02,
            noise_decay_frac: 0.5,
            ou_theta: 0.15,
            cost_scale_init: 100.0,
            reward_scale: 0.0,
            final_layer_init: 3e-3,
        }
    }
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            checkpoint_every: 5000,
        }
    }
}

fn check(ok: bool, field: &str, reason: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(field, reason))
    }
}

fn positive(v: f64, field: &str) -> Result<()> {
    check(v.is_finite() && v > 0.0, field, "must be a positive finite number")
}

fn probability(v: f64, field: &str) -> Result<()> {
    check((0.0..=1.0).contains(&v), field, "must lie in [0, 1]")
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::config("config", format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    /// Applies `key=value` overrides. The value is parsed as a TOML value
    /// and falls back to a bare string.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut table: toml::Table =
            toml::from_str(&self.to_toml_string()).expect("config round-trips");
        for item in overrides {
            let item = item.as_ref();
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| Error::config(item, "override must look like key=value"))?;
            let key = key.trim();
            let value = parse_value(raw.trim());
            set_path(&mut table, key, value)?;
        }
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::config("override", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.radar;
        positive(r.revisit_interval_s, "radar.revisit_interval_s")?;
        check(r.sigma_w2 >= 0.0, "radar.sigma_w2", "must be non-negative")?;
        positive(r.snr0, "radar.snr0")?;
        positive(r.tau0_s, "radar.tau0_s")?;
        positive(r.r0_m, "radar.r0_m")?;
        positive(r.sigma_r0_sq, "radar.sigma_r0_sq")?;
        positive(r.sigma_th0_sq, "radar.sigma_th0_sq")?;
        check(
            r.min_dwell_frac > 0.0 && r.min_dwell_frac <= 1.0,
            "radar.min_dwell_frac",
            "must lie in (0, 1]",
        )?;

        let s = &self.scan;
        check(s.pfa > 0.0 && s.pfa < 1.0, "scan.pfa", "must lie in (0, 1)")?;
        check(
            s.phase_delay_deg > 0.0 && s.phase_delay_deg <= 360.0,
            "scan.phase_delay_deg",
            "must lie in (0, 360]",
        )?;
        check(
            Swerling::from_case(s.swerling_case).is_some(),
            "scan.swerling_case",
            "must be 0..=5",
        )?;
        positive(s.region_radius_m, "scan.region_radius_m")?;
        positive(s.scan_reference.tau_beam_s, "scan.scan_reference.tau_beam_s")?;
        positive(s.scan_reference.range_m, "scan.scan_reference.range_m")?;
        positive(s.scan_reference.snr, "scan.scan_reference.snr")?;

        let ti = &self.trackinit;
        positive(ti.confirm_threshold_m, "trackinit.confirm_threshold_m")?;
        check(ti.confirm_k >= 1, "trackinit.confirm_k", "must be at least 1")?;
        check(
            (1..=16).contains(&ti.max_slots),
            "trackinit.max_slots",
            "must lie in 1..=16",
        )?;

        let sp = &self.spawn;
        check(sp.max_targets >= 1, "spawn.max_targets", "must be at least 1")?;
        probability(sp.spawn_prob, "spawn.spawn_prob")?;
        check(
            0.0 <= sp.spawn_range_min_m && sp.spawn_range_min_m <= sp.spawn_range_max_m,
            "spawn.spawn_range_min_m",
            "must satisfy 0 <= min <= spawn_range_max_m",
        )?;
        check(
            sp.spawn_range_max_m <= s.region_radius_m,
            "spawn.spawn_range_max_m",
            "must not exceed scan.region_radius_m",
        )?;
        check(
            0.0 <= sp.speed_min && sp.speed_min <= sp.speed_max,
            "spawn.speed_min",
            "must satisfy 0 <= min <= speed_max",
        )?;

        let o = &self.objective;
        check(o.beta >= 0.0, "objective.beta", "must be non-negative")?;
        check(
            o.theta_max > 0.0 && o.theta_max <= 1.0,
            "objective.theta_max",
            "must lie in (0, 1]",
        )?;
        check(o.lambda0 >= 0.0, "objective.lambda0", "must be non-negative")?;
        check(o.alpha >= 0.0, "objective.alpha", "must be non-negative")?;

        let a = &self.agent;
        check(
            !a.actor_hidden.is_empty() && a.actor_hidden.iter().all(|h| *h > 0),
            "agent.actor_hidden",
            "needs at least one non-empty layer",
        )?;
        check(
            !a.critic_hidden.is_empty() && a.critic_hidden.iter().all(|h| *h > 0),
            "agent.critic_hidden",
            "needs at least one non-empty layer",
        )?;
        check(a.actor_lr >= 0.0, "agent.actor_lr", "must be non-negative")?;
        check(a.critic_lr >= 0.0, "agent.critic_lr", "must be non-negative")?;
        check((0.0..1.0).contains(&a.gamma), "agent.gamma", "must lie in [0, 1)")?;
        check(a.batch_size >= 1, "agent.batch_size", "must be at least 1")?;
        check(
            a.buffer_capacity >= a.batch_size,
            "agent.buffer_capacity",
            "must be at least agent.batch_size",
        )?;
        probability(a.soft_update, "agent.soft_update")?;
        check(
            a.noise == "gaussian" || a.noise == "ou",
            "agent.noise",
            "must be \"gaussian\" or \"ou\"",
        )?;
        check(a.noise_sigma_start >= 0.0, "agent.noise_sigma_start", "must be non-negative")?;
        check(a.noise_sigma_end >= 0.0, "agent.noise_sigma_end", "must be non-negative")?;
        probability(a.noise_decay_frac, "agent.noise_decay_frac")?;
        positive(a.cost_scale_init, "agent.cost_scale_init")?;
        check(a.reward_scale >= 0.0, "agent.reward_scale", "must be non-negative")?;
        check(a.final_layer_init >= 0.0, "agent.final_layer_init", "must be non-negative")?;
        Ok(())
    }

    pub fn motion(&self) -> MotionParams {
        MotionParams {
            revisit_interval: self.radar.revisit_interval_s,
            sigma_w2: self.radar.sigma_w2,
        }
    }

    pub fn snr_model(&self) -> SnrModel {
        SnrModel {
            snr0: self.radar.snr0,
            tau0: self.radar.tau0_s,
            r0: self.radar.r0_m,
            sigma_r0_sq: self.radar.sigma_r0_sq,
            sigma_th0_sq: self.radar.sigma_th0_sq,
        }
    }

    pub fn scan_model(&self) -> ScanModel {
        let r = &self.scan.scan_reference;
        ScanModel {
            phase_delay_deg: self.scan.phase_delay_deg,
            scan_const: ScanModel::calibrate_const(r.tau_beam_s, r.range_m, r.snr),
            pfa: self.scan.pfa,
            swerling: Swerling::from_case(self.scan.swerling_case).unwrap_or(Swerling::Zero),
            region_radius: self.scan.region_radius_m,
            confirm_threshold: self.trackinit.confirm_threshold_m,
        }
    }

    pub fn env_config(&self) -> EnvConfig {
        let sp = &self.spawn;
        EnvConfig {
            n_max: sp.max_targets,
            motion: self.motion(),
            snr: self.snr_model(),
            min_dwell_frac: self.radar.min_dwell_frac,
            scan: self.scan_model(),
            confirm_k: self.trackinit.confirm_k,
            max_slots: self.trackinit.max_slots,
            spawn: SpawnConfig {
                spawn_period: sp.spawn_period,
                spawn_prob: sp.spawn_prob,
                max_age: sp.max_age,
                region_radius: self.scan.region_radius_m,
                max_targets: sp.max_targets,
                spawn_range_min: sp.spawn_range_min_m,
                spawn_range_max: sp.spawn_range_max_m,
                speed_min: sp.speed_min,
                speed_max: sp.speed_max,
            },
            beta: self.objective.beta,
            theta_max: self.objective.theta_max,
            lambda0: self.objective.lambda0,
        }
    }

    pub fn agent_config(&self) -> AgentConfig {
        let a = &self.agent;
        AgentConfig {
            n_actions: self.spawn.max_targets,
            t0: self.radar.revisit_interval_s,
            actor_hidden: a.actor_hidden.clone(),
            critic_hidden: a.critic_hidden.clone(),
            actor_lr: a.actor_lr,
            critic_lr: a.critic_lr,
            gamma: a.gamma,
            batch_size: a.batch_size,
            soft_update: a.soft_update,
            noise: if a.noise == "ou" {
                NoiseKind::OrnsteinUhlenbeck { theta: a.ou_theta }
            } else {
                NoiseKind::Gaussian
            },
            noise_sigma_start: a.noise_sigma_start,
            noise_sigma_end: a.noise_sigma_end,
            noise_decay_slots: (a.noise_decay_frac * self.slots as f64).round() as u64,
            cost_scale_init: a.cost_scale_init,
            lambda_scale: if self.objective.lambda0 > 0.0 {
                self.objective.lambda0
            } else {
                1.0
            },
            reward_scale: if a.reward_scale > 0.0 {
                a.reward_scale
            } else if self.objective.beta > 0.0 {
                self.objective.beta
            } else {
                1.0
            },
            final_layer_init: a.final_layer_init,
        }
    }

    pub fn dual_variable(&self) -> DualVariable {
        DualVariable::new(
            self.objective.lambda0,
            self.objective.alpha,
            self.objective.theta_max,
            self.objective.dual_window,
        )
    }
}

fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&doc) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

fn set_path(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| Error::config(key, "empty key"))?;
    let mut cur = table;
    for p in parts {
        cur = match cur.get_mut(p) {
            Some(toml::Value::Table(t)) => t,
            _ => return Err(Error::config(key, "unknown section")),
        };
    }
    if !cur.contains_key(last) {
        return Err(Error::config(key, "unknown key"));
    }
    // keep floats floats: `--set radar.snr0=200` should not fail on an integer
    let value = match (cur.get(last), value) {
        (Some(toml::Value::Float(_)), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
        (_, v) => v,
    };
    cur.insert(last.to_string(), value);
    Ok(())
}
