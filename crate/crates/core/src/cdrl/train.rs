//! The primal-dual training loop: act, step the environment, store the
//! transition, update the networks, update λ.

use std::path::Path;

use log::{debug, error};
use serde::{Deserialize, Serialize};

use super::agent::{DdpgAgent, ExplorationNoise, ObsCodec, StateCodec, UpdateStats};
use super::dual::DualVariable;
use super::replay::{ReplayBuffer, Transition};
use crate::config::RunConfig;
use crate::env::{ActionVector, Env, EnvObservation, SlotReport};
use crate::error::{Error, Result};
use crate::numerics::RngStream;

pub const CHECKPOINT_VERSION: u32 = 1;

const TAG_INIT: u64 = 0x494e_4954_0000_0011;
const TAG_NOISE: u64 = 0x4e4f_4953_4500_0012;
const TAG_REPLAY: u64 = 0x5245_504c_4159_0013;

/// One simulated training slot.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainStep {
    pub report: SlotReport,
    pub stats: Option<UpdateStats>,
    pub noise_sigma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trainer {
    format_version: u32,
    pub run: RunConfig,
    pub agent: DdpgAgent,
    pub dual: DualVariable,
    pub env: Env,
    pub buffer: ReplayBuffer,
    pub codec: ObsCodec,
    noise: ExplorationNoise,
    noise_rng: RngStream,
    replay_rng: RngStream,
    obs: EnvObservation,
    slot: u64,
}

impl Trainer {
    pub fn new(run: &RunConfig) -> Result<Self> {
        run.validate()?;
        let env_cfg = run.env_config();
        let agent_cfg = run.agent_config();
        let n = env_cfg.n_max;
        let state_dim = 2 * n + 1;
        let mut init_rng = RngStream::derived(run.seed, &[TAG_INIT]);
        let agent = DdpgAgent::new(state_dim, agent_cfg.clone(), &mut init_rng);
        let mut env = Env::new(env_cfg, run.seed);
        let obs = env.reset(run.seed);
        Ok(Self {
            format_version: CHECKPOINT_VERSION,
            run: run.clone(),
            agent,
            dual: run.dual_variable(),
            env,
            buffer: ReplayBuffer::new(state_dim, n, run.agent.buffer_capacity),
            codec: ObsCodec::new(
                n,
                env_cfg.t0(),
                agent_cfg.lambda_scale,
                agent_cfg.cost_scale_init,
            ),
            noise: ExplorationNoise::new(&agent_cfg),
            noise_rng: RngStream::derived(run.seed, &[TAG_NOISE]),
            replay_rng: RngStream::derived(run.seed, &[TAG_REPLAY]),
            obs,
            slot: 0,
        })
    }

    /// Slots trained so far.
    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn observation(&self) -> &EnvObservation {
        &self.obs
    }

    pub fn lambda(&self) -> f64 {
        self.dual.lambda
    }

    pub fn step(&mut self) -> Result<TrainStep> {
        let t0 = self.env.config().t0();
        let raw = self.obs.to_vec();
        let mut state = Vec::with_capacity(raw.len());
        let mut mask = Vec::with_capacity(self.codec.n);
        self.codec.encode(&raw, &mut state);
        self.codec.mask(&raw, &mut mask);

        let sigma = self.noise.sigma(self.slot);
        let eps = self.noise.sample(self.slot, &mut self.noise_rng);
        let frac = self.agent.act(&state, &mask, Some(&eps))?;
        let action = ActionVector {
            dwells: frac.iter().map(|f| (f * t0).clamp(0.0, t0)).collect(),
        };

        let lambda = self.dual.lambda;
        let (mut next, report) = self.env.step(&action, lambda)?;
        let new_lambda = self.dual.update(report.budget_usage);
        next.dual = new_lambda;
        let next_raw = next.to_vec();
        self.codec.observe(&next_raw);
        self.buffer.push(&Transition {
            state: raw,
            action: frac,
            reward: report.reward,
            next_state: next_raw,
        });

        let stats = self
            .agent
            .ddpg_update(&self.buffer, &self.codec, &mut self.replay_rng)
            .map_err(|e| self.diagnose(e, &report))?;
        if !self.dual.lambda.is_finite() {
            return Err(self.diagnose(
                Error::NonFinite {
                    what: "dual variable".into(),
                    slot: self.slot,
                },
                &report,
            ));
        }
        if let Some(s) = stats {
            if self.slot % 1000 == 0 {
                debug!(
                    "slot {} critic_loss {:.4e} actor_obj {:.4e} lambda {:.1} sigma {:.3}",
                    self.slot, s.critic_loss, s.actor_objective, self.dual.lambda, sigma
                );
            }
        }
        self.obs = next;
        self.slot += 1;
        Ok(TrainStep {
            report,
            stats,
            noise_sigma: sigma,
        })
    }

    fn diagnose(&self, e: Error, report: &SlotReport) -> Error {
        match e {
            Error::NonFinite { what, .. } => {
                error!(
                    "training aborted at slot {}: non-finite {what}; lambda {}, usage {}, \
                     utility {}, costs {:?}, buffer {}, updates {}",
                    self.slot,
                    self.dual.lambda,
                    report.budget_usage,
                    report.utility,
                    report.costs(),
                    self.buffer.len(),
                    self.agent.updates()
                );
                Error::NonFinite {
                    what,
                    slot: self.slot,
                }
            }
            other => other,
        }
    }

    /// Trains for `slots` more slots, handing every step to `on_step`.
    pub fn run<F>(&mut self, slots: u64, mut on_step: F) -> Result<()>
    where
        F: FnMut(&Trainer, &TrainStep) -> Result<()>,
    {
        for _ in 0..slots {
            let s = self.step()?;
            on_step(self, &s)?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        let file = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
        serde_json::to_writer(file, self)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        let value: serde_json::Value = serde_json::from_reader(file)?;
        let version = value.get("format_version").and_then(|v| v.as_u64());
        if version != Some(CHECKPOINT_VERSION as u64) {
            return Err(Error::Checkpoint(format!(
                "format version {version:?}, expected {CHECKPOINT_VERSION}"
            )));
        }
        let t: Trainer = serde_json::from_value(value)
            .map_err(|e| Error::Checkpoint(e.to_string()))?;
        Ok(t)
    }
}

/// Frozen-policy controller for evaluation: no noise, no learning, λ fixed.
pub struct FrozenPolicy<'a> {
    pub agent: &'a DdpgAgent,
    pub codec: &'a ObsCodec,
}

impl FrozenPolicy<'_> {
    pub fn act(&self, obs: &EnvObservation, t0: f64) -> Result<ActionVector> {
        let raw = obs.to_vec();
        let mut state = Vec::new();
        let mut mask = Vec::new();
        self.codec.encode(&raw, &mut state);
        self.codec.mask(&raw, &mut mask);
        let frac = self.agent.act(&state, &mask, None)?;
        Ok(ActionVector {
            dwells: frac.iter().map(|f| (f * t0).clamp(0.0, t0)).collect(),
        })
    }
}
