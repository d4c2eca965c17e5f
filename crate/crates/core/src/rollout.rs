//! Fixed-parameter rollouts for evaluation and baselines.
//!
//! λ is held constant (no dual update, no learning) and only enters the
//! reward column.

use crate::cdrl::{DdpgAgent, FrozenPolicy, ObsCodec};
use crate::env::{fixed_policy, ActionVector, Env, EnvConfig, EnvObservation, SlotReport};
use crate::error::Result;
use crate::numerics::derive_seed;

const TAG_EPISODE: u64 = 0x4550_4953_4f44_0021;

/// Seed of evaluation episode `k`. Baseline and CDRL evaluations with the
/// same base seed face the same episodes.
pub fn episode_seed(base: u64, k: u64) -> u64 {
    derive_seed(base, &[TAG_EPISODE, k])
}

pub fn rollout<P>(cfg: EnvConfig, seed: u64, slots: u64, lambda: f64, mut policy: P) -> Result<Vec<SlotReport>>
where
    P: FnMut(&EnvObservation) -> Result<ActionVector>,
{
    let mut env = Env::new(cfg, seed);
    let mut obs = env.reset(seed);
    obs.dual = lambda;
    let mut out = Vec::with_capacity(slots as usize);
    for _ in 0..slots {
        let a = policy(&obs)?;
        let (next, rep) = env.step(&a, lambda)?;
        obs = next;
        out.push(rep);
    }
    Ok(out)
}

/// Fixed-fraction baseline.
pub fn run_fixed(cfg: EnvConfig, seed: u64, slots: u64, fraction: f64, lambda: f64) -> Result<Vec<SlotReport>> {
    let t0 = cfg.t0();
    rollout(cfg, seed, slots, lambda, |obs| {
        Ok(fixed_policy(fraction, &obs.track_mask(), t0))
    })
}

/// Deterministic actor, no exploration.
pub fn run_frozen(
    agent: &DdpgAgent,
    codec: &ObsCodec,
    cfg: EnvConfig,
    seed: u64,
    slots: u64,
    lambda: f64,
) -> Result<Vec<SlotReport>> {
    let policy = FrozenPolicy { agent, codec };
    let t0 = cfg.t0();
    rollout(cfg, seed, slots, lambda, |obs| policy.act(obs, t0))
}
