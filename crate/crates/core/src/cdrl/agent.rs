//! DDPG actor-critic with target networks.
//!
//! The actor maps a normalized state to dwell fractions in `[0, 1]` (a
//! sigmoid head; dwell = fraction × T₀). Entries without a live track are
//! masked to zero before they reach the critic or the environment, and the
//! replay buffer stores the masked action.

use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::mlp::{Activation, Mlp};
use super::replay::ReplayBuffer;
use crate::error::{Error, Result};
use crate::numerics::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NoiseKind {
    Gaussian,
    OrnsteinUhlenbeck { theta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub n_actions: usize,
    pub t0: f64,
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub gamma: f64,
    pub batch_size: usize,
    pub soft_update: f64,
    pub noise: NoiseKind,
    /// Exploration σ in dwell-fraction units (multiples of T₀).
    pub noise_sigma_start: f64,
    pub noise_sigma_end: f64,
    pub noise_decay_slots: u64,
    pub cost_scale_init: f64,
    pub lambda_scale: f64,
    pub reward_scale: f64,
    pub final_layer_init: f64,
}

/// Maps raw states to network inputs and tells which actions are live.
pub trait StateCodec {
    fn encode(&self, raw: &[f64], out: &mut Vec<f64>);
    fn mask(&self, raw: &[f64], out: &mut Vec<f64>);
}

/// Raw states as they are, every action live.
#[derive(Debug, Clone, Copy)]
pub struct Passthrough {
    pub n_actions: usize,
}

impl StateCodec for Passthrough {
    fn encode(&self, raw: &[f64], out: &mut Vec<f64>) {
        out.extend_from_slice(raw);
    }

    fn mask(&self, _raw: &[f64], out: &mut Vec<f64>) {
        out.extend(std::iter::repeat_n(1.0, self.n_actions));
    }
}

/// Radar observation `[costs…, dwells…, λ]` scaled to O(1): costs by a
/// running mean cost, dwells by T₀, λ by λ₀. A track is live when its
/// previous cost is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObsCodec {
    pub n: usize,
    pub t0: f64,
    pub lambda_scale: f64,
    cost_sum: f64,
    cost_count: f64,
}

impl ObsCodec {
    pub fn new(n: usize, t0: f64, lambda_scale: f64, cost_scale_init: f64) -> Self {
        Self {
            n,
            t0,
            lambda_scale,
            cost_sum: cost_scale_init,
            cost_count: 1.0,
        }
    }

    pub fn cost_scale(&self) -> f64 {
        self.cost_sum / self.cost_count
    }

    /// Folds the positive costs of a fresh observation into the running scale.
    pub fn observe(&mut self, raw: &[f64]) {
        for c in raw[..self.n].iter().filter(|c| **c > 0.0) {
            self.cost_sum += c;
            self.cost_count += 1.0;
        }
    }
}

impl StateCodec for ObsCodec {
    fn encode(&self, raw: &[f64], out: &mut Vec<f64>) {
        let cs = self.cost_scale();
        out.extend(raw[..self.n].iter().map(|c| c / cs));
        out.extend(raw[self.n..2 * self.n].iter().map(|d| d / self.t0));
        out.push(raw[2 * self.n] / self.lambda_scale);
    }

    fn mask(&self, raw: &[f64], out: &mut Vec<f64>) {
        out.extend(raw[..self.n].iter().map(|c| if *c > 0.0 { 1.0 } else { 0.0 }));
    }
}

/// Additive exploration noise with an exponentially decaying σ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationNoise {
    pub kind: NoiseKind,
    pub sigma_start: f64,
    pub sigma_end: f64,
    pub decay_slots: u64,
    ou_state: Vec<f64>,
}

impl ExplorationNoise {
    pub fn new(cfg: &AgentConfig) -> Self {
        Self {
            kind: cfg.noise,
            sigma_start: cfg.noise_sigma_start,
            sigma_end: cfg.noise_sigma_end,
            decay_slots: cfg.noise_decay_slots,
            ou_state: vec![0.0; cfg.n_actions],
        }
    }

    /// σ at slot `t`: geometric interpolation from start to end over the
    /// decay horizon, constant afterwards.
    pub fn sigma(&self, t: u64) -> f64 {
        if self.decay_slots == 0 || t >= self.decay_slots {
            return self.sigma_end;
        }
        if self.sigma_start <= 0.0 || self.sigma_end <= 0.0 {
            let f = t as f64 / self.decay_slots as f64;
            return self.sigma_start + (self.sigma_end - self.sigma_start) * f;
        }
        let f = t as f64 / self.decay_slots as f64;
        self.sigma_start * (self.sigma_end / self.sigma_start).powf(f)
    }

    pub fn sample(&mut self, t: u64, rng: &mut RngStream) -> Vec<f64> {
        let sigma = self.sigma(t);
        match self.kind {
            NoiseKind::Gaussian => (0..self.ou_state.len())
                .map(|_| sigma * rng.standard_normal())
                .collect(),
            NoiseKind::OrnsteinUhlenbeck { theta } => {
                for x in &mut self.ou_state {
                    *x += -theta * *x + sigma * rng.standard_normal();
                }
                self.ou_state.clone()
            }
        }
    }
}

/// A normalized training batch, row-major.
#[derive(Debug, Clone, Default)]
pub struct Batch {
    pub n: usize,
    pub states: Vec<f64>,
    pub actions: Vec<f64>,
    pub masks: Vec<f64>,
    pub rewards: Vec<f64>,
    pub next_states: Vec<f64>,
    pub next_masks: Vec<f64>,
}

impl Batch {
    pub fn from_buffer(
        buffer: &ReplayBuffer,
        n: usize,
        codec: &dyn StateCodec,
        rng: &mut RngStream,
    ) -> Self {
        let mut b = Batch {
            n,
            ..Default::default()
        };
        for t in buffer.sample(n, rng) {
            codec.encode(&t.state, &mut b.states);
            b.actions.extend_from_slice(&t.action);
            codec.mask(&t.state, &mut b.masks);
            b.rewards.push(t.reward);
            codec.encode(&t.next_state, &mut b.next_states);
            codec.mask(&t.next_state, &mut b.next_masks);
        }
        b
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    pub critic_loss: f64,
    pub actor_objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DdpgAgent {
    pub cfg: AgentConfig,
    state_dim: usize,
    pub actor: Mlp,
    pub critic: Mlp,
    pub target_actor: Mlp,
    pub target_critic: Mlp,
    actor_opt: Adam,
    critic_opt: Adam,
    updates: u64,
}

fn chain(first: usize, hidden: &[usize], last: usize) -> Vec<usize> {
    let mut v = vec![first];
    v.extend_from_slice(hidden);
    v.push(last);
    v
}

impl DdpgAgent {
    pub fn new(state_dim: usize, cfg: AgentConfig, rng: &mut RngStream) -> Self {
        let n = cfg.n_actions;
        let actor = Mlp::new(
            &chain(state_dim, &cfg.actor_hidden, n),
            Activation::Sigmoid,
            cfg.final_layer_init,
            rng,
        );
        let critic = Mlp::new(
            &chain(state_dim + n, &cfg.critic_hidden, 1),
            Activation::Identity,
            cfg.final_layer_init,
            rng,
        );
        let actor_opt = Adam::new(actor.n_params(), cfg.actor_lr);
        let critic_opt = Adam::new(critic.n_params(), cfg.critic_lr);
        Self {
            state_dim,
            target_actor: actor.clone(),
            target_critic: critic.clone(),
            actor,
            critic,
            actor_opt,
            critic_opt,
            updates: 0,
            cfg,
        }
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Deterministic policy output (dwell fractions) for one normalized state.
    pub fn policy(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.actor.predict(state)
    }

    /// Masked dwell fractions in `[0, 1]`, with exploration noise if given.
    pub fn act(&self, state: &[f64], mask: &[f64], noise: Option<&[f64]>) -> Result<Vec<f64>> {
        let mut a = self.policy(state)?;
        if let Some(eps) = noise {
            for (a, e) in a.iter_mut().zip(eps) {
                *a = (*a + e).clamp(0.0, 1.0);
            }
        }
        for (a, m) in a.iter_mut().zip(mask) {
            *a *= m;
        }
        Ok(a)
    }

    pub fn q_value(&self, state: &[f64], action: &[f64]) -> Result<f64> {
        let mut x = state.to_vec();
        x.extend_from_slice(action);
        Ok(self.critic.predict(&x)?[0])
    }

    fn concat(&self, states: &[f64], actions: &[f64], n: usize) -> Vec<f64> {
        let (sd, ad) = (self.state_dim, self.cfg.n_actions);
        let mut x = Vec::with_capacity(n * (sd + ad));
        for (s, a) in states.chunks_exact(sd).zip(actions.chunks_exact(ad)) {
            x.extend_from_slice(s);
            x.extend_from_slice(a);
        }
        x
    }

    /// Critic regression targets `r/scale + γ Q'(s', μ'(s') ⊙ mask')`.
    pub fn critic_targets(&self, batch: &Batch) -> Result<Vec<f64>> {
        let n = batch.n;
        let mut next_a = self
            .target_actor
            .forward(&batch.next_states, n)?
            .output()
            .to_vec();
        for (a, m) in next_a.iter_mut().zip(&batch.next_masks) {
            *a *= m;
        }
        let q_next = if self.cfg.gamma == 0.0 {
            vec![0.0; n]
        } else {
            let x = self.concat(&batch.next_states, &next_a, n);
            self.target_critic.forward(&x, n)?.output().to_vec()
        };
        Ok(batch
            .rewards
            .iter()
            .zip(q_next)
            .map(|(r, q)| r / self.cfg.reward_scale + self.cfg.gamma * q)
            .collect())
    }

    /// One critic step, one actor step, then soft target updates.
    pub fn update(&mut self, batch: &Batch) -> Result<UpdateStats> {
        let n = batch.n;
        let (sd, ad) = (self.state_dim, self.cfg.n_actions);
        let y = self.critic_targets(batch)?;

        // critic: minimize mean (Q − y)²
        let x = self.concat(&batch.states, &batch.actions, n);
        let cache = self.critic.forward(&x, n)?;
        let q = cache.output();
        let mut loss = 0.0;
        let mut grad = Vec::with_capacity(n);
        for (q, y) in q.iter().zip(&y) {
            loss += (q - y).powi(2);
            grad.push(2.0 * (q - y) / n as f64);
        }
        loss /= n as f64;
        if !loss.is_finite() {
            return Err(Error::NonFinite {
                what: format!("critic loss (update {})", self.updates),
                slot: self.updates,
            });
        }
        let (g_critic, _) = self.critic.backward_with(&cache, &grad, true, false)?;
        self.critic_opt.step(self.critic.params_mut(), &g_critic);

        // actor: ascend mean Q(s, μ(s) ⊙ mask) through the updated critic
        let masks = &batch.masks;
        let a_cache = self.actor.forward(&batch.states, n)?;
        let mut mu = a_cache.output().to_vec();
        for (a, m) in mu.iter_mut().zip(masks) {
            *a *= m;
        }
        let x = self.concat(&batch.states, &mu, n);
        let c_cache = self.critic.forward(&x, n)?;
        let objective = c_cache.output().iter().sum::<f64>() / n as f64;
        if !objective.is_finite() {
            return Err(Error::NonFinite {
                what: format!("actor objective (update {})", self.updates),
                slot: self.updates,
            });
        }
        let up = vec![-1.0 / n as f64; n];
        let (_, g_in) = self.critic.backward(&c_cache, &up, false)?;
        let mut g_mu = Vec::with_capacity(n * ad);
        for (row, m) in g_in.chunks_exact(sd + ad).zip(masks.chunks_exact(ad)) {
            g_mu.extend(row[sd..].iter().zip(m).map(|(g, m)| g * m));
        }
        let (g_actor, _) = self.actor.backward_with(&a_cache, &g_mu, true, false)?;
        self.actor_opt.step(self.actor.params_mut(), &g_actor);

        self.soft_update_targets();
        self.updates += 1;
        Ok(UpdateStats {
            critic_loss: loss,
            actor_objective: objective,
        })
    }

    pub fn soft_update_targets(&mut self) {
        let rho = self.cfg.soft_update;
        self.target_actor.soft_update_from(&self.actor, rho);
        self.target_critic.soft_update_from(&self.critic, rho);
    }

    /// Samples a batch and updates; a no-op (`None`) until the buffer holds
    /// a full batch.
    pub fn ddpg_update(
        &mut self,
        buffer: &ReplayBuffer,
        codec: &dyn StateCodec,
        rng: &mut RngStream,
    ) -> Result<Option<UpdateStats>> {
        if buffer.len() < self.cfg.batch_size {
            return Ok(None);
        }
        let batch = Batch::from_buffer(buffer, self.cfg.batch_size, codec, rng);
        self.update(&batch).map(Some)
    }

    pub fn is_finite(&self) -> bool {
        self.actor.is_finite()
            && self.critic.is_finite()
            && self.target_actor.is_finite()
            && self.target_critic.is_finite()
    }
}
