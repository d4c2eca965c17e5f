//! The time-slotted radar environment.
//!
//! Each slot of length `T₀` runs, in order:
//!
//! 1. target motion, removal (too old or outside the surveillance disk) and
//!    spawning;
//! 2. one EKF revisit per confirmed track with the dwell chosen for it;
//! 3. a scanning sweep with the residual time, feeding track initialization;
//! 4. the miss count, utility, budget usage and Lagrangian reward.
//!
//! Tracks confirmed in step 3 are activated at the end of the slot: they
//! show up in the returned observation and receive dwell from the next
//! action on.
//!
//! Randomness is keyed by `(seed, purpose, slot, target id)`, so the ground
//! truth and per-target detection luck do not depend on the policy. Two
//! policies run with the same seed face the same targets.

mod policy;

pub use policy::fixed_policy;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::{step_target, MotionParams, TargetState};
use crate::numerics::RngStream;
use crate::sensing::{scan_pass, tau_beam_for_budget, ScanModel, SnrModel};
use crate::trackinit::{confirm_to_track, InitBank};
use crate::tracking::{track_step, Track, TrackingModels};

const TAG_MOTION: u64 = 0x4d4f_5449_4f4e_0001;
const TAG_SPAWN: u64 = 0x5350_4157_4e00_0002;
const TAG_TRACK_MEAS: u64 = 0x5452_4d45_4153_0003;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpawnConfig {
    /// Spawn attempts happen on slots that are multiples of this.
    pub spawn_period: u64,
    pub spawn_prob: f64,
    /// Targets older than this many slots are removed.
    pub max_age: u64,
    pub region_radius: f64,
    pub max_targets: usize,
    /// Initial range drawn uniformly by area over `[min, max]`, meters.
    pub spawn_range_min: f64,
    pub spawn_range_max: f64,
    /// Initial speed uniform over `[min, max]`, m/s, with uniform heading.
    pub speed_min: f64,
    pub speed_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    /// Number of dwell entries N (also the track capacity).
    pub n_max: usize,
    pub motion: MotionParams,
    pub snr: SnrModel,
    /// Dwell floor as a fraction of `T₀` for the tracking SNR.
    pub min_dwell_frac: f64,
    pub scan: ScanModel,
    pub confirm_k: usize,
    /// Initialization storage slots M, shared with confirmed tracks.
    pub max_slots: usize,
    pub spawn: SpawnConfig,
    pub beta: f64,
    pub theta_max: f64,
    /// Dual value placed in the observation at reset.
    pub lambda0: f64,
}

impl EnvConfig {
    pub fn t0(&self) -> f64 {
        self.motion.revisit_interval
    }

    pub fn tracking_models(&self) -> TrackingModels {
        TrackingModels {
            motion: self.motion,
            snr: self.snr,
            min_dwell: self.min_dwell_frac * self.t0(),
        }
    }
}

/// Agent state: previous costs, previous dwells, previous dual value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvObservation {
    pub prev_costs: Vec<f64>,
    pub prev_dwells: Vec<f64>,
    pub dual: f64,
}

impl EnvObservation {
    pub fn zeros(n: usize, dual: f64) -> Self {
        Self {
            prev_costs: vec![0.0; n],
            prev_dwells: vec![0.0; n],
            dual,
        }
    }

    /// `[costs…, dwells…, λ]`, length `2N + 1`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.prev_costs.len() + 1);
        v.extend_from_slice(&self.prev_costs);
        v.extend_from_slice(&self.prev_dwells);
        v.push(self.dual);
        v
    }

    pub fn len(&self) -> usize {
        self.prev_costs.len() + self.prev_dwells.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Entries that carry a live track.
    pub fn track_mask(&self) -> Vec<bool> {
        self.prev_costs.iter().map(|c| *c > 0.0).collect()
    }
}

/// Per-target dwell times in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionVector {
    pub dwells: Vec<f64>,
}

impl ActionVector {
    pub fn zeros(n: usize) -> Self {
        Self {
            dwells: vec![0.0; n],
        }
    }

    pub fn total(&self) -> f64 {
        self.dwells.iter().sum()
    }
}

/// Per-entry snapshot of one track after its revisit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackSnapshot {
    pub target_id: u64,
    pub cost: f64,
    pub dwell: f64,
    pub true_range: f64,
    pub true_pos: (f64, f64),
    pub est_pos: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotReport {
    pub slot_index: u64,
    pub utility: f64,
    pub reward: f64,
    /// `Σ τⁿ / T₀` over the dwells actually spent.
    pub budget_usage: f64,
    /// Residual time handed to scanning, seconds.
    pub scan_time: f64,
    pub n_targets: usize,
    pub n_tracked: usize,
    pub n_miss: usize,
    /// One entry per dwell index; `None` where no track was revisited.
    pub tracks: Vec<Option<TrackSnapshot>>,
    pub confirmed_ids: Vec<u64>,
    /// Slots from spawn to confirmation, per confirmed target.
    pub confirmation_latencies: Vec<u64>,
    pub lambda: f64,
}

impl SlotReport {
    pub fn costs(&self) -> Vec<f64> {
        self.tracks.iter().flatten().map(|t| t.cost).collect()
    }
}

/// `−Σ costs − β N_miss`.
pub fn utility(costs: &[f64], n_miss: usize, beta: f64) -> f64 {
    -costs.iter().sum::<f64>() - beta * n_miss as f64
}

/// Lagrangian reward `U − λ (Σ τⁿ/T₀ − Θ_max)`. Below budget the penalty
/// term turns into a bonus.
pub fn reward(utility: f64, usage: f64, lambda: f64, theta_max: f64) -> f64 {
    utility - lambda * (usage - theta_max)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Env {
    cfg: EnvConfig,
    seed: u64,
    slot: u64,
    next_target_id: u64,
    targets: Vec<TargetState>,
    tracks: Vec<Option<Track>>,
    bank: InitBank,
}

impl Env {
    pub fn new(cfg: EnvConfig, seed: u64) -> Self {
        let bank = InitBank::new(cfg.max_slots, cfg.scan.confirm_threshold, cfg.confirm_k);
        Self {
            cfg,
            seed,
            slot: 0,
            next_target_id: 0,
            targets: Vec::new(),
            tracks: vec![None; cfg.n_max],
            bank,
        }
    }

    /// Empties the scene and returns the initial observation.
    pub fn reset(&mut self, seed: u64) -> EnvObservation {
        *self = Env::new(self.cfg, seed);
        EnvObservation::zeros(self.cfg.n_max, self.cfg.lambda0)
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Index of the next slot to be simulated.
    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn targets(&self) -> &[TargetState] {
        &self.targets
    }

    pub fn tracks(&self) -> &[Option<Track>] {
        &self.tracks
    }

    pub fn bank(&self) -> &InitBank {
        &self.bank
    }

    pub fn tracked_mask(&self) -> Vec<bool> {
        self.tracks.iter().map(Option::is_some).collect()
    }

    /// Places a target directly into the scene (scenario scripting and tests).
    pub fn insert_target(&mut self, pos: (f64, f64), vel: (f64, f64)) -> u64 {
        let id = self.next_target_id;
        self.next_target_id += 1;
        self.targets
            .push(TargetState::new(id, self.slot, pos, vel));
        id
    }

    fn is_tracked(&self, id: u64) -> bool {
        self.tracks.iter().flatten().any(|t| t.target_id == id)
    }

    fn target(&self, id: u64) -> Option<&TargetState> {
        self.targets.iter().find(|t| t.id == id)
    }

    fn validate(&self, action: &ActionVector) -> Result<()> {
        if action.dwells.len() != self.cfg.n_max {
            return Err(Error::InvalidAction(format!(
                "expected {} dwells, got {}",
                self.cfg.n_max,
                action.dwells.len()
            )));
        }
        let t0 = self.cfg.t0();
        if let Some(bad) = action
            .dwells
            .iter()
            .find(|d| !(d.is_finite() && **d >= 0.0 && **d <= t0))
        {
            return Err(Error::InvalidAction(format!("dwell {bad} outside [0, {t0}]")));
        }
        Ok(())
    }

    fn move_spawn_despawn(&mut self) -> Result<()> {
        let slot = self.slot;
        for t in &mut self.targets {
            let mut rng = RngStream::derived(self.seed, &[TAG_MOTION, slot, t.id]);
            *t = step_target(t, &self.cfg.motion, &mut rng)?;
        }
        let sp = self.cfg.spawn;
        self.targets
            .retain(|t| t.age <= sp.max_age && t.range() <= sp.region_radius);
        let alive: Vec<u64> = self.targets.iter().map(|t| t.id).collect();
        for entry in &mut self.tracks {
            if entry.as_ref().is_some_and(|t| !alive.contains(&t.target_id)) {
                *entry = None;
            }
        }

        if sp.spawn_period > 0 && slot % sp.spawn_period == 0 && self.targets.len() < sp.max_targets {
            let mut rng = RngStream::derived(self.seed, &[TAG_SPAWN, slot]);
            if rng.bernoulli(sp.spawn_prob) {
                let (r2a, r2b) = (sp.spawn_range_min.powi(2), sp.spawn_range_max.powi(2));
                let r = rng.uniform(r2a, r2b).sqrt();
                let bearing = rng.uniform(-std::f64::consts::PI, std::f64::consts::PI);
                let speed = rng.uniform(sp.speed_min, sp.speed_max);
                let heading = rng.uniform(-std::f64::consts::PI, std::f64::consts::PI);
                self.insert_target(
                    (r * bearing.cos(), r * bearing.sin()),
                    (speed * heading.cos(), speed * heading.sin()),
                );
            }
        }
        Ok(())
    }

    /// Simulates one slot under `action` with the current dual value
    /// `lambda` (used for the reward and echoed in the observation).
    ///
    /// Dwell entries without a live track are not spent. Over-budget
    /// actions are simulated as given and only penalized through the reward.
    pub fn step(&mut self, action: &ActionVector, lambda: f64) -> Result<(EnvObservation, SlotReport)> {
        self.validate(action)?;
        let cfg = self.cfg;
        let t0 = cfg.t0();
        let slot = self.slot;

        self.move_spawn_despawn()?;

        // tracking
        let models = cfg.tracking_models();
        let mut dwells = vec![0.0; cfg.n_max];
        let mut snapshots: Vec<Option<TrackSnapshot>> = vec![None; cfg.n_max];
        for i in 0..cfg.n_max {
            let Some(track) = self.tracks[i].as_ref() else {
                continue;
            };
            let truth = self
                .target(track.target_id)
                .expect("tracks of removed targets are dropped")
                .clone();
            let tau = action.dwells[i];
            let mut rng = RngStream::derived(self.seed, &[TAG_TRACK_MEAS, slot, truth.id]);
            let next = track_step(track, &truth, tau, &models, &mut rng)?;
            dwells[i] = tau;
            snapshots[i] = Some(TrackSnapshot {
                target_id: truth.id,
                cost: next.cost,
                dwell: tau,
                true_range: truth.range(),
                true_pos: (truth.x, truth.y),
                est_pos: (next.estimate[0], next.estimate[1]),
            });
            self.tracks[i] = Some(next);
        }
        let spent: f64 = dwells.iter().sum();
        let usage = spent / t0;
        let n_tracked = self.tracks.iter().flatten().count();

        // scanning and initialization
        let scan_budget = (t0 - spent).max(0.0);
        let tau_beam = tau_beam_for_budget(cfg.scan.phase_delay_deg, scan_budget);
        let untracked: Vec<&TargetState> = self
            .targets
            .iter()
            .filter(|t| !self.is_tracked(t.id))
            .collect();
        let returns = scan_pass(&untracked, &cfg.scan, &cfg.snr, tau_beam, self.seed, slot)?;
        let confirmations = self.bank.process_scan(&returns, slot, n_tracked);

        let mut new_tracks = Vec::new();
        let mut latencies = Vec::new();
        for c in confirmations {
            let free: Vec<&TargetState> = untracked
                .iter()
                .copied()
                .filter(|t| !new_tracks.iter().any(|n: &Track| n.target_id == t.id))
                .collect();
            if let Some(track) = confirm_to_track(&c.history, &free) {
                let spawn = self.target(track.target_id).map_or(slot, |t| t.spawn_slot);
                latencies.push(c.slot_index - spawn);
                new_tracks.push(track);
            }
        }

        let n_targets = self.targets.len();
        let n_miss = n_targets - n_tracked;
        let costs: Vec<f64> = snapshots.iter().flatten().map(|s| s.cost).collect();
        let u = utility(&costs, n_miss, cfg.beta);
        let r = reward(u, usage, lambda, cfg.theta_max);

        let confirmed_ids = new_tracks.iter().map(|t| t.target_id).collect();
        for track in new_tracks {
            if let Some(free) = self.tracks.iter_mut().find(|e| e.is_none()) {
                *free = Some(track);
            }
        }

        let obs = EnvObservation {
            prev_costs: self
                .tracks
                .iter()
                .map(|t| t.as_ref().map_or(0.0, |t| t.cost))
                .collect(),
            prev_dwells: dwells,
            dual: lambda,
        };
        let report = SlotReport {
            slot_index: slot,
            utility: u,
            reward: r,
            budget_usage: usage,
            scan_time: scan_budget,
            n_targets,
            n_tracked,
            n_miss,
            tracks: snapshots,
            confirmed_ids,
            confirmation_latencies: latencies,
            lambda,
        };
        self.slot += 1;
        Ok((obs, report))
    }
}
