//! Track initialization from scan returns.
//!
//! Tentative tracks live in a bank of at most `M` storage slots. Each scan
//! pass associates returns to slots by global nearest neighbor under a
//! Cartesian distance gate, clears every slot that got nothing, opens new
//! slots for leftover returns, and promotes any slot holding `K`
//! consecutive returns to a confirmed track.

use serde::{Deserialize, Serialize};

use crate::motion::TargetState;
use crate::sensing::Measurement;
use crate::tracking::{init_track, Track};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitSlot {
    pub slot_id: u64,
    /// Associated returns, most recent last.
    pub history: Vec<Measurement>,
    pub last_update_slot: u64,
}

impl InitSlot {
    pub fn hit_count(&self) -> usize {
        self.history.len()
    }

    fn latest(&self) -> &Measurement {
        self.history.last().expect("slots are never empty")
    }
}

/// A tentative track that reached `K` hits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Confirmation {
    pub history: Vec<Measurement>,
    /// Time slot of the confirming (K-th) hit.
    pub slot_index: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitBank {
    slots: Vec<InitSlot>,
    capacity: usize,
    threshold: f64,
    confirm_k: usize,
    next_id: u64,
}

impl InitBank {
    /// # Panics
    /// If `confirm_k` is zero or `capacity` exceeds 16 (the assignment
    /// search is exponential in the slot count).
    pub fn new(capacity: usize, threshold: f64, confirm_k: usize) -> Self {
        assert!(confirm_k >= 1, "confirm_k must be at least 1");
        assert!(capacity <= 16, "at most 16 storage slots are supported");
        Self {
            slots: Vec::new(),
            capacity,
            threshold,
            confirm_k,
            next_id: 0,
        }
    }

    pub fn slots(&self) -> &[InitSlot] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn confirm_k(&self) -> usize {
        self.confirm_k
    }

    /// Slot whose latest return is nearest to `z`, if strictly inside the gate.
    /// Ties go to the lowest slot id.
    pub fn associate(&self, z: &Measurement) -> Option<u64> {
        let mut best: Option<(f64, u64)> = None;
        for s in &self.slots {
            let d = s.latest().distance_to(z);
            if d >= self.threshold {
                continue;
            }
            let better = match best {
                None => true,
                Some((bd, bid)) => d < bd || (d == bd && s.slot_id < bid),
            };
            if better {
                best = Some((d, s.slot_id));
            }
        }
        best.map(|(_, id)| id)
    }

    /// Applies one scan pass. `n_tracked` confirmed tracks share the bank's
    /// capacity with the tentative slots.
    pub fn process_scan(
        &mut self,
        measurements: &[Measurement],
        slot_index: u64,
        n_tracked: usize,
    ) -> Vec<Confirmation> {
        let assignment = assign(&self.slots, measurements, self.threshold);

        let mut kept: Vec<InitSlot> = Vec::with_capacity(self.slots.len());
        let mut used = vec![false; measurements.len()];
        for (si, slot) in self.slots.drain(..).enumerate() {
            if let Some(mi) = assignment.iter().position(|a| *a == Some(si)) {
                let mut slot = slot;
                slot.history.push(measurements[mi].clone());
                slot.last_update_slot = slot_index;
                used[mi] = true;
                kept.push(slot);
            }
        }

        for (mi, z) in measurements.iter().enumerate() {
            if used[mi] {
                continue;
            }
            if kept.len() + n_tracked >= self.capacity {
                break;
            }
            kept.push(InitSlot {
                slot_id: self.next_id,
                history: vec![z.clone()],
                last_update_slot: slot_index,
            });
            self.next_id += 1;
        }

        let mut confirmed = Vec::new();
        for slot in kept {
            if slot.hit_count() >= self.confirm_k {
                confirmed.push(Confirmation {
                    history: slot.history,
                    slot_index,
                });
            } else {
                self.slots.push(slot);
            }
        }
        confirmed
    }
}

/// Global-nearest-neighbor assignment of measurements to slots.
///
/// Maximizes the number of gated pairs, then minimizes their summed
/// distance. Returns, per measurement, the index of its slot. Exact search
/// over measurement order × used-slot bitmask.
fn assign(slots: &[InitSlot], measurements: &[Measurement], gate: f64) -> Vec<Option<usize>> {
    let m = slots.len();
    let n = measurements.len();
    if m == 0 || n == 0 {
        return vec![None; n];
    }
    let dist: Vec<Vec<Option<f64>>> = measurements
        .iter()
        .map(|z| {
            slots
                .iter()
                .map(|s| {
                    let d = s.latest().distance_to(z);
                    (d < gate).then_some(d)
                })
                .collect()
        })
        .collect();

    let masks = 1usize << m;
    // best[i][mask] = (pairs, total distance, choice) for measurements i.. given used slots
    let mut best = vec![vec![(0usize, 0.0f64, None::<usize>); masks]; n + 1];
    for i in (0..n).rev() {
        for mask in 0..masks {
            let (sc, sd, _) = best[i + 1][mask];
            let mut choice = (sc, sd, None);
            for j in 0..m {
                if mask & (1 << j) != 0 {
                    continue;
                }
                if let Some(d) = dist[i][j] {
                    let (c, t, _) = best[i + 1][mask | (1 << j)];
                    let cand = (c + 1, t + d, Some(j));
                    if cand.0 > choice.0 || (cand.0 == choice.0 && cand.1 < choice.1) {
                        choice = cand;
                    }
                }
            }
            best[i][mask] = choice;
        }
    }

    let mut out = vec![None; n];
    let mut mask = 0usize;
    for (i, o) in out.iter_mut().enumerate() {
        let choice = best[i][mask].2;
        if let Some(j) = choice {
            mask |= 1 << j;
        }
        *o = choice;
    }
    out
}

/// Turns a confirmed history into a track bound to the nearest still
/// untracked true target (bookkeeping only; the filter itself starts from
/// the uninformed prior). Returns `None` when nothing is left to bind.
pub fn confirm_to_track(history: &[Measurement], untracked: &[&TargetState]) -> Option<Track> {
    let (zx, zy) = history.last()?.to_cartesian();
    untracked
        .iter()
        .min_by(|a, b| {
            let da = (a.x - zx).hypot(a.y - zy);
            let db = (b.x - zx).hypot(b.y - zy);
            da.total_cmp(&db).then(a.id.cmp(&b.id))
        })
        .map(|t| init_track(t.id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Mat;
    use crate::sensing::Origin;

    fn at(x: f64, y: f64) -> Measurement {
        Measurement {
            range: x.hypot(y),
            azimuth: y.atan2(x),
            origin: Origin::FalseAlarm,
        }
    }

    #[test]
    fn empty_bank_associates_nothing() {
        let bank = InitBank::new(5, 500.0, 3);
        assert_eq!(bank.associate(&at(1000.0, 0.0)), None);
    }

    #[test]
    fn inside_gate_and_boundary() {
        let mut bank = InitBank::new(5, 500.0, 3);
        bank.process_scan(&[at(1000.0, 0.0)], 0, 0);
        assert_eq!(bank.associate(&at(1250.0, 0.0)), Some(0));
        assert_eq!(bank.associate(&at(1500.0, 0.0)), None);
    }

    #[test]
    fn third_hit_confirms() {
        let mut bank = InitBank::new(5, 500.0, 3);
        assert!(bank.process_scan(&[at(1000.0, 0.0)], 0, 0).is_empty());
        assert!(bank.process_scan(&[at(1100.0, 0.0)], 1, 0).is_empty());
        assert_eq!(bank.slots()[0].hit_count(), 2);
        let c = bank.process_scan(&[at(1200.0, 0.0)], 2, 0);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].history.len(), 3);
        assert_eq!(c[0].slot_index, 2);
        assert!(bank.is_empty());
    }

    #[test]
    fn missed_pass_clears_slot() {
        let mut bank = InitBank::new(5, 500.0, 3);
        bank.process_scan(&[at(1000.0, 0.0)], 0, 0);
        bank.process_scan(&[at(1100.0, 0.0)], 1, 0);
        assert!(bank.process_scan(&[], 2, 0).is_empty());
        assert!(bank.is_empty());
    }

    #[test]
    fn nearest_wins_and_other_opens_slot() {
        let mut bank = InitBank::new(5, 500.0, 3);
        bank.process_scan(&[at(1000.0, 0.0)], 0, 0);
        bank.process_scan(&[at(1300.0, 0.0), at(1100.0, 0.0)], 1, 0);
        assert_eq!(bank.len(), 2);
        let old = bank.slots().iter().find(|s| s.slot_id == 0).unwrap();
        assert_eq!(old.hit_count(), 2);
        assert!((old.history[1].to_cartesian().0 - 1100.0).abs() < 1e-9);
        let new = bank.slots().iter().find(|s| s.slot_id == 1).unwrap();
        assert_eq!(new.hit_count(), 1);
    }

    #[test]
    fn capacity_is_shared_with_tracks() {
        let mut bank = InitBank::new(5, 500.0, 3);
        let zs: Vec<_> = (0..6).map(|i| at(2000.0 * (i + 1) as f64, 0.0)).collect();
        bank.process_scan(&zs, 0, 3);
        assert_eq!(bank.len(), 2);
        let mut full = InitBank::new(5, 500.0, 3);
        full.process_scan(&zs, 0, 5);
        assert!(full.is_empty());
    }

    #[test]
    fn hit_count_stays_below_k() {
        let mut bank = InitBank::new(5, 500.0, 3);
        for t in 0..20 {
            bank.process_scan(&[at(1000.0 + 10.0 * t as f64, 0.0)], t, 0);
            assert!(bank.slots().iter().all(|s| s.hit_count() < 3));
        }
    }

    #[test]
    fn confirmation_binds_nearest_untracked_target() {
        let a = TargetState::new(1, 0, (1000.0, 0.0), (0.0, 0.0));
        let b = TargetState::new(2, 0, (5000.0, 0.0), (0.0, 0.0));
        let hist = vec![at(4800.0, 0.0), at(4900.0, 0.0), at(5010.0, 0.0)];
        let t = confirm_to_track(&hist, &[&a, &b]).unwrap();
        assert_eq!(t.target_id, 2);
        assert_eq!(t.covariance, Mat::identity(4));
        assert!(confirm_to_track(&hist, &[]).is_none());
    }
}
