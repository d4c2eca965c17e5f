use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

/// Projected dual ascent on the time-budget constraint:
/// `λ ← max(0, λ + α (usage − Θ_max))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualVariable {
    pub lambda: f64,
    pub alpha: f64,
    pub theta_max: f64,
    /// When above 1, the violation is averaged over this many recent slots.
    window: usize,
    recent: VecDeque<f64>,
}

impl DualVariable {
    pub fn new(lambda: f64, alpha: f64, theta_max: f64, window: usize) -> Self {
        Self {
            lambda: lambda.max(0.0),
            alpha,
            theta_max,
            window,
            recent: VecDeque::new(),
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Applies one update and returns the new λ.
    pub fn update(&mut self, usage: f64) -> f64 {
        let violation = usage - self.theta_max;
        let signal = if self.window > 1 {
            if self.recent.len() == self.window {
                self.recent.pop_front();
            }
            self.recent.push_back(violation);
            self.recent.iter().sum::<f64>() / self.recent.len() as f64
        } else {
            violation
        };
        self.lambda = (self.lambda + self.alpha * signal).max(0.0);
        self.lambda
    }
}

/// Pure form of the update.
pub fn dual_update(lambda: f64, usage: f64, alpha: f64, theta_max: f64) -> f64 {
    (lambda + alpha * (usage - theta_max)).max(0.0)
}
