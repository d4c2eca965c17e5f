//! Cognitive radar time allocation between tracking and scanning.
//!
//! A radar shares each slot of length `T₀` between EKF revisits of its
//! confirmed tracks and a scanning sweep that feeds M-of-K track
//! initialization. A DDPG agent picks per-track dwell times, and a dual
//! variable prices the time budget.
//!
//! Layering, bottom up: [`numerics`] (small matrices, seeded RNG),
//! [`motion`], [`sensing`], [`tracking`], [`trackinit`], [`env`], [`cdrl`],
//! then [`config`], [`rollout`], [`report`] and [`cli`].

pub mod cdrl;
pub mod cli;
pub mod config;
pub mod env;
pub mod error;
pub mod motion;
pub mod numerics;
pub mod report;
pub mod rollout;
pub mod sensing;
pub mod tracking;
pub mod trackinit;

pub use config::RunConfig;
pub use env::{ActionVector, Env, EnvConfig, EnvObservation, SlotReport};
pub use error::{Error, Result};
