//! Constrained deep reinforcement learning: from-scratch MLPs with Adam,
//! experience replay, a DDPG actor-critic and the dual update on the time
//! budget.

mod adam;
mod agent;
mod dual;
mod mlp;
mod replay;
mod train;

pub use adam::Adam;
pub use agent::{
    AgentConfig, Batch, DdpgAgent, ExplorationNoise, NoiseKind, ObsCodec, Passthrough,
    StateCodec, UpdateStats,
};
pub use dual::{dual_update, DualVariable};
pub use mlp::{sigmoid, Activation, ForwardCache, Mlp};
pub use replay::{ReplayBuffer, Transition};
pub use train::{FrozenPolicy, TrainStep, Trainer, CHECKPOINT_VERSION};
