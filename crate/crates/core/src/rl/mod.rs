//! Learning engine: environment, observation assembly, policy/value
//! networks, advantage estimation, the PPO update, and the training and
//! evaluation drivers.

mod env;
mod eval;
mod gae;
mod net;
mod obs;
mod ppo;
mod train;

pub use env::{EnvStep, EpisodeConfig, EpisodeStats, GaitEnv, CONTROL_DT, PHYSICS_DT, SUBSTEPS};
pub use eval::{evaluate, CommandSchedule, EvalSummary};
pub use gae::{gae_advantages, TrajectoryBatch};
pub use net::{
    standard_normal, GaussianPolicy, Mlp, MlpCache, PolicyParams, ValueNet, ACTION_DIM,
};
pub use obs::{
    build_observation, ObsInputs, ObsStack, Observation, OBS_DIM, STACK_DIM, STACK_LEN,
};
pub use ppo::{
    clip_grad_norm, ppo_loss_grad, ppo_update, Adam, LossTerms, PpoConfig, UpdateStats,
};
pub use train::{
    train, write_metrics_csv, EarlyStop, MetricsRow, TrainConfig, TrainOutcome, METRICS_COLUMNS,
};
