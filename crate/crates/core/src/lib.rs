//! Symmetry-guided reinforcement learning engine for quadrupedal gait
//! generation.
//!
//! A gait is specified by three free phase offsets and a commanded forward
//! velocity. From that alone, a reward built from temporal, morphological and
//! time-reversal symmetries shapes a PPO policy that drives a reduced-order
//! quadruped simulator, with no reference trajectories or footfall scripts.
//!
//! The crate is organised as:
//! - [`gait`]: phase offsets, speed-dependent stride timing, per-leg clocks
//!   and gait-family classification.
//! - [`symmetry`]: exact and Von Mises-smoothed periodic indicators plus the
//!   leg-permutation group and its joint-difference metric.
//! - [`reward`]: the individual reward terms and the clipped total.
//! - [`sim`]: a 6-DOF torso with massless PD-driven legs, compliant ground
//!   contact and domain randomization.
//! - [`rl`]: the MDP environment, observation builder, policy/value network,
//!   GAE, the PPO trainer and the deterministic evaluator.
//! - [`trace`]: evaluation trace rows and CSV export.

pub mod error;
pub mod gait;
pub mod reward;
pub mod rl;
pub mod sim;
pub mod symmetry;
pub mod trace;
pub mod util;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
