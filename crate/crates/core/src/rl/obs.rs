//! The 45-entry observation and its frame stack.
//!
//! Layout, in order: torso linear velocity (3) and angular velocity (3) in
//! the body frame, joint positions (9), joint velocities (9), body-frame
//! gravity direction (3), planar velocity command (2), yaw-rate command
//! (1), previous action (9), per-leg clock encoding sin(2 pi phi) (4), and
//! the duty pair (beta, 1 - beta) (2). The policy consumes a stack of the
//! most recent frames.

use rand::Rng;

use crate::gait::{clock_encoding, PhaseClock};
use crate::reward::CommandSet;
use crate::sim::{ObservationNoise, SimState, JOINT_COUNT};
use crate::Result;

/// Entries in one observation frame.
pub const OBS_DIM: usize = 45;
/// Frames stacked as network input.
pub const STACK_LEN: usize = 4;
/// Network input width.
pub const STACK_DIM: usize = OBS_DIM * STACK_LEN;

/// One observation frame.
pub type Observation = [f64; OBS_DIM];

/// Everything the observation builder reads besides the sim state.
pub struct ObsInputs<'a> {
    pub command: &'a CommandSet,
    pub clock: &'a PhaseClock,
    /// Stance fraction beta for the duty pair entries.
    pub duty: f64,
    pub prev_action: &'a [f64; JOINT_COUNT],
}

/// Assemble one observation frame, applying uniform noise to the velocity
/// and joint blocks only.
pub fn build_observation<R: Rng>(
    state: &SimState,
    inputs: &ObsInputs<'_>,
    noise: &ObservationNoise,
    rng: &mut R,
) -> Result<Observation> {
    if !state.is_finite() {
        return Err(crate::error::Error::NonFiniteState { time: state.time });
    }
    let mut lin_vel: [f64; 3] = state.lin_vel_body().into();
    let mut ang_vel: [f64; 3] = state.ang_vel_body().into();
    let mut joint_pos = state.joint_pos;
    let mut joint_vel = state.joint_vel;
    noise.apply(rng, &mut lin_vel, &mut ang_vel, &mut joint_pos, &mut joint_vel);

    let gravity: [f64; 3] = state.gravity_dir_body().into();
    let clock = clock_encoding(inputs.clock);

    let mut obs = [0.0; OBS_DIM];
    let mut at = 0;
    let mut put = |vals: &[f64]| {
        obs[at..at + vals.len()].copy_from_slice(vals);
        at += vals.len();
    };
    put(&lin_vel);
    put(&ang_vel);
    put(&joint_pos);
    put(&joint_vel);
    put(&gravity);
    put(&[inputs.command.v_x, inputs.command.v_y]);
    put(&[inputs.command.yaw_rate]);
    put(inputs.prev_action);
    put(&clock);
    put(&[inputs.duty, 1.0 - inputs.duty]);
    debug_assert_eq!(at, OBS_DIM);
    Ok(obs)
}

/// Rolling stack of the most recent frames, oldest first. Starts filled
/// with copies of the initial frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ObsStack {
    frames: [Observation; STACK_LEN],
}

impl ObsStack {
    pub fn filled(frame: Observation) -> Self {
        ObsStack {
            frames: [frame; STACK_LEN],
        }
    }

    pub fn push(&mut self, frame: Observation) {
        self.frames.rotate_left(1);
        self.frames[STACK_LEN - 1] = frame;
    }

    /// Concatenated frames, oldest first, as the network input.
    pub fn flat(&self) -> [f64; STACK_DIM] {
        let mut out = [0.0; STACK_DIM];
        for (chunk, frame) in out.chunks_exact_mut(OBS_DIM).zip(&self.frames) {
            chunk.copy_from_slice(frame);
        }
        out
    }
}
