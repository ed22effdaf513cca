//! Training environment: one robot tracking one gait's phase clock.
//!
//! Control runs at 100 Hz over a 1 kHz physics loop. Actions are joint
//! position offsets from the standing pose; the reward is evaluated once
//! per control step from a physics snapshot. Every random draw comes from
//! the environment's own counter-based generator stream, so a rollout is
//! a pure function of (seed, stream, action sequence).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gait::{GaitSpec, LegId, PhaseClock, StrideTiming};
use crate::reward::{self, CommandSet, RewardBreakdown, RewardWeights, RobotSnapshot};
use crate::sim::{
    self, foot_kinematics, randomize_domain, DomainRandomization, Morphology, SimState,
    JOINT_COUNT,
};
use crate::symmetry::{
    expected_indicator, morphological_pairs, LegJointAngles, PhaseIndicatorConfig, PhaseKind,
    SymmetryGroup, DEFAULT_KAPPA,
};
use crate::Result;

use super::net::ACTION_DIM;
use super::obs::{build_observation, ObsInputs, ObsStack, STACK_DIM};

/// Control period, s.
pub const CONTROL_DT: f64 = 0.01;
/// Physics substep, s.
pub const PHYSICS_DT: f64 = 1e-3;
/// Physics substeps per control step.
pub const SUBSTEPS: usize = 10;

/// Per-episode setup shared by training and evaluation.
#[derive(Debug, Clone)]
pub struct EpisodeConfig {
    /// Phase offsets; the command field serves as the default speed.
    pub gait: GaitSpec,
    /// Inclusive speed command range sampled each episode. Equal limits
    /// pin the command.
    pub v_cmd_range: (f64, f64),
    /// Episode length limit, s.
    pub max_duration: f64,
    pub domain: DomainRandomization,
    /// Indicator smoothing sharpness.
    pub kappa: f64,
    /// Phase-offset tolerance for activating a morphological pair.
    pub pair_eps: f64,
    /// Joint target offset per unit action, rad.
    pub action_scale: f64,
    /// Sample the stride-curve noise each episode; otherwise zero.
    pub timing_noise: bool,
    /// Perturb the initial pose and velocities slightly.
    pub start_jitter: bool,
    /// Per-term penalty weights.
    pub weights: RewardWeights,
}

impl EpisodeConfig {
    pub fn new(gait: GaitSpec) -> Self {
        let v = gait.v_cmd;
        EpisodeConfig {
            gait,
            v_cmd_range: (v, v),
            max_duration: 10.0,
            domain: DomainRandomization::default(),
            kappa: DEFAULT_KAPPA,
            pair_eps: 0.01,
            action_scale: 1.0,
            timing_noise: true,
            start_jitter: true,
            weights: RewardWeights::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.v_cmd_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(crate::error::Error::param(
                "v_cmd_range",
                "limits must be finite with lo <= hi",
                lo,
            ));
        }
        if !(self.max_duration > 0.0) {
            return Err(crate::error::Error::param(
                "max_duration",
                "must be positive",
                self.max_duration,
            ));
        }
        if !(self.action_scale > 0.0 && self.action_scale.is_finite()) {
            return Err(crate::error::Error::param(
                "action_scale",
                "must be finite and positive",
                self.action_scale,
            ));
        }
        PhaseIndicatorConfig::new(0.5, self.kappa)?;
        self.weights.validate()?;
        Ok(())
    }
}

/// Result of one control step.
#[derive(Debug, Clone)]
pub struct EnvStep {
    /// Stacked observation after the step.
    pub obs: [f64; STACK_DIM],
    pub reward: f64,
    /// Episode ended in failure (fall or physics fault): no bootstrap.
    pub done: bool,
    /// Episode ended by the time limit: bootstrap from the next value.
    pub truncated: bool,
    pub faulted: bool,
    pub breakdown: RewardBreakdown,
    pub snapshot: RobotSnapshot,
    /// Foot contact measured this step.
    pub contact: [bool; 4],
    /// Fraction of legs whose contact matches the phase clock.
    pub agreement: f64,
    /// Summary, present when the episode just ended.
    pub stats: Option<EpisodeStats>,
}

/// Whole-episode summary used for progress tracking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeStats {
    pub steps: usize,
    pub total_reward: f64,
    /// Mean |v_x - v_cmd| over the episode.
    pub mean_abs_vx_err: f64,
    /// Mean contact/clock agreement over the episode.
    pub agreement: f64,
    pub faulted: bool,
}

/// One robot, one gait, episodic.
pub struct GaitEnv {
    base_morph: Morphology,
    cfg: EpisodeConfig,
    rng: ChaCha8Rng,
    morph: Morphology,
    state: SimState,
    clock: PhaseClock,
    timing: StrideTiming,
    command: CommandSet,
    group: SymmetryGroup,
    ind_cfg: PhaseIndicatorConfig,
    standing: [f64; JOINT_COUNT],
    prev_action: [f64; JOINT_COUNT],
    prev_torques: [f64; JOINT_COUNT],
    stack: ObsStack,
    steps: usize,
    max_steps: usize,
    ep_return: f64,
    ep_abs_verr: f64,
    ep_agree: f64,
}

impl GaitEnv {
    /// `stream` separates the generators of parallel environments under a
    /// shared seed.
    pub fn new(morph: Morphology, cfg: EpisodeConfig, seed: u64, stream: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let group = morphological_pairs(&cfg.gait, cfg.pair_eps)?;
        let standing = morph.standing_targets();
        let state = SimState::standing(&morph);
        let timing = StrideTiming::from_command(cfg.gait.v_cmd, 0.0)?;
        let ind_cfg = PhaseIndicatorConfig::new(timing.duty, cfg.kappa)?;
        let max_steps = (cfg.max_duration / CONTROL_DT).round() as usize;
        let mut env = GaitEnv {
            base_morph: morph.clone(),
            cfg,
            rng,
            morph,
            clock: PhaseClock::new(&GaitSpec::new(0.0, 0.0, 0.0, 0.0)?),
            timing,
            command: CommandSet::forward(0.0),
            group,
            ind_cfg,
            standing,
            prev_action: [0.0; JOINT_COUNT],
            prev_torques: [0.0; JOINT_COUNT],
            stack: ObsStack::filled([0.0; super::obs::OBS_DIM]),
            state,
            steps: 0,
            max_steps: max_steps.max(1),
            ep_return: 0.0,
            ep_abs_verr: 0.0,
            ep_agree: 0.0,
        };
        env.reset()?;
        Ok(env)
    }

    /// Start a fresh episode; returns the initial stacked observation.
    pub fn reset(&mut self) -> Result<[f64; STACK_DIM]> {
        let (lo, hi) = self.cfg.v_cmd_range;
        let v_cmd = if lo == hi {
            lo
        } else {
            self.rng.gen_range(lo..=hi)
        };
        let delta = if self.cfg.timing_noise {
            self.rng.gen_range(-1.0..=1.0)
        } else {
            0.0
        };
        let spec = self.cfg.gait.with_command(v_cmd);
        self.timing = StrideTiming::from_command(v_cmd, delta)?;
        self.ind_cfg = PhaseIndicatorConfig::new(self.timing.duty, self.cfg.kappa)?;
        self.command = CommandSet::forward(v_cmd);
        self.clock = PhaseClock::new(&spec);
        self.morph = randomize_domain(&self.base_morph, &self.cfg.domain, &mut self.rng);
        self.state = SimState::standing(&self.morph);
        if self.cfg.start_jitter {
            self.apply_start_jitter();
        }
        self.prev_action = [0.0; JOINT_COUNT];
        self.prev_torques = [0.0; JOINT_COUNT];
        self.steps = 0;
        self.ep_return = 0.0;
        self.ep_abs_verr = 0.0;
        self.ep_agree = 0.0;

        let inputs = ObsInputs {
            command: &self.command,
            clock: &self.clock,
            duty: self.timing.duty,
            prev_action: &self.prev_action,
        };
        let noise = self.cfg.domain.noise;
        let frame = build_observation(&self.state, &inputs, &noise, &mut self.rng)?;
        self.stack = ObsStack::filled(frame);
        Ok(self.stack.flat())
    }

    fn apply_start_jitter(&mut self) {
        let u = |rng: &mut ChaCha8Rng, h: f64| rng.gen_range(-h..=h);
        let roll = u(&mut self.rng, 0.03);
        let pitch = u(&mut self.rng, 0.03);
        self.state.orientation = nalgebra::UnitQuaternion::from_euler_angles(roll, pitch, 0.0);
        self.state.position.z += u(&mut self.rng, 0.002);
        for j in 0..JOINT_COUNT {
            let (lo, hi) = self.morph.joint_limits(j);
            self.state.joint_pos[j] =
                (self.state.joint_pos[j] + u(&mut self.rng, 0.05)).clamp(lo, hi);
            self.state.joint_vel[j] += u(&mut self.rng, 0.1);
        }
        for k in 0..3 {
            self.state.lin_vel[k] += u(&mut self.rng, 0.02);
        }
    }

    /// Replace the speed command mid-episode (evaluation schedules).
    /// Stride timing is recomputed without curve noise; the phase clock
    /// keeps its accumulated value so phases stay continuous.
    pub fn override_command(&mut self, v_cmd: f64) -> Result<()> {
        let spec = self.cfg.gait.with_command(v_cmd);
        self.timing = StrideTiming::from_command(v_cmd, 0.0)?;
        self.ind_cfg = PhaseIndicatorConfig::new(self.timing.duty, self.cfg.kappa)?;
        self.command = CommandSet::forward(v_cmd);
        self.clock.set_direction(spec.direction());
        Ok(())
    }

    /// Advance one control step. A physics fault ends the episode with
    /// zero reward instead of erroring.
    pub fn step(&mut self, action: &[f64; ACTION_DIM]) -> Result<EnvStep> {
        // Joint targets: clamped action offsets from the standing pose.
        let mut clamped = [0.0; JOINT_COUNT];
        let mut targets = [0.0; JOINT_COUNT];
        for j in 0..JOINT_COUNT {
            clamped[j] = action[j].clamp(-1.0, 1.0);
            let (lo, hi) = self.morph.joint_limits(j);
            targets[j] = (self.standing[j] + clamped[j] * self.cfg.action_scale).clamp(lo, hi);
        }

        let mut torques = [0.0; JOINT_COUNT];
        for _ in 0..SUBSTEPS {
            match sim::step(&mut self.state, &targets, &self.morph, PHYSICS_DT) {
                Ok(t) => torques = t,
                Err(_) => return Ok(self.faulted_step()),
            }
        }
        if !self.state.is_finite() {
            return Ok(self.faulted_step());
        }
        self.clock.advance(CONTROL_DT, self.timing.period)?;
        self.steps += 1;

        let snapshot = self.snapshot(&torques);
        let breakdown = reward::evaluate_with(
            &snapshot,
            &self.command,
            &self.ind_cfg,
            &self.group,
            &self.cfg.weights,
        )?;

        let mut contact = [false; 4];
        let mut agree = 0.0;
        for leg in LegId::ALL {
            let i = leg.index();
            contact[i] = snapshot.foot_force[i] > 0.0;
            let stance =
                expected_indicator(snapshot.phases[i], &self.ind_cfg, PhaseKind::Stance)? > 0.5;
            if contact[i] == stance {
                agree += 0.25;
            }
        }

        let (roll, pitch) = self.state.roll_pitch();
        let fell = self.state.position.z < 0.4 * self.morph.standing_height()
            || roll.abs() > 1.0
            || pitch.abs() > 1.0;
        let timeout = self.steps >= self.max_steps;
        let done = fell;
        let truncated = timeout && !fell;

        self.prev_torques = torques;
        self.prev_action = clamped;
        self.ep_return += breakdown.total;
        self.ep_abs_verr += (snapshot.lin_vel[0] - self.command.v_x).abs();
        self.ep_agree += agree;

        let inputs = ObsInputs {
            command: &self.command,
            clock: &self.clock,
            duty: self.timing.duty,
            prev_action: &self.prev_action,
        };
        let noise = self.cfg.domain.noise;
        let frame = build_observation(&self.state, &inputs, &noise, &mut self.rng)?;
        self.stack.push(frame);

        let stats = (done || truncated).then(|| self.episode_stats(false));
        Ok(EnvStep {
            obs: self.stack.flat(),
            reward: breakdown.total,
            done,
            truncated,
            faulted: false,
            breakdown,
            snapshot,
            contact,
            agreement: agree,
            stats,
        })
    }

    fn faulted_step(&mut self) -> EnvStep {
        self.steps += 1;
        let snapshot = RobotSnapshot::zeroed();
        EnvStep {
            obs: self.stack.flat(),
            reward: 0.0,
            done: true,
            truncated: false,
            faulted: true,
            breakdown: RewardBreakdown::default(),
            snapshot,
            contact: [false; 4],
            agreement: 0.0,
            stats: Some(self.episode_stats(true)),
        }
    }

    fn episode_stats(&self, faulted: bool) -> EpisodeStats {
        let n = self.steps.max(1) as f64;
        // A faulted step contributes nothing to the accumulators.
        let counted = if faulted { (self.steps - 1).max(1) as f64 } else { n };
        EpisodeStats {
            steps: self.steps,
            total_reward: self.ep_return,
            mean_abs_vx_err: self.ep_abs_verr / counted,
            agreement: self.ep_agree / counted,
            faulted,
        }
    }

    fn snapshot(&self, torques: &[f64; JOINT_COUNT]) -> RobotSnapshot {
        let feet = foot_kinematics(&self.state, &self.morph);
        let mut foot_force = [0.0; 4];
        let mut foot_speed = [0.0; 4];
        let mut joints = [LegJointAngles::default(); 4];
        for i in 0..4 {
            foot_force[i] = self.state.foot_force[i].norm();
            foot_speed[i] = feet[i].vel.norm();
            joints[i] = LegJointAngles {
                shoulder: self.state.joint_pos[i],
                knee: self.state.joint_pos[4 + i],
            };
        }
        RobotSnapshot {
            lin_vel: self.state.lin_vel_body().into(),
            yaw_rate: self.state.ang_vel_body().z,
            torques: *torques,
            prev_torques: self.prev_torques,
            foot_force,
            foot_speed,
            joints,
            phases: self.clock.phases(),
        }
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    #[cfg(test)]
    pub(crate) fn state_mut(&mut self) -> &mut SimState {
        &mut self.state
    }

    pub fn command(&self) -> &CommandSet {
        &self.command
    }

    pub fn timing(&self) -> &StrideTiming {
        &self.timing
    }

    pub fn clock(&self) -> &PhaseClock {
        &self.clock
    }

    pub fn indicator_config(&self) -> &PhaseIndicatorConfig {
        &self.ind_cfg
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }
}
