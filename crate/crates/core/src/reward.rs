//! Reward terms for reference-free gait training and their clipped total.
//!
//! Four penalty groups push the policy toward the commanded motion without
//! any reference trajectory: command tracking, torso/actuation smoothness,
//! periodic stance/swing conformance, and morphological pair symmetry.
//! Every term is a saturating exponential penalty in (-c, 0], so the total
//! `max(0, 1 + sum of terms)` stays in [0, 1].

use crate::gait::LegId;
use crate::symmetry::{
    expected_indicator, morphological_distance, LegJointAngles, PhaseIndicatorConfig, PhaseKind,
    SymmetryGroup,
};
use crate::Result;

/// Physics quantities sampled at one control step, everything the reward
/// needs. Velocities are in the torso frame; forces and speeds are
/// magnitudes; per-leg arrays follow the canonical leg order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotSnapshot {
    /// Torso linear velocity (v_x, v_y, v_z), m/s.
    pub lin_vel: [f64; 3],
    /// Torso yaw rate, rad/s.
    pub yaw_rate: f64,
    /// Joint torques this control step, N*m (4 shoulders, 4 knees, neck).
    pub torques: [f64; 9],
    /// Joint torques from the previous control step.
    pub prev_torques: [f64; 9],
    /// Ground reaction force magnitude per foot, N, >= 0.
    pub foot_force: [f64; 4],
    /// Foot speed magnitude per foot, m/s, >= 0.
    pub foot_speed: [f64; 4],
    /// Shoulder and knee angle per leg, rad.
    pub joints: [LegJointAngles; 4],
    /// Per-leg gait phase in [0, 1), offsets already applied.
    pub phases: [f64; 4],
}

impl RobotSnapshot {
    /// A snapshot at rest with all quantities zero. Useful as a base for
    /// tests and diagnostics; phase 0 puts every leg at swing onset.
    pub fn zeroed() -> Self {
        RobotSnapshot {
            lin_vel: [0.0; 3],
            yaw_rate: 0.0,
            torques: [0.0; 9],
            prev_torques: [0.0; 9],
            foot_force: [0.0; 4],
            foot_speed: [0.0; 4],
            joints: [LegJointAngles::default(); 4],
            phases: [0.0; 4],
        }
    }
}

/// Commanded planar motion. Training uses a forward velocity command only;
/// the lateral and yaw commands stay zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommandSet {
    pub v_x: f64,
    pub v_y: f64,
    pub yaw_rate: f64,
}

impl CommandSet {
    /// Forward command with zero lateral and yaw components.
    pub fn forward(v_x: f64) -> Self {
        CommandSet {
            v_x,
            v_y: 0.0,
            yaw_rate: 0.0,
        }
    }
}

/// Per-term reward diagnostics plus the clipped total.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RewardBreakdown {
    pub command: f64,
    pub smoothness: f64,
    pub temporal: f64,
    pub morphological: f64,
    /// `max(0, 1 + command + smoothness + temporal + morphological)`.
    pub total: f64,
}

/// Per-penalty weights. The defaults are the canonical training weights;
/// an override rescales one term's pull without touching its error rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardWeights {
    /// Forward-velocity tracking.
    pub forward: f64,
    /// Lateral-velocity tracking.
    pub lateral: f64,
    /// Yaw-rate tracking.
    pub yaw: f64,
    /// Vertical torso velocity.
    pub vertical: f64,
    /// Torque change between control steps.
    pub torque_delta: f64,
    /// Ground force while swing-weighted.
    pub swing_force: f64,
    /// Foot speed while stance-weighted.
    pub stance_speed: f64,
    /// Joint mismatch across active morphological pairs.
    pub morphological: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            forward: 0.3,
            lateral: 0.3,
            yaw: 0.15,
            vertical: 0.1,
            torque_delta: 0.05,
            swing_force: 0.15,
            stance_speed: 0.15,
            morphological: 0.15,
        }
    }
}

impl RewardWeights {
    /// Weights must be finite and nonnegative; a zero disables a term.
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("forward", self.forward),
            ("lateral", self.lateral),
            ("yaw", self.yaw),
            ("vertical", self.vertical),
            ("torque_delta", self.torque_delta),
            ("swing_force", self.swing_force),
            ("stance_speed", self.stance_speed),
            ("morphological", self.morphological),
        ];
        for (name, w) in named {
            if !w.is_finite() || w < 0.0 {
                return Err(crate::Error::InvalidParam {
                    name,
                    reason: "reward weight must be finite and >= 0",
                    value: w,
                });
            }
        }
        Ok(())
    }
}

/// Saturating exponential penalty `-weight * (1 - exp(-rate * x))` for a
/// nonnegative error magnitude `x`. Ranges over [-weight, 0]; the lower
/// bound is reached when the exponential underflows.
fn penalty(weight: f64, rate: f64, x: f64) -> f64 {
    -weight * (1.0 - (-rate * x).exp())
}

/// Command-tracking penalty over forward, lateral and yaw errors.
/// Range (-0.75, 0] at default weights; zero exactly when all three
/// commands are met.
pub fn command_reward(snap: &RobotSnapshot, cmd: &CommandSet) -> f64 {
    command_reward_with(snap, cmd, &RewardWeights::default())
}

/// `command_reward` with explicit weights.
pub fn command_reward_with(snap: &RobotSnapshot, cmd: &CommandSet, w: &RewardWeights) -> f64 {
    penalty(w.forward, 10.0, (snap.lin_vel[0] - cmd.v_x).abs())
        + penalty(w.lateral, 10.0, (snap.lin_vel[1] - cmd.v_y).abs())
        + penalty(w.yaw, 5.0, (snap.yaw_rate - cmd.yaw_rate).abs())
}

/// Smoothness penalty on vertical torso velocity and the torque change
/// since the previous control step (Euclidean norm over all 9 joints).
/// Range (-0.15, 0] at default weights.
pub fn smoothness_reward(snap: &RobotSnapshot) -> f64 {
    smoothness_reward_with(snap, &RewardWeights::default())
}

/// `smoothness_reward` with explicit weights.
pub fn smoothness_reward_with(snap: &RobotSnapshot, w: &RewardWeights) -> f64 {
    let dtau: f64 = snap
        .torques
        .iter()
        .zip(&snap.prev_torques)
        .map(|(t, p)| (p - t) * (p - t))
        .sum::<f64>()
        .sqrt();
    penalty(w.vertical, 8.0, snap.lin_vel[2].abs()) + penalty(w.torque_delta, 0.4, dtau)
}

/// Periodic conformance penalty: ground force is penalized in proportion
/// to the swing expectation, foot speed in proportion to the stance
/// expectation. Range (-0.6, 0] at default weights; zero when every foot
/// is unloaded while swing-weighted and still while stance-weighted.
pub fn temporal_reward(snap: &RobotSnapshot, cfg: &PhaseIndicatorConfig) -> Result<f64> {
    temporal_reward_with(snap, cfg, &RewardWeights::default())
}

/// `temporal_reward` with explicit weights.
pub fn temporal_reward_with(
    snap: &RobotSnapshot,
    cfg: &PhaseIndicatorConfig,
    w: &RewardWeights,
) -> Result<f64> {
    let mut total = 0.0;
    for leg in LegId::ALL {
        let i = leg.index();
        let swing = expected_indicator(snap.phases[i], cfg, PhaseKind::Swing)?;
        let stance = 1.0 - swing;
        total += swing * penalty(w.swing_force, 1.0, snap.foot_force[i])
            + stance * penalty(w.stance_speed, 5.0, snap.foot_speed[i]);
    }
    Ok(total)
}

/// Morphological symmetry penalty on the joint mismatch across the active
/// pairs. Range (-0.15, 0] at default weights; zero when every active
/// pair's shoulder and knee angles agree.
pub fn morphological_reward(snap: &RobotSnapshot, group: &SymmetryGroup) -> f64 {
    morphological_reward_with(snap, group, &RewardWeights::default())
}

/// `morphological_reward` with explicit weights.
pub fn morphological_reward_with(
    snap: &RobotSnapshot,
    group: &SymmetryGroup,
    w: &RewardWeights,
) -> f64 {
    penalty(w.morphological, 15.0, morphological_distance(&snap.joints, group))
}

/// Compose the clipped total from the four term values.
pub fn total_reward(command: f64, smoothness: f64, temporal: f64, morphological: f64) -> RewardBreakdown {
    let total = (1.0 + command + smoothness + temporal + morphological).max(0.0);
    RewardBreakdown {
        command,
        smoothness,
        temporal,
        morphological,
        total,
    }
}

/// Evaluate every term for one control step at the default weights.
pub fn evaluate(
    snap: &RobotSnapshot,
    cmd: &CommandSet,
    cfg: &PhaseIndicatorConfig,
    group: &SymmetryGroup,
) -> Result<RewardBreakdown> {
    evaluate_with(snap, cmd, cfg, group, &RewardWeights::default())
}

/// `evaluate` with explicit weights.
pub fn evaluate_with(
    snap: &RobotSnapshot,
    cmd: &CommandSet,
    cfg: &PhaseIndicatorConfig,
    group: &SymmetryGroup,
    w: &RewardWeights,
) -> Result<RewardBreakdown> {
    Ok(total_reward(
        command_reward_with(snap, cmd, w),
        smoothness_reward_with(snap, w),
        temporal_reward_with(snap, cfg, w)?,
        morphological_reward_with(snap, group, w),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gait::GaitSpec;
    use crate::symmetry::morphological_pairs;
    use proptest::prelude::*;

    fn cfg() -> PhaseIndicatorConfig {
        PhaseIndicatorConfig::new(0.56, 32.0).unwrap()
    }

    fn bound_group() -> SymmetryGroup {
        let spec = GaitSpec::new(0.0, 0.5, 0.5, 0.0).unwrap();
        morphological_pairs(&spec, 0.01).unwrap()
    }

    #[test]
    fn command_term_reference_values() {
        let cmd = CommandSet::forward(0.2);
        let mut snap = RobotSnapshot::zeroed();
        snap.lin_vel[0] = 0.2;
        assert_eq!(command_reward(&snap, &cmd), 0.0);

        // Forward error of 0.1 m/s only; frozen 40-digit evaluation.
        snap.lin_vel[0] = 0.3;
        let got = command_reward(&snap, &cmd);
        assert!((got - -0.18963616764856730).abs() < 1e-12, "got {got}");

        // Saturates toward the sum of the three weights.
        snap.lin_vel = [100.0, -100.0, 0.0];
        snap.yaw_rate = 100.0;
        let sat = command_reward(&snap, &cmd);
        assert!(sat >= -0.75 && sat < -0.7499);
    }

    #[test]
    fn smoothness_term_reference_values() {
        let mut snap = RobotSnapshot::zeroed();
        assert_eq!(smoothness_reward(&snap), 0.0);

        snap.lin_vel[2] = 0.1;
        let got = smoothness_reward(&snap);
        assert!((got - -0.055067103588277841).abs() < 1e-12, "got {got}");

        // Torque change enters through the Euclidean norm: a single joint
        // changing by 3 N*m matches a 3-4-0 triangle's hypotenuse of 5
        // split across two joints.
        let mut a = RobotSnapshot::zeroed();
        a.torques[0] = 3.0;
        let mut b = RobotSnapshot::zeroed();
        b.torques[2] = 3.0;
        b.torques[5] = 4.0;
        let single = smoothness_reward(&a);
        let got = smoothness_reward(&b);
        let want = penalty(0.05, 0.4, 5.0);
        assert!((got - want).abs() < 1e-15);
        assert!(single > got, "larger torque change penalizes more");
    }

    #[test]
    fn temporal_term_reference_values() {
        let c = cfg();
        // Conforming robot: no force while swing-weighted, no foot speed
        // while stance-weighted. Phases 0.22 are deep in swing.
        let mut snap = RobotSnapshot::zeroed();
        snap.phases = [0.22; 4];
        assert!(temporal_reward(&snap, &c).unwrap().abs() < 1e-12);

        // One leg loaded with 1 N at full swing weighting; frozen value.
        snap.foot_force[0] = 1.0;
        let got = temporal_reward(&snap, &c).unwrap();
        assert!((got - -0.094818083824283652).abs() < 1e-10, "got {got}");

        // Stance-weighted legs ignore GRF entirely.
        let mut stance = RobotSnapshot::zeroed();
        stance.phases = [0.75; 4];
        stance.foot_force = [2.0; 4];
        let base = temporal_reward(&stance, &c).unwrap();
        stance.foot_force = [4.0; 4];
        let doubled = temporal_reward(&stance, &c).unwrap();
        assert!((base - doubled).abs() < 1e-12);
        assert!(base.abs() < 1e-12);
    }

    #[test]
    fn morphological_term_reference_values() {
        let group = bound_group();
        let mut snap = RobotSnapshot::zeroed();
        assert_eq!(morphological_reward(&snap, &group), 0.0);

        // d = 0.1 rad of knee mismatch across the front pair.
        snap.joints[1].knee = 0.1;
        let got = morphological_reward(&snap, &group);
        assert!((got - -0.11653047597773553).abs() < 1e-12, "got {got}");

        snap.joints[1].knee = 100.0;
        let sat = morphological_reward(&snap, &group);
        assert!(sat >= -0.15 && sat < -0.1499);
    }

    #[test]
    fn total_composition() {
        assert_eq!(total_reward(0.0, 0.0, 0.0, 0.0).total, 1.0);
        assert_eq!(total_reward(-0.5, -0.5, -0.3, -0.2).total, 0.0);
        let b = total_reward(-0.1, -0.1, -0.05, -0.05);
        assert!((b.total - 0.7).abs() < 1e-15);
        assert_eq!(b.command, -0.1);
        assert_eq!(b.morphological, -0.05);
    }

    #[test]
    fn weight_overrides_rescale_terms() {
        let cmd = CommandSet::forward(0.2);
        let mut snap = RobotSnapshot::zeroed();
        snap.lin_vel[0] = 0.3;
        snap.lin_vel[2] = 0.4;
        snap.torques[3] = 2.0;
        snap.joints[1].knee = 0.1;
        let group = bound_group();

        // Doubling every weight doubles every term: the rates are untouched.
        let mut w = RewardWeights::default();
        w.forward *= 2.0;
        w.lateral *= 2.0;
        w.yaw *= 2.0;
        w.vertical *= 2.0;
        w.torque_delta *= 2.0;
        w.swing_force *= 2.0;
        w.stance_speed *= 2.0;
        w.morphological *= 2.0;
        let base = evaluate(&snap, &cmd, &cfg(), &group).unwrap();
        let doubled = evaluate_with(&snap, &cmd, &cfg(), &group, &w).unwrap();
        assert!((doubled.command - 2.0 * base.command).abs() < 1e-15);
        assert!((doubled.smoothness - 2.0 * base.smoothness).abs() < 1e-15);
        assert!((doubled.temporal - 2.0 * base.temporal).abs() < 1e-15);
        assert!((doubled.morphological - 2.0 * base.morphological).abs() < 1e-15);

        // A zero weight silences its term entirely.
        let off = RewardWeights {
            morphological: 0.0,
            ..RewardWeights::default()
        };
        assert_eq!(morphological_reward_with(&snap, &group, &off), 0.0);

        assert!(w.validate().is_ok());
        assert!(RewardWeights {
            yaw: -0.1,
            ..RewardWeights::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn morphological_invariant_under_pair_exchange() {
        let group = bound_group();
        let mut snap = RobotSnapshot::zeroed();
        snap.joints[0].knee = -0.3;
        snap.joints[1].shoulder = 0.4;
        snap.joints[2].knee = 0.2;
        let r = morphological_reward(&snap, &group);
        // Swap the front pair (LF, RF), which is active for bound.
        snap.joints.swap(1, 2);
        assert!((morphological_reward(&snap, &group) - r).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn terms_bounded_and_total_in_unit_interval(
            vx in -2.0f64..2.0,
            vy in -2.0f64..2.0,
            vz in -2.0f64..2.0,
            yaw in -3.0f64..3.0,
            force in proptest::array::uniform4(0.0f64..20.0),
            speed in proptest::array::uniform4(0.0f64..5.0),
            phase in proptest::array::uniform4(0.0f64..1.0),
            knee in proptest::array::uniform4(-1.0f64..1.0),
            tau in proptest::array::uniform9(-0.5f64..0.5),
        ) {
            let snap = RobotSnapshot {
                lin_vel: [vx, vy, vz],
                yaw_rate: yaw,
                torques: tau,
                prev_torques: [0.0; 9],
                foot_force: force,
                foot_speed: speed,
                joints: std::array::from_fn(|i| LegJointAngles {
                    shoulder: 0.0,
                    knee: knee[i],
                }),
                phases: phase,
            };
            let cmd = CommandSet::forward(0.2);
            let group = bound_group();
            let b = evaluate(&snap, &cmd, &cfg(), &group).unwrap();
            prop_assert!(b.command <= 0.0 && b.command >= -0.75);
            prop_assert!(b.smoothness <= 0.0 && b.smoothness >= -0.15);
            prop_assert!(b.temporal <= 1e-15 && b.temporal >= -0.6);
            prop_assert!(b.morphological <= 0.0 && b.morphological >= -0.15);
            prop_assert!((0.0..=1.0).contains(&b.total));
        }

        #[test]
        fn total_monotone_in_each_penalty(
            base in -0.2f64..0.0,
            extra in 0.0f64..0.5,
        ) {
            let loose = total_reward(base, base, base, base).total;
            let tight = total_reward(base - extra, base, base, base).total;
            prop_assert!(tight <= loose);
        }
    }
}
