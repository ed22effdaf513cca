//! Semi-implicit Euler integration of the torso and joint servo dynamics.

use nalgebra::{UnitQuaternion, Vector3};

use super::{contact_force, foot_kinematics, Morphology, SimState, JOINT_COUNT};
use crate::error::Error;
use crate::Result;

/// Proportional servo gain, N*m/rad.
pub const KP: f64 = 1.0;
/// Derivative servo gain, N*m*s/rad.
pub const KD: f64 = 0.01;

/// Servo torque toward a position target, clamped to the actuator limit.
pub fn pd_torque(q_target: f64, q: f64, qd: f64, limit: f64) -> f64 {
    (KP * (q_target - q) - KD * qd).clamp(-limit, limit)
}

/// Advance the state by one physics substep.
///
/// Joints follow PD servo dynamics against their virtual inertia,
/// decoupled from ground loads. Contact forces computed at the feet act on
/// the torso as world-frame wrenches about the center of mass, alongside
/// gravity. The torso integrates linear velocity and angular momentum
/// semi-implicitly (velocities first, then pose); integrating momentum
/// rather than angular velocity keeps the force-free body exactly
/// momentum-conserving. Returns the joint torques applied this substep.
pub fn step(
    state: &mut SimState,
    targets: &[f64; JOINT_COUNT],
    morph: &Morphology,
    dt: f64,
) -> Result<[f64; JOINT_COUNT]> {
    if !(dt > 0.0 && dt <= 2e-3) {
        return Err(Error::param("dt", "substep must lie in (0, 2 ms]", dt));
    }

    // Joint servos. Position limits clamp hard; velocity into a limit stops.
    let mut torques = [0.0; JOINT_COUNT];
    for j in 0..JOINT_COUNT {
        let tau = pd_torque(targets[j], state.joint_pos[j], state.joint_vel[j], morph.torque_limit);
        torques[j] = tau;
        state.joint_vel[j] += tau / morph.joint_inertia * dt;
        state.joint_pos[j] += state.joint_vel[j] * dt;
        let (lo, hi) = morph.joint_limits(j);
        if state.joint_pos[j] <= lo {
            state.joint_pos[j] = lo;
            state.joint_vel[j] = state.joint_vel[j].max(0.0);
        } else if state.joint_pos[j] >= hi {
            state.joint_pos[j] = hi;
            state.joint_vel[j] = state.joint_vel[j].min(0.0);
        }
    }

    // Ground contact evaluated with the updated joints and current torso.
    let body = morph.composite();
    let feet = foot_kinematics(state, morph);
    let mut force = Vector3::new(0.0, 0.0, -body.mass * morph.gravity);
    let mut torque = Vector3::zeros();
    let mut foot_force = [Vector3::zeros(); 4];
    for (slot, foot) in foot_force.iter_mut().zip(feet) {
        let f = contact_force(&foot.pos, &foot.vel, morph);
        force += f;
        torque += (foot.pos - state.position).cross(&f);
        *slot = f;
    }
    state.foot_force = foot_force;

    state.lin_vel += force / body.mass * dt;
    state.ang_momentum += torque * dt;
    state.ang_vel = state.angular_velocity_from_momentum(morph);

    state.position += state.lin_vel * dt;
    let rotation = UnitQuaternion::from_scaled_axis(state.ang_vel * dt);
    state.orientation = UnitQuaternion::new_normalize((rotation * state.orientation).into_inner());
    state.time += dt;

    if !state.is_finite() {
        return Err(Error::NonFiniteState { time: state.time });
    }
    Ok(torques)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DT: f64 = 1e-3;

    fn hold_targets(state: &SimState) -> [f64; JOINT_COUNT] {
        state.joint_pos
    }

    #[test]
    fn pd_torque_examples() {
        assert_eq!(pd_torque(0.3, 0.3, 0.0, 0.5), 0.0);
        assert_eq!(pd_torque(0.5, 0.0, 0.0, 0.5), 0.5);
        assert_eq!(pd_torque(0.0, 0.0, 1.0, 0.5), -0.01);
        // Saturation at the actuator limit, both directions.
        assert_eq!(pd_torque(10.0, 0.0, 0.0, 0.5), 0.5);
        assert_eq!(pd_torque(-10.0, 0.0, 0.0, 0.5), -0.5);
    }

    #[test]
    fn free_fall_velocity() {
        let morph = Morphology::default();
        let mut state = SimState::standing(&morph);
        state.position.z = 2.0;
        let targets = hold_targets(&state);
        for _ in 0..100 {
            step(&mut state, &targets, &morph, DT).unwrap();
        }
        assert!((state.lin_vel.z - -0.981).abs() < 1e-3, "{}", state.lin_vel.z);
        assert!(state.foot_force.iter().all(|f| f.norm() == 0.0));
    }

    #[test]
    fn force_free_momentum_conserved() {
        let mut morph = Morphology::default();
        morph.gravity = 0.0;
        let mut state = SimState::standing(&morph);
        state.position.z = 10.0;
        state.lin_vel = Vector3::new(0.3, -0.2, 0.1);
        state.ang_momentum = Vector3::new(0.01, 0.02, -0.005);
        let p0 = state.lin_vel * morph.composite().mass;
        let l0 = state.ang_momentum;
        let targets = hold_targets(&state);
        for _ in 0..1000 {
            step(&mut state, &targets, &morph, DT).unwrap();
        }
        let p1 = state.lin_vel * morph.composite().mass;
        assert!((p1 - p0).norm() / p0.norm() < 1e-6);
        assert!((state.ang_momentum - l0).norm() / l0.norm() < 1e-6);
        // The body tumbles while momentum stays put.
        assert!((state.orientation.into_inner().norm() - 1.0).abs() < 1e-9);
        assert!(state.ang_vel.norm() > 0.0);
    }

    #[test]
    fn static_stance_supports_weight() {
        let morph = Morphology::default();
        let mut state = SimState::standing(&morph);
        let targets = morph.standing_targets();
        let mut grf_sum = 0.0;
        let mut samples = 0;
        for i in 0..2000 {
            step(&mut state, &targets, &morph, DT).unwrap();
            if i >= 1500 {
                grf_sum += state.foot_force.iter().map(|f| f.z).sum::<f64>();
                samples += 1;
            }
        }
        let mean_grf = grf_sum / samples as f64;
        let weight = morph.weight();
        assert!(
            (mean_grf / weight - 1.0).abs() < 0.02,
            "mean GRF {mean_grf} vs weight {weight}"
        );
        // The robot settles slightly below the touch height and stays up.
        assert!(state.position.z > 0.9 * morph.standing_height());
        assert!(state.position.z < morph.standing_height());
        let (roll, pitch) = state.roll_pitch();
        assert!(roll.abs() < 0.05 && pitch.abs() < 0.05, "{roll} {pitch}");
    }

    #[test]
    fn periodic_crouch_impulse_balances_weight() {
        // Once a scripted bounce settles into a periodic orbit, the net
        // vertical impulse over one cycle vanishes, so the contact impulse
        // must equal weight times the cycle period.
        let morph = Morphology::default();
        let mut state = SimState::standing(&morph);
        let base = morph.standing_targets();
        let cycle = 0.4;
        let steps_per_cycle = (cycle / DT).round() as usize;
        let targets_at = |t: f64| {
            let mut q = base;
            let wobble = 0.25 * (std::f64::consts::TAU * t / cycle).sin();
            for knee in 4..8 {
                q[knee] = base[knee] + wobble;
            }
            q
        };
        for _ in 0..5 * steps_per_cycle {
            let t = state.time;
            step(&mut state, &targets_at(t), &morph, DT).unwrap();
        }
        let mut impulse = 0.0;
        for _ in 0..steps_per_cycle {
            let t = state.time;
            step(&mut state, &targets_at(t), &morph, DT).unwrap();
            impulse += state.foot_force.iter().map(|f| f.z).sum::<f64>() * DT;
        }
        let expected = morph.weight() * cycle;
        assert!(
            (impulse / expected - 1.0).abs() < 0.05,
            "impulse {impulse} vs weight*T {expected}"
        );
    }

    #[test]
    fn joint_servo_tracks_step_target() {
        let morph = Morphology::default();
        let mut state = SimState::standing(&morph);
        let mut targets = state.joint_pos;
        targets[0] += 0.1;
        // Critically damped servo settles well within 50 ms.
        for _ in 0..50 {
            step(&mut state, &targets, &morph, DT).unwrap();
        }
        assert!((state.joint_pos[0] - targets[0]).abs() < 2e-3);
    }

    #[test]
    fn joint_limits_clamp_position() {
        let morph = Morphology::default();
        let mut state = SimState::standing(&morph);
        state.position.z = 5.0;
        let mut targets = state.joint_pos;
        targets[8] = 10.0; // far beyond the neck limit
        for _ in 0..500 {
            step(&mut state, &targets, &morph, DT).unwrap();
        }
        assert_eq!(state.joint_pos[8], morph.neck_limits.1);
        assert!(state.joint_vel[8] <= 0.0);
    }

    #[test]
    fn rejects_bad_dt_and_nonfinite_state() {
        let morph = Morphology::default();
        let mut state = SimState::standing(&morph);
        let targets = hold_targets(&state);
        assert!(step(&mut state, &targets, &morph, 0.0).is_err());
        assert!(step(&mut state, &targets, &morph, 0.01).is_err());
        state.lin_vel.x = f64::NAN;
        let err = step(&mut state, &targets, &morph, DT).unwrap_err();
        assert!(matches!(err, Error::NonFiniteState { .. }));
    }

    #[test]
    fn deterministic_trajectories() {
        let morph = Morphology::default();
        let run = || {
            let mut state = SimState::standing(&morph);
            let targets = morph.standing_targets();
            for _ in 0..500 {
                step(&mut state, &targets, &morph, DT).unwrap();
            }
            state
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn quaternion_norm_stays_unit_during_tumble() {
        let mut morph = Morphology::default();
        morph.gravity = 0.0;
        let mut state = SimState::standing(&morph);
        state.position.z = 10.0;
        state.ang_momentum = Vector3::new(0.02, -0.03, 0.015);
        let targets = hold_targets(&state);
        for _ in 0..5000 {
            step(&mut state, &targets, &morph, DT).unwrap();
            let drift = (state.orientation.into_inner().norm() - 1.0).abs();
            assert!(drift < 1e-12, "drift {drift}");
        }
    }
}
