//! Forward kinematics of the four 2-segment legs.
//!
//! Each leg swings in the torso's sagittal (x-z) plane: the shoulder angle
//! pitches the upper segment from straight-down, positive forward, and the
//! knee angle adds to it for the lower segment. Foot velocities combine
//! torso translation, torso twist, and joint rates via the chain rule.

use nalgebra::Vector3;

use super::{Morphology, SimState};

/// World-frame position and velocity of one foot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FootState {
    pub pos: Vector3<f64>,
    pub vel: Vector3<f64>,
}

/// Foot offset from the hip in the torso frame, plus its partial
/// derivatives with respect to the shoulder and knee angles.
fn leg_chain(morph: &Morphology, shoulder: f64, knee: f64) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
    let (lu, ll) = (morph.upper_leg, morph.lower_leg);
    let a = shoulder;
    let b = shoulder + knee;
    let offset = Vector3::new(lu * a.sin() + ll * b.sin(), 0.0, -(lu * a.cos() + ll * b.cos()));
    let d_shoulder = Vector3::new(lu * a.cos() + ll * b.cos(), 0.0, lu * a.sin() + ll * b.sin());
    let d_knee = Vector3::new(ll * b.cos(), 0.0, ll * b.sin());
    (offset, d_shoulder, d_knee)
}

/// World position and velocity of every foot, canonical leg order.
pub fn foot_kinematics(state: &SimState, morph: &Morphology) -> [FootState; 4] {
    let com = morph.composite().com_offset;
    std::array::from_fn(|leg| {
        let shoulder = state.joint_pos[leg];
        let knee = state.joint_pos[4 + leg];
        let (offset, d_s, d_k) = leg_chain(morph, shoulder, knee);
        let hip = Vector3::from(morph.hip_offsets[leg]);
        // Body frame here is torso axes with origin at the composite COM.
        let r_body = hip - com + offset;
        let r_world = state.orientation.transform_vector(&r_body);
        let pos = state.position + r_world;
        let joint_rate =
            d_s * state.joint_vel[leg] + d_k * state.joint_vel[4 + leg];
        let vel = state.lin_vel
            + state.ang_vel.cross(&r_world)
            + state.orientation.transform_vector(&joint_rate);
        FootState { pos, vel }
    })
}
