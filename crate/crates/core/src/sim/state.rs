//! Simulator state: torso rigid-body coordinates plus joint servo states.

use nalgebra::{UnitQuaternion, Vector3};

use super::{Morphology, JOINT_COUNT};

/// Full dynamic state of the robot.
///
/// The torso is tracked at the composite (torso + head) center of mass.
/// Angular momentum is the integrated quantity; the angular velocity field
/// is derived from it each step, which keeps force-free momentum exactly
/// conserved regardless of how the body tumbles.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    /// Center of mass position, world frame, m.
    pub position: Vector3<f64>,
    /// Body-to-world rotation.
    pub orientation: UnitQuaternion<f64>,
    /// Center of mass velocity, world frame, m/s.
    pub lin_vel: Vector3<f64>,
    /// Angular momentum about the center of mass, world frame, kg*m^2/s.
    pub ang_momentum: Vector3<f64>,
    /// Angular velocity, world frame, rad/s. Derived from the momentum at
    /// the most recent step.
    pub ang_vel: Vector3<f64>,
    /// Joint angles, rad: 4 shoulders, 4 knees, neck.
    pub joint_pos: [f64; JOINT_COUNT],
    /// Joint angular velocities, rad/s.
    pub joint_vel: [f64; JOINT_COUNT],
    /// Contact force on each foot from the last step, world frame, N.
    pub foot_force: [Vector3<f64>; 4],
    /// Simulation time, s.
    pub time: f64,
}

impl SimState {
    /// The robot at rest in the standing pose with all feet on the ground.
    pub fn standing(morph: &Morphology) -> Self {
        SimState {
            position: Vector3::new(0.0, 0.0, morph.standing_height()),
            orientation: UnitQuaternion::identity(),
            lin_vel: Vector3::zeros(),
            ang_momentum: Vector3::zeros(),
            ang_vel: Vector3::zeros(),
            joint_pos: morph.standing_targets(),
            joint_vel: [0.0; JOINT_COUNT],
            foot_force: [Vector3::zeros(); 4],
            time: 0.0,
        }
    }

    /// Angular velocity implied by the current momentum and orientation.
    pub fn angular_velocity_from_momentum(&self, morph: &Morphology) -> Vector3<f64> {
        let inertia = morph.composite().inertia;
        let l_body = self.orientation.inverse_transform_vector(&self.ang_momentum);
        let w_body = l_body.component_div(&inertia);
        self.orientation.transform_vector(&w_body)
    }

    /// Linear velocity in the body frame.
    pub fn lin_vel_body(&self) -> Vector3<f64> {
        self.orientation.inverse_transform_vector(&self.lin_vel)
    }

    /// Angular velocity in the body frame.
    pub fn ang_vel_body(&self) -> Vector3<f64> {
        self.orientation.inverse_transform_vector(&self.ang_vel)
    }

    /// Unit gravity direction expressed in the body frame; (0, 0, -1) for
    /// an upright torso.
    pub fn gravity_dir_body(&self) -> Vector3<f64> {
        self.orientation
            .inverse_transform_vector(&Vector3::new(0.0, 0.0, -1.0))
    }

    /// Roll and pitch of the torso, rad.
    pub fn roll_pitch(&self) -> (f64, f64) {
        let (roll, pitch, _) = self.orientation.euler_angles();
        (roll, pitch)
    }

    /// True when every float in the state is finite.
    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|v| v.is_finite())
            && self.orientation.coords.iter().all(|v| v.is_finite())
            && self.lin_vel.iter().all(|v| v.is_finite())
            && self.ang_momentum.iter().all(|v| v.is_finite())
            && self.joint_pos.iter().all(|v| v.is_finite())
            && self.joint_vel.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standing_state_is_upright_and_still() {
        let morph = Morphology::default();
        let s = SimState::standing(&morph);
        assert_eq!(s.position.z, morph.standing_height());
        assert_eq!(s.lin_vel, Vector3::zeros());
        assert_eq!(s.gravity_dir_body(), Vector3::new(0.0, 0.0, -1.0));
        let (roll, pitch) = s.roll_pitch();
        assert_eq!((roll, pitch), (0.0, 0.0));
        assert!(s.is_finite());
    }

    #[test]
    fn body_frame_velocities_follow_orientation() {
        let morph = Morphology::default();
        let mut s = SimState::standing(&morph);
        // Yaw the torso 90 degrees: world +x becomes body -y.
        s.orientation = UnitQuaternion::from_euler_angles(0.0, 0.0, std::f64::consts::FRAC_PI_2);
        s.lin_vel = Vector3::new(1.0, 0.0, 0.0);
        let v = s.lin_vel_body();
        assert!((v.x - 0.0).abs() < 1e-12);
        assert!((v.y - -1.0).abs() < 1e-12);
    }

    #[test]
    fn momentum_to_velocity_roundtrip() {
        let morph = Morphology::default();
        let inertia = morph.composite().inertia;
        let mut s = SimState::standing(&morph);
        s.orientation = UnitQuaternion::from_euler_angles(0.3, -0.2, 0.9);
        let w_world = Vector3::new(0.4, -1.1, 0.7);
        let w_body = s.orientation.inverse_transform_vector(&w_world);
        let l_body = w_body.component_mul(&inertia);
        s.ang_momentum = s.orientation.transform_vector(&l_body);
        let back = s.angular_velocity_from_momentum(&morph);
        assert!((back - w_world).norm() < 1e-12);
    }

    #[test]
    fn finiteness_detects_nan() {
        let morph = Morphology::default();
        let mut s = SimState::standing(&morph);
        s.joint_vel[3] = f64::NAN;
        assert!(!s.is_finite());
    }
}
