//! Reduced-order quadruped simulator.
//!
//! The robot is a single 6-DOF rigid body (torso plus a fixed head-mass
//! offset) with four massless 2-segment legs. Joints are PD-tracked servo
//! states with a small virtual inertia, decoupled from the contact loads;
//! contact forces computed at the feet act on the torso as wrenches through
//! the kinematic chain. This keeps every quantity the reward reads (torso
//! state, joint states, ground reaction forces, foot velocities) while
//! avoiding articulated-body dynamics.
//!
//! Frames: world z is up with the ground plane at z = 0; the body frame
//! shares the torso axes with its origin at the composite center of mass.

mod contact;
mod kinematics;
mod state;
mod step;

pub use contact::contact_force;
pub use kinematics::{foot_kinematics, FootState};
pub use state::SimState;
pub use step::{pd_torque, step, KD, KP};

use nalgebra::Vector3;
use rand::Rng;

/// Joint layout: shoulders for the four legs, then knees, then the neck.
pub const JOINT_COUNT: usize = 9;
pub const NECK_JOINT: usize = 8;

/// Physical description of the robot and its contact model. Defaults
/// approximate a 0.35 kg, 0.2 m-long desk-scale quadruped.
#[derive(Debug, Clone, PartialEq)]
pub struct Morphology {
    /// Torso mass, kg (excludes the head point mass).
    pub torso_mass: f64,
    /// Torso principal inertia about its own center, kg*m^2.
    pub torso_inertia: [f64; 3],
    /// Torso box half-extents (x, y, z), m. Informational and used for
    /// default inertia.
    pub torso_half_extents: [f64; 3],
    /// Head point mass, kg. Its forward offset breaks fore-aft symmetry.
    pub head_mass: f64,
    /// Head offset along +x from the torso center, m.
    pub head_offset: f64,
    /// Hip attachment points in the torso frame, canonical leg order, m.
    pub hip_offsets: [[f64; 3]; 4],
    /// Upper leg segment length, m.
    pub upper_leg: f64,
    /// Lower leg segment length, m.
    pub lower_leg: f64,
    /// Joint angle limits, rad.
    pub shoulder_limits: (f64, f64),
    pub knee_limits: (f64, f64),
    pub neck_limits: (f64, f64),
    /// Actuator torque limit, N*m.
    pub torque_limit: f64,
    /// Virtual joint inertia, kg*m^2. With the PD gains below this gives a
    /// critically damped servo response.
    pub joint_inertia: f64,
    /// Ground spring stiffness, N/m.
    pub contact_stiffness: f64,
    /// Ground normal damping, N*s/m.
    pub contact_damping: f64,
    /// Ground tangential viscous coefficient, N*s/m.
    pub tangential_damping: f64,
    /// Coulomb friction coefficient capping tangential force.
    pub friction: f64,
    /// Gravitational acceleration, m/s^2.
    pub gravity: f64,
    /// Standing pose angles, rad: a slight crouch so the legs can both
    /// extend and retract from the reference.
    pub stand_shoulder: f64,
    pub stand_knee: f64,
}

impl Default for Morphology {
    fn default() -> Self {
        let torso_mass = 0.3;
        let he = [0.10, 0.04, 0.025];
        // Solid box inertia about its center.
        let torso_inertia = [
            torso_mass / 3.0 * (he[1] * he[1] + he[2] * he[2]),
            torso_mass / 3.0 * (he[0] * he[0] + he[2] * he[2]),
            torso_mass / 3.0 * (he[0] * he[0] + he[1] * he[1]),
        ];
        Morphology {
            torso_mass,
            torso_inertia,
            torso_half_extents: he,
            head_mass: 0.05,
            head_offset: 0.12,
            // Canonical leg order LH, LF, RF, RH; +y is the left side.
            hip_offsets: [
                [-0.08, 0.05, 0.0],
                [0.08, 0.05, 0.0],
                [0.08, -0.05, 0.0],
                [-0.08, -0.05, 0.0],
            ],
            upper_leg: 0.05,
            lower_leg: 0.06,
            shoulder_limits: (-1.2, 1.2),
            knee_limits: (-2.0, 0.5),
            neck_limits: (-0.8, 0.8),
            torque_limit: 0.5,
            joint_inertia: 2.5e-5,
            contact_stiffness: 1000.0,
            contact_damping: 20.0,
            tangential_damping: 30.0,
            friction: 0.8,
            gravity: 9.81,
            stand_shoulder: 0.3,
            stand_knee: -0.6,
        }
    }
}

/// Mass properties of the torso-plus-head rigid body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeBody {
    /// Total mass, kg.
    pub mass: f64,
    /// Center of mass in the torso frame, m.
    pub com_offset: Vector3<f64>,
    /// Principal inertia about the center of mass, torso axes, kg*m^2.
    pub inertia: Vector3<f64>,
}

impl Morphology {
    /// Combined mass properties of torso and head about their shared
    /// center of mass.
    pub fn composite(&self) -> CompositeBody {
        let mass = self.torso_mass + self.head_mass;
        let com_x = self.head_mass * self.head_offset / mass;
        let d_torso = com_x;
        let d_head = self.head_offset - com_x;
        // Point masses offset along x contribute to the y and z axes only.
        let shift = self.torso_mass * d_torso * d_torso + self.head_mass * d_head * d_head;
        CompositeBody {
            mass,
            com_offset: Vector3::new(com_x, 0.0, 0.0),
            inertia: Vector3::new(
                self.torso_inertia[0],
                self.torso_inertia[1] + shift,
                self.torso_inertia[2] + shift,
            ),
        }
    }

    /// Joint angle limits by joint index (4 shoulders, 4 knees, neck).
    pub fn joint_limits(&self, joint: usize) -> (f64, f64) {
        match joint {
            0..=3 => self.shoulder_limits,
            4..=7 => self.knee_limits,
            NECK_JOINT => self.neck_limits,
            _ => panic!("joint index out of range: {joint}"),
        }
    }

    /// Joint targets for the standing pose.
    pub fn standing_targets(&self) -> [f64; JOINT_COUNT] {
        let mut q = [0.0; JOINT_COUNT];
        for leg in 0..4 {
            q[leg] = self.stand_shoulder;
            q[4 + leg] = self.stand_knee;
        }
        q
    }

    /// Height of the hips (and composite center of mass) above the feet in
    /// the standing pose.
    pub fn standing_height(&self) -> f64 {
        let s = self.stand_shoulder;
        let k = self.stand_knee;
        self.upper_leg * s.cos() + self.lower_leg * (s + k).cos()
    }

    /// Total weight, N.
    pub fn weight(&self) -> f64 {
        (self.torso_mass + self.head_mass) * self.gravity
    }
}

/// Per-environment dynamics scaling plus per-step observation noise ranges,
/// all sampled uniformly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainRandomization {
    pub mass_scale: (f64, f64),
    pub friction_scale: (f64, f64),
    pub noise: ObservationNoise,
}

impl Default for DomainRandomization {
    fn default() -> Self {
        DomainRandomization {
            mass_scale: (0.8, 1.2),
            friction_scale: (0.5, 1.5),
            noise: ObservationNoise::default(),
        }
    }
}

impl DomainRandomization {
    /// Randomization disabled entirely: identity dynamics, zero noise.
    pub fn none() -> Self {
        DomainRandomization {
            mass_scale: (1.0, 1.0),
            friction_scale: (1.0, 1.0),
            noise: ObservationNoise::none(),
        }
    }
}

/// Half-ranges of the uniform observation noise added to each state block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationNoise {
    pub lin_vel: f64,
    pub ang_vel: f64,
    pub joint_pos: f64,
    pub joint_vel: f64,
}

impl Default for ObservationNoise {
    fn default() -> Self {
        ObservationNoise {
            lin_vel: 0.02,
            ang_vel: 0.1,
            joint_pos: 0.0175,
            joint_vel: 0.1,
        }
    }
}

impl ObservationNoise {
    pub fn none() -> Self {
        ObservationNoise {
            lin_vel: 0.0,
            ang_vel: 0.0,
            joint_pos: 0.0,
            joint_vel: 0.0,
        }
    }

    fn sample<R: Rng>(rng: &mut R, half_range: f64) -> f64 {
        if half_range == 0.0 {
            0.0
        } else {
            rng.gen_range(-half_range..=half_range)
        }
    }

    /// Add independent uniform noise to the velocity and joint blocks.
    pub fn apply<R: Rng>(
        &self,
        rng: &mut R,
        lin_vel: &mut [f64; 3],
        ang_vel: &mut [f64; 3],
        joint_pos: &mut [f64; JOINT_COUNT],
        joint_vel: &mut [f64; JOINT_COUNT],
    ) {
        for v in lin_vel {
            *v += Self::sample(rng, self.lin_vel);
        }
        for v in ang_vel {
            *v += Self::sample(rng, self.ang_vel);
        }
        for v in joint_pos {
            *v += Self::sample(rng, self.joint_pos);
        }
        for v in joint_vel {
            *v += Self::sample(rng, self.joint_vel);
        }
    }
}

/// Scale masses (with their inertias) and friction by uniform samples.
/// Deterministic for a fixed generator state.
pub fn randomize_domain<R: Rng>(base: &Morphology, dr: &DomainRandomization, rng: &mut R) -> Morphology {
    let mass_scale = rng.gen_range(dr.mass_scale.0..=dr.mass_scale.1);
    let friction_scale = rng.gen_range(dr.friction_scale.0..=dr.friction_scale.1);
    let mut m = base.clone();
    m.torso_mass *= mass_scale;
    m.head_mass *= mass_scale;
    // Inertia scales linearly with mass for a fixed shape.
    for i in &mut m.torso_inertia {
        *i *= mass_scale;
    }
    m.friction *= friction_scale;
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn composite_body_properties() {
        let m = Morphology::default();
        let c = m.composite();
        assert!((c.mass - 0.35).abs() < 1e-15);
        // Head pulls the center of mass forward.
        let expect_com = 0.05 * 0.12 / 0.35;
        assert!((c.com_offset.x - expect_com).abs() < 1e-12);
        assert_eq!(c.com_offset.y, 0.0);
        // The x-axis inertia is untouched by the longitudinal head offset.
        assert_eq!(c.inertia.x, m.torso_inertia[0]);
        assert!(c.inertia.y > m.torso_inertia[1]);
        assert!(c.inertia.z > m.torso_inertia[2]);
    }

    #[test]
    fn standing_geometry() {
        let m = Morphology::default();
        let h = m.standing_height();
        // Crouched stand keeps the hips below full leg extension.
        assert!(h > 0.09 && h < m.upper_leg + m.lower_leg);
        let q = m.standing_targets();
        assert_eq!(q[0], m.stand_shoulder);
        assert_eq!(q[5], m.stand_knee);
        assert_eq!(q[NECK_JOINT], 0.0);
    }

    #[test]
    fn randomize_respects_ranges() {
        let base = Morphology::default();
        let dr = DomainRandomization::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut mass_sum = 0.0;
        let n = 20_000;
        for _ in 0..n {
            let m = randomize_domain(&base, &dr, &mut rng);
            let scale = m.torso_mass / base.torso_mass;
            assert!((0.8..=1.2).contains(&scale));
            assert!((0.5..=1.5).contains(&(m.friction / base.friction)));
            // Head scales with the same draw so the mass ratio is fixed.
            assert!((m.head_mass / m.torso_mass - base.head_mass / base.torso_mass).abs() < 1e-12);
            assert!((m.torso_inertia[1] / base.torso_inertia[1] - scale).abs() < 1e-12);
            mass_sum += scale;
        }
        let mean = mass_sum / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean mass scale {mean}");
    }

    #[test]
    fn randomize_deterministic_under_seed() {
        let base = Morphology::default();
        let dr = DomainRandomization::default();
        let a = randomize_domain(&base, &dr, &mut ChaCha8Rng::seed_from_u64(42));
        let b = randomize_domain(&base, &dr, &mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(a, b);
    }

    #[test]
    fn observation_noise_bounds_and_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noise = ObservationNoise::default();
        for _ in 0..2000 {
            let mut lv = [0.0; 3];
            let mut av = [0.0; 3];
            let mut jp = [0.0; JOINT_COUNT];
            let mut jv = [0.0; JOINT_COUNT];
            noise.apply(&mut rng, &mut lv, &mut av, &mut jp, &mut jv);
            assert!(lv.iter().all(|v| v.abs() <= 0.02));
            assert!(av.iter().all(|v| v.abs() <= 0.1));
            assert!(jp.iter().all(|v| v.abs() <= 0.0175));
            assert!(jv.iter().all(|v| v.abs() <= 0.1));
        }

        let mut lv = [0.5; 3];
        let mut av = [0.5; 3];
        let mut jp = [0.5; JOINT_COUNT];
        let mut jv = [0.5; JOINT_COUNT];
        ObservationNoise::none().apply(&mut rng, &mut lv, &mut av, &mut jp, &mut jv);
        assert!(lv.iter().chain(&av).chain(&jp).chain(&jv).all(|v| *v == 0.5));
    }

    #[test]
    fn noise_deterministic_under_seed() {
        let noise = ObservationNoise::default();
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let mut lv = [0.1; 3];
            let mut av = [0.0; 3];
            let mut jp = [0.0; JOINT_COUNT];
            let mut jv = [0.0; JOINT_COUNT];
            noise.apply(&mut rng, &mut lv, &mut av, &mut jp, &mut jv);
            (lv, av, jp, jv)
        };
        assert_eq!(run(), run());
    }
}
