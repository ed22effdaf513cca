//! Compliant point contact between feet and the flat ground at z = 0.

use nalgebra::{Vector2, Vector3};

use super::Morphology;

/// Ground reaction force on one foot, world frame.
///
/// Normal: a one-sided spring-damper, `max(0, -k z - c vz)` while the foot
/// penetrates (z < 0), so the ground only pushes. Tangential: viscous
/// resistance to slip, clamped to the friction cone `mu * f_n`.
pub fn contact_force(pos: &Vector3<f64>, vel: &Vector3<f64>, morph: &Morphology) -> Vector3<f64> {
    if pos.z >= 0.0 {
        return Vector3::zeros();
    }
    let normal = (-morph.contact_stiffness * pos.z - morph.contact_damping * vel.z).max(0.0);
    if normal == 0.0 {
        return Vector3::zeros();
    }
    let mut tangential = Vector2::new(vel.x, vel.y) * -morph.tangential_damping;
    let cap = morph.friction * normal;
    let demand = tangential.norm();
    if demand > cap {
        tangential *= cap / demand;
    }
    Vector3::new(tangential.x, tangential.y, normal)
}
