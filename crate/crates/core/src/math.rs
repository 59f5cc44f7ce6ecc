//! Scalar helpers for `no_std` builds plus the shared vector aliases.

use nalgebra::{Matrix3, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

pub use libm::{atan2, cos, exp, sin, sqrt, tanh};

pub const E3: Vec3 = Vec3::new(0.0, 0.0, 1.0);

#[inline]
pub fn is_finite_vec(v: &Vec3) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Outer product `a ⊗ b`.
#[inline]
pub fn outer(a: &Vec3, b: &Vec3) -> Mat3 {
    a * b.transpose()
}
