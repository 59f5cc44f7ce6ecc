//! Rotation-group primitives shared by the plant and the controllers.

use crate::error::{Error, Result};
use crate::math::{cos, sin, Mat3, Vec3};

/// Tolerance on `‖S + Sᵀ‖` accepted by [`vee`].
pub const SKEW_TOL: f64 = 1e-9;

/// Skew-symmetric matrix with `hat(v) * w == v × w`.
#[inline]
pub fn hat(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`hat`]. Slightly asymmetric input (integrator noise) is
/// skew-symmetrized first; anything beyond [`SKEW_TOL`] is rejected.
pub fn vee(s: &Mat3) -> Result<Vec3> {
    let asymmetry = (s + s.transpose()).norm();
    if !(asymmetry <= SKEW_TOL) {
        return Err(Error::NotSkewSymmetric { asymmetry });
    }
    Ok(vee_unchecked(s))
}

/// `vee` of the skew part `½(S − Sᵀ)`, no checks.
#[inline]
pub fn vee_unchecked(s: &Mat3) -> Vec3 {
    Vec3::new(
        0.5 * (s[(2, 1)] - s[(1, 2)]),
        0.5 * (s[(0, 2)] - s[(2, 0)]),
        0.5 * (s[(1, 0)] - s[(0, 1)]),
    )
}

/// `e_R = ½(R_dᵀR − RᵀR_d)^∨`.
pub fn attitude_error(r: &Mat3, r_d: &Mat3) -> Vec3 {
    let m = r_d.transpose() * r;
    vee_unchecked(&m)
}

/// `e_Ω = Ω − RᵀR_d Ω_d`.
pub fn angular_velocity_error(omega: &Vec3, r: &Mat3, r_d: &Mat3, omega_d: &Vec3) -> Vec3 {
    omega - r.transpose() * (r_d * omega_d)
}

/// `Ψ_R = ½ tr(I − R_dᵀR)`, in `[0, 2]`.
pub fn psi_r(r: &Mat3, r_d: &Mat3) -> f64 {
    0.5 * (3.0 - (r_d.transpose() * r).trace())
}

/// `Ψ_q = 1 − q·q_d`, in `[0, 2]`.
pub fn psi_q(q: &Vec3, q_d: &Vec3) -> f64 {
    1.0 - q.dot(q_d)
}

/// `H = ½(tr(RᵀR_d) I − RᵀR_d)`, the map taking `e_Ω` to `ė_R`.
pub fn transport_matrix(r: &Mat3, r_d: &Mat3) -> Mat3 {
    let m = r.transpose() * r_d;
    0.5 * (Mat3::identity() * m.trace() - m)
}

/// Nearest rotation in Frobenius norm (polar factor via SVD).
pub fn reorthonormalize(m: &Mat3) -> Result<Mat3> {
    if !m.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite { what: "rotation" });
    }
    let svd = m.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::NotARotation { det: m.determinant() }),
    };
    let r = u * v_t;
    let det = r.determinant();
    if !(det > 0.0) {
        return Err(Error::NotARotation { det });
    }
    Ok(r)
}

/// `(RᵀṘ)^∨` after skew-symmetrization.
pub fn body_rate_from_rotation(r: &Mat3, r_dot: &Mat3) -> Vec3 {
    vee_unchecked(&(r.transpose() * r_dot))
}

/// `‖RᵀR − I‖_F`.
pub fn orthogonality_defect(r: &Mat3) -> f64 {
    (r.transpose() * r - Mat3::identity()).norm()
}

pub fn rotx(a: f64) -> Mat3 {
    let (s, c) = (sin(a), cos(a));
    Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn roty(a: f64) -> Mat3 {
    let (s, c) = (sin(a), cos(a));
    Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub fn rotz(a: f64) -> Mat3 {
    let (s, c) = (sin(a), cos(a));
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Rotation by angle `‖w‖` about `w` (Rodrigues).
pub fn exp_map(w: &Vec3) -> Mat3 {
    let th = w.norm();
    let k = hat(w);
    if th < 1e-12 {
        return Mat3::identity() + k;
    }
    let a = sin(th) / th;
    let b = (1.0 - cos(th)) / (th * th);
    Mat3::identity() + k * a + k * k * b
}
