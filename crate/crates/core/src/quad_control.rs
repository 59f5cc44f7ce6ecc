//! Per-quadrotor geometric attitude control.

use crate::dynamics::QuadrotorState;
use crate::error::{Error, Result};
use crate::math::{Mat3, Vec3, E3};
use crate::so3::{angular_velocity_error, attitude_error, body_rate_from_rotation, hat};

pub const THRUST_FLOOR: f64 = 1e-6;
pub const ALIGNMENT_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeCommand {
    pub r: Mat3,
    pub omega: Vec3,
    pub omega_dot: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorCommand {
    pub thrust: f64,
    pub moment: Vec3,
}

/// Attitude whose third axis is along `u` and whose first axis is the
/// projection of `b1d` onto the plane normal to `u`.
pub fn desired_attitude(u: &Vec3, b1d: &Vec3) -> Result<Mat3> {
    let norm = u.norm();
    if !(norm > THRUST_FLOOR) {
        return Err(Error::ZeroThrust { norm });
    }
    let b3 = u / norm;
    let b2 = b3.cross(b1d);
    let s = b2.norm();
    if !(s > ALIGNMENT_FLOOR) {
        return Err(Error::DegenerateHeading);
    }
    let b1 = -(hat(&b3) * b2) / s;
    Ok(Mat3::from_columns(&[b1, b2 / s, b3]))
}

/// Backward-difference estimate of `Ω_c` and `Ω̇_c`; zeros until three samples.
#[derive(Debug, Clone, PartialEq)]
pub struct AttitudeRateHistory {
    samples: u32,
    r_prev: Mat3,
    w_prev: Vec3,
}

impl Default for AttitudeRateHistory {
    fn default() -> Self {
        Self { samples: 0, r_prev: Mat3::identity(), w_prev: Vec3::zeros() }
    }
}

impl AttitudeRateHistory {
    pub fn push(&mut self, r_c: &Mat3, h: f64) -> (Vec3, Vec3) {
        self.samples = self.samples.saturating_add(1);
        let mut out = (Vec3::zeros(), Vec3::zeros());
        if self.samples >= 2 {
            let w = body_rate_from_rotation(r_c, &((r_c - self.r_prev) / h));
            if self.samples >= 3 {
                out = (w, (w - self.w_prev) / h);
            }
            self.w_prev = w;
        }
        self.r_prev = *r_c;
        out
    }
}

/// Thrust along the current body axis and the tracking moment.
pub fn thrust_moment(u: &Vec3, s: &QuadrotorState, cmd: &AttitudeCommand, j: &Mat3, k_r: f64, k_w: f64) -> RotorCommand {
    let e_r = attitude_error(&s.r, &cmd.r);
    let e_w = angular_velocity_error(&s.omega, &s.r, &cmd.r, &cmd.omega);
    let rtrc = s.r.transpose() * cmd.r;
    let moment = -e_r * k_r - e_w * k_w + s.omega.cross(&(j * s.omega))
        - j * (s.omega.cross(&(rtrc * cmd.omega)) - rtrc * cmd.omega_dot);
    RotorCommand { thrust: u.dot(&(s.r * E3)), moment }
}
