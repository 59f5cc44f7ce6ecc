//! Reference trajectories and payload attitude references.

use crate::error::{Error, Result};
use crate::math::{atan2, cos, sin, sqrt, tanh, Mat3, Vec3, E3};
use crate::payload_control::ReferenceSample;

/// Position and its first three time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub p: Vec3,
    pub v: Vec3,
    pub a: Vec3,
    pub j: Vec3,
}

/// Horizontal circle traversed counter-clockwise, starting at angle zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Vec3,
    pub radius: f64,
    /// Angular rate (rad/s).
    pub rate: f64,
}

impl Circle {
    fn eval(&self, t: f64) -> Kinematics {
        let (r, w) = (self.radius, self.rate);
        let (s, c) = (sin(w * t), cos(w * t));
        Kinematics {
            p: self.center + Vec3::new(r * c, r * s, 0.0),
            v: Vec3::new(-r * w * s, r * w * c, 0.0),
            a: Vec3::new(-r * w * w * c, -r * w * w * s, 0.0),
            j: Vec3::new(r * w * w * w * s, -r * w * w * w * c, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectorySpec {
    /// Stationary point.
    Hover { point: Vec3 },
    /// Horizontal circle (the default tracking task).
    Circle(Circle),
    /// Circle with a constant climb rate (m/s).
    Helix { circle: Circle, climb_rate: f64 },
    /// Circle in a plane tilted about the x axis: `z += amplitude · sin(rate·t)`.
    TiltedCircle { circle: Circle, amplitude: f64 },
    /// Circle with altitude following `amplitude · tanh(sharpness · sin(alt_rate·t)) / tanh(sharpness)`.
    SquareWaveAltitude { circle: Circle, amplitude: f64, alt_rate: f64, sharpness: f64 },
}

impl TrajectorySpec {
    /// Circle of radius 4 m through the origin at 1 m altitude, period 10 s.
    pub fn default_circle() -> Circle {
        Circle { center: Vec3::new(-4.0, 0.0, 1.0), radius: 4.0, rate: core::f64::consts::PI / 5.0 }
    }

    pub fn eval(&self, t: f64) -> Kinematics {
        match *self {
            TrajectorySpec::Hover { point } => {
                Kinematics { p: point, v: Vec3::zeros(), a: Vec3::zeros(), j: Vec3::zeros() }
            }
            TrajectorySpec::Circle(c) => c.eval(t),
            TrajectorySpec::Helix { circle, climb_rate } => {
                let mut k = circle.eval(t);
                k.p.z += climb_rate * t;
                k.v.z += climb_rate;
                k
            }
            TrajectorySpec::TiltedCircle { circle, amplitude: amp, .. } => {
                let mut k = circle.eval(t);
                let w = circle.rate;
                let (s, c) = (sin(w * t), cos(w * t));
                k.p.z += amp * s;
                k.v.z += amp * w * c;
                k.a.z -= amp * w * w * s;
                k.j.z -= amp * w * w * w * c;
                k
            }
            TrajectorySpec::SquareWaveAltitude { circle, amplitude, alt_rate, sharpness } => {
                let mut k = circle.eval(t);
                let (f, f1, f2, f3) = smooth_square(t, alt_rate, sharpness);
                let scale = amplitude / tanh(sharpness);
                k.p.z += scale * f;
                k.v.z += scale * f1;
                k.a.z += scale * f2;
                k.j.z += scale * f3;
                k
            }
        }
    }
}

/// `tanh(k sin(ω t))` and its first three derivatives.
fn smooth_square(t: f64, w: f64, k: f64) -> (f64, f64, f64, f64) {
    let (s, c) = (sin(w * t), cos(w * t));
    let u1 = k * w * c;
    let u2 = -k * w * w * s;
    let u3 = -k * w * w * w * c;
    let th = tanh(k * s);
    let sech2 = 1.0 - th * th;
    let f1 = sech2 * u1;
    let f2 = -2.0 * th * sech2 * u1 * u1 + sech2 * u2;
    let f3 = -2.0 * sech2 * sech2 * u1 * u1 * u1 + 4.0 * th * th * sech2 * u1 * u1 * u1 - 6.0 * th * sech2 * u1 * u2
        + sech2 * u3;
    (th, f1, f2, f3)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttitudeSpec {
    /// First body axis along the horizontal direction of travel.
    Facing,
    /// Constant attitude.
    Fixed(Mat3),
}

/// Desired payload attitude and its body rates.
pub fn reference_attitude(t: f64, spec: &AttitudeSpec, k: &Kinematics) -> Result<(Mat3, Vec3, Vec3)> {
    match spec {
        AttitudeSpec::Fixed(r) => Ok((*r, Vec3::zeros(), Vec3::zeros())),
        AttitudeSpec::Facing => {
            let (vx, vy) = (k.v.x, k.v.y);
            let s = vx * vx + vy * vy;
            if !(sqrt(s) > 1e-9) {
                return Err(Error::StationaryReference { t });
            }
            let b1 = Vec3::new(vx, vy, 0.0) / sqrt(s);
            let b2 = E3.cross(&b1);
            let r = Mat3::from_columns(&[b1, b2, E3]);
            // Yaw ψ = atan2(ẏ, ẋ); differentiate analytically.
            let num = vx * k.a.y - vy * k.a.x;
            let num_dot = vx * k.j.y - vy * k.j.x;
            let s_dot = 2.0 * (vx * k.a.x + vy * k.a.y);
            let yaw_rate = num / s;
            let yaw_acc = (num_dot * s - num * s_dot) / (s * s);
            Ok((r, Vec3::new(0.0, 0.0, yaw_rate), Vec3::new(0.0, 0.0, yaw_acc)))
        }
    }
}

/// Full reference sample at time `t`.
pub fn reference_sample(t: f64, traj: &TrajectorySpec, att: &AttitudeSpec) -> Result<ReferenceSample> {
    let k = traj.eval(t);
    let (r, omega, omega_dot) = reference_attitude(t, att, &k)?;
    Ok(ReferenceSample { x: k.p, v: k.v, a: k.a, r, omega, omega_dot })
}

/// Horizontal heading of a desired attitude, falling back to `e1`.
pub fn horizontal_heading(r: &Mat3) -> Vec3 {
    let b1 = r.column(0);
    let h = Vec3::new(b1.x, b1.y, 0.0);
    let n = h.norm();
    if n > 1e-6 {
        h / n
    } else {
        Vec3::x()
    }
}

/// Yaw angle of a heading vector.
pub fn yaw_of(v: &Vec3) -> f64 {
    atan2(v.y, v.x)
}
