//! Disturbance generators.

use alloc::vec::Vec;

use crate::dynamics::DisturbanceSample;
use crate::math::{cos, sin, Vec3};

/// Strong time-varying force on the payload (N).
pub fn disturbance_group_b(t: f64) -> Vec3 {
    let c = cos(0.5 * t);
    Vec3::new(
        15.0 * sin(sin(0.02 * t) * t) + c,
        15.0 * sin(cos(0.04 * t + core::f64::consts::PI) * t) + 5.0 * c,
        -25.0 * sin(1.5 * t) + c,
    )
}

/// Moment about the first payload body axis switched on at `onset` (N·m).
pub fn disturbance_group_c(t: f64, onset: f64) -> Vec3 {
    if t < onset {
        Vec3::zeros()
    } else {
        Vec3::new(10.0 * sin(t - onset), 0.0, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PayloadForce {
    None,
    GroupB,
    Constant(Vec3),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PayloadMoment {
    None,
    GroupC { onset: f64 },
    Constant(Vec3),
}

/// Small sinusoidal forces and moments on every quadrotor. Each quadrotor and
/// each axis gets its own frequency so the signals do not line up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadDisturbance {
    pub force_amplitude: f64,
    pub moment_amplitude: f64,
    /// Base frequency (rad/s); axis `k` of quadrotor `i` runs at
    /// `base_rate · (1 + 0.37 k + 0.23 i)`.
    pub base_rate: f64,
}

impl Default for QuadDisturbance {
    fn default() -> Self {
        Self { force_amplitude: 0.5, moment_amplitude: 0.05, base_rate: 0.7 }
    }
}

impl QuadDisturbance {
    fn signal(&self, t: f64, i: usize, amp: f64, phase: f64) -> Vec3 {
        let mut v = Vec3::zeros();
        for k in 0..3 {
            let w = self.base_rate * (1.0 + 0.37 * k as f64 + 0.23 * i as f64);
            v[k] = amp * sin(w * t + phase + 1.1 * i as f64 + 0.5 * k as f64);
        }
        v
    }

    pub fn force(&self, t: f64, i: usize) -> Vec3 {
        self.signal(t, i, self.force_amplitude, 0.0)
    }

    pub fn moment(&self, t: f64, i: usize) -> Vec3 {
        self.signal(t, i, self.moment_amplitude, 0.8)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceSpec {
    pub payload_force: PayloadForce,
    pub payload_moment: PayloadMoment,
    pub quads: Option<QuadDisturbance>,
    pub accel_extra: Vec3,
    pub angular_accel_extra: Vec3,
}

impl DisturbanceSpec {
    pub fn none() -> Self {
        Self {
            payload_force: PayloadForce::None,
            payload_moment: PayloadMoment::None,
            quads: None,
            accel_extra: Vec3::zeros(),
            angular_accel_extra: Vec3::zeros(),
        }
    }

    pub fn sample(&self, t: f64, n: usize) -> DisturbanceSample {
        let force_payload = match self.payload_force {
            PayloadForce::None => Vec3::zeros(),
            PayloadForce::GroupB => disturbance_group_b(t),
            PayloadForce::Constant(f) => f,
        };
        let moment_payload = match self.payload_moment {
            PayloadMoment::None => Vec3::zeros(),
            PayloadMoment::GroupC { onset } => disturbance_group_c(t, onset),
            PayloadMoment::Constant(m) => m,
        };
        let (force_quads, moment_quads): (Vec<Vec3>, Vec<Vec3>) = match &self.quads {
            Some(q) => (0..n).map(|i| (q.force(t, i), q.moment(t, i))).unzip(),
            None => (alloc::vec![Vec3::zeros(); n], alloc::vec![Vec3::zeros(); n]),
        };
        DisturbanceSample {
            force_payload,
            moment_payload,
            force_quads,
            moment_quads,
            accel_extra: self.accel_extra,
            angular_accel_extra: self.angular_accel_extra,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::FRAC_PI_2;

    #[test]
    fn group_b_examples() {
        assert_relative_eq!(disturbance_group_b(0.0), Vec3::new(1.0, 5.0, 1.0), epsilon = 1e-15);
        for k in 0..20_000 {
            let d = disturbance_group_b(k as f64 * 0.01);
            assert!(d.x.abs() <= 16.0 && d.y.abs() <= 20.0 && d.z.abs() <= 26.0);
        }
    }

    #[test]
    fn group_c_examples() {
        assert_eq!(disturbance_group_c(4.9, 5.0), Vec3::zeros());
        assert_eq!(disturbance_group_c(5.0, 5.0), Vec3::zeros());
        assert_relative_eq!(disturbance_group_c(5.0 + FRAC_PI_2, 5.0), Vec3::new(10.0, 0.0, 0.0), epsilon = 1e-14);
    }

    #[test]
    fn quad_disturbance_bounded_and_distinct() {
        let q = QuadDisturbance::default();
        let s = DisturbanceSpec { quads: Some(q), ..DisturbanceSpec::none() }.sample(3.0, 3);
        for i in 0..3 {
            assert!(s.force_quads[i].amax() <= 0.5 && s.moment_quads[i].amax() <= 0.05);
        }
        assert_ne!(s.force_quads[0], s.force_quads[1]);
        assert_eq!(DisturbanceSpec::none().sample(3.0, 2), DisturbanceSample::zero(2));
    }
}
