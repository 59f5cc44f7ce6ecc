//! First-level wrench controller: payload errors, per-axis PD laws, wrench
//! assembly with integral disturbance compensation, and estimator rates.

use alloc::vec::Vec;
use nalgebra::{Matrix2, Vector2};

use crate::dynamics::{CableState, PayloadState};
use crate::error::{Error, Result};
use crate::math::{outer, Mat3, Vec3};
use crate::so3::{angular_velocity_error, attitude_error, hat};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PayloadErrors {
    pub e_x: Vec3,
    pub e_v: Vec3,
    pub e_r: Vec3,
    pub e_omega: Vec3,
}

impl PayloadErrors {
    /// `(e_x[j], e_v[j])`.
    pub fn translational_slice(&self, j: usize) -> Vector2<f64> {
        Vector2::new(self.e_x[j], self.e_v[j])
    }

    /// `(e_R[j], e_Ω[j])`.
    pub fn rotational_slice(&self, j: usize) -> Vector2<f64> {
        Vector2::new(self.e_r[j], self.e_omega[j])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerGains {
    pub k_p: Vec3,
    pub k_d: Vec3,
    pub k_r0: f64,
    pub k_omega0: f64,
    pub c_r: f64,
    pub c_q: f64,
    pub h_x0: f64,
    pub h_r0: f64,
    pub h_xi: f64,
    pub k_q: f64,
    pub k_w: f64,
    pub k_ri: f64,
    pub k_omegai: f64,
}

impl ControllerGains {
    /// Largest admissible `c_R` for the given attitude gains.
    pub fn c_r_bound(&self) -> f64 {
        let a = self.k_r0 * self.k_omega0 / (self.k_omega0 * self.k_omega0 + self.k_r0);
        a.min(self.k_omega0)
    }

    pub fn validate(&self) -> Result<()> {
        let scalars = [
            self.k_r0,
            self.k_omega0,
            self.c_r,
            self.c_q,
            self.h_x0,
            self.h_r0,
            self.h_xi,
            self.k_q,
            self.k_w,
            self.k_ri,
            self.k_omegai,
        ];
        let all_pos = scalars.iter().chain(self.k_p.iter()).chain(self.k_d.iter()).all(|&g| g > 0.0 && g.is_finite());
        if !all_pos {
            return Err(Error::InvalidConfig("all controller gains must be positive and finite".into()));
        }
        if !(self.c_r < self.c_r_bound()) {
            return Err(Error::InvalidConfig(alloc::format!(
                "c_R = {} must be below {} for k_R0 = {}, k_Omega0 = {}",
                self.c_r,
                self.c_r_bound(),
                self.k_r0,
                self.k_omega0
            )));
        }
        Ok(())
    }
}

/// Desired payload motion at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSample {
    pub x: Vec3,
    pub v: Vec3,
    pub a: Vec3,
    pub r: Mat3,
    pub omega: Vec3,
    pub omega_dot: Vec3,
}

impl ReferenceSample {
    pub fn hover_at(x: Vec3) -> Self {
        Self { x, v: Vec3::zeros(), a: Vec3::zeros(), r: Mat3::identity(), omega: Vec3::zeros(), omega_dot: Vec3::zeros() }
    }
}

/// Nominal model the controller is designed against.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceModel {
    pub m0: f64,
    /// Diagonal of the nominal payload inertia.
    pub j0: Vec3,
    pub m_i: f64,
    pub j_i: Mat3,
}

/// Integral disturbance estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralEstimates {
    pub payload_force: Vec3,
    pub payload_moment: Vec3,
    pub quad_forces: Vec<Vec3>,
}

impl IntegralEstimates {
    pub fn zero(n: usize) -> Self {
        Self { payload_force: Vec3::zeros(), payload_moment: Vec3::zeros(), quad_forces: alloc::vec![Vec3::zeros(); n] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrenchCommand {
    pub force: Vec3,
    pub moment: Vec3,
}

pub fn payload_errors(s: &PayloadState, r: &ReferenceSample) -> PayloadErrors {
    PayloadErrors {
        e_x: s.x - r.x,
        e_v: s.v - r.v,
        e_r: attitude_error(&s.r, &r.r),
        e_omega: angular_velocity_error(&s.omega, &s.r, &r.r, &r.omega),
    }
}

/// Per-axis translational control with estimated mass `m̄_j` and disturbance
/// feature `φ̄_x[j]`.
pub fn translational_law(
    j: usize,
    e: &PayloadErrors,
    r: &ReferenceSample,
    m_bar: f64,
    phi_x: f64,
    gains: &ControllerGains,
    g: f64,
) -> f64 {
    let grav = if j == 2 { g } else { 0.0 };
    m_bar * (-gains.k_p[j] * e.e_x[j] - gains.k_d[j] * e.e_v[j] + r.a[j] + grav - phi_x)
}

/// Per-axis rotational control with estimated inertia `J̄_j` and disturbance
/// feature `φ̄_R[j]`.
pub fn rotational_law(
    j: usize,
    e: &PayloadErrors,
    s: &PayloadState,
    r: &ReferenceSample,
    j_bar: f64,
    phi_r: f64,
    gains: &ControllerGains,
) -> f64 {
    let rtrd = s.r.transpose() * r.r;
    let gyro = s.omega.cross(&(rtrd * r.omega));
    let ff = rtrd * r.omega_dot;
    j_bar * (-gains.k_r0 * e.e_r[j] - gains.k_omega0 * e.e_omega[j] - gyro[j] + ff[j] - phi_r)
}

/// Subtract the integral estimates from the per-axis laws.
pub fn assemble_wrench(
    u_x: &Vec3,
    u_r: &Vec3,
    est: &IntegralEstimates,
    cables: &[CableState],
    r0: &Mat3,
    rho: &[Vec3],
) -> WrenchCommand {
    let mut force = u_x - est.payload_force;
    let mut moment = u_r - est.payload_moment;
    for ((c, d), p) in cables.iter().zip(&est.quad_forces).zip(rho) {
        let d_par = c.q * c.q.dot(d);
        force -= d_par;
        moment -= p.cross(&(r0.transpose() * d_par));
    }
    WrenchCommand { force, moment }
}

/// Cable tracking errors for one cable.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CableErrors {
    pub e_q: Vec3,
    pub e_w: Vec3,
}

/// Time derivatives of [`IntegralEstimates`].
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralRates {
    pub payload_force: Vec3,
    pub payload_moment: Vec3,
    pub quad_forces: Vec<Vec3>,
}

/// `E_xjᵀ P_j B` with `B = (0, 1)ᵀ`.
#[inline]
pub fn error_projection(e: &PayloadErrors, p: &Matrix2<f64>, j: usize) -> f64 {
    let ex = e.translational_slice(j);
    ex[0] * p[(0, 1)] + ex[1] * p[(1, 1)]
}

/// Estimator update rates derived from the closed-loop Lyapunov function.
#[allow(clippy::too_many_arguments)]
pub fn integral_rates(
    e: &PayloadErrors,
    cables: &[CableState],
    cable_errors: &[CableErrors],
    model: &ReferenceModel,
    quad_params: &[(f64, f64)],
    gains: &ControllerGains,
    p: &[Matrix2<f64>; 3],
    r0: &Mat3,
    rho: &[Vec3],
) -> IntegralRates {
    let proj = Vec3::new(error_projection(e, &p[0], 0), error_projection(e, &p[1], 1), error_projection(e, &p[2], 2));
    let payload_force = proj * (gains.h_x0 / model.m0);
    let payload_moment = e.e_omega.component_div(&model.j0) * gains.h_r0;
    let trans = proj / model.m0;
    let quad_forces = cables
        .iter()
        .zip(cable_errors)
        .zip(rho)
        .zip(quad_params)
        .map(|(((c, ce), rho_i), &(m_i, l_i))| {
            let rot = (r0 * rho_i.cross(&e.e_omega)).component_div(&model.j0);
            let cable = hat(&c.q) * (ce.e_w + ce.e_q * gains.c_q) * (gains.h_xi / (m_i * l_i));
            outer(&c.q, &c.q) * (trans - rot + cable) * gains.h_xi
        })
        .collect();
    IntegralRates { payload_force, payload_moment, quad_forces }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sanm::solve_lyapunov_2x2;
    use crate::so3::rotz;
    use alloc::vec;
    use approx::assert_relative_eq;
    use core::f64::consts::FRAC_PI_2;

    pub(crate) fn section5_gains() -> ControllerGains {
        ControllerGains {
            k_p: Vec3::new(20.0, 20.0, 1000.0),
            k_d: Vec3::new(10.0, 10.0, 200.0),
            k_r0: 20.0,
            k_omega0: 10.0,
            c_r: 0.1,
            c_q: 0.01,
            h_x0: 1.0,
            h_r0: 0.1,
            h_xi: 0.1,
            k_q: 25.0,
            k_w: 10.0,
            k_ri: 1.0,
            k_omegai: 1.0,
        }
    }

    fn model() -> ReferenceModel {
        ReferenceModel {
            m0: 1.0,
            j0: Vec3::new(0.125, 0.125, 1.0 / 6.0),
            m_i: 1.0,
            j_i: Mat3::from_diagonal(&Vec3::new(0.04, 0.04, 0.08)),
        }
    }

    fn at_rest(x: Vec3, r: Mat3) -> PayloadState {
        PayloadState { x, v: Vec3::zeros(), r, omega: Vec3::zeros() }
    }

    #[test]
    fn payload_error_examples() {
        let refr = ReferenceSample::hover_at(Vec3::new(0.0, 2.0, 3.0));
        let e = payload_errors(&at_rest(refr.x, refr.r), &refr);
        assert_eq!(e, PayloadErrors::default());
        let e = payload_errors(&at_rest(Vec3::new(1.0, 2.0, 3.0), Mat3::identity()), &refr);
        assert_eq!(e.e_x, Vec3::x());
        let e = payload_errors(&at_rest(refr.x, rotz(FRAC_PI_2)), &refr);
        assert_relative_eq!(e.e_r, Vec3::z(), epsilon = 1e-15);
        assert_eq!(e.e_omega, Vec3::zeros());
    }

    #[test]
    fn translational_law_examples() {
        let g = section5_gains();
        let r = ReferenceSample::hover_at(Vec3::zeros());
        let e = PayloadErrors::default();
        assert_eq!(translational_law(2, &e, &r, 1.0, 0.0, &g, 9.81), 9.81);
        assert_eq!(translational_law(0, &e, &r, 1.0, 0.0, &g, 9.81), 0.0);
        let e = PayloadErrors { e_x: Vec3::new(0.1, 0.0, 0.0), ..Default::default() };
        assert_relative_eq!(translational_law(0, &e, &r, 1.0, 0.0, &g, 9.81), -2.0, epsilon = 1e-15);
    }

    #[test]
    fn rotational_law_examples() {
        let g = section5_gains();
        let r = ReferenceSample::hover_at(Vec3::zeros());
        let s = at_rest(Vec3::zeros(), Mat3::identity());
        let e = PayloadErrors::default();
        assert_eq!(rotational_law(2, &e, &s, &r, 1.0 / 6.0, 0.0, &g), 0.0);
        let e = PayloadErrors { e_r: Vec3::new(0.0, 0.0, 0.1), ..Default::default() };
        assert_relative_eq!(rotational_law(2, &e, &s, &r, 1.0 / 6.0, 0.0, &g), -1.0 / 3.0, epsilon = 1e-15);
        let mut s = s;
        s.omega = Vec3::z();
        let r = ReferenceSample { omega: Vec3::z(), ..r };
        for j in 0..3 {
            assert_eq!(rotational_law(j, &PayloadErrors::default(), &s, &r, 0.5, 0.0, &g), 0.0);
        }
    }

    #[test]
    fn assemble_wrench_examples() {
        let z = Vec3::zeros();
        let c = [CableState { q: Vec3::new(0.0, 0.0, -1.0), omega: z }];
        let rho = [Vec3::x()];
        let i = Mat3::identity();
        let w = assemble_wrench(&Vec3::new(1.0, 2.0, 3.0), &Vec3::new(4.0, 5.0, 6.0), &IntegralEstimates::zero(1), &c, &i, &rho);
        assert_eq!((w.force, w.moment), (Vec3::new(1.0, 2.0, 3.0), Vec3::new(4.0, 5.0, 6.0)));
        let mut est = IntegralEstimates::zero(1);
        est.payload_force = Vec3::x();
        assert_eq!(assemble_wrench(&z, &z, &est, &c, &i, &rho).force, -Vec3::x());
        let mut est = IntegralEstimates::zero(1);
        est.quad_forces[0] = Vec3::new(0.0, 0.0, 2.0);
        let w = assemble_wrench(&z, &z, &est, &c, &i, &rho);
        assert_eq!(w.force, Vec3::new(0.0, 0.0, -2.0));
        // -(e1 × 2e3) = -(-2 e2)
        assert_eq!(w.moment, Vec3::new(0.0, 2.0, 0.0));
    }

    #[test]
    fn assemble_wrench_is_linear() {
        let c = vec![CableState { q: Vec3::new(0.1, 0.2, -1.0).normalize(), omega: Vec3::zeros() }; 2];
        let rho = [Vec3::x(), -Vec3::y()];
        let r0 = rotz(0.4);
        let est = IntegralEstimates {
            payload_force: Vec3::new(0.3, -1.0, 2.0),
            payload_moment: Vec3::new(-0.2, 0.1, 0.7),
            quad_forces: vec![Vec3::new(1.0, 0.5, -2.0), Vec3::new(0.0, 3.0, 1.0)],
        };
        let (ux, ur) = (Vec3::new(1.0, -2.0, 9.0), Vec3::new(0.1, 0.2, 0.3));
        let a = 2.5;
        let scaled = IntegralEstimates {
            payload_force: est.payload_force * a,
            payload_moment: est.payload_moment * a,
            quad_forces: est.quad_forces.iter().map(|d| d * a).collect(),
        };
        let w1 = assemble_wrench(&ux, &ur, &est, &c, &r0, &rho);
        let w2 = assemble_wrench(&(ux * a), &(ur * a), &scaled, &c, &r0, &rho);
        assert_relative_eq!(w2.force, w1.force * a, epsilon = 1e-12);
        assert_relative_eq!(w2.moment, w1.moment * a, epsilon = 1e-12);
    }

    fn lyap(g: &ControllerGains) -> [Matrix2<f64>; 3] {
        let q12 = Matrix2::from_diagonal(&Vector2::new(0.05, 0.05));
        [
            solve_lyapunov_2x2(g.k_p[0], g.k_d[0], &q12).unwrap(),
            solve_lyapunov_2x2(g.k_p[1], g.k_d[1], &q12).unwrap(),
            solve_lyapunov_2x2(g.k_p[2], g.k_d[2], &Matrix2::identity()).unwrap(),
        ]
    }

    #[test]
    fn integral_rate_examples() {
        let g = section5_gains();
        let p = lyap(&g);
        let c = [CableState { q: Vec3::new(0.0, 0.0, -1.0), omega: Vec3::zeros() }];
        let ce = [CableErrors::default()];
        let rho = [Vec3::x()];
        let i = Mat3::identity();
        let rates = integral_rates(&PayloadErrors::default(), &c, &ce, &model(), &[(1.0, 1.0)], &g, &p, &i, &rho);
        assert_eq!(rates.payload_force, Vec3::zeros());
        assert_eq!(rates.payload_moment, Vec3::zeros());
        assert_eq!(rates.quad_forces[0], Vec3::zeros());

        let e = PayloadErrors { e_omega: Vec3::new(0.0, 0.0, 0.1), ..Default::default() };
        let rates = integral_rates(&e, &c, &ce, &model(), &[(1.0, 1.0)], &g, &p, &i, &rho);
        assert_relative_eq!(rates.payload_moment[2], 0.06, epsilon = 1e-15);

        let e = PayloadErrors { e_v: Vec3::new(0.0, 0.0, 1.0), ..Default::default() };
        let rates = integral_rates(&e, &c, &ce, &model(), &[(1.0, 1.0)], &g, &p, &i, &rho);
        assert_relative_eq!(rates.payload_force[2], p[2][(1, 1)], epsilon = 1e-15);
    }

    #[test]
    fn integral_rates_are_odd() {
        let g = section5_gains();
        let p = lyap(&g);
        let c = [
            CableState { q: Vec3::new(0.2, -0.1, -1.0).normalize(), omega: Vec3::zeros() },
            CableState { q: Vec3::new(-0.3, 0.1, -1.0).normalize(), omega: Vec3::zeros() },
        ];
        let ce = [
            CableErrors { e_q: Vec3::new(0.1, 0.2, 0.0), e_w: Vec3::new(-0.3, 0.0, 0.2) },
            CableErrors { e_q: Vec3::new(0.0, -0.1, 0.05), e_w: Vec3::new(0.1, 0.4, 0.0) },
        ];
        let neg = [CableErrors { e_q: -ce[0].e_q, e_w: -ce[0].e_w }, CableErrors { e_q: -ce[1].e_q, e_w: -ce[1].e_w }];
        let e = PayloadErrors {
            e_x: Vec3::new(0.1, -0.2, 0.3),
            e_v: Vec3::new(-1.0, 0.5, 0.2),
            e_r: Vec3::new(0.05, 0.0, -0.1),
            e_omega: Vec3::new(0.3, -0.4, 0.1),
        };
        let en = PayloadErrors { e_x: -e.e_x, e_v: -e.e_v, e_r: -e.e_r, e_omega: -e.e_omega };
        let rho = [Vec3::x(), Vec3::y()];
        let qp = [(1.0, 1.0), (1.2, 0.8)];
        let a = integral_rates(&e, &c, &ce, &model(), &qp, &g, &p, &rotz(0.3), &rho);
        let b = integral_rates(&en, &c, &neg, &model(), &qp, &g, &p, &rotz(0.3), &rho);
        assert_eq!(a.payload_force, -b.payload_force);
        assert_eq!(a.payload_moment, -b.payload_moment);
        for (x, y) in a.quad_forces.iter().zip(&b.quad_forces) {
            assert_relative_eq!(*x, -*y, epsilon = 1e-15);
        }
    }

    #[test]
    fn gain_validation() {
        let mut g = section5_gains();
        assert!(g.validate().is_ok());
        assert_relative_eq!(g.c_r_bound(), 200.0 / 120.0);
        g.c_r = 2.0;
        assert!(matches!(g.validate(), Err(Error::InvalidConfig(_))));
        let mut g = section5_gains();
        g.k_p.x = 0.0;
        assert!(g.validate().is_err());
    }
}
