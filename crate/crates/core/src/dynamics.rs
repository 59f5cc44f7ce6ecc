//! Coupled payload, cable and quadrotor dynamics under the taut-cable model.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{is_finite_vec, outer, Mat3, Vec3, E3};
use crate::so3::hat;

/// Mass properties and geometry of one quadrotor and its cable.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadParams {
    /// Quadrotor mass (kg).
    pub m: f64,
    /// Quadrotor inertia tensor (kg·m²).
    pub j: Mat3,
    /// Cable length (m).
    pub l: f64,
    /// Attachment point in the payload body frame (m).
    pub rho: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub m0: f64,
    pub j0: Mat3,
    pub g: f64,
    pub quads: Vec<QuadParams>,
}

impl SystemParams {
    pub fn n(&self) -> usize {
        self.quads.len()
    }

    pub fn rho(&self) -> Vec<Vec3> {
        self.quads.iter().map(|q| q.rho).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.quads.is_empty() {
            return bad("at least one quadrotor is required");
        }
        if !(self.m0 > 0.0) || !(self.g >= 0.0) {
            return bad("payload mass must be positive and gravity non-negative");
        }
        check_spd(&self.j0)?;
        for q in &self.quads {
            if !(q.m > 0.0) || !(q.l > 0.0) {
                return bad("quadrotor masses and cable lengths must be positive");
            }
            check_spd(&q.j)?;
            if !is_finite_vec(&q.rho) {
                return Err(Error::NonFinite { what: "attachment offset" });
            }
        }
        Ok(())
    }
}

fn check_spd(m: &Mat3) -> Result<()> {
    if (m - m.transpose()).norm() > 1e-12 * m.norm() {
        return Err(Error::NotPositiveDefinite);
    }
    if m.cholesky().is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayloadState {
    pub x: Vec3,
    pub v: Vec3,
    pub r: Mat3,
    pub omega: Vec3,
}

/// Cable direction (quadrotor towards attachment point) and angular velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CableState {
    pub q: Vec3,
    pub omega: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrotorState {
    pub r: Mat3,
    pub omega: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub payload: PayloadState,
    pub cables: Vec<CableState>,
    pub quads: Vec<QuadrotorState>,
}

/// Time derivative of a [`SystemState`], field for field.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemRates {
    pub x_dot: Vec3,
    pub v_dot: Vec3,
    pub r_dot: Mat3,
    pub omega_dot: Vec3,
    /// `(q̇, ω̇)` per cable.
    pub cables: Vec<(Vec3, Vec3)>,
    /// `(Ṙ, Ω̇)` per quadrotor.
    pub quads: Vec<(Mat3, Vec3)>,
}

impl SystemRates {
    pub fn norm_squared(&self) -> f64 {
        let mut s = self.x_dot.norm_squared()
            + self.v_dot.norm_squared()
            + self.r_dot.norm_squared()
            + self.omega_dot.norm_squared();
        for (a, b) in &self.cables {
            s += a.norm_squared() + b.norm_squared();
        }
        for (a, b) in &self.quads {
            s += a.norm_squared() + b.norm_squared();
        }
        s
    }
}

/// Disturbance forces, moments and residual accelerations at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceSample {
    pub force_payload: Vec3,
    pub moment_payload: Vec3,
    pub force_quads: Vec<Vec3>,
    pub moment_quads: Vec<Vec3>,
    /// Additional translational acceleration (m/s²).
    pub accel_extra: Vec3,
    /// Additional angular acceleration (rad/s²).
    pub angular_accel_extra: Vec3,
}

impl DisturbanceSample {
    pub fn zero(n: usize) -> Self {
        Self {
            force_payload: Vec3::zeros(),
            moment_payload: Vec3::zeros(),
            force_quads: alloc::vec![Vec3::zeros(); n],
            moment_quads: alloc::vec![Vec3::zeros(); n],
            accel_extra: Vec3::zeros(),
            angular_accel_extra: Vec3::zeros(),
        }
    }
}

/// Quadrotor force split along and across its cable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrotorForceCommand {
    pub u: Vec3,
    pub u_par: Vec3,
    pub u_perp: Vec3,
}

/// Everything the controllers hand to the plant for one step.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantInput {
    pub force_d: Vec3,
    pub moment_d: Vec3,
    pub mu_d: Vec<Vec3>,
    pub forces: Vec<QuadrotorForceCommand>,
    pub moments: Vec<Vec3>,
}

impl PlantInput {
    pub fn zero(n: usize) -> Self {
        let f = QuadrotorForceCommand { u: Vec3::zeros(), u_par: Vec3::zeros(), u_perp: Vec3::zeros() };
        Self {
            force_d: Vec3::zeros(),
            moment_d: Vec3::zeros(),
            mu_d: alloc::vec![Vec3::zeros(); n],
            forces: alloc::vec![f; n],
            moments: alloc::vec![Vec3::zeros(); n],
        }
    }
}

/// Payload accelerations plus the quantities derived from them that the cable
/// equations and the controllers consume.
#[derive(Debug, Clone, PartialEq)]
pub struct PayloadAcceleration {
    pub x_ddot: Vec3,
    pub omega_dot: Vec3,
    /// Actual tensions `(q⊗q) μ_d`.
    pub mu: Vec<Vec3>,
    /// Connection-point accelerations (gravity included).
    pub a: Vec<Vec3>,
}

/// `(q⊗q) μ_d`.
#[inline]
pub fn project_tension(mu_d: &Vec3, q: &Vec3) -> Vec3 {
    q * q.dot(mu_d)
}

/// `ẍ0 + g e3 + R0 Ω̂² ρ − R0 ρ̂ Ω̇0`.
pub fn connection_acceleration(
    x_ddot: &Vec3,
    r0: &Mat3,
    omega: &Vec3,
    omega_dot: &Vec3,
    rho: &Vec3,
    g: f64,
) -> Vec3 {
    let w = hat(omega);
    x_ddot + E3 * g + r0 * (w * (w * rho)) - r0 * (hat(rho) * omega_dot)
}

/// Translational and rotational accelerations caused by cables that do not
/// deliver their planned tension.
pub fn cable_deviation_terms(
    mu: &[Vec3],
    mu_d: &[Vec3],
    r0: &Mat3,
    rho: &[Vec3],
    m0: f64,
    j0: &Mat3,
) -> Result<(Vec3, Vec3)> {
    if mu.len() != mu_d.len() || rho.len() != mu.len() {
        return Err(Error::LengthMismatch { expected: mu.len(), found: mu_d.len().min(rho.len()) });
    }
    let j0_inv = j0.try_inverse().ok_or(Error::SingularInertia)?;
    let mut sum = Vec3::zeros();
    let mut mom = Vec3::zeros();
    for ((m, md), p) in mu.iter().zip(mu_d).zip(rho) {
        let d = m - md;
        sum += d;
        mom += p.cross(&(r0.transpose() * d));
    }
    Ok((sum / m0, j0_inv * mom))
}

/// Force along the cable that keeps it taut against the payload motion.
pub fn parallel_control(mu: &Vec3, omega: &Vec3, q: &Vec3, a: &Vec3, m: f64, l: f64) -> Vec3 {
    // Sign chosen so the hover case balances gravity on both bodies.
    mu + q * (m * l * omega.norm_squared()) + outer(q, q) * a * m
}

/// `x0 + R0 ρ − l q`.
pub fn reconstruct_quadrotor_position(x0: &Vec3, r0: &Mat3, rho: &Vec3, q: &Vec3, l: f64) -> Vec3 {
    x0 + r0 * rho - q * l
}

/// Payload accelerations and connection-point accelerations.
pub fn payload_acceleration(
    state: &SystemState,
    input: &PlantInput,
    d: &DisturbanceSample,
    p: &SystemParams,
) -> Result<PayloadAcceleration> {
    let n = p.n();
    check_lengths(n, state, input, d)?;
    let pl = &state.payload;
    let j0_inv = p.j0.try_inverse().ok_or(Error::SingularInertia)?;
    let rt = pl.r.transpose();

    let mut mu = Vec::with_capacity(n);
    let mut f_par = Vec3::zeros();
    let mut m_par = Vec3::zeros();
    for i in 0..n {
        let q = &state.cables[i].q;
        mu.push(project_tension(&input.mu_d[i], q));
        let d_par = project_tension(&d.force_quads[i], q);
        f_par += d_par;
        m_par += p.quads[i].rho.cross(&(rt * d_par));
    }
    let rho = p.rho();
    let (y_x, y_r) = cable_deviation_terms(&mu, &input.mu_d, &pl.r, &rho, p.m0, &p.j0)?;

    let x_ddot = (input.force_d + d.force_payload + f_par) / p.m0 - E3 * p.g + y_x + d.accel_extra;
    let gyro = pl.omega.cross(&(p.j0 * pl.omega));
    let omega_dot = j0_inv * (input.moment_d + d.moment_payload + m_par - gyro) + y_r + d.angular_accel_extra;

    let a = rho
        .iter()
        .map(|r| connection_acceleration(&x_ddot, &pl.r, &pl.omega, &omega_dot, r, p.g))
        .collect();
    Ok(PayloadAcceleration { x_ddot, omega_dot, mu, a })
}

/// Full right-hand side. Payload accelerations are evaluated first, then the
/// connection-point accelerations, then the cable and quadrotor rates.
pub fn system_rhs(
    state: &SystemState,
    input: &PlantInput,
    d: &DisturbanceSample,
    p: &SystemParams,
) -> Result<SystemRates> {
    let acc = payload_acceleration(state, input, d, p)?;
    let pl = &state.payload;

    let mut cables = Vec::with_capacity(p.n());
    let mut quads = Vec::with_capacity(p.n());
    for i in 0..p.n() {
        let qp = &p.quads[i];
        let c = &state.cables[i];
        let qh = hat(&c.q);
        let d_perp = d.force_quads[i] - project_tension(&d.force_quads[i], &c.q);
        let q_dot = c.omega.cross(&c.q);
        let w_dot = qh * acc.a[i] / qp.l - qh * (input.forces[i].u_perp + d_perp) / (qp.m * qp.l);
        cables.push((q_dot, w_dot));

        let s = &state.quads[i];
        let ji = qp.j.try_inverse().ok_or(Error::SingularInertia)?;
        let om_dot = ji * (input.moments[i] - s.omega.cross(&(qp.j * s.omega)) + d.moment_quads[i]);
        quads.push((s.r * hat(&s.omega), om_dot));
    }

    let rates = SystemRates {
        x_dot: pl.v,
        v_dot: acc.x_ddot,
        r_dot: pl.r * hat(&pl.omega),
        omega_dot: acc.omega_dot,
        cables,
        quads,
    };
    if !rates.norm_squared().is_finite() {
        return Err(Error::NonFinite { what: "system derivative" });
    }
    Ok(rates)
}

/// Cable acceleration from the second-order form `q̈ = (1/ml) q̂²(u + Δ − m a) − ‖q̇‖² q`.
pub fn cable_acceleration(q: &Vec3, q_dot: &Vec3, u: &Vec3, dist: &Vec3, a: &Vec3, m: f64, l: f64) -> Vec3 {
    let qh = hat(q);
    qh * (qh * (u + dist - a * m)) / (m * l) - q * q_dot.norm_squared()
}

fn check_lengths(n: usize, s: &SystemState, u: &PlantInput, d: &DisturbanceSample) -> Result<()> {
    for len in [
        s.cables.len(),
        s.quads.len(),
        u.mu_d.len(),
        u.forces.len(),
        u.moments.len(),
        d.force_quads.len(),
        d.moment_quads.len(),
    ] {
        if len != n {
            return Err(Error::LengthMismatch { expected: n, found: len });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::so3::rotz;
    use alloc::vec;
    use approx::assert_relative_eq;
    use core::f64::consts::{FRAC_PI_2, PI};
    use proptest::prelude::*;

    const G: f64 = 9.81;

    fn params(m0: f64) -> SystemParams {
        let quads = (0..3)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / 3.0;
                QuadParams {
                    m: 1.0,
                    j: Mat3::from_diagonal(&Vec3::new(0.04, 0.04, 0.08)),
                    l: 1.0,
                    rho: Vec3::new(0.5 * libm::cos(a), 0.5 * libm::sin(a), 0.0),
                }
            })
            .collect();
        SystemParams { m0, j0: Mat3::from_diagonal(&Vec3::new(0.125, 0.125, 1.0 / 6.0)), g: G, quads }
    }

    fn hover(p: &SystemParams) -> (SystemState, PlantInput) {
        let n = p.n();
        let q = Vec3::new(0.0, 0.0, -1.0);
        let state = SystemState {
            payload: PayloadState { x: Vec3::new(0.0, 0.0, 1.0), v: Vec3::zeros(), r: Mat3::identity(), omega: Vec3::zeros() },
            cables: vec![CableState { q, omega: Vec3::zeros() }; n],
            quads: vec![QuadrotorState { r: Mat3::identity(), omega: Vec3::zeros() }; n],
        };
        let mu = Vec3::new(0.0, 0.0, p.m0 * G / n as f64);
        let forces = p
            .quads
            .iter()
            .map(|qp| {
                let u_par = parallel_control(&mu, &Vec3::zeros(), &q, &(E3 * G), qp.m, qp.l);
                QuadrotorForceCommand { u: u_par, u_par, u_perp: Vec3::zeros() }
            })
            .collect();
        let input = PlantInput {
            force_d: E3 * p.m0 * G,
            moment_d: Vec3::zeros(),
            mu_d: vec![mu; n],
            forces,
            moments: vec![Vec3::zeros(); n],
        };
        (state, input)
    }

    #[test]
    fn project_tension_examples() {
        let q = Vec3::new(0.0, 0.0, -1.0);
        assert_eq!(project_tension(&Vec3::new(0.0, 0.0, 5.0), &q), Vec3::new(0.0, 0.0, 5.0));
        assert_eq!(project_tension(&Vec3::new(1.0, 0.0, 5.0), &q), Vec3::new(0.0, 0.0, 5.0));
        assert_eq!(project_tension(&Vec3::new(1.0, 2.0, 0.0), &q).norm(), 0.0);
    }

    #[test]
    fn connection_acceleration_examples() {
        let z = Vec3::zeros();
        let i = Mat3::identity();
        assert_eq!(connection_acceleration(&z, &i, &z, &z, &Vec3::x(), G), Vec3::new(0.0, 0.0, G));
        assert_relative_eq!(
            connection_acceleration(&z, &i, &Vec3::z(), &z, &Vec3::x(), G),
            Vec3::new(-1.0, 0.0, G)
        );
        // -ρ × Ω̇ = Ω̇ × ρ = e3 × e1 = e2
        assert_relative_eq!(
            connection_acceleration(&z, &i, &z, &Vec3::z(), &Vec3::x(), G),
            Vec3::new(0.0, 1.0, G)
        );
    }

    #[test]
    fn cable_deviation_examples() {
        let i = Mat3::identity();
        let mu = vec![Vec3::new(1.0, 2.0, 3.0)];
        let (yx, yr) = cable_deviation_terms(&mu, &mu, &i, &[Vec3::x()], 2.0, &i).unwrap();
        assert_eq!((yx, yr), (Vec3::zeros(), Vec3::zeros()));
        let (yx, yr) = cable_deviation_terms(&[Vec3::z()], &[Vec3::zeros()], &i, &[Vec3::x()], 2.0, &i).unwrap();
        assert_eq!(yx, Vec3::new(0.0, 0.0, 0.5));
        assert_eq!(yr, Vec3::new(0.0, -1.0, 0.0));
        assert_eq!(
            cable_deviation_terms(&mu, &mu, &i, &[Vec3::x()], 1.0, &Mat3::zeros()),
            Err(Error::SingularInertia)
        );
    }

    #[test]
    fn parallel_control_examples() {
        let q = Vec3::new(0.0, 0.0, -1.0);
        let u = parallel_control(&Vec3::new(0.0, 0.0, 3.27), &Vec3::zeros(), &q, &Vec3::new(0.0, 0.0, G), 1.0, 1.0);
        assert_relative_eq!(u, Vec3::new(0.0, 0.0, 13.08), epsilon = 1e-12);
        let u = parallel_control(&Vec3::zeros(), &Vec3::zeros(), &q, &Vec3::x(), 1.0, 1.0);
        assert_eq!(u, Vec3::zeros());
        let u = parallel_control(&Vec3::zeros(), &Vec3::x(), &q, &Vec3::zeros(), 1.0, 2.0);
        assert_eq!(u, Vec3::new(0.0, 0.0, -2.0));
    }

    #[test]
    fn reconstruct_examples() {
        let q = Vec3::new(0.0, 0.0, -1.0);
        let i = Mat3::identity();
        let x0 = Vec3::new(0.0, 0.0, 1.0);
        assert_eq!(reconstruct_quadrotor_position(&x0, &i, &Vec3::zeros(), &q, 1.0), Vec3::new(0.0, 0.0, 2.0));
        assert_eq!(reconstruct_quadrotor_position(&x0, &i, &Vec3::x(), &q, 1.0), Vec3::new(1.0, 0.0, 2.0));
        assert_relative_eq!(
            reconstruct_quadrotor_position(&Vec3::zeros(), &rotz(FRAC_PI_2), &Vec3::x(), &q, 2.0),
            Vec3::new(0.0, 1.0, 2.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn hover_is_equilibrium() {
        let p = params(1.0);
        let (s, u) = hover(&p);
        let r = system_rhs(&s, &u, &DisturbanceSample::zero(3), &p).unwrap();
        assert!(r.v_dot.norm() < 1e-9);
        assert!(r.omega_dot.norm() < 1e-9);
        for (qd, wd) in &r.cables {
            assert!(qd.norm() < 1e-12 && wd.norm() < 1e-9);
        }
        assert!(r.norm_squared().sqrt() < 1e-9);
    }

    #[test]
    fn free_fall() {
        let p = params(1.0);
        let (s, _) = hover(&p);
        let r = system_rhs(&s, &PlantInput::zero(3), &DisturbanceSample::zero(3), &p).unwrap();
        assert_eq!(r.v_dot, Vec3::new(0.0, 0.0, -G));
    }

    #[test]
    fn payload_force_superposes_on_hover() {
        let p = params(2.0);
        let (s, u) = hover(&p);
        let mut d = DisturbanceSample::zero(3);
        d.force_payload = Vec3::x();
        let r = system_rhs(&s, &u, &d, &p).unwrap();
        assert_relative_eq!(r.v_dot, Vec3::new(0.5, 0.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn energy_conserved_without_tension() {
        // Explicit midpoint integration of the payload alone; the drift must
        // stay well inside 1e-6 J per second at h = 1e-3.
        let p = params(1.0);
        let (mut s, _) = hover(&p);
        s.payload.v = Vec3::new(0.3, -0.2, 1.0);
        s.payload.omega = Vec3::new(0.5, 0.2, -0.4);
        let u = PlantInput::zero(3);
        let d = DisturbanceSample::zero(3);
        let energy = |s: &SystemState| {
            let pl = &s.payload;
            0.5 * p.m0 * pl.v.norm_squared() + 0.5 * pl.omega.dot(&(p.j0 * pl.omega)) + p.m0 * G * pl.x.z
        };
        let e0 = energy(&s);
        let h = 1e-3;
        for _ in 0..1000 {
            let k1 = system_rhs(&s, &u, &d, &p).unwrap();
            let mut mid = s.clone();
            mid.payload.x += k1.x_dot * (h / 2.0);
            mid.payload.v += k1.v_dot * (h / 2.0);
            mid.payload.r += k1.r_dot * (h / 2.0);
            mid.payload.omega += k1.omega_dot * (h / 2.0);
            let k2 = system_rhs(&mid, &u, &d, &p).unwrap();
            s.payload.x += k2.x_dot * h;
            s.payload.v += k2.v_dot * h;
            s.payload.r = crate::so3::reorthonormalize(&(s.payload.r + k2.r_dot * h)).unwrap();
            s.payload.omega += k2.omega_dot * h;
        }
        assert!((energy(&s) - e0).abs() < 1e-6, "drift {}", energy(&s) - e0);
    }

    #[test]
    fn second_order_cable_form_matches_first_order() {
        let p = params(1.0);
        let (mut s, mut u) = hover(&p);
        s.cables[0].q = Vec3::new(0.3, -0.2, -0.9).normalize();
        let q = s.cables[0].q;
        let w = Vec3::new(0.4, 0.1, 0.2);
        s.cables[0].omega = w - q * q.dot(&w);
        u.forces[0].u = Vec3::new(0.5, 1.0, 12.0);
        u.forces[0].u_perp = u.forces[0].u - project_tension(&u.forces[0].u, &q);
        let d = DisturbanceSample::zero(3);
        let acc = payload_acceleration(&s, &u, &d, &p).unwrap();
        let r = system_rhs(&s, &u, &d, &p).unwrap();
        let (q_dot, w_dot) = r.cables[0];
        let w = s.cables[0].omega;
        let q_ddot = w_dot.cross(&q) + w.cross(&q_dot);
        let oracle = cable_acceleration(&q, &q_dot, &u.forces[0].u, &Vec3::zeros(), &acc.a[0], 1.0, 1.0);
        assert_relative_eq!(q_ddot, oracle, epsilon = 1e-12);
    }

    fn v3() -> impl Strategy<Value = Vec3> {
        (-20.0..20.0, -20.0..20.0, -20.0..20.0).prop_map(|(a, b, c)| Vec3::new(a, b, c))
    }

    proptest! {
        #[test]
        fn tension_form_equivalence(a in v3(), b in v3(), c in v3(), yaw in -3.0..3.0f64,
                                    q1 in v3(), q2 in v3(), q3 in v3()) {
            prop_assume!(q1.norm() > 0.1 && q2.norm() > 0.1 && q3.norm() > 0.1);
            let qs = [q1.normalize(), q2.normalize(), q3.normalize()];
            let mu_d = [a, b, c];
            let mu: Vec<Vec3> = mu_d.iter().zip(&qs).map(|(m, q)| project_tension(m, q)).collect();
            let p = params(1.7);
            let (yx, _) = cable_deviation_terms(&mu, &mu_d, &rotz(yaw), &p.rho(), p.m0, &p.j0).unwrap();
            let f_d: Vec3 = mu_d.iter().sum();
            let total: Vec3 = mu.iter().sum();
            prop_assert!((f_d / p.m0 + yx - total / p.m0).norm() <= 1e-12 * (1.0 + f_d.norm()));
        }
    }
}
