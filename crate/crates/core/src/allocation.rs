//! Minimum-norm tension allocation and the cable-level controller.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::dynamics::QuadrotorForceCommand;
use crate::error::{Error, Result};
use crate::math::{Mat3, Vec3};
use crate::so3::hat;

/// Relative singular-value cutoff for the pseudoinverse.
pub const PINV_CUTOFF: f64 = 1e-10;
/// Default floor on `‖μ_d‖` below which the cable direction is undefined (N).
pub const TENSION_FLOOR: f64 = 1e-6;

/// Pseudoinverse of the stacked body-frame wrench map, computed once per
/// attachment geometry.
#[derive(Debug, Clone)]
pub struct Allocator {
    map: DMatrix<f64>,
    pinv: DMatrix<f64>,
}

impl Allocator {
    pub fn new(rho: &[Vec3]) -> Result<Self> {
        let n = rho.len();
        if n == 0 {
            return Err(Error::InvalidConfig("allocation needs at least one cable".into()));
        }
        let mut map = DMatrix::zeros(6, 3 * n);
        for (i, r) in rho.iter().enumerate() {
            map.fixed_view_mut::<3, 3>(0, 3 * i).copy_from(&Mat3::identity());
            map.fixed_view_mut::<3, 3>(3, 3 * i).copy_from(&hat(r));
        }
        // Full row rank: mapᵀ = QR gives pinv = Q R⁻ᵀ, accurate to roundoff.
        // nalgebra's SVD loses several digits on this matrix, so it is only
        // used for degenerate geometries.
        let qr = (3 * n >= 6).then(|| map.transpose().qr());
        let full_rank = qr.as_ref().and_then(|qr| {
            let r = qr.r();
            let diag = r.diagonal().map(f64::abs);
            (diag.min() > PINV_CUTOFF * diag.max())
                .then(|| r.transpose().solve_lower_triangular(&DMatrix::identity(6, 6)))
                .flatten()
                .map(|y| qr.q() * y)
        });
        let pinv = match full_rank {
            Some(p) => p,
            None => {
                let svd = map.clone().svd(true, true);
                let smax = svd.singular_values.max();
                svd.pseudo_inverse(PINV_CUTOFF * smax)
                    .map_err(|_| Error::NonFinite { what: "allocation pseudoinverse" })?
            }
        };
        Ok(Self { map, pinv })
    }

    pub fn n(&self) -> usize {
        self.map.ncols() / 3
    }

    /// Minimum-norm tensions realizing `{F_d, M_d}` in the inertial frame.
    pub fn plan(&self, force: &Vec3, moment: &Vec3, r0: &Mat3) -> Result<Vec<Vec3>> {
        let fb = r0.transpose() * force;
        let b = DVector::from_column_slice(&[fb.x, fb.y, fb.z, moment.x, moment.y, moment.z]);
        let x = &self.pinv * &b;
        let residual = (&self.map * &x - &b).norm();
        if !(residual <= 1e-9 * b.norm().max(1.0)) {
            return Err(Error::InfeasibleAllocation { residual });
        }
        Ok((0..self.n()).map(|i| r0 * Vec3::new(x[3 * i], x[3 * i + 1], x[3 * i + 2])).collect())
    }
}

/// One-shot version of [`Allocator::plan`].
pub fn plan_tensions(force: &Vec3, moment: &Vec3, r0: &Mat3, rho: &[Vec3]) -> Result<Vec<Vec3>> {
    Allocator::new(rho)?.plan(force, moment, r0)
}

/// Wrench produced by a set of tensions: `(Σμ, Σ ρ̂ R0ᵀ μ)`.
pub fn resultant_wrench(mu: &[Vec3], r0: &Mat3, rho: &[Vec3]) -> (Vec3, Vec3) {
    let mut f = Vec3::zeros();
    let mut m = Vec3::zeros();
    for (t, r) in mu.iter().zip(rho) {
        f += t;
        m += r.cross(&(r0.transpose() * t));
    }
    (f, m)
}

/// `−μ_d/‖μ_d‖`.
pub fn desired_cable_direction(mu_d: &Vec3, floor: f64) -> Result<Vec3> {
    let norm = mu_d.norm();
    if !(norm > floor) {
        return Err(Error::DegenerateTension { norm });
    }
    Ok(-mu_d / norm)
}

/// Backward-difference estimate of the desired cable angular velocity and its
/// rate. Returns zeros until three samples have been seen.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CableRateHistory {
    samples: u32,
    q_prev: Vec3,
    w_prev: Vec3,
}

impl CableRateHistory {
    pub fn push(&mut self, q_d: &Vec3, h: f64) -> (Vec3, Vec3) {
        self.samples = self.samples.saturating_add(1);
        let mut out = (Vec3::zeros(), Vec3::zeros());
        if self.samples >= 2 {
            let q_dot = (q_d - self.q_prev) / h;
            let w = q_d.cross(&q_dot);
            if self.samples >= 3 {
                out = (w, (w - self.w_prev) / h);
            }
            self.w_prev = w;
        }
        self.q_prev = *q_d;
        out
    }
}

/// `(e_q, e_ω) = (q_d × q, ω + q̂² ω_d)`.
pub fn cable_errors(q: &Vec3, omega: &Vec3, q_d: &Vec3, omega_d: &Vec3) -> (Vec3, Vec3) {
    let qh = hat(q);
    (q_d.cross(q), omega + qh * (qh * omega_d))
}

/// Gains and masses for [`normal_control`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CableGains {
    pub m: f64,
    pub l: f64,
    pub k_q: f64,
    pub k_w: f64,
}

/// Force normal to the cable steering it towards `q_d`.
#[allow(clippy::too_many_arguments)]
pub fn normal_control(
    q: &Vec3,
    q_dot: &Vec3,
    e_q: &Vec3,
    e_w: &Vec3,
    omega_d: &Vec3,
    omega_d_dot: &Vec3,
    a: &Vec3,
    dist_est: &Vec3,
    g: &CableGains,
) -> Vec3 {
    let qh = hat(q);
    let qh2 = qh * qh;
    let inner = -e_q * g.k_q - e_w * g.k_w - q_dot * q.dot(omega_d) - qh2 * omega_d_dot;
    let dist_perp = -(qh2 * dist_est);
    qh * inner * (g.m * g.l) - qh2 * a * g.m - dist_perp
}

/// `u = u∥ + u⊥` after checking both components against the cable direction.
pub fn compose_quadrotor_force(u_par: &Vec3, u_perp: &Vec3, q: &Vec3) -> Result<QuadrotorForceCommand> {
    let scale = (u_par.norm() + u_perp.norm()).max(1.0);
    let parallel_residual = u_par.cross(q).norm();
    let normal_residual = u_perp.dot(q).abs();
    if parallel_residual > 1e-9 * scale || normal_residual > 1e-9 * scale {
        return Err(Error::ComponentMismatch { parallel_residual, normal_residual });
    }
    Ok(QuadrotorForceCommand { u: u_par + u_perp, u_par: *u_par, u_perp: *u_perp })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::so3::{psi_q, rotx, rotz};
    use alloc::vec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const G: f64 = 9.81;

    #[test]
    fn plan_examples() {
        let d = 0.7;
        let rho = [Vec3::new(d, 0.0, 0.0), Vec3::new(-d, 0.0, 0.0)];
        let i = Mat3::identity();
        let mu = plan_tensions(&Vec3::new(0.0, 0.0, 10.0), &Vec3::zeros(), &i, &rho).unwrap();
        assert_relative_eq!(mu[0], Vec3::new(0.0, 0.0, 5.0), epsilon = 1e-12);
        assert_relative_eq!(mu[1], Vec3::new(0.0, 0.0, 5.0), epsilon = 1e-12);

        // ρ̂ (0,0,f) = (0, −d f, 0) for ρ = (d,0,0): τ = −d f1 + d f2.
        let (f, tau) = (10.0, 1.4);
        let mu = plan_tensions(&Vec3::new(0.0, 0.0, f), &Vec3::new(0.0, tau, 0.0), &i, &rho).unwrap();
        assert_relative_eq!(mu[0].z, (f - tau / d) / 2.0, epsilon = 1e-12);
        assert_relative_eq!(mu[1].z, (f + tau / d) / 2.0, epsilon = 1e-12);

        let fd = Vec3::new(1.0, -2.0, 9.0);
        let mu = plan_tensions(&fd, &Vec3::zeros(), &rotz(0.4), &[Vec3::zeros()]).unwrap();
        assert_relative_eq!(mu[0], fd, epsilon = 1e-12);
    }

    #[test]
    fn plan_rejects_unreachable_wrench() {
        // Single cable at the center cannot produce a moment.
        let r = plan_tensions(&Vec3::z(), &Vec3::x(), &Mat3::identity(), &[Vec3::zeros()]);
        assert!(matches!(r, Err(Error::InfeasibleAllocation { .. })));
    }

    #[test]
    fn direction_examples() {
        assert_eq!(desired_cable_direction(&Vec3::new(0.0, 0.0, 5.0), TENSION_FLOOR).unwrap(), -Vec3::z());
        assert_relative_eq!(
            desired_cable_direction(&Vec3::new(3.0, 0.0, 4.0), TENSION_FLOOR).unwrap(),
            Vec3::new(-0.6, 0.0, -0.8)
        );
        assert!(matches!(desired_cable_direction(&Vec3::zeros(), TENSION_FLOOR), Err(Error::DegenerateTension { .. })));
    }

    #[test]
    fn rate_history_constant() {
        let mut h = CableRateHistory::default();
        for _ in 0..5 {
            assert_eq!(h.push(&-Vec3::z(), 1e-3), (Vec3::zeros(), Vec3::zeros()));
        }
    }

    fn rotating_error(w: f64, h: f64) -> f64 {
        let q0 = Vec3::new(0.0, 0.0, -1.0);
        let mut hist = CableRateHistory::default();
        let mut out = (Vec3::zeros(), Vec3::zeros());
        for k in 0..=20 {
            out = hist.push(&(rotx(w * k as f64 * h) * q0), h);
        }
        (out.0 - Vec3::new(w, 0.0, 0.0)).norm()
    }

    #[test]
    fn rate_history_converges_under_refinement() {
        let e1 = rotating_error(2.0, 1e-2);
        let e2 = rotating_error(2.0, 5e-3);
        assert!(e1 < 0.05);
        let ratio = e1 / e2;
        assert!(ratio > 1.8, "ratio {ratio}");
    }

    #[test]
    fn cable_error_examples() {
        let q = Vec3::new(0.0, 0.6, -0.8);
        let w = Vec3::new(0.3, 0.0, 0.0);
        let (eq, ew) = cable_errors(&q, &w, &q, &w);
        assert_eq!(eq, Vec3::zeros());
        assert_relative_eq!(ew, Vec3::zeros(), epsilon = 1e-15);
        let qd = -Vec3::z();
        let th = 0.3;
        let (eq, _) = cable_errors(&(rotx(th) * qd), &Vec3::zeros(), &qd, &Vec3::zeros());
        assert_relative_eq!(eq.norm(), libm::sin(th), epsilon = 1e-15);
        let (_, ew) = cable_errors(&q, &w, &q, &(q * 2.0));
        assert_relative_eq!(ew, w, epsilon = 1e-15);
    }

    #[test]
    fn normal_control_examples() {
        let q = -Vec3::z();
        let z = Vec3::zeros();
        let g = CableGains { m: 1.0, l: 1.0, k_q: 1.0, k_w: 1.0 };
        let u = normal_control(&q, &z, &z, &z, &z, &z, &(Vec3::z() * G), &z, &g);
        assert_eq!(u, z);
        // q̂ (−0.1, 0, 0) = (0,0,−1) × (−0.1,0,0) = (0, 0.1, 0)
        let u = normal_control(&q, &z, &Vec3::new(0.1, 0.0, 0.0), &z, &z, &z, &z, &z, &g);
        assert_relative_eq!(u, Vec3::new(0.0, 0.1, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn compose_examples() {
        let q = -Vec3::z();
        let f = compose_quadrotor_force(&Vec3::new(0.0, 0.0, 13.08), &Vec3::zeros(), &q).unwrap();
        assert_eq!(f.u, Vec3::new(0.0, 0.0, 13.08));
        let f = compose_quadrotor_force(&Vec3::zeros(), &Vec3::x(), &q).unwrap();
        assert_eq!(f.u, Vec3::x());
        assert!(matches!(compose_quadrotor_force(&Vec3::x(), &Vec3::z(), &q), Err(Error::ComponentMismatch { .. })));
    }

    fn v3(r: f64) -> impl Strategy<Value = Vec3> {
        (-r..r, -r..r, -r..r).prop_map(|(a, b, c)| Vec3::new(a, b, c))
    }

    proptest! {
        #[test]
        fn plan_is_linear(f1 in v3(20.0), m1 in v3(5.0), f2 in v3(20.0), m2 in v3(5.0), a in -3.0..3.0f64, yaw in -3.0..3.0f64) {
            let rho = vec![Vec3::new(0.5, 0.0, 0.0), Vec3::new(-0.25, 0.433, 0.0), Vec3::new(-0.25, -0.433, 0.0)];
            let al = Allocator::new(&rho).unwrap();
            let r0 = rotz(yaw);
            let x = al.plan(&f1, &m1, &r0).unwrap();
            let y = al.plan(&f2, &m2, &r0).unwrap();
            let z = al.plan(&(f1 * a + f2), &(m1 * a + m2), &r0).unwrap();
            for i in 0..3 {
                prop_assert!((z[i] - (x[i] * a + y[i])).norm() <= 1e-9 * (1.0 + z[i].norm()));
            }
        }

        #[test]
        fn normal_control_is_orthogonal(q in v3(1.0), qd in v3(2.0), eq in v3(1.0), ew in v3(1.0),
                                        wd in v3(2.0), wdd in v3(2.0), a in v3(20.0), d in v3(5.0)) {
            prop_assume!(q.norm() > 0.1);
            let q = q.normalize();
            let g = CableGains { m: 1.3, l: 0.9, k_q: 25.0, k_w: 10.0 };
            let u = normal_control(&q, &qd, &eq, &ew, &wd, &wdd, &a, &d, &g);
            prop_assert!(u.dot(&q).abs() <= 1e-12 * (1.0 + u.norm()));
        }

        #[test]
        fn cable_error_identity(q in v3(1.0), qd in v3(1.0)) {
            prop_assume!(q.norm() > 0.1 && qd.norm() > 0.1);
            let (q, qd) = (q.normalize(), qd.normalize());
            let (eq, _) = cable_errors(&q, &Vec3::zeros(), &qd, &Vec3::zeros());
            let psi = psi_q(&q, &qd);
            prop_assert!((eq.norm_squared() - psi * (2.0 - psi)).abs() <= 1e-9);
        }
    }
}
