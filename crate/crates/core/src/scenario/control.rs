//! The full control stack evaluated once per control period.

use alloc::vec::Vec;
use nalgebra::Matrix2;

use crate::allocation::{
    cable_errors, compose_quadrotor_force, desired_cable_direction, normal_control, Allocator, CableGains,
    CableRateHistory,
};
use crate::dynamics::{parallel_control, payload_acceleration, DisturbanceSample, PayloadAcceleration, PlantInput, SystemParams};
use crate::error::{Error, Result};
use crate::integrator::{AugmentedState, HeldRates};
use crate::math::{Mat3, Vec3};
use crate::payload_control::{
    assemble_wrench, integral_rates, payload_errors, rotational_law, translational_law, CableErrors, ControllerGains,
    PayloadErrors, ReferenceModel, ReferenceSample,
};
use crate::quad_control::{desired_attitude, thrust_moment, AttitudeCommand, AttitudeRateHistory};
use crate::sanm::{sanm_output, sanm_rates, solve_lyapunov_2x2, SanmConfig, SanmOutput};

use super::trajectory::horizontal_heading;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControllerKind {
    /// Geometric control with integral compensation; mass, inertia and
    /// disturbance features fixed at the reference model.
    Baseline,
    /// Baseline plus online adaptation of all SANM slices.
    Sanm,
}

impl ControllerKind {
    pub fn name(&self) -> &'static str {
        match self {
            ControllerKind::Baseline => "baseline",
            ControllerKind::Sanm => "sanm",
        }
    }
}

/// Desired facing direction handed to each quadrotor's attitude controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HeadingSpec {
    /// Horizontal projection of the payload's desired first axis.
    FollowPayload,
    Fixed(Vec3),
}

/// Everything computed in one pass of the control stack.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlOutput {
    pub input: PlantInput,
    pub held: HeldRates,
    pub reference: ReferenceSample,
    pub errors: PayloadErrors,
    pub features: SanmOutput,
    pub cable_errors: Vec<CableErrors>,
    pub q_d: Vec<Vec3>,
    pub thrusts: Vec<f64>,
    pub measured: PayloadAcceleration,
    /// Cables asked to push rather than pull.
    pub compressions: usize,
}

#[derive(Debug, Clone)]
pub struct ControlStack {
    pub kind: ControllerKind,
    gains: ControllerGains,
    model: ReferenceModel,
    sanm: SanmConfig,
    p: [Matrix2<f64>; 3],
    allocator: Allocator,
    rho: Vec<Vec3>,
    lengths: Vec<f64>,
    g: f64,
    period: f64,
    tension_floor: f64,
    heading: HeadingSpec,
    cable_hist: Vec<CableRateHistory>,
    att_hist: Vec<AttitudeRateHistory>,
    q_d_prev: Vec<Vec3>,
    r_c_prev: Vec<Mat3>,
    evaluations: usize,
}

/// Lyapunov matrices for the three translational axes.
pub fn lyapunov_matrices(gains: &ControllerGains, q: &[Matrix2<f64>; 3]) -> Result<[Matrix2<f64>; 3]> {
    Ok([
        solve_lyapunov_2x2(gains.k_p[0], gains.k_d[0], &q[0])?,
        solve_lyapunov_2x2(gains.k_p[1], gains.k_d[1], &q[1])?,
        solve_lyapunov_2x2(gains.k_p[2], gains.k_d[2], &q[2])?,
    ])
}

impl ControlStack {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kind: ControllerKind,
        gains: ControllerGains,
        model: ReferenceModel,
        sanm: SanmConfig,
        plant: &SystemParams,
        period: f64,
        tension_floor: f64,
        heading: HeadingSpec,
        initial_cables: &[Vec3],
    ) -> Result<Self> {
        gains.validate()?;
        sanm.validate()?;
        let p = lyapunov_matrices(&gains, &sanm.q)?;
        let rho = plant.rho();
        let n = rho.len();
        if initial_cables.len() != n {
            return Err(Error::LengthMismatch { expected: n, found: initial_cables.len() });
        }
        Ok(Self {
            kind,
            allocator: Allocator::new(&rho)?,
            lengths: plant.quads.iter().map(|q| q.l).collect(),
            g: plant.g,
            gains,
            model,
            sanm,
            p,
            rho,
            period,
            tension_floor,
            heading,
            cable_hist: alloc::vec![CableRateHistory::default(); n],
            att_hist: alloc::vec![AttitudeRateHistory::default(); n],
            q_d_prev: initial_cables.to_vec(),
            r_c_prev: alloc::vec![Mat3::identity(); n],
            evaluations: 0,
        })
    }

    pub fn lyapunov(&self) -> &[Matrix2<f64>; 3] {
        &self.p
    }

    /// Number of times [`Self::compute`] has run.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// Evaluate the whole stack at one instant. `plant` and `d` are used only
    /// to measure the connection-point accelerations.
    #[allow(clippy::needless_range_loop)]
    pub fn compute(
        &mut self,
        aug: &AugmentedState,
        reference: &ReferenceSample,
        d: &DisturbanceSample,
        plant: &SystemParams,
    ) -> Result<ControlOutput> {
        self.evaluations += 1;
        let s = &aug.system;
        let pl = &s.payload;
        let n = self.rho.len();
        let e = payload_errors(pl, reference);

        let features = match self.kind {
            ControllerKind::Sanm => sanm_output(&aug.sanm, &e, &self.sanm),
            ControllerKind::Baseline => SanmOutput {
                m_bar: Vec3::repeat(self.model.m0),
                j_bar: self.model.j0,
                phi_x: Vec3::zeros(),
                phi_r: Vec3::zeros(),
            },
        };
        let mut u_x = Vec3::zeros();
        let mut u_r = Vec3::zeros();
        for j in 0..3 {
            u_x[j] = translational_law(j, &e, reference, features.m_bar[j], features.phi_x[j], &self.gains, self.g);
            u_r[j] = rotational_law(j, &e, pl, reference, features.j_bar[j], features.phi_r[j], &self.gains);
        }
        let wrench = assemble_wrench(&u_x, &u_r, &aug.estimates, &s.cables, &pl.r, &self.rho);
        let mu_d = self.allocator.plan(&wrench.force, &wrench.moment, &pl.r)?;

        let mut input = PlantInput::zero(n);
        input.force_d = wrench.force;
        input.moment_d = wrench.moment;
        input.mu_d = mu_d.clone();
        let measured = payload_acceleration(s, &input, d, plant)?;

        let b1d = match self.heading {
            HeadingSpec::FollowPayload => horizontal_heading(&reference.r),
            HeadingSpec::Fixed(v) => v,
        };

        let mut q_d = Vec::with_capacity(n);
        let mut cerrs = Vec::with_capacity(n);
        let mut thrusts = Vec::with_capacity(n);
        let mut compressions = 0;
        for i in 0..n {
            let c = &s.cables[i];
            if mu_d[i].dot(&c.q) > 0.0 {
                compressions += 1;
            }
            let qd = desired_cable_direction(&mu_d[i], self.tension_floor).unwrap_or(self.q_d_prev[i]);
            self.q_d_prev[i] = qd;
            let (w_d, w_d_dot) = self.cable_hist[i].push(&qd, self.period);
            let (e_q, e_w) = cable_errors(&c.q, &c.omega, &qd, &w_d);
            let a = &measured.a[i];
            let m_i = self.model.m_i;
            let l_i = self.lengths[i];
            let u_par = parallel_control(&measured.mu[i], &c.omega, &c.q, a, m_i, l_i);
            let cg = CableGains { m: m_i, l: l_i, k_q: self.gains.k_q, k_w: self.gains.k_w };
            let q_dot = c.omega.cross(&c.q);
            let u_perp = normal_control(&c.q, &q_dot, &e_q, &e_w, &w_d, &w_d_dot, a, &aug.estimates.quad_forces[i], &cg);
            let force = compose_quadrotor_force(&u_par, &u_perp, &c.q)?;

            let r_c = desired_attitude(&force.u, &b1d).unwrap_or(self.r_c_prev[i]);
            self.r_c_prev[i] = r_c;
            let (omega_c, omega_c_dot) = self.att_hist[i].push(&r_c, self.period);
            let cmd = AttitudeCommand { r: r_c, omega: omega_c, omega_dot: omega_c_dot };
            let rotor = thrust_moment(&force.u, &s.quads[i], &cmd, &self.model.j_i, self.gains.k_ri, self.gains.k_omegai);

            input.forces[i] = force;
            input.moments[i] = rotor.moment;
            thrusts.push(rotor.thrust);
            q_d.push(qd);
            cerrs.push(CableErrors { e_q, e_w });
        }

        let quad_params: Vec<(f64, f64)> = self.lengths.iter().map(|&l| (self.model.m_i, l)).collect();
        let estimates = integral_rates(&e, &s.cables, &cerrs, &self.model, &quad_params, &self.gains, &self.p, &pl.r, &self.rho);
        let sanm = match self.kind {
            ControllerKind::Sanm => Some(sanm_rates(&aug.sanm, &e, &u_x, &u_r, &self.p, self.gains.c_r, &self.sanm)),
            ControllerKind::Baseline => None,
        };

        Ok(ControlOutput {
            input,
            held: HeldRates { estimates, sanm },
            reference: *reference,
            errors: e,
            features,
            cable_errors: cerrs,
            q_d,
            thrusts,
            measured,
            compressions,
        })
    }
}
