//! Scenario definitions and the closed-loop simulation driver.

pub mod control;
pub mod disturbance;
pub mod log;
pub mod metrics;
pub mod trajectory;

use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::Matrix2;

use crate::dynamics::{
    reconstruct_quadrotor_position, CableState, DisturbanceSample, PayloadState, QuadParams, QuadrotorState,
    SystemParams, SystemState,
};
use crate::error::{Error, Result};
use crate::integrator::{step_system, AugmentedState, IntegratorConfig};
use crate::math::{cos, sin, Mat3, Vec3};
use crate::payload_control::{ControllerGains, IntegralEstimates, ReferenceModel};
use crate::sanm::{RbfSlice, SanmConfig, SanmState};
use crate::so3::{psi_q, psi_r};

pub use control::{ControlOutput, ControlStack, ControllerKind, HeadingSpec};
pub use disturbance::{DisturbanceSpec, PayloadForce, PayloadMoment, QuadDisturbance};
pub use log::{CableLog, LogRecord};
pub use metrics::{Metrics, MetricsAccumulator, MetricsSample, MetricsWindow};
pub use trajectory::{reference_sample, AttitudeSpec, Circle, TrajectorySpec};

/// Predefined scenario groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    /// Nominal plant, circle, no disturbance.
    A,
    /// Heavy payload with a strong time-varying force.
    B,
    /// Heavy payload with a late-onset roll moment.
    C,
    /// Heavy payload, helical climb.
    D,
    /// Heavy payload, tilted circle.
    E,
    /// Heavy payload, circle with square-wave altitude.
    F,
}

impl Group {
    pub const ALL: [Group; 6] = [Group::A, Group::B, Group::C, Group::D, Group::E, Group::F];

    pub fn name(&self) -> &'static str {
        match self {
            Group::A => "A",
            Group::B => "B",
            Group::C => "C",
            Group::D => "D",
            Group::E => "E",
            Group::F => "F",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.name().eq_ignore_ascii_case(s))
    }
}

pub const GRAVITY: f64 = 9.81;

/// Nominal model used by every controller.
pub fn reference_model() -> ReferenceModel {
    ReferenceModel {
        m0: 1.0,
        j0: Vec3::new(1.0 / 8.0, 1.0 / 8.0, 1.0 / 6.0),
        m_i: 1.0,
        j_i: Mat3::from_diagonal(&Vec3::new(4e-2, 4e-2, 8e-2)),
    }
}

/// Attachment points on a circle of radius `radius` in the payload body
/// frame, first one on the body x axis.
pub fn ring_attachments(n: usize, radius: f64) -> Vec<Vec3> {
    (0..n)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / n as f64;
            Vec3::new(radius * cos(a), radius * sin(a), 0.0)
        })
        .collect()
}

/// Three quadrotors on 1 m cables, attached 0.5 m from the payload center.
pub fn plant(m0: f64, j0: Vec3) -> SystemParams {
    let model = reference_model();
    SystemParams {
        m0,
        j0: Mat3::from_diagonal(&j0),
        g: GRAVITY,
        quads: ring_attachments(3, 0.5)
            .into_iter()
            .map(|rho| QuadParams { m: model.m_i, j: model.j_i, l: 1.0, rho })
            .collect(),
    }
}

pub fn nominal_plant() -> SystemParams {
    let m = reference_model();
    plant(m.m0, m.j0)
}

pub fn heavy_plant() -> SystemParams {
    plant(5.0, Vec3::new(0.688, 0.594, 0.783))
}

pub fn default_gains() -> ControllerGains {
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
        k_q: 100.0,
        k_w: 20.0,
        k_ri: 1.0,
        k_omegai: 1.0,
    }
}

pub fn default_sanm() -> SanmConfig {
    let centers = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let s = Vec3::new(0.01, 0.01, 0.1);
    SanmConfig {
        eta_m: Vec3::repeat(0.01),
        eta_j: Vec3::repeat(0.01),
        s_m: s,
        s_j: s,
        m_max: 6.0,
        j_max: Vec3::new(0.75, 0.75, 1.0 / 3.0),
        gamma_x: Vec3::new(5000.0, 5000.0, 1000.0),
        gamma_r: Vec3::new(1500.0, 1500.0, 100.0),
        x_slices: [
            RbfSlice::diagonal(&centers, 1.0),
            RbfSlice::diagonal(&centers, 1.0),
            RbfSlice::diagonal(&centers, 2.0),
        ],
        r_slices: core::array::from_fn(|_| RbfSlice::diagonal(&centers, 1.0)),
        weight_radius: Some(100.0),
        q: [
            Matrix2::from_diagonal_element(0.05),
            Matrix2::from_diagonal_element(0.05),
            Matrix2::identity(),
        ],
    }
}

/// How the payload starts relative to the reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialCondition {
    /// On the reference pose with the reference velocities (zero tracking error).
    OnReference,
    /// On the reference pose, at rest.
    AtRest,
}

/// Everything that defines one closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub group: Option<Group>,
    pub controller: ControllerKind,
    pub plant: SystemParams,
    pub model: ReferenceModel,
    pub gains: ControllerGains,
    pub sanm: SanmConfig,
    pub integrator: IntegratorConfig,
    pub disturbance: DisturbanceSpec,
    pub trajectory: TrajectorySpec,
    pub attitude: AttitudeSpec,
    pub heading: HeadingSpec,
    pub initial: InitialCondition,
    pub metrics_window: MetricsWindow,
    /// `‖e_x‖` threshold used for the settling time.
    pub settle_threshold: f64,
    /// Keep every `log_every`-th control sample; 0 disables logging.
    pub log_every: usize,
    /// Cables with a desired tension below this keep their previous direction.
    pub tension_floor: f64,
    /// Any state component beyond this counts as divergence.
    pub divergence_bound: f64,
}

impl ScenarioConfig {
    pub fn for_group(group: Group, controller: ControllerKind) -> Self {
        let circle = TrajectorySpec::default_circle();
        let quads = Some(QuadDisturbance::default());
        let fixed = AttitudeSpec::Fixed(Mat3::identity());
        let (plant, disturbance, trajectory, attitude) = match group {
            Group::A => (nominal_plant(), DisturbanceSpec::none(), TrajectorySpec::Circle(circle), AttitudeSpec::Facing),
            Group::B => (
                heavy_plant(),
                DisturbanceSpec { payload_force: PayloadForce::GroupB, quads, ..DisturbanceSpec::none() },
                TrajectorySpec::Circle(circle),
                AttitudeSpec::Facing,
            ),
            Group::C => (
                heavy_plant(),
                DisturbanceSpec { payload_moment: PayloadMoment::GroupC { onset: 5.0 }, quads, ..DisturbanceSpec::none() },
                TrajectorySpec::Circle(circle),
                AttitudeSpec::Facing,
            ),
            Group::D | Group::E | Group::F => {
                let traj = match group {
                    Group::D => TrajectorySpec::Helix { circle, climb_rate: 0.04 },
                    Group::E => TrajectorySpec::TiltedCircle { circle, amplitude: 1.0 },
                    _ => TrajectorySpec::SquareWaveAltitude { circle, amplitude: 0.5, alt_rate: 0.4, sharpness: 3.0 },
                };
                (
                    heavy_plant(),
                    DisturbanceSpec { payload_force: PayloadForce::GroupB, quads, ..DisturbanceSpec::none() },
                    traj,
                    fixed,
                )
            }
        };
        Self {
            group: Some(group),
            controller,
            plant,
            model: reference_model(),
            gains: default_gains(),
            sanm: default_sanm(),
            integrator: IntegratorConfig::default(),
            disturbance,
            trajectory,
            attitude,
            heading: HeadingSpec::FollowPayload,
            initial: InitialCondition::OnReference,
            metrics_window: MetricsWindow { start: 10.0, end: 50.0 },
            settle_threshold: 0.1,
            log_every: 1,
            tension_floor: crate::allocation::TENSION_FLOOR,
            divergence_bound: 1e6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.plant.validate()?;
        self.gains.validate()?;
        self.sanm.validate()?;
        self.integrator.validate()?;
        if !(self.model.m0 > 0.0 && self.model.m_i > 0.0) || !self.model.j0.iter().all(|&j| j > 0.0) {
            return Err(Error::InvalidConfig("reference model mass and inertia must be positive".into()));
        }
        if self.model.j_i.cholesky().is_none() {
            return Err(Error::InvalidConfig("reference quadrotor inertia must be positive definite".into()));
        }
        let j_inside = self.model.j0.iter().zip(self.sanm.j_max.iter()).all(|(j, m)| j <= m);
        if !(self.model.m0 <= self.sanm.m_max) || !j_inside {
            return Err(Error::InvalidConfig("estimate limits must contain the reference model".into()));
        }
        if !(self.tension_floor > 0.0) || !(self.divergence_bound > 0.0) {
            return Err(Error::InvalidConfig("tension floor and divergence bound must be positive".into()));
        }
        if !(self.metrics_window.end >= self.metrics_window.start) {
            return Err(Error::InvalidConfig("metrics window ends before it starts".into()));
        }
        Ok(())
    }

    /// Payload at the reference start pose, cables hanging straight down,
    /// quadrotors level, estimates at the reference model.
    pub fn initial_state(&self) -> Result<AugmentedState> {
        let mut r = reference_sample(0.0, &self.trajectory, &self.attitude)?;
        if self.initial == InitialCondition::AtRest {
            r.v = Vec3::zeros();
            r.omega = Vec3::zeros();
        }
        let n = self.plant.n();
        let system = SystemState {
            payload: PayloadState { x: r.x, v: r.v, r: r.r, omega: r.omega },
            cables: alloc::vec![CableState { q: -Vec3::z(), omega: Vec3::zeros() }; n],
            quads: alloc::vec![QuadrotorState { r: Mat3::identity(), omega: Vec3::zeros() }; n],
        };
        Ok(AugmentedState {
            system,
            estimates: IntegralEstimates::zero(n),
            sanm: SanmState::initial(&self.model, &self.sanm),
        })
    }
}

/// One control period: the command computed at `t` and held until `t + period`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub control: ControlOutput,
    pub disturbance: DisturbanceSample,
}

/// Closed-loop simulation advanced one control period at a time.
pub struct Simulation {
    cfg: ScenarioConfig,
    aug: AugmentedState,
    stack: ControlStack,
    k: usize,
    true_inertia: Vec3,
}

impl Simulation {
    pub fn new(cfg: ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let aug = cfg.initial_state()?;
        let cables: Vec<Vec3> = aug.system.cables.iter().map(|c| c.q).collect();
        let stack = ControlStack::new(
            cfg.controller,
            cfg.gains.clone(),
            cfg.model.clone(),
            cfg.sanm.clone(),
            &cfg.plant,
            cfg.integrator.control_period(),
            cfg.tension_floor,
            cfg.heading,
            &cables,
        )?;
        let true_inertia = cfg.plant.j0.diagonal();
        Ok(Self { cfg, aug, stack, k: 0, true_inertia })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn state(&self) -> &AugmentedState {
        &self.aug
    }

    pub fn stack(&self) -> &ControlStack {
        &self.stack
    }

    pub fn time(&self) -> f64 {
        self.k as f64 * self.cfg.integrator.control_period()
    }

    pub fn finished(&self) -> bool {
        self.k >= self.cfg.integrator.control_steps()
    }

    /// Compute the control at the current time and integrate over one
    /// control period.
    pub fn step(&mut self) -> Result<StepRecord> {
        let t = self.time();
        let n = self.cfg.plant.n();
        let reference = reference_sample(t, &self.cfg.trajectory, &self.cfg.attitude)?;
        let d = self.cfg.disturbance.sample(t, n);
        let control = self.stack.compute(&self.aug, &reference, &d, &self.cfg.plant)?;

        let h = self.cfg.integrator.h;
        let spec = &self.cfg.disturbance;
        let bounds = self.cfg.sanm.bounds();
        let mut aug = self.aug.clone();
        for s in 0..self.cfg.integrator.substeps {
            let ts = t + s as f64 * h;
            aug = step_system(
                &aug,
                ts,
                h,
                &control.input,
                &control.held,
                |tau| spec.sample(tau, n),
                &self.cfg.plant,
                &self.cfg.integrator,
                &bounds,
            )
            .map_err(|e| match e {
                Error::StageNotFinite { .. } | Error::NonFinite { .. } | Error::NotARotation { .. } => {
                    Error::Diverged { t }
                }
                other => other,
            })?;
            let m = aug.max_abs();
            if !m.is_finite() || m > self.cfg.divergence_bound {
                return Err(Error::Diverged { t });
            }
        }
        self.aug = aug;
        self.k += 1;
        Ok(StepRecord { t, control, disturbance: d })
    }

    /// Metrics for a record, given the state it was computed from.
    pub fn metrics_sample(&self, before: &AugmentedState, rec: &StepRecord) -> MetricsSample {
        MetricsSample {
            t: rec.t,
            position_error: rec.control.errors.e_x.norm(),
            attitude_error: psi_r(&rec.control.reference.r, &before.system.payload.r),
            m_bar: rec.control.features.m_bar,
            j_bar: rec.control.features.j_bar,
            true_mass: self.cfg.plant.m0,
            true_inertia: self.true_inertia,
            compressions: rec.control.compressions,
        }
    }
}

/// Result of [`run_scenario`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub log: Vec<LogRecord>,
    pub metrics: Metrics,
    pub final_state: AugmentedState,
    pub control_evaluations: usize,
}

/// Build a log row from the state at the start of a control period and the
/// record produced for it.
pub fn log_record(aug: &AugmentedState, rec: &StepRecord, plant: &SystemParams) -> LogRecord {
    let s = &aug.system;
    let p = &s.payload;
    let c = &rec.control;
    let rho = plant.rho();
    let cables = (0..s.cables.len())
        .map(|i| {
            let cab = &s.cables[i];
            CableLog {
                q: cab.q,
                q_d: c.q_d[i],
                e_q: c.cable_errors[i].e_q,
                e_w: c.cable_errors[i].e_w,
                psi_q: psi_q(&cab.q, &c.q_d[i]),
                mu_d: c.input.mu_d[i],
                u: c.input.forces[i].u,
                thrust: c.thrusts[i],
                moment: c.input.moments[i],
                position: reconstruct_quadrotor_position(&p.x, &p.r, &rho[i], &cab.q, plant.quads[i].l),
                est_force: aug.estimates.quad_forces[i],
                dist_force: rec.disturbance.force_quads[i],
                dist_moment: rec.disturbance.moment_quads[i],
            }
        })
        .collect();
    LogRecord {
        t: rec.t,
        x0: p.x,
        v0: p.v,
        r0: p.r,
        omega0: p.omega,
        x_d: c.reference.x,
        e_x: c.errors.e_x,
        e_v: c.errors.e_v,
        e_r: c.errors.e_r,
        e_omega: c.errors.e_omega,
        psi_r: psi_r(&c.reference.r, &p.r),
        m_bar: c.features.m_bar,
        j_bar: c.features.j_bar,
        phi_x: c.features.phi_x,
        phi_r: c.features.phi_r,
        est_force: aug.estimates.payload_force,
        est_moment: aug.estimates.payload_moment,
        force_d: c.input.force_d,
        moment_d: c.input.moment_d,
        dist_force: rec.disturbance.force_payload,
        dist_moment: rec.disturbance.moment_payload,
        cables,
    }
}

/// Run a scenario to completion.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput> {
    match run_scenario_partial(cfg)? {
        (out, None) => Ok(out),
        (_, Some(e)) => Err(e),
    }
}

/// Like [`run_scenario`], but a run that fails part way still returns what
/// was logged up to the failure, together with the error. Configuration
/// errors are returned before anything runs.
pub fn run_scenario_partial(cfg: &ScenarioConfig) -> Result<(RunOutput, Option<Error>)> {
    let mut sim = Simulation::new(cfg.clone())?;
    let mut acc = MetricsAccumulator::new(cfg.metrics_window, cfg.settle_threshold);
    let mut log = Vec::new();
    let mut k = 0usize;
    let mut failure = None;
    while !sim.finished() {
        let before = sim.state().clone();
        let rec = match sim.step() {
            Ok(rec) => rec,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        acc.push(&sim.metrics_sample(&before, &rec));
        if cfg.log_every > 0 && k.is_multiple_of(cfg.log_every) {
            log.push(log_record(&before, &rec, &cfg.plant));
        }
        k += 1;
    }
    let out = RunOutput {
        metrics: acc.finish(sim.time()),
        final_state: sim.state().clone(),
        control_evaluations: sim.stack().evaluations(),
        log,
    };
    Ok((out, failure))
}
