//! TOML scenario files.
//!
//! A file picks a preset with `group` (defaults to `A`) and overrides any
//! subset of its parameters. Unknown keys are rejected.
//!
//! ```toml
//! group = "B"
//! controller = "sanm"
//!
//! [integrator]
//! dt = 0.001
//! duration = 20.0
//!
//! [sanm]
//! m_max = 8.0
//!
//! [disturbance]
//! payload_force = [0.0, 0.0, -5.0]
//! ```

use std::path::Path;

use multilift_core::dynamics::QuadParams;
use multilift_core::scenario::{
    ring_attachments, AttitudeSpec, Circle, ControllerKind, Group, HeadingSpec, InitialCondition, MetricsWindow,
    PayloadForce, PayloadMoment, QuadDisturbance, ScenarioConfig, TrajectorySpec,
};
use multilift_core::sanm::RbfSlice;
use multilift_core::{Mat3, Vec3};
use nalgebra::{Matrix2, Vector2};
use serde::Deserialize;

use crate::SimError;

type V3 = [f64; 3];

fn v3(a: V3) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub group: Option<String>,
    pub controller: Option<String>,
    /// `"on_reference"` or `"at_rest"`.
    pub initial: Option<String>,
    pub tension_floor: Option<f64>,
    pub divergence_bound: Option<f64>,
    pub log_every: Option<usize>,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub plant: PlantSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub gains: GainsSection,
    #[serde(default)]
    pub sanm: SanmSection,
    #[serde(default)]
    pub disturbance: DisturbanceSection,
    #[serde(default)]
    pub trajectory: TrajectorySection,
    #[serde(default)]
    pub attitude: AttitudeSection,
    #[serde(default)]
    pub metrics: MetricsSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub dt: Option<f64>,
    pub duration: Option<f64>,
    pub substeps: Option<usize>,
    pub project_rotations: Option<bool>,
    pub retangentialize: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSection {
    pub m0: Option<f64>,
    /// Principal moments of inertia.
    pub j0: Option<V3>,
    pub g: Option<f64>,
    pub quadrotors: Option<usize>,
    pub quad_mass: Option<f64>,
    pub quad_inertia: Option<V3>,
    pub cable_length: Option<f64>,
    /// Per-cable lengths; overrides `cable_length`.
    pub cable_lengths: Option<Vec<f64>>,
    /// Radius of the default ring of attachment points.
    pub attachment_radius: Option<f64>,
    /// Explicit attachment points in the payload frame; overrides the ring.
    pub attachments: Option<Vec<V3>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub m0: Option<f64>,
    pub j0: Option<V3>,
    pub quad_mass: Option<f64>,
    pub quad_inertia: Option<V3>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsSection {
    pub k_p: Option<V3>,
    pub k_d: Option<V3>,
    pub k_r0: Option<f64>,
    pub k_omega0: Option<f64>,
    pub c_r: Option<f64>,
    pub c_q: Option<f64>,
    pub h_x0: Option<f64>,
    pub h_r0: Option<f64>,
    pub h_xi: Option<f64>,
    pub k_q: Option<f64>,
    pub k_w: Option<f64>,
    pub k_ri: Option<f64>,
    pub k_omegai: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SanmSection {
    pub eta_m: Option<V3>,
    pub eta_j: Option<V3>,
    pub s_m: Option<V3>,
    pub s_j: Option<V3>,
    pub m_max: Option<f64>,
    pub j_max: Option<V3>,
    pub gamma_x: Option<V3>,
    pub gamma_r: Option<V3>,
    /// Centers on the diagonal of every slice.
    pub centers: Option<Vec<f64>>,
    /// Common width per axis of the translational slices.
    pub x_widths: Option<V3>,
    pub r_widths: Option<V3>,
    /// Ball radius for the weight projection; `0` turns it off.
    pub weight_radius: Option<f64>,
    /// Per-axis `[q11, q12, q22]` of the Lyapunov weight.
    pub q: Option<[V3; 3]>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum VectorOrName {
    Name(String),
    Vector(V3),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSection {
    /// `"none"`, `"group_b"` or a constant vector.
    pub payload_force: Option<VectorOrName>,
    /// `"none"`, `"group_c"` or a constant vector.
    pub payload_moment: Option<VectorOrName>,
    pub moment_onset: Option<f64>,
    pub quads: Option<bool>,
    pub quad_force_amplitude: Option<f64>,
    pub quad_moment_amplitude: Option<f64>,
    pub quad_base_rate: Option<f64>,
    pub accel_extra: Option<V3>,
    pub angular_accel_extra: Option<V3>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySection {
    /// `hover`, `circle`, `helix`, `tilted_circle` or `square_wave_altitude`.
    pub kind: Option<String>,
    pub center: Option<V3>,
    pub radius: Option<f64>,
    pub rate: Option<f64>,
    pub point: Option<V3>,
    pub climb_rate: Option<f64>,
    pub amplitude: Option<f64>,
    pub alt_rate: Option<f64>,
    pub sharpness: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttitudeSection {
    /// `facing` or `fixed`.
    pub mode: Option<String>,
    /// Yaw of the fixed attitude (rad).
    pub yaw: Option<f64>,
    /// Fixed desired heading for every quadrotor instead of following the payload.
    pub quad_heading: Option<V3>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsSection {
    pub window: Option<[f64; 2]>,
    pub settle_threshold: Option<f64>,
}

pub fn parse_group(s: &str) -> Result<Group, SimError> {
    Group::parse(s).ok_or_else(|| SimError::Config(format!("unknown group `{s}`")))
}

pub fn parse_controller(s: &str) -> Result<ControllerKind, SimError> {
    match s.to_ascii_lowercase().as_str() {
        "baseline" => Ok(ControllerKind::Baseline),
        "sanm" => Ok(ControllerKind::Sanm),
        _ => Err(SimError::Config(format!("unknown controller `{s}`"))),
    }
}

fn set<T>(dst: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *dst = v;
    }
}

fn set3(dst: &mut Vec3, v: Option<V3>) {
    if let Some(v) = v {
        *dst = v3(v);
    }
}

impl FileConfig {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Start from the group preset and apply every override. The result is
    /// validated.
    pub fn to_scenario(&self) -> Result<ScenarioConfig, SimError> {
        let group = parse_group(self.group.as_deref().unwrap_or("A"))?;
        let controller = parse_controller(self.controller.as_deref().unwrap_or("baseline"))?;
        let mut cfg = ScenarioConfig::for_group(group, controller);

        if let Some(s) = &self.initial {
            cfg.initial = match s.as_str() {
                "on_reference" => InitialCondition::OnReference,
                "at_rest" => InitialCondition::AtRest,
                _ => return Err(SimError::Config(format!("unknown initial condition `{s}`"))),
            };
        }
        set(&mut cfg.tension_floor, self.tension_floor);
        set(&mut cfg.divergence_bound, self.divergence_bound);
        set(&mut cfg.log_every, self.log_every);

        let i = &self.integrator;
        set(&mut cfg.integrator.h, i.dt);
        set(&mut cfg.integrator.duration, i.duration);
        set(&mut cfg.integrator.substeps, i.substeps);
        set(&mut cfg.integrator.project_rotations, i.project_rotations);
        set(&mut cfg.integrator.retangentialize, i.retangentialize);

        self.apply_plant(&mut cfg)?;

        let m = &self.model;
        set(&mut cfg.model.m0, m.m0);
        set3(&mut cfg.model.j0, m.j0);
        set(&mut cfg.model.m_i, m.quad_mass);
        if let Some(j) = m.quad_inertia {
            cfg.model.j_i = Mat3::from_diagonal(&v3(j));
        }

        let g = &self.gains;
        let k = &mut cfg.gains;
        set3(&mut k.k_p, g.k_p);
        set3(&mut k.k_d, g.k_d);
        set(&mut k.k_r0, g.k_r0);
        set(&mut k.k_omega0, g.k_omega0);
        set(&mut k.c_r, g.c_r);
        set(&mut k.c_q, g.c_q);
        set(&mut k.h_x0, g.h_x0);
        set(&mut k.h_r0, g.h_r0);
        set(&mut k.h_xi, g.h_xi);
        set(&mut k.k_q, g.k_q);
        set(&mut k.k_w, g.k_w);
        set(&mut k.k_ri, g.k_ri);
        set(&mut k.k_omegai, g.k_omegai);

        self.apply_sanm(&mut cfg);
        self.apply_disturbance(&mut cfg)?;
        self.apply_trajectory(&mut cfg)?;

        let a = &self.attitude;
        match a.mode.as_deref() {
            None => {}
            Some("facing") => cfg.attitude = AttitudeSpec::Facing,
            Some("fixed") => {}
            Some(s) => return Err(SimError::Config(format!("unknown attitude mode `{s}`"))),
        }
        if a.mode.as_deref() == Some("fixed") || a.yaw.is_some() {
            let yaw = a.yaw.unwrap_or(0.0);
            cfg.attitude = AttitudeSpec::Fixed(*nalgebra::Rotation3::from_axis_angle(&Vec3::z_axis(), yaw).matrix());
        }
        if let Some(h) = a.quad_heading {
            cfg.heading = HeadingSpec::Fixed(v3(h));
        }

        if let Some([start, end]) = self.metrics.window {
            cfg.metrics_window = MetricsWindow { start, end };
        }
        set(&mut cfg.settle_threshold, self.metrics.settle_threshold);

        cfg.validate().map_err(|e| SimError::Config(e.to_string()))?;
        Ok(cfg)
    }

    fn apply_plant(&self, cfg: &mut ScenarioConfig) -> Result<(), SimError> {
        let p = &self.plant;
        set(&mut cfg.plant.m0, p.m0);
        if let Some(j) = p.j0 {
            cfg.plant.j0 = Mat3::from_diagonal(&v3(j));
        }
        set(&mut cfg.plant.g, p.g);

        let template = cfg.plant.quads[0].clone();
        let n = p
            .quadrotors
            .or(p.attachments.as_ref().map(Vec::len))
            .or(p.cable_lengths.as_ref().map(Vec::len))
            .unwrap_or(cfg.plant.quads.len());
        if n == 0 {
            return Err(SimError::Config("at least one quadrotor is required".into()));
        }
        let radius = p.attachment_radius.unwrap_or(template.rho.norm());
        let rho: Vec<Vec3> = match &p.attachments {
            Some(a) if a.len() != n => {
                return Err(SimError::Config(format!("{} attachment points for {n} quadrotors", a.len())))
            }
            Some(a) => a.iter().copied().map(v3).collect(),
            None => ring_attachments(n, radius),
        };
        let lengths = match &p.cable_lengths {
            Some(l) if l.len() != n => {
                return Err(SimError::Config(format!("{} cable lengths for {n} quadrotors", l.len())))
            }
            Some(l) => l.clone(),
            None => vec![p.cable_length.unwrap_or(template.l); n],
        };
        let m = p.quad_mass.unwrap_or(template.m);
        let j = p.quad_inertia.map(|j| Mat3::from_diagonal(&v3(j))).unwrap_or(template.j);
        cfg.plant.quads = rho.into_iter().zip(lengths).map(|(rho, l)| QuadParams { m, j, l, rho }).collect();
        Ok(())
    }

    fn apply_sanm(&self, cfg: &mut ScenarioConfig) {
        let s = &self.sanm;
        let c = &mut cfg.sanm;
        set3(&mut c.eta_m, s.eta_m);
        set3(&mut c.eta_j, s.eta_j);
        set3(&mut c.s_m, s.s_m);
        set3(&mut c.s_j, s.s_j);
        set(&mut c.m_max, s.m_max);
        set3(&mut c.j_max, s.j_max);
        set3(&mut c.gamma_x, s.gamma_x);
        set3(&mut c.gamma_r, s.gamma_r);
        let slice_width = |sl: &RbfSlice| sl.widths.first().copied().unwrap_or(1.0);
        if s.centers.is_some() || s.x_widths.is_some() || s.r_widths.is_some() {
            let centers: Vec<f64> = match &s.centers {
                Some(c) => c.clone(),
                None => c.x_slices[0].centers.iter().map(|v: &Vector2<f64>| v.x).collect(),
            };
            for k in 0..3 {
                let wx = s.x_widths.map(|w| w[k]).unwrap_or_else(|| slice_width(&c.x_slices[k]));
                let wr = s.r_widths.map(|w| w[k]).unwrap_or_else(|| slice_width(&c.r_slices[k]));
                c.x_slices[k] = RbfSlice::diagonal(&centers, wx);
                c.r_slices[k] = RbfSlice::diagonal(&centers, wr);
            }
        }
        if let Some(r) = s.weight_radius {
            c.weight_radius = (r > 0.0).then_some(r);
        }
        if let Some(q) = s.q {
            for (dst, [a, b, d]) in c.q.iter_mut().zip(q) {
                *dst = Matrix2::new(a, b, b, d);
            }
        }
    }

    fn apply_disturbance(&self, cfg: &mut ScenarioConfig) -> Result<(), SimError> {
        let d = &self.disturbance;
        let c = &mut cfg.disturbance;
        let bad = |what: &str, s: &str| SimError::Config(format!("unknown {what} `{s}`"));
        match &d.payload_force {
            None => {}
            Some(VectorOrName::Vector(v)) => c.payload_force = PayloadForce::Constant(v3(*v)),
            Some(VectorOrName::Name(s)) => {
                c.payload_force = match s.as_str() {
                    "none" => PayloadForce::None,
                    "group_b" => PayloadForce::GroupB,
                    _ => return Err(bad("payload force", s)),
                }
            }
        }
        let onset = d.moment_onset.unwrap_or(match c.payload_moment {
            PayloadMoment::GroupC { onset } => onset,
            _ => 5.0,
        });
        match &d.payload_moment {
            None => {
                if let PayloadMoment::GroupC { .. } = c.payload_moment {
                    c.payload_moment = PayloadMoment::GroupC { onset };
                }
            }
            Some(VectorOrName::Vector(v)) => c.payload_moment = PayloadMoment::Constant(v3(*v)),
            Some(VectorOrName::Name(s)) => {
                c.payload_moment = match s.as_str() {
                    "none" => PayloadMoment::None,
                    "group_c" => PayloadMoment::GroupC { onset },
                    _ => return Err(bad("payload moment", s)),
                }
            }
        }
        match d.quads {
            Some(false) => c.quads = None,
            Some(true) if c.quads.is_none() => c.quads = Some(QuadDisturbance::default()),
            _ => {}
        }
        if let Some(q) = &mut c.quads {
            set(&mut q.force_amplitude, d.quad_force_amplitude);
            set(&mut q.moment_amplitude, d.quad_moment_amplitude);
            set(&mut q.base_rate, d.quad_base_rate);
        }
        set3(&mut c.accel_extra, d.accel_extra);
        set3(&mut c.angular_accel_extra, d.angular_accel_extra);
        Ok(())
    }

    fn apply_trajectory(&self, cfg: &mut ScenarioConfig) -> Result<(), SimError> {
        let t = &self.trajectory;
        let mut circle = match cfg.trajectory {
            TrajectorySpec::Circle(c)
            | TrajectorySpec::Helix { circle: c, .. }
            | TrajectorySpec::TiltedCircle { circle: c, .. }
            | TrajectorySpec::SquareWaveAltitude { circle: c, .. } => c,
            TrajectorySpec::Hover { .. } => TrajectorySpec::default_circle(),
        };
        set3(&mut circle.center, t.center);
        set(&mut circle.radius, t.radius);
        set(&mut circle.rate, t.rate);
        let (mut climb, mut amp, mut alt_rate, mut sharp) = (0.04, 1.0, 0.4, 3.0);
        match cfg.trajectory {
            TrajectorySpec::Helix { climb_rate, .. } => climb = climb_rate,
            TrajectorySpec::TiltedCircle { amplitude, .. } => amp = amplitude,
            TrajectorySpec::SquareWaveAltitude { amplitude, alt_rate: r, sharpness, .. } => {
                (amp, alt_rate, sharp) = (amplitude, r, sharpness)
            }
            _ => {}
        }
        set(&mut climb, t.climb_rate);
        set(&mut amp, t.amplitude);
        set(&mut alt_rate, t.alt_rate);
        set(&mut sharp, t.sharpness);
        let kind = match (&t.kind, cfg.trajectory) {
            (Some(k), _) => k.as_str(),
            (None, TrajectorySpec::Hover { .. }) => "hover",
            (None, TrajectorySpec::Circle(_)) => "circle",
            (None, TrajectorySpec::Helix { .. }) => "helix",
            (None, TrajectorySpec::TiltedCircle { .. }) => "tilted_circle",
            (None, TrajectorySpec::SquareWaveAltitude { .. }) => "square_wave_altitude",
        };
        let c: Circle = circle;
        cfg.trajectory = match kind {
            "hover" => {
                let point = t.point.map(v3).unwrap_or(c.center + Vec3::new(c.radius, 0.0, 0.0));
                TrajectorySpec::Hover { point }
            }
            "circle" => TrajectorySpec::Circle(c),
            "helix" => TrajectorySpec::Helix { circle: c, climb_rate: climb },
            "tilted_circle" => TrajectorySpec::TiltedCircle { circle: c, amplitude: amp },
            "square_wave_altitude" => {
                TrajectorySpec::SquareWaveAltitude { circle: c, amplitude: amp, alt_rate, sharpness: sharp }
            }
            s => return Err(SimError::Config(format!("unknown trajectory `{s}`"))),
        };
        if kind == "hover" && self.attitude.mode.is_none() && matches!(cfg.attitude, AttitudeSpec::Facing) {
            // Facing needs horizontal motion.
            cfg.attitude = AttitudeSpec::Fixed(Mat3::identity());
        }
        Ok(())
    }
}
