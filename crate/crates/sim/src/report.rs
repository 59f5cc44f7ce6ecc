//! JSON run summaries.

use multilift_core::scenario::{Metrics, ScenarioConfig};
use serde::Serialize;

use crate::csvlog::SCHEMA_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Geometry {
    pub quadrotors: usize,
    /// Attachment points in the payload frame.
    pub attachments: Vec<[f64; 3]>,
    pub cable_lengths: Vec<f64>,
    pub payload_mass: f64,
    pub payload_inertia: [[f64; 3]; 3],
}

impl Geometry {
    pub fn of(cfg: &ScenarioConfig) -> Self {
        let p = &cfg.plant;
        Self {
            quadrotors: p.n(),
            attachments: p.quads.iter().map(|q| q.rho.into()).collect(),
            cable_lengths: p.quads.iter().map(|q| q.l).collect(),
            payload_mass: p.m0,
            payload_inertia: core::array::from_fn(|i| core::array::from_fn(|j| p.j0[(i, j)])),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub window: [f64; 2],
    pub samples: usize,
    pub rms_position_error: f64,
    pub max_position_error: f64,
    pub rms_attitude_error: f64,
    pub max_attitude_error: f64,
    pub settling_time: Option<f64>,
    pub settle_threshold: f64,
    pub final_time: f64,
    pub final_mass_estimate: [f64; 3],
    pub final_inertia_estimate: [f64; 3],
    pub min_mass_estimate: f64,
    pub max_mass_estimate: f64,
    pub final_mass_reciprocal_error: [f64; 3],
    pub final_inertia_reciprocal_error: [f64; 3],
    pub compressions: usize,
    pub steps: usize,
}

impl From<&Metrics> for MetricsReport {
    fn from(m: &Metrics) -> Self {
        Self {
            window: [m.window.start, m.window.end],
            samples: m.samples,
            rms_position_error: m.rms_position_error,
            max_position_error: m.max_position_error,
            rms_attitude_error: m.rms_attitude_error,
            max_attitude_error: m.max_attitude_error,
            settling_time: m.settling_time,
            settle_threshold: m.settle_threshold,
            final_time: m.final_time,
            final_mass_estimate: m.final_mass_estimate.into(),
            final_inertia_estimate: m.final_inertia_estimate.into(),
            min_mass_estimate: m.min_mass_estimate,
            max_mass_estimate: m.max_mass_estimate,
            final_mass_reciprocal_error: m.final_mass_reciprocal_error.into(),
            final_inertia_reciprocal_error: m.final_inertia_reciprocal_error.into(),
            compressions: m.compressions,
            steps: m.steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub group: Option<String>,
    pub controller: String,
    pub dt: f64,
    pub substeps: usize,
    pub duration: f64,
    /// `"completed"` or `"diverged"`.
    pub status: String,
    pub diverged_at: Option<f64>,
    pub geometry: Geometry,
    pub control_evaluations: usize,
    pub wall_time_seconds: f64,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub schema_version: u32,
    pub group: Option<String>,
    pub baseline: RunReport,
    pub sanm: RunReport,
    /// `1 - rms_sanm / rms_baseline` for the position error.
    pub position_improvement: f64,
    pub attitude_improvement: f64,
}

impl CompareReport {
    pub fn new(baseline: RunReport, sanm: RunReport) -> Self {
        let gain = |b: f64, s: f64| if b > 0.0 { 1.0 - s / b } else { 0.0 };
        Self {
            schema_version: SCHEMA_VERSION,
            group: baseline.group.clone(),
            position_improvement: gain(baseline.metrics.rms_position_error, sanm.metrics.rms_position_error),
            attitude_improvement: gain(baseline.metrics.rms_attitude_error, sanm.metrics.rms_attitude_error),
            baseline,
            sanm,
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, serde_json::Error> {
    serde_json::to_string_pretty(value)
}
