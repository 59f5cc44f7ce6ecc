//! Online tracking metrics.

use crate::math::{sqrt, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsWindow {
    pub start: f64,
    pub end: f64,
}

impl MetricsWindow {
    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub window: MetricsWindow,
    pub samples: usize,
    pub rms_position_error: f64,
    pub max_position_error: f64,
    pub rms_attitude_error: f64,
    pub max_attitude_error: f64,
    /// Earliest time after which `‖e_x‖` stays below `settle_threshold`.
    pub settling_time: Option<f64>,
    pub settle_threshold: f64,
    pub final_time: f64,
    pub final_mass_estimate: Vec3,
    pub final_inertia_estimate: Vec3,
    pub min_mass_estimate: f64,
    pub max_mass_estimate: f64,
    /// `1/m0 - 1/m̄_j` at the end of the run.
    pub final_mass_reciprocal_error: Vec3,
    pub final_inertia_reciprocal_error: Vec3,
    pub compressions: usize,
    pub steps: usize,
}

#[derive(Debug, Clone)]
pub struct MetricsAccumulator {
    window: MetricsWindow,
    settle_threshold: f64,
    sum_ex2: f64,
    sum_psi2: f64,
    max_ex: f64,
    max_psi: f64,
    samples: usize,
    last_violation: Option<f64>,
    first_t: Option<f64>,
    last_t: f64,
    m_bar: Vec3,
    j_bar: Vec3,
    m_min: f64,
    m_max: f64,
    recip_m: Vec3,
    recip_j: Vec3,
    compressions: usize,
    steps: usize,
}

/// One control instant worth of data.
#[derive(Debug, Clone, Copy)]
pub struct MetricsSample {
    pub t: f64,
    pub position_error: f64,
    pub attitude_error: f64,
    pub m_bar: Vec3,
    pub j_bar: Vec3,
    pub true_mass: f64,
    pub true_inertia: Vec3,
    pub compressions: usize,
}

impl MetricsAccumulator {
    pub fn new(window: MetricsWindow, settle_threshold: f64) -> Self {
        Self {
            window,
            settle_threshold,
            sum_ex2: 0.0,
            sum_psi2: 0.0,
            max_ex: 0.0,
            max_psi: 0.0,
            samples: 0,
            last_violation: None,
            first_t: None,
            last_t: 0.0,
            m_bar: Vec3::zeros(),
            j_bar: Vec3::zeros(),
            m_min: f64::INFINITY,
            m_max: f64::NEG_INFINITY,
            recip_m: Vec3::zeros(),
            recip_j: Vec3::zeros(),
            compressions: 0,
            steps: 0,
        }
    }

    pub fn push(&mut self, s: &MetricsSample) {
        self.steps += 1;
        self.first_t.get_or_insert(s.t);
        self.last_t = s.t;
        self.compressions += s.compressions;
        if self.window.contains(s.t) {
            self.samples += 1;
            self.sum_ex2 += s.position_error * s.position_error;
            self.sum_psi2 += s.attitude_error * s.attitude_error;
            self.max_ex = self.max_ex.max(s.position_error);
            self.max_psi = self.max_psi.max(s.attitude_error);
        }
        if s.position_error >= self.settle_threshold {
            self.last_violation = Some(s.t);
        }
        self.m_bar = s.m_bar;
        self.j_bar = s.j_bar;
        for j in 0..3 {
            self.m_min = self.m_min.min(s.m_bar[j]);
            self.m_max = self.m_max.max(s.m_bar[j]);
            self.recip_m[j] = 1.0 / s.true_mass - 1.0 / s.m_bar[j];
            self.recip_j[j] = 1.0 / s.true_inertia[j] - 1.0 / s.j_bar[j];
        }
    }

    /// `final_time` is the end of the integrated horizon.
    pub fn finish(&self, final_time: f64) -> Metrics {
        let n = self.samples.max(1) as f64;
        let settling_time = match (self.last_violation, self.first_t) {
            (None, Some(t0)) => Some(t0),
            (Some(t), _) if t < self.last_t => {
                // next sample time is the first compliant one
                let dt = if self.steps > 1 {
                    (self.last_t - self.first_t.unwrap_or(0.0)) / (self.steps - 1) as f64
                } else {
                    0.0
                };
                Some(t + dt)
            }
            _ => None,
        };
        Metrics {
            window: self.window,
            samples: self.samples,
            rms_position_error: sqrt(self.sum_ex2 / n),
            max_position_error: self.max_ex,
            rms_attitude_error: sqrt(self.sum_psi2 / n),
            max_attitude_error: self.max_psi,
            settling_time,
            settle_threshold: self.settle_threshold,
            final_time,
            final_mass_estimate: self.m_bar,
            final_inertia_estimate: self.j_bar,
            min_mass_estimate: self.m_min,
            max_mass_estimate: self.m_max,
            final_mass_reciprocal_error: self.recip_m,
            final_inertia_reciprocal_error: self.recip_j,
            compressions: self.compressions,
            steps: self.steps,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(t: f64, ex: f64) -> MetricsSample {
        MetricsSample {
            t,
            position_error: ex,
            attitude_error: ex / 2.0,
            m_bar: Vec3::repeat(2.0),
            j_bar: Vec3::repeat(0.5),
            true_mass: 4.0,
            true_inertia: Vec3::repeat(1.0),
            compressions: 0,
        }
    }

    #[test]
    fn window_statistics() {
        let mut acc = MetricsAccumulator::new(MetricsWindow { start: 1.0, end: 2.0 }, 0.5);
        for k in 0..=30 {
            let t = k as f64 * 0.1;
            acc.push(&sample(t, if t < 1.0 { 10.0 } else { 0.3 }));
        }
        let m = acc.finish(3.0);
        assert_eq!(m.samples, 11);
        assert!((m.rms_position_error - 0.3).abs() < 1e-12);
        assert!((m.max_attitude_error - 0.15).abs() < 1e-12);
        assert!((m.settling_time.unwrap() - 1.0).abs() < 1e-9);
        assert!((m.final_mass_reciprocal_error[0] - (0.25 - 0.5)).abs() < 1e-12);
        assert_eq!(m.steps, 31);
    }

    #[test]
    fn never_settles() {
        let mut acc = MetricsAccumulator::new(MetricsWindow { start: 0.0, end: 1.0 }, 0.1);
        acc.push(&sample(0.0, 1.0));
        acc.push(&sample(0.1, 1.0));
        assert_eq!(acc.finish(0.2).settling_time, None);
    }
}
