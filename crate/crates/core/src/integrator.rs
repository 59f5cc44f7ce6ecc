//! Fixed-step Bogacki–Shampine integration of the augmented state with
//! post-step manifold projection.

use alloc::vec::Vec;
use nalgebra::DVector;

use crate::dynamics::{system_rhs, CableState, DisturbanceSample, PlantInput, SystemParams, SystemState};
use crate::error::{Error, Result};
use crate::math::{Mat3, Vec3};
use crate::payload_control::{IntegralEstimates, IntegralRates};
use crate::sanm::{EstimateBounds, SanmRates, SanmState};
use crate::so3::reorthonormalize;

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    /// Integration step (s).
    pub h: f64,
    pub duration: f64,
    /// Integration steps per control update. The control period is `h * substeps`.
    pub substeps: usize,
    pub project_rotations: bool,
    pub retangentialize: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { h: 1e-3, duration: 50.0, substeps: 1, project_rotations: true, retangentialize: true }
    }
}

impl IntegratorConfig {
    pub fn control_period(&self) -> f64 {
        self.h * self.substeps as f64
    }

    /// Number of control periods in the run.
    pub fn control_steps(&self) -> usize {
        libm::round(self.duration / self.control_period()) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::InvalidConfig("step size must be positive".into()));
        }
        if self.substeps == 0 {
            return Err(Error::InvalidConfig("substeps must be at least 1".into()));
        }
        if !(self.duration >= self.h) {
            return Err(Error::InvalidConfig("duration must be at least one step".into()));
        }
        Ok(())
    }
}

/// One Bogacki–Shampine step of `ẏ = f(t, y)`.
pub fn bs3_step<F>(mut f: F, t: f64, y: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y.len();
    let mut k1 = alloc::vec![0.0; n];
    let mut k2 = alloc::vec![0.0; n];
    let mut k3 = alloc::vec![0.0; n];
    let mut tmp = alloc::vec![0.0; n];

    let stage = |f: &mut F, ts: f64, ys: &[f64], k: &mut [f64]| -> Result<()> {
        f(ts, ys, k)?;
        if k.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::StageNotFinite { t: ts })
        }
    };

    stage(&mut f, t, y, &mut k1)?;
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    stage(&mut f, t + 0.5 * h, &tmp, &mut k2)?;
    for i in 0..n {
        tmp[i] = y[i] + 0.75 * h * k2[i];
    }
    stage(&mut f, t + 0.75 * h, &tmp, &mut k3)?;
    Ok((0..n).map(|i| y[i] + h * (2.0 / 9.0 * k1[i] + 1.0 / 3.0 * k2[i] + 4.0 / 9.0 * k3[i])).collect())
}

/// Plant state plus every quantity the controllers integrate.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedState {
    pub system: SystemState,
    pub estimates: IntegralEstimates,
    pub sanm: SanmState,
}

/// Rates of the controller-owned states, held over one step.
#[derive(Debug, Clone, PartialEq)]
pub struct HeldRates {
    pub estimates: IntegralRates,
    pub sanm: Option<SanmRates>,
}

fn put3(out: &mut Vec<f64>, v: &Vec3) {
    out.extend_from_slice(v.as_slice());
}

fn put9(out: &mut Vec<f64>, m: &Mat3) {
    out.extend_from_slice(m.as_slice());
}

struct Reader<'a> {
    data: &'a [f64],
    at: usize,
}

impl Reader<'_> {
    fn v3(&mut self) -> Vec3 {
        let v = Vec3::from_column_slice(&self.data[self.at..self.at + 3]);
        self.at += 3;
        v
    }

    fn m3(&mut self) -> Mat3 {
        let m = Mat3::from_column_slice(&self.data[self.at..self.at + 9]);
        self.at += 9;
        m
    }

    fn dv(&mut self, len: usize) -> DVector<f64> {
        let v = DVector::from_column_slice(&self.data[self.at..self.at + len]);
        self.at += len;
        v
    }
}

impl AugmentedState {
    pub fn n(&self) -> usize {
        self.system.cables.len()
    }

    /// Length of the plant part of the flat vector.
    pub fn system_len(&self) -> usize {
        18 + 18 * self.n()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let s = &self.system;
        let mut out = Vec::with_capacity(self.system_len() + 6 + 3 * self.n() + 64);
        put3(&mut out, &s.payload.x);
        put3(&mut out, &s.payload.v);
        put9(&mut out, &s.payload.r);
        put3(&mut out, &s.payload.omega);
        for c in &s.cables {
            put3(&mut out, &c.q);
            put3(&mut out, &c.omega);
        }
        for q in &s.quads {
            put9(&mut out, &q.r);
            put3(&mut out, &q.omega);
        }
        put3(&mut out, &self.estimates.payload_force);
        put3(&mut out, &self.estimates.payload_moment);
        for d in &self.estimates.quad_forces {
            put3(&mut out, d);
        }
        put3(&mut out, &self.sanm.m_bar);
        put3(&mut out, &self.sanm.j_bar);
        for w in self.sanm.w_x.iter().chain(&self.sanm.w_r) {
            out.extend_from_slice(w.as_slice());
        }
        out
    }

    /// Overwrite every field from a flat vector laid out by [`Self::to_vec`].
    pub fn set_from(&mut self, data: &[f64]) {
        let mut r = Reader { data, at: 0 };
        let s = &mut self.system;
        s.payload.x = r.v3();
        s.payload.v = r.v3();
        s.payload.r = r.m3();
        s.payload.omega = r.v3();
        for c in &mut s.cables {
            c.q = r.v3();
            c.omega = r.v3();
        }
        for q in &mut s.quads {
            q.r = r.m3();
            q.omega = r.v3();
        }
        self.estimates.payload_force = r.v3();
        self.estimates.payload_moment = r.v3();
        for d in &mut self.estimates.quad_forces {
            *d = r.v3();
        }
        self.sanm.m_bar = r.v3();
        self.sanm.j_bar = r.v3();
        for w in self.sanm.w_x.iter_mut().chain(self.sanm.w_r.iter_mut()) {
            *w = r.dv(w.len());
        }
    }

    /// Largest absolute component, used for divergence detection.
    pub fn max_abs(&self) -> f64 {
        self.to_vec().iter().fold(0.0f64, |m, v| if v.is_finite() { m.max(v.abs()) } else { f64::INFINITY })
    }

    /// Project rotations back onto SO(3), cable directions onto S² and cable
    /// rates onto the tangent plane, then limit the adaptive states against
    /// their values before the step.
    pub fn project(&mut self, prev: &SanmState, cfg: &IntegratorConfig, bounds: &EstimateBounds) -> Result<()> {
        let s = &mut self.system;
        if cfg.project_rotations {
            s.payload.r = reorthonormalize(&s.payload.r)?;
            for q in &mut s.quads {
                q.r = reorthonormalize(&q.r)?;
            }
        }
        for c in &mut s.cables {
            let n = c.q.norm();
            if !(n > 0.0) || !n.is_finite() {
                return Err(Error::NonFinite { what: "cable direction" });
            }
            c.q /= n;
            if cfg.retangentialize {
                c.omega -= c.q * c.q.dot(&c.omega);
            }
        }
        self.sanm.limit(prev, bounds);
        Ok(())
    }
}

fn write_system_rates(rates: &crate::dynamics::SystemRates, out: &mut [f64]) {
    let mut at = 0;
    let mut put = |s: &[f64]| {
        out[at..at + s.len()].copy_from_slice(s);
        at += s.len();
    };
    put(rates.x_dot.as_slice());
    put(rates.v_dot.as_slice());
    put(rates.r_dot.as_slice());
    put(rates.omega_dot.as_slice());
    for (a, b) in &rates.cables {
        put(a.as_slice());
        put(b.as_slice());
    }
    for (a, b) in &rates.quads {
        put(a.as_slice());
        put(b.as_slice());
    }
}

fn held_tail(held: &HeldRates, aug: &AugmentedState) -> Vec<f64> {
    let mut out = Vec::new();
    put3(&mut out, &held.estimates.payload_force);
    put3(&mut out, &held.estimates.payload_moment);
    for d in &held.estimates.quad_forces {
        put3(&mut out, d);
    }
    match &held.sanm {
        Some(r) => {
            put3(&mut out, &r.m_bar);
            put3(&mut out, &r.j_bar);
            for w in r.w_x.iter().chain(&r.w_r) {
                out.extend_from_slice(w.as_slice());
            }
        }
        None => {
            let len = 6 + aug.sanm.w_x.iter().chain(&aug.sanm.w_r).map(|w| w.len()).sum::<usize>();
            out.resize(out.len() + len, 0.0);
        }
    }
    out
}

/// Advance the augmented state by one step of size `h` with the plant input
/// and the controller-state rates held constant. The disturbance is sampled at
/// every stage time.
#[allow(clippy::too_many_arguments)]
pub fn step_system<D>(
    aug: &AugmentedState,
    t: f64,
    h: f64,
    input: &PlantInput,
    held: &HeldRates,
    disturbance: D,
    params: &SystemParams,
    cfg: &IntegratorConfig,
    bounds: &EstimateBounds,
) -> Result<AugmentedState>
where
    D: Fn(f64) -> DisturbanceSample,
{
    let y0 = aug.to_vec();
    let sys_len = aug.system_len();
    let tail = held_tail(held, aug);
    debug_assert_eq!(sys_len + tail.len(), y0.len());

    let mut scratch = aug.clone();
    let rhs = |ts: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        scratch.set_from(y);
        let rates = system_rhs(&scratch.system, input, &disturbance(ts), params)?;
        write_system_rates(&rates, &mut dy[..sys_len]);
        dy[sys_len..].copy_from_slice(&tail);
        Ok(())
    };
    let y1 = bs3_step(rhs, t, &y0, h)?;
    let mut next = aug.clone();
    next.set_from(&y1);
    next.project(&aug.sanm, cfg, bounds)?;
    Ok(next)
}

/// Plain cable state with its direction renormalized and rate re-tangentialized.
pub fn tangent_cable(q: Vec3, omega: Vec3) -> CableState {
    let q = q.normalize();
    CableState { q, omega: omega - q * q.dot(&omega) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn decay(_t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        dy[0] = -y[0];
        Ok(())
    }

    #[test]
    fn bs3_linear_decay() {
        let y = bs3_step(decay, 0.0, &[1.0], 0.1).unwrap();
        assert_relative_eq!(y[0], 0.9048333333333334, epsilon = 1e-15);
        let err = (y[0] - libm::exp(-0.1)).abs();
        assert!(err < 5e-6 && err > 3e-6, "err {err}");
    }

    #[test]
    fn bs3_trivial_cases() {
        let y = bs3_step(|_, _, dy: &mut [f64]| {
            dy[0] = 0.0;
            Ok(())
        }, 0.0, &[3.0], 0.1).unwrap();
        assert_eq!(y[0], 3.0);
        let y = bs3_step(|_, _, dy: &mut [f64]| {
            dy[0] = 2.5;
            Ok(())
        }, 0.0, &[1.0], 0.2).unwrap();
        assert_relative_eq!(y[0], 1.5, epsilon = 1e-15);
    }

    #[test]
    fn bs3_is_third_order() {
        // ẏ = cos(t) y, exact y = exp(sin t).
        let f = |t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = libm::cos(t) * y[0];
            Ok(())
        };
        let run = |n: usize| {
            let h = 1.0 / n as f64;
            let mut y = alloc::vec![1.0];
            for k in 0..n {
                y = bs3_step(f, k as f64 * h, &y, h).unwrap();
            }
            (y[0] - libm::exp(libm::sin(1.0))).abs()
        };
        let ratio = run(20) / run(40);
        assert!((7.0..9.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn non_finite_stage_reports_time() {
        let r = bs3_step(|t, _, dy: &mut [f64]| {
            dy[0] = if t > 0.0 { f64::NAN } else { 0.0 };
            Ok(())
        }, 1.0, &[0.0], 0.5);
        assert_eq!(r, Err(Error::StageNotFinite { t: 1.0 }));
    }
}
