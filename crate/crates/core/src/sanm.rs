//! Sliced adaptive-neuro mapping: per-axis bounded mass/inertia adaptation,
//! per-axis Gaussian RBF disturbance features, and the 2×2 Lyapunov solve that
//! supplies the error projections.

use nalgebra::{DVector, Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::math::{exp, sqrt, Vec3};
use crate::payload_control::{error_projection, PayloadErrors, ReferenceModel};

/// Centers and widths of one 2-input RBF network.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfSlice {
    pub centers: alloc::vec::Vec<Vector2<f64>>,
    pub widths: alloc::vec::Vec<f64>,
}

impl RbfSlice {
    /// `l` neurons with centers on the diagonal `(c, c)` and a common width.
    pub fn diagonal(centers: &[f64], width: f64) -> Self {
        Self {
            centers: centers.iter().map(|&c| Vector2::new(c, c)).collect(),
            widths: alloc::vec![width; centers.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

/// Everything needed to run the six adaptive slices.
#[derive(Debug, Clone, PartialEq)]
pub struct SanmConfig {
    pub eta_m: Vec3,
    pub eta_j: Vec3,
    pub s_m: Vec3,
    pub s_j: Vec3,
    pub m_max: f64,
    pub j_max: Vec3,
    pub gamma_x: Vec3,
    pub gamma_r: Vec3,
    pub x_slices: [RbfSlice; 3],
    pub r_slices: [RbfSlice; 3],
    /// Radius of the weight ball; `None` disables projection.
    pub weight_radius: Option<f64>,
    /// `Q_j` in `ΛᵀP + PΛ = −Q`.
    pub q: [Matrix2<f64>; 3],
}

impl SanmConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        let pos = |v: &Vec3| v.iter().all(|&x| x > 0.0 && x.is_finite());
        if !(pos(&self.eta_m) && pos(&self.eta_j) && pos(&self.s_m) && pos(&self.s_j)) {
            return bad("adaptation rates and scaling factors must be positive");
        }
        if !(self.m_max > 0.0) || !pos(&self.j_max) {
            return bad("mass and inertia limits must be positive");
        }
        if !(pos(&self.gamma_x) && pos(&self.gamma_r)) {
            return bad("weight update rates must be positive");
        }
        for s in self.x_slices.iter().chain(&self.r_slices) {
            if s.is_empty() || s.widths.len() != s.centers.len() {
                return bad("each RBF slice needs at least one neuron and one width per center");
            }
            if !s.widths.iter().all(|&b| b > 0.0) {
                return bad("RBF widths must be positive");
            }
        }
        if let Some(r) = self.weight_radius {
            if !(r > 0.0) {
                return bad("weight projection radius must be positive");
            }
        }
        for q in &self.q {
            check_spd2(q)?;
        }
        Ok(())
    }
}

/// Limits applied to the adaptive states after every integration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateBounds {
    pub m_max: f64,
    pub j_max: Vec3,
    pub weight_radius: Option<f64>,
}

impl SanmConfig {
    pub fn bounds(&self) -> EstimateBounds {
        EstimateBounds { m_max: self.m_max, j_max: self.j_max, weight_radius: self.weight_radius }
    }
}

/// A step that crosses `max` from below ends on `max`: past the bound the
/// drive switches off, so the exact solution stops there.
pub fn stop_at_bound(prev: f64, next: f64, max: f64) -> f64 {
    if prev <= max && next > max {
        max
    } else {
        next
    }
}

/// Rate actually integrated for a bounded estimate. Sitting exactly on the
/// bound with an outward drive, the branch below pushes up and the branch
/// above pushes down, so the solution slides along the bound.
fn integrated_rate(est: f64, s: f64, drive: f64, eta: f64, max: f64) -> f64 {
    if est == max && drive <= 0.0 {
        0.0
    } else {
        bounded_rate(est, s, drive, eta, max)
    }
}

/// Estimated mass/inertia per axis and RBF weights per slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SanmState {
    pub m_bar: Vec3,
    pub j_bar: Vec3,
    pub w_x: [DVector<f64>; 3],
    pub w_r: [DVector<f64>; 3],
}

impl SanmState {
    /// Start from the reference model with no learned disturbance.
    pub fn initial(model: &ReferenceModel, cfg: &SanmConfig) -> Self {
        Self {
            m_bar: Vec3::repeat(model.m0),
            j_bar: model.j0,
            w_x: core::array::from_fn(|j| DVector::zeros(cfg.x_slices[j].len())),
            w_r: core::array::from_fn(|j| DVector::zeros(cfg.r_slices[j].len())),
        }
    }

    /// Apply [`stop_at_bound`] against the state before the step and project
    /// the weights into their ball.
    pub fn limit(&mut self, prev: &SanmState, b: &EstimateBounds) {
        for j in 0..3 {
            self.m_bar[j] = stop_at_bound(prev.m_bar[j], self.m_bar[j], b.m_max);
            self.j_bar[j] = stop_at_bound(prev.j_bar[j], self.j_bar[j], b.j_max[j]);
        }
        if let Some(r) = b.weight_radius {
            for w in self.w_x.iter_mut().chain(self.w_r.iter_mut()) {
                *w = project_weights(w, r);
            }
        }
    }

    /// `1/m0 − 1/m̄_j` and `1/J0[j] − 1/J̄_j` against the true plant.
    pub fn reciprocal_errors(&self, m0: f64, j0: &Vec3) -> (Vec3, Vec3) {
        (self.m_bar.map(|m| 1.0 / m0 - 1.0 / m), j0.zip_map(&self.j_bar, |a, b| 1.0 / a - 1.0 / b))
    }
}

/// Outputs fed to the per-axis control laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SanmOutput {
    pub m_bar: Vec3,
    pub j_bar: Vec3,
    pub phi_x: Vec3,
    pub phi_r: Vec3,
}

/// Time derivative of a [`SanmState`].
#[derive(Debug, Clone, PartialEq)]
pub struct SanmRates {
    pub m_bar: Vec3,
    pub j_bar: Vec3,
    pub w_x: [DVector<f64>; 3],
    pub w_r: [DVector<f64>; 3],
}

fn check_spd2(q: &Matrix2<f64>) -> Result<()> {
    let sym = (q[(0, 1)] - q[(1, 0)]).abs() <= 1e-12 * q.norm();
    let det = q[(0, 0)] * q[(1, 1)] - q[(0, 1)] * q[(1, 0)];
    if !sym || !(q[(0, 0)] > 0.0) || !(det > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(())
}

/// Companion matrix `[[0, 1], [−k_p, −k_d]]` of the per-axis error dynamics.
pub fn companion(k_p: f64, k_d: f64) -> Matrix2<f64> {
    Matrix2::new(0.0, 1.0, -k_p, -k_d)
}

/// Solve `ΛᵀP + PΛ + Q = 0` for the companion matrix of `(k_p, k_d)`.
pub fn solve_lyapunov_2x2(k_p: f64, k_d: f64, q: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    if !(k_p > 0.0 && k_d > 0.0) || !k_p.is_finite() || !k_d.is_finite() {
        return Err(Error::NotHurwitz { k_p, k_d });
    }
    check_spd2(q)?;
    let (q11, q12, q22) = (q[(0, 0)], q[(0, 1)], q[(1, 1)]);
    // Entries (1,1), (2,2) and (1,2) of the equation, solved in that order.
    let p12 = q11 / (2.0 * k_p);
    let p22 = (q22 + 2.0 * p12) / (2.0 * k_d);
    let p11 = k_p * p22 + k_d * p12 - q12;
    Ok(Matrix2::new(p11, p12, p12, p22))
}

/// `‖ΛᵀP + PΛ + Q‖_F`.
pub fn lyapunov_residual(k_p: f64, k_d: f64, p: &Matrix2<f64>, q: &Matrix2<f64>) -> f64 {
    let l = companion(k_p, k_d);
    (l.transpose() * p + p * l + q).norm()
}

/// Gaussian activations, each in `(0, 1]`.
pub fn rbf_activation(x: &Vector2<f64>, slice: &RbfSlice) -> DVector<f64> {
    DVector::from_iterator(
        slice.len(),
        slice.centers.iter().zip(&slice.widths).map(|(c, &b)| exp(-(x - c).norm_squared() / (2.0 * b * b))),
    )
}

/// `W̄ᵀħ`.
pub fn phi_estimate(w: &DVector<f64>, h: &DVector<f64>) -> Result<f64> {
    if w.len() != h.len() {
        return Err(Error::LengthMismatch { expected: w.len(), found: h.len() });
    }
    Ok(w.dot(h))
}

fn bounded_rate(est: f64, s: f64, drive: f64, eta: f64, max: f64) -> f64 {
    if drive > 0.0 || est < max {
        -est * est * drive / eta
    } else {
        s * (-est * est / eta)
    }
}

/// Mass-estimate rate for one axis, with `σ = E_xjᵀ P_j B · U_x[j]`.
pub fn mass_rate(m_bar: f64, s: f64, sigma: f64, eta: f64, m_max: f64) -> f64 {
    bounded_rate(m_bar, s, sigma, eta, m_max)
}

/// Inertia-estimate rate for one axis, with `τ = (e_Ω[j] + c_R e_R[j]) · U_R[j]`.
pub fn inertia_rate(j_bar: f64, s: f64, tau: f64, eta: f64, j_max: f64) -> f64 {
    bounded_rate(j_bar, s, tau, eta, j_max)
}

/// `γ (E_xjᵀ P_j B) ħ`.
pub fn weight_rates_translational(e_xj: &Vector2<f64>, p: &Matrix2<f64>, h: &DVector<f64>, gamma: f64) -> DVector<f64> {
    let proj = e_xj[0] * p[(0, 1)] + e_xj[1] * p[(1, 1)];
    h * (gamma * proj)
}

/// `γ (e_Ω[j] + c_R e_R[j]) ħ`.
pub fn weight_rates_rotational(e_r: f64, e_omega: f64, h: &DVector<f64>, gamma: f64, c_r: f64) -> DVector<f64> {
    h * (gamma * (e_omega + c_r * e_r))
}

/// Radial projection onto the ball of radius `r`.
pub fn project_weights(w: &DVector<f64>, r: f64) -> DVector<f64> {
    let n = sqrt(w.norm_squared());
    if n <= r {
        w.clone()
    } else {
        w * (r / n)
    }
}

/// Disturbance features `φ̄` for the current errors.
pub fn sanm_output(state: &SanmState, e: &PayloadErrors, cfg: &SanmConfig) -> SanmOutput {
    let mut phi_x = Vec3::zeros();
    let mut phi_r = Vec3::zeros();
    for j in 0..3 {
        phi_x[j] = state.w_x[j].dot(&rbf_activation(&e.translational_slice(j), &cfg.x_slices[j]));
        phi_r[j] = state.w_r[j].dot(&rbf_activation(&e.rotational_slice(j), &cfg.r_slices[j]));
    }
    SanmOutput { m_bar: state.m_bar, j_bar: state.j_bar, phi_x, phi_r }
}

/// Rates of every adaptive quantity given the errors and the per-axis laws
/// `U_x`, `U_R` they produced.
pub fn sanm_rates(
    state: &SanmState,
    e: &PayloadErrors,
    u_x: &Vec3,
    u_r: &Vec3,
    p: &[Matrix2<f64>; 3],
    c_r: f64,
    cfg: &SanmConfig,
) -> SanmRates {
    let mut m_bar = Vec3::zeros();
    let mut j_bar = Vec3::zeros();
    let w_x = core::array::from_fn(|j| {
        let ex = e.translational_slice(j);
        let h = rbf_activation(&ex, &cfg.x_slices[j]);
        let sigma = error_projection(e, &p[j], j) * u_x[j];
        m_bar[j] = integrated_rate(state.m_bar[j], cfg.s_m[j], sigma, cfg.eta_m[j], cfg.m_max);
        weight_rates_translational(&ex, &p[j], &h, cfg.gamma_x[j])
    });
    let w_r = core::array::from_fn(|j| {
        let h = rbf_activation(&e.rotational_slice(j), &cfg.r_slices[j]);
        let tau = (e.e_omega[j] + c_r * e.e_r[j]) * u_r[j];
        j_bar[j] = integrated_rate(state.j_bar[j], cfg.s_j[j], tau, cfg.eta_j[j], cfg.j_max[j]);
        weight_rates_rotational(e.e_r[j], e.e_omega[j], &h, cfg.gamma_r[j], c_r)
    });
    SanmRates { m_bar, j_bar, w_x, w_r }
}
