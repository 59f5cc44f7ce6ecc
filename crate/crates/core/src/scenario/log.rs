//! Per-step time-series records with a fixed column layout.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{Mat3, Vec3};

/// Bumped whenever the column layout changes.
pub const LOG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CableLog {
    pub q: Vec3,
    pub q_d: Vec3,
    pub e_q: Vec3,
    pub e_w: Vec3,
    pub psi_q: f64,
    pub mu_d: Vec3,
    /// Commanded quadrotor force.
    pub u: Vec3,
    pub thrust: f64,
    pub moment: Vec3,
    pub position: Vec3,
    pub est_force: Vec3,
    pub dist_force: Vec3,
    pub dist_moment: Vec3,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LogRecord {
    pub t: f64,
    pub x0: Vec3,
    pub v0: Vec3,
    pub r0: Mat3,
    pub omega0: Vec3,
    pub x_d: Vec3,
    pub e_x: Vec3,
    pub e_v: Vec3,
    pub e_r: Vec3,
    pub e_omega: Vec3,
    pub psi_r: f64,
    pub m_bar: Vec3,
    pub j_bar: Vec3,
    pub phi_x: Vec3,
    pub phi_r: Vec3,
    pub est_force: Vec3,
    pub est_moment: Vec3,
    pub force_d: Vec3,
    pub moment_d: Vec3,
    pub dist_force: Vec3,
    pub dist_moment: Vec3,
    pub cables: Vec<CableLog>,
}

const XYZ: [&str; 3] = ["x", "y", "z"];

/// Column visitor: `(group, cable index, component, value)`.
trait Walk {
    fn f(&mut self, name: &str, cable: Option<usize>, comp: &str, v: &mut f64);

    fn v3(&mut self, name: &str, cable: Option<usize>, v: &mut Vec3) {
        for (k, c) in XYZ.iter().enumerate() {
            self.f(name, cable, c, &mut v[k]);
        }
    }

    fn m3(&mut self, name: &str, m: &mut Mat3) {
        const RC: [&str; 9] = ["11", "12", "13", "21", "22", "23", "31", "32", "33"];
        for (k, c) in RC.iter().enumerate() {
            self.f(name, None, c, &mut m[(k / 3, k % 3)]);
        }
    }
}

impl LogRecord {
    fn walk<W: Walk>(&mut self, w: &mut W) {
        w.f("t", None, "", &mut self.t);
        w.v3("x0", None, &mut self.x0);
        w.v3("v0", None, &mut self.v0);
        w.m3("R0", &mut self.r0);
        w.v3("Omega0", None, &mut self.omega0);
        w.v3("xd", None, &mut self.x_d);
        w.v3("ex", None, &mut self.e_x);
        w.v3("ev", None, &mut self.e_v);
        w.v3("eR", None, &mut self.e_r);
        w.v3("eOmega", None, &mut self.e_omega);
        w.f("PsiR", None, "", &mut self.psi_r);
        w.v3("mbar", None, &mut self.m_bar);
        w.v3("Jbar", None, &mut self.j_bar);
        w.v3("phix", None, &mut self.phi_x);
        w.v3("phiR", None, &mut self.phi_r);
        w.v3("Dx0hat", None, &mut self.est_force);
        w.v3("DR0hat", None, &mut self.est_moment);
        w.v3("Fd", None, &mut self.force_d);
        w.v3("Md", None, &mut self.moment_d);
        w.v3("Dx0", None, &mut self.dist_force);
        w.v3("DR0", None, &mut self.dist_moment);
        for (i, c) in self.cables.iter_mut().enumerate() {
            let i = Some(i + 1);
            w.v3("q", i, &mut c.q);
            w.v3("qd", i, &mut c.q_d);
            w.v3("eq", i, &mut c.e_q);
            w.v3("ew", i, &mut c.e_w);
            w.f("Psiq", i, "", &mut c.psi_q);
            w.v3("mud", i, &mut c.mu_d);
            w.v3("u", i, &mut c.u);
            w.f("f", i, "", &mut c.thrust);
            w.v3("M", i, &mut c.moment);
            w.v3("xq", i, &mut c.position);
            w.v3("Dxhat", i, &mut c.est_force);
            w.v3("Dx", i, &mut c.dist_force);
            w.v3("DR", i, &mut c.dist_moment);
        }
    }

    /// Column names for `n` cables.
    pub fn header(n: usize) -> Vec<String> {
        struct Names(Vec<String>);
        impl Walk for Names {
            fn f(&mut self, name: &str, cable: Option<usize>, comp: &str, _: &mut f64) {
                let mut s = String::from(name);
                if let Some(i) = cable {
                    s.push_str(&format!("{i}"));
                }
                if !comp.is_empty() {
                    s.push('_');
                    s.push_str(comp);
                }
                self.0.push(s);
            }
        }
        let mut rec = LogRecord { cables: alloc::vec![CableLog::default(); n], ..Default::default() };
        let mut names = Names(Vec::new());
        rec.walk(&mut names);
        names.0
    }

    pub fn values(&self) -> Vec<f64> {
        struct Out(Vec<f64>);
        impl Walk for Out {
            fn f(&mut self, _: &str, _: Option<usize>, _: &str, v: &mut f64) {
                self.0.push(*v);
            }
        }
        let mut out = Out(Vec::with_capacity(70 + 35 * self.cables.len()));
        self.clone().walk(&mut out);
        out.0
    }

    pub fn from_values(n: usize, values: &[f64]) -> Result<Self> {
        struct In<'a>(&'a [f64], usize);
        impl Walk for In<'_> {
            fn f(&mut self, _: &str, _: Option<usize>, _: &str, v: &mut f64) {
                *v = self.0[self.1];
                self.1 += 1;
            }
        }
        let expected = Self::header(n).len();
        if values.len() != expected {
            return Err(Error::LengthMismatch { expected, found: values.len() });
        }
        let mut rec = LogRecord { cables: alloc::vec![CableLog::default(); n], ..Default::default() };
        rec.walk(&mut In(values, 0));
        Ok(rec)
    }

    /// Number of cables implied by a column count.
    pub fn cables_for_columns(columns: usize) -> Option<usize> {
        let base = Self::header(0).len();
        let per = Self::header(1).len() - base;
        (columns >= base && (columns - base).is_multiple_of(per)).then(|| (columns - base) / per)
    }
}
