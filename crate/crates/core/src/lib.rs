//! Coupled payload–cable–quadrotor dynamics and a layered geometric controller
//! with sliced adaptive-neuro compensation for centralized cable-suspended
//! payload transport.
//!
//! The crate is `no_std` and needs only `alloc`. Everything here is a pure
//! function of its inputs or a plain value type; file formats, plotting and the
//! command line live in the companion `multilift` crate.
//!
//! Module map, following the control flow of one loop iteration:
//!
//! - [`so3`]: skew maps, attitude errors, configuration-error functions.
//! - [`dynamics`]: right-hand side of the coupled plant.
//! - [`payload_control`]: wrench command `{F_d, M_d}` and integral estimators.
//! - [`sanm`]: per-axis adaptive laws, RBF slices and the 2×2 Lyapunov solve.
//! - [`allocation`]: minimum-norm tension planning and cable control.
//! - [`quad_control`]: per-quadrotor attitude command and thrust/moment.
//! - [`integrator`]: Bogacki–Shampine stepping of the augmented state.
//! - [`scenario`]: experiment groups, references, disturbances and metrics.
#![no_std]

extern crate alloc;

mod error;
pub mod math;

pub mod allocation;
pub mod dynamics;
pub mod integrator;
pub mod payload_control;
pub mod quad_control;
pub mod sanm;
pub mod scenario;
pub mod so3;

pub use error::{Error, Result};
pub use math::{Mat3, Vec3};
