//! File formats, plotting and batch runs on top of `multilift-core`.
//!
//! - [`config`]: TOML scenario files.
//! - [`csvlog`]: per-step CSV logs.
//! - [`report`]: JSON run summaries.
//! - [`plot`]: SVG figures.
//! - [`runner`]: run one scenario or a batch and write everything to a directory.

pub mod config;
pub mod csvlog;
pub mod plot;
pub mod report;
pub mod runner;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("run diverged at t = {t}")]
    Diverged { t: f64 },
    #[error("simulation failed: {0}")]
    Core(multilift_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed log: {0}")]
    Log(String),
    #[error("plot error: {0}")]
    Plot(String),
    #[error("worker thread panicked")]
    Panicked,
}

impl From<multilift_core::Error> for SimError {
    fn from(e: multilift_core::Error) -> Self {
        use multilift_core::Error as E;
        match e {
            E::Diverged { t } => SimError::Diverged { t },
            E::InvalidConfig(m) => SimError::Config(m),
            E::NotHurwitz { .. } | E::NotPositiveDefinite | E::SingularInertia => SimError::Config(e.to_string()),
            e => SimError::Core(e),
        }
    }
}

impl SimError {
    /// Process exit code for the command line.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config(_) => 2,
            SimError::Diverged { .. } => 3,
            _ => 1,
        }
    }
}
