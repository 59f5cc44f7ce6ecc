//! Run scenarios and write their artifacts.
//!
//! Every run writes `<stem>.csv`, `<stem>.json` and, when plots are on,
//! `<stem>_errors.svg`, `<stem>_sanm.svg` and `<stem>_trajectory.svg`, where
//! the stem is `<group>_<controller>`. A run that diverges still writes what
//! it logged before failing.

use std::path::{Path, PathBuf};
use std::time::Instant;

use multilift_core::scenario::{run_scenario_partial, ControllerKind, Group, RunOutput, ScenarioConfig};

use crate::csvlog::{write_log_file, SCHEMA_VERSION};
use crate::plot::{compare_plot, error_plot, error_series, sanm_plot, trajectory_plot};
use crate::report::{to_json, CompareReport, Geometry, MetricsReport, RunReport};
use crate::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputOptions {
    pub plots: bool,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self { plots: true }
    }
}

pub struct RunResult {
    pub report: RunReport,
    pub output: RunOutput,
    pub files: Vec<PathBuf>,
}

pub fn stem(cfg: &ScenarioConfig) -> String {
    format!("{}_{}", cfg.group.map_or("custom", |g| g.name()), cfg.controller.name())
}

/// Run without touching the file system.
pub fn simulate(cfg: &ScenarioConfig) -> Result<(RunReport, RunOutput, Option<SimError>), SimError> {
    let start = Instant::now();
    let (output, failure) = run_scenario_partial(cfg)?;
    let wall = start.elapsed().as_secs_f64();
    let failure = failure.map(SimError::from);
    let diverged_at = match failure {
        Some(SimError::Diverged { t }) => Some(t),
        _ => None,
    };
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        group: cfg.group.map(|g| g.name().to_owned()),
        controller: cfg.controller.name().to_owned(),
        dt: cfg.integrator.h,
        substeps: cfg.integrator.substeps,
        duration: cfg.integrator.duration,
        status: if failure.is_none() { "completed" } else { "diverged" }.to_owned(),
        diverged_at,
        geometry: Geometry::of(cfg),
        control_evaluations: output.control_evaluations,
        wall_time_seconds: wall,
        metrics: MetricsReport::from(&output.metrics),
    };
    Ok((report, output, failure))
}

/// Run one scenario and write its artifacts into `out`.
pub fn run_to_dir(cfg: &ScenarioConfig, out: &Path, opts: OutputOptions) -> Result<RunResult, SimError> {
    std::fs::create_dir_all(out)?;
    let (report, output, failure) = simulate(cfg)?;
    let stem = stem(cfg);
    let mut files = Vec::new();

    let csv = out.join(format!("{stem}.csv"));
    write_log_file(&csv, cfg.plant.n(), &output.log)?;
    files.push(csv);
    let json = out.join(format!("{stem}.json"));
    std::fs::write(&json, to_json(&report)?)?;
    files.push(json);

    if opts.plots && !output.log.is_empty() {
        let errors = out.join(format!("{stem}_errors.svg"));
        error_plot(&errors, &output.log)?;
        let sanm = out.join(format!("{stem}_sanm.svg"));
        sanm_plot(&sanm, &output.log)?;
        let traj = out.join(format!("{stem}_trajectory.svg"));
        trajectory_plot(&traj, &output.log)?;
        files.extend([errors, sanm, traj]);
    }

    match failure {
        Some(e) => Err(e),
        None => Ok(RunResult { report, output, files }),
    }
}

/// Run `cfg` with both controllers in parallel, write both runs plus
/// `compare.json`, `compare_position.svg` and `compare_attitude.svg`.
pub fn compare_to_dir(cfg: &ScenarioConfig, out: &Path, opts: OutputOptions) -> Result<CompareReport, SimError> {
    let with = |kind| ScenarioConfig { controller: kind, ..cfg.clone() };
    let (base, sanm) = (with(ControllerKind::Baseline), with(ControllerKind::Sanm));
    let (b, s) = std::thread::scope(|sc| {
        let hb = sc.spawn(|| run_to_dir(&base, out, opts));
        let hs = sc.spawn(|| run_to_dir(&sanm, out, opts));
        (join(hb), join(hs))
    });
    let (b, s) = (b?, s?);

    let report = CompareReport::new(b.report, s.report);
    std::fs::write(out.join("compare.json"), to_json(&report)?)?;
    if opts.plots {
        let (bx, br) = error_series("baseline", &b.output.log);
        let (sx, sr) = error_series("sanm", &s.output.log);
        compare_plot(&out.join("compare_position.svg"), "position error", "|e_x| (m)", &bx, &sx)?;
        compare_plot(&out.join("compare_attitude.svg"), "attitude error", "Psi_R", &br, &sr)?;
    }
    Ok(report)
}

/// Every group with both controllers, all runs in parallel. `adjust` is
/// applied to each preset before it runs. Results come back in
/// group-major order, baseline first.
pub fn matrix_to_dir(
    groups: &[Group],
    adjust: impl Fn(&mut ScenarioConfig) + Sync,
    out: &Path,
    opts: OutputOptions,
) -> Vec<Result<RunReport, SimError>> {
    let cfgs: Vec<ScenarioConfig> = groups
        .iter()
        .flat_map(|&g| [ControllerKind::Baseline, ControllerKind::Sanm].map(|k| ScenarioConfig::for_group(g, k)))
        .map(|mut c| {
            adjust(&mut c);
            c
        })
        .collect();
    std::thread::scope(|sc| {
        let handles: Vec<_> = cfgs.iter().map(|c| sc.spawn(move || run_to_dir(c, out, opts))).collect();
        handles.into_iter().map(|h| join(h).map(|r| r.report)).collect()
    })
}

fn join<T>(h: std::thread::ScopedJoinHandle<'_, Result<T, SimError>>) -> Result<T, SimError> {
    h.join().unwrap_or_else(|_| Err(SimError::Panicked))
}
