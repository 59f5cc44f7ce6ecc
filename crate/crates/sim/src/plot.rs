//! SVG figures drawn from logged records.

use std::path::Path;

use multilift_core::scenario::LogRecord;
use plotters::coord::Shift;
use plotters::prelude::*;

use crate::SimError;

/// Longer series are thinned to about this many points.
const MAX_POINTS: usize = 2000;

const PALETTE: [RGBColor; 4] = [RGBColor(0xd6, 0x27, 0x28), RGBColor(0x1f, 0x77, 0xb4), RGBColor(0x2c, 0xa0, 0x2c), BLACK];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points }
    }

    fn from_log(label: &str, log: &[LogRecord], f: impl Fn(&LogRecord) -> f64) -> Self {
        let stride = log.len().div_ceil(MAX_POINTS).max(1);
        let mut points: Vec<_> = log.iter().step_by(stride).map(|r| (r.t, f(r))).collect();
        if let Some(last) = log.last() {
            if points.last().map(|p| p.0) != Some(last.t) {
                points.push((last.t, f(last)));
            }
        }
        Self::new(label, points)
    }
}

fn plot_err<E: std::fmt::Debug>(e: E) -> SimError {
    SimError::Plot(format!("{e:?}"))
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1e-9) };
    (lo - pad, hi + pad)
}

fn panel<DB: DrawingBackend>(
    area: &DrawingArea<DB, Shift>,
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
) -> Result<(), SimError> {
    let (x0, x1) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let mut chart = ChartBuilder::on(area)
        .caption(title, ("sans-serif", 18))
        .margin(10)
        .x_label_area_size(35)
        .y_label_area_size(60)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(plot_err)?;
    chart.configure_mesh().x_desc(x_label).y_desc(y_label).draw().map_err(plot_err)?;
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(s.points.iter().copied().filter(|p| p.1.is_finite()), color.stroke_width(1)))
            .map_err(plot_err)?
            .label(s.label.as_str())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    Ok(())
}

fn axes3(log: &[LogRecord], name: &str, f: impl Fn(&LogRecord) -> [f64; 3]) -> Vec<Series> {
    ["x", "y", "z"]
        .iter()
        .enumerate()
        .map(|(k, a)| Series::from_log(&format!("{name} {a}"), log, |r| f(r)[k]))
        .collect()
}

/// Position error norm and attitude error over time.
pub fn error_plot(path: &Path, log: &[LogRecord]) -> Result<(), SimError> {
    let root = SVGBackend::new(path, (900, 700)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let areas = root.split_evenly((2, 1));
    panel(&areas[0], "position error", "t (s)", "|e_x| (m)", &[Series::from_log("|e_x|", log, |r| r.e_x.norm())])?;
    panel(&areas[1], "attitude error", "t (s)", "Psi_R", &[Series::from_log("Psi_R", log, |r| r.psi_r)])?;
    root.present().map_err(plot_err)
}

/// Mass and inertia estimates and the two feature outputs.
pub fn sanm_plot(path: &Path, log: &[LogRecord]) -> Result<(), SimError> {
    let root = SVGBackend::new(path, (1200, 800)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let areas = root.split_evenly((2, 2));
    panel(&areas[0], "mass estimate", "t (s)", "kg", &axes3(log, "m", |r| r.m_bar.into()))?;
    panel(&areas[1], "inertia estimate", "t (s)", "kg m^2", &axes3(log, "J", |r| r.j_bar.into()))?;
    panel(&areas[2], "force feature", "t (s)", "N", &axes3(log, "phi_x", |r| r.phi_x.into()))?;
    panel(&areas[3], "moment feature", "t (s)", "N m", &axes3(log, "phi_R", |r| r.phi_r.into()))?;
    root.present().map_err(plot_err)
}

/// Top and side projections of the payload path against the reference.
pub fn trajectory_plot(path: &Path, log: &[LogRecord]) -> Result<(), SimError> {
    let root = SVGBackend::new(path, (1200, 550)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let areas = root.split_evenly((1, 2));
    let stride = log.len().div_ceil(MAX_POINTS).max(1);
    let proj = |label: &str, f: &dyn Fn(&LogRecord) -> (f64, f64)| {
        Series::new(label, log.iter().step_by(stride).map(f).collect())
    };
    panel(
        &areas[0],
        "top view",
        "x (m)",
        "y (m)",
        &[proj("payload", &|r| (r.x0.x, r.x0.y)), proj("reference", &|r| (r.x_d.x, r.x_d.y))],
    )?;
    panel(
        &areas[1],
        "side view",
        "x (m)",
        "z (m)",
        &[proj("payload", &|r| (r.x0.x, r.x0.z)), proj("reference", &|r| (r.x_d.x, r.x_d.z))],
    )?;
    root.present().map_err(plot_err)
}

/// One quantity from two runs on shared axes.
pub fn compare_plot(path: &Path, title: &str, y_label: &str, a: &Series, b: &Series) -> Result<(), SimError> {
    let root = SVGBackend::new(path, (900, 450)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let both = [Series::new(a.label.clone(), a.points.clone()), Series::new(b.label.clone(), b.points.clone())];
    panel(&root, title, "t (s)", y_label, &both)?;
    root.present().map_err(plot_err)
}

/// `‖e_x‖` and `Ψ_R` series of a log, for [`compare_plot`].
pub fn error_series(label: &str, log: &[LogRecord]) -> (Series, Series) {
    (Series::from_log(label, log, |r| r.e_x.norm()), Series::from_log(label, log, |r| r.psi_r))
}
