use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use multilift::config::{parse_controller, parse_group, FileConfig};
use multilift::report::RunReport;
use multilift::runner::{compare_to_dir, matrix_to_dir, run_to_dir, OutputOptions};
use multilift::SimError;
use multilift_core::scenario::{Group, ScenarioConfig};

/// Cooperative cable-suspended payload transport simulator.
#[derive(Parser)]
#[command(name = "multilift", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Run {
        #[command(flatten)]
        common: Common,
        /// baseline or sanm.
        #[arg(long)]
        controller: Option<String>,
    },
    /// Run one scenario with both controllers and compare them.
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Run every group with both controllers in parallel.
    Matrix {
        /// Integration step (s).
        #[arg(long)]
        dt: Option<f64>,
        /// Simulated time (s).
        #[arg(long)]
        duration: Option<f64>,
        /// Keep every n-th control step in the CSV logs.
        #[arg(long)]
        log_every: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        no_plots: bool,
    },
    /// Check a scenario file and print the resolved settings.
    ValidateConfig { file: PathBuf },
}

#[derive(Args)]
struct Common {
    /// Preset group A..F; overrides the file.
    #[arg(long)]
    group: Option<String>,
    /// Integration step (s); overrides the file.
    #[arg(long)]
    dt: Option<f64>,
    /// Simulated time (s); overrides the file.
    #[arg(long)]
    duration: Option<f64>,
    /// TOML scenario file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Keep every n-th control step in the CSV log; overrides the file.
    #[arg(long)]
    log_every: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    no_plots: bool,
}

impl Common {
    fn scenario(&self, controller: Option<&str>) -> Result<ScenarioConfig, SimError> {
        let mut file = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        if let Some(g) = &self.group {
            parse_group(g)?;
            file.group = Some(g.clone());
        }
        if let Some(c) = controller {
            parse_controller(c)?;
            file.controller = Some(c.to_owned());
        }
        file.integrator.dt = self.dt.or(file.integrator.dt);
        file.integrator.duration = self.duration.or(file.integrator.duration);
        file.log_every = self.log_every.or(file.log_every);
        file.to_scenario()
    }

    fn options(&self) -> OutputOptions {
        OutputOptions { plots: !self.no_plots }
    }
}

fn summary(r: &RunReport) -> String {
    let m = &r.metrics;
    format!(
        "{}/{}: rms |e_x| {:.4e} m, rms Psi_R {:.4e}, max m_bar {:.4}, {} control steps in {:.2} s",
        r.group.as_deref().unwrap_or("custom"),
        r.controller,
        m.rms_position_error,
        m.rms_attitude_error,
        m.max_mass_estimate,
        r.control_evaluations,
        r.wall_time_seconds
    )
}

fn run(cli: Cli) -> Result<(), SimError> {
    match cli.command {
        Command::Run { common, controller } => {
            let cfg = common.scenario(controller.as_deref())?;
            let res = run_to_dir(&cfg, &common.out, common.options())?;
            println!("{}", summary(&res.report));
            for f in &res.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Compare { common } => {
            let cfg = common.scenario(None)?;
            let rep = compare_to_dir(&cfg, &common.out, common.options())?;
            println!("{}", summary(&rep.baseline));
            println!("{}", summary(&rep.sanm));
            println!(
                "improvement: position {:.1}%, attitude {:.1}%",
                100.0 * rep.position_improvement,
                100.0 * rep.attitude_improvement
            );
        }
        Command::Matrix { dt, duration, log_every, out, no_plots } => {
            if dt.is_some_and(|h| !(h > 0.0)) || duration.is_some_and(|d| !(d > 0.0)) {
                return Err(SimError::Config("dt and duration must be positive".into()));
            }
            let adjust = |c: &mut ScenarioConfig| {
                c.integrator.h = dt.unwrap_or(c.integrator.h);
                c.integrator.duration = duration.unwrap_or(c.integrator.duration);
                c.log_every = log_every.unwrap_or(c.log_every);
            };
            let mut first_err = None;
            for r in matrix_to_dir(&Group::ALL, adjust, &out, OutputOptions { plots: !no_plots }) {
                match r {
                    Ok(rep) => println!("{}", summary(&rep)),
                    Err(e) => {
                        eprintln!("{e}");
                        first_err.get_or_insert(e);
                    }
                }
            }
            if let Some(e) = first_err {
                return Err(e);
            }
        }
        Command::ValidateConfig { file } => {
            let cfg = load(&file)?;
            println!("{cfg:#?}");
            println!("ok");
        }
    }
    Ok(())
}

fn load(path: &Path) -> Result<ScenarioConfig, SimError> {
    FileConfig::load(path)?.to_scenario()
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
