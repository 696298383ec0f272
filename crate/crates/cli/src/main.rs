mod commands;
mod config;
mod error;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kahlerflow::{exec, Execution};

use crate::config::OutputCfg;
use crate::error::CliError;
use crate::output::Outcome;

/// Magnetic flows on constant-curvature Kähler manifolds.
///
/// Logging goes to stderr and is controlled by KAHLERFLOW_LOG
/// (error, warn, info or debug).
#[derive(Debug, Parser)]
#[command(name = "kahlerflow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form geodesic from the origin.
    Geodesic(RunArgs),
    /// RK4 integration of the magnetic flow.
    Flow(RunArgs),
    /// Exact trajectory and regime classification.
    ClosedForm(RunArgs),
    /// Regime sweep along k or the radius.
    Sweep(RunArgs),
    /// Spectral collapse report and norm series.
    Collapse(RunArgs),
    /// Built-in invariant checks (config optional).
    Validate(RunArgs),
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; overrides `output.path` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for batch work (1 runs sequentially).
    #[arg(long)]
    jobs: Option<usize>,
    /// Seed for randomised checks.
    #[arg(long)]
    seed: Option<u64>,
}

fn read_config(path: Option<&Path>) -> Result<String, CliError> {
    let path = path.ok_or_else(|| CliError::Config("--config is required".into()))?;
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

fn run(command: &Command) -> Result<(Outcome, OutputCfg, Option<PathBuf>), CliError> {
    let (name, args) = match command {
        Command::Geodesic(a) => ("geodesic", a),
        Command::Flow(a) => ("flow", a),
        Command::ClosedForm(a) => ("closed-form", a),
        Command::Sweep(a) => ("sweep", a),
        Command::Collapse(a) => ("collapse", a),
        Command::Validate(a) => ("validate", a),
    };
    let execution = match args.jobs {
        Some(0) => return Err(CliError::Config("--jobs must be at least 1".into())),
        Some(1) => Execution::Sequential,
        _ => Execution::default(),
    };
    log::debug!("{name}: config {:?}, jobs {:?}", args.config, args.jobs);

    let (mut outcome, out_cfg) = exec::with_jobs(args.jobs, || -> Result<_, CliError> {
        Ok(match command {
            Command::Geodesic(_) => {
                let cfg: config::GeodesicCfg = config::parse(&read_config(args.config.as_deref())?, name)?;
                (commands::geodesic(&cfg)?, cfg.output)
            }
            Command::Flow(_) => {
                let cfg: config::FlowCfg = config::parse(&read_config(args.config.as_deref())?, name)?;
                (commands::flow(&cfg)?, cfg.output)
            }
            Command::ClosedForm(_) => {
                let cfg: config::ClosedFormCfg = config::parse(&read_config(args.config.as_deref())?, name)?;
                (commands::closed_form(&cfg, execution)?, cfg.output)
            }
            Command::Sweep(_) => {
                let cfg: config::SweepCfg = config::parse(&read_config(args.config.as_deref())?, name)?;
                (commands::sweep(&cfg, execution)?, cfg.output)
            }
            Command::Collapse(_) => {
                let cfg: config::CollapseCfg = config::parse(&read_config(args.config.as_deref())?, name)?;
                (commands::collapse(&cfg, execution)?, cfg.output)
            }
            Command::Validate(_) => {
                let cfg: config::ValidateCfg = match &args.config {
                    Some(p) => config::parse(&read_config(Some(p))?, name)?,
                    None => config::ValidateCfg::default(),
                };
                let seed = args.seed.or(cfg.seed).unwrap_or(0);
                (commands::validate(seed)?, cfg.output)
            }
        })
    })?;
    if let Some(seed) = args.seed {
        outcome.meta.entry("seed").or_insert(seed.into());
    }
    let path = args.out.clone().or_else(|| out_cfg.path.as_ref().map(PathBuf::from));
    Ok((outcome, out_cfg, path))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("KAHLERFLOW_LOG", "warn")).init();

    let result = run(&cli.command).and_then(|(outcome, cfg, path)| {
        output::emit(&outcome, &cfg, path.as_deref())?;
        Ok(outcome.exit)
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            log::error!("{e}");
            eprintln!("kahlerflow: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
