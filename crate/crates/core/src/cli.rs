//! Command-line interface: `simulate`, `moments`, `fit` and `classify`.
//!
//! Exit codes: 0 on success, 1 for usage or validation errors, 2 when a run
//! fails (I/O, fit failure). Errors are printed on one line starting with
//! `error:`.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::classify::classify_trajectory;
use crate::error::{Error, Result};
use crate::fitting::{fit_model, DataMeta, FitConfig, ModelKind};
use crate::io::{read_trajectory, write_moments, write_report, write_trajectory};
use crate::kernels::{simulate_intermittent, simulate_levy, IsParams, LwParams, PhaseLabel};
use crate::moments::{empirical_moments, LagGrid, DEFAULT_LAG_COUNT};

/// Parsed command line.
#[derive(Debug, Parser)]
#[command(name = "walkfit", version, about = "Simulate, fit and classify intermittent-search and Lévy-walk trajectories")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a trajectory and write it as `t,x,y` CSV.
    Simulate(SimulateArgs),
    /// Compute empirical m2/m4 of a trajectory and write `t_s,m2,m4,n_pairs` CSV.
    Moments(MomentsArgs),
    /// Fit one model family to a trajectory's moments and write a JSON report.
    Fit(FitArgs),
    /// Fit both families and classify by the sign of the adjusted-R² difference.
    Classify(ClassifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    /// Intermittent search (parameters --D --vb --lbd --ldb).
    Is,
    /// Lévy walk (parameters --tau0 --gamma --v).
    Levy,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Is => ModelKind::Intermittent,
            ModelArg::Levy => ModelKind::Levy,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PhaseArg {
    Ballistic,
    Diffusive,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// Diffusion coefficient (IS).
    #[arg(long = "D")]
    pub d: Option<f64>,
    /// Ballistic speed (IS).
    #[arg(long)]
    pub vb: Option<f64>,
    /// Ballistic-to-diffusive switching rate (IS).
    #[arg(long)]
    pub lbd: Option<f64>,
    /// Diffusive-to-ballistic switching rate (IS).
    #[arg(long)]
    pub ldb: Option<f64>,
    /// Initial phase (IS); drawn from the stationary law when omitted.
    #[arg(long, value_enum)]
    pub initial_phase: Option<PhaseArg>,
    /// Flight-time scale (LW).
    #[arg(long)]
    pub tau0: Option<f64>,
    /// Flight-time tail exponent (LW).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Walker speed (LW).
    #[arg(long)]
    pub v: Option<f64>,
    /// Number of time steps.
    #[arg(long)]
    pub steps: usize,
    /// Time step.
    #[arg(long, default_value_t = 1.0)]
    pub dt: f64,
    /// Random seed.
    #[arg(long)]
    pub seed: u64,
    /// Output trajectory CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    /// Input trajectory CSV (`t,x,y`).
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Number of log-spaced lags before integer snapping.
    #[arg(long, default_value_t = DEFAULT_LAG_COUNT)]
    pub lags: usize,
    /// Output moments CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitOptions {
    /// Input trajectory CSV (`t,x,y`).
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Random seed.
    #[arg(long)]
    pub seed: u64,
    /// Number of log-spaced lags before integer snapping.
    #[arg(long, default_value_t = DEFAULT_LAG_COUNT)]
    pub lags: usize,
    /// Simplex starts per model.
    #[arg(long, default_value_t = 16)]
    pub starts: usize,
    /// Ensemble size for the model moments.
    #[arg(long, default_value_t = 64)]
    pub ensemble: usize,
    /// Simplex iterations per start.
    #[arg(long, default_value_t = 400)]
    pub max_iters: usize,
    /// Output JSON report.
    #[arg(long)]
    pub out: PathBuf,
}

impl FitOptions {
    fn config(&self) -> FitConfig {
        FitConfig {
            n_starts: self.starts,
            max_iters: self.max_iters,
            ensemble_size: self.ensemble,
            ..FitConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[command(flatten)]
    pub options: FitOptions,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub options: FitOptions,
}

fn require(value: Option<f64>, flag: &str, model: &str) -> Result<f64> {
    value.ok_or_else(|| Error::validation(format!("--{flag} is required for --model {model}")))
}

fn reject(value: Option<f64>, flag: &str, model: &str) -> Result<()> {
    match value {
        Some(_) => Err(Error::validation(format!("--{flag} does not apply to --model {model}"))),
        None => Ok(()),
    }
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let traj = match args.model {
        ModelArg::Is => {
            for (v, f) in [(args.tau0, "tau0"), (args.gamma, "gamma"), (args.v, "v")] {
                reject(v, f, "is")?;
            }
            let params = IsParams::new(
                require(args.d, "D", "is")?,
                require(args.vb, "vb", "is")?,
                require(args.lbd, "lbd", "is")?,
                require(args.ldb, "ldb", "is")?,
            )?;
            let phase = args.initial_phase.map(|p| match p {
                PhaseArg::Ballistic => PhaseLabel::Ballistic,
                PhaseArg::Diffusive => PhaseLabel::Diffusive,
            });
            simulate_intermittent(&params, args.steps, args.dt, args.seed, phase)?
        }
        ModelArg::Levy => {
            for (v, f) in [(args.d, "D"), (args.vb, "vb"), (args.lbd, "lbd"), (args.ldb, "ldb")] {
                reject(v, f, "levy")?;
            }
            if args.initial_phase.is_some() {
                return Err(Error::validation("--initial-phase does not apply to --model levy"));
            }
            let params = LwParams::new(
                require(args.tau0, "tau0", "levy")?,
                require(args.gamma, "gamma", "levy")?,
                require(args.v, "v", "levy")?,
            )?;
            simulate_levy(&params, args.steps, args.dt, args.seed)?
        }
    };
    write_trajectory(&traj, &args.out)
}

/// Executes a parsed command.
pub fn run(config: &RunConfig) -> Result<()> {
    match &config.command {
        Command::Simulate(args) => simulate(args),
        Command::Moments(args) => {
            let traj = read_trajectory(&args.input)?;
            let grid = LagGrid::log_spaced(traj.dt(), traj.n_steps(), args.lags)?;
            write_moments(&empirical_moments(&traj, &grid)?, &args.out)
        }
        Command::Fit(args) => {
            let o = &args.options;
            let traj = read_trajectory(&o.input)?;
            let grid = LagGrid::log_spaced(traj.dt(), traj.n_steps(), o.lags)?;
            grid.check_fits_within(traj.n_steps())?;
            let data = empirical_moments(&traj, &grid)?;
            let meta = DataMeta {
                dt: traj.dt(),
                n_steps: traj.n_steps(),
            };
            let report = fit_model(args.model.into(), &data, meta, &o.config(), o.seed)?;
            write_report(&report, &o.out)
        }
        Command::Classify(args) => {
            let o = &args.options;
            let traj = read_trajectory(&o.input)?;
            let grid = LagGrid::log_spaced(traj.dt(), traj.n_steps(), o.lags)?;
            let report = classify_trajectory(&traj, &grid, &o.config(), o.seed)?;
            write_report(&report, &o.out)
        }
    }
}

fn one_line(message: &str) -> String {
    message.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Parses `argv` (including the program name), runs it and returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or("invalid usage");
            let first = first.strip_prefix("error: ").unwrap_or(first);
            eprintln!("error: {} (see --help)", one_line(first));
            return 1;
        }
    };
    match run(&config) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", one_line(&e.to_string()));
            if e.is_input_error() { 1 } else { 2 }
        }
    }
}
