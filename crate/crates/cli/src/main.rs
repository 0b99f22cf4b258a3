//! `bjj`: reproduce shortcut, optimal-control and dissipation data as CSV/JSON.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{parse_fixed, parse_grid, parse_list, DurationSpec, OneOrMany, RunConfig};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub const CONFIG: u8 = 2;
    pub const NUMERICAL: u8 = 3;

    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: Self::CONFIG,
            message: message.into(),
        }
    }
}

impl From<bjj_core::Error> for CliError {
    fn from(e: bjj_core::Error) -> Self {
        use bjj_core::Error as E;
        let code = match e {
            E::InvalidParameter { .. }
            | E::WeakPumpingCap { .. }
            | E::InvalidSchedule(_)
            | E::ControlOutOfBounds { .. } => Self::CONFIG,
            E::SingularSystem { .. }
            | E::NonFinite(_)
            | E::NoBracket { .. }
            | E::Infeasible { .. } => Self::NUMERICAL,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "bjj",
    version,
    about = "Entanglement generation in a weakly pumped bosonic Josephson junction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the phase-matching equation for a shortcut's duration.
    Duration(Flags),
    /// Propagate the system under a shortcut's controls.
    Shortcut(Flags),
    /// Propagate under a supplied schedule or constant controls.
    Simulate(Flags),
    /// Maximize the final normalized concurrence at fixed duration.
    Optimize(Flags),
    /// Find the shortest duration that reaches the concurrence maximum.
    Mintime(Flags),
    /// Optimal concurrence versus duration for several loss rates.
    Sweep(Flags),
    /// Entanglement metrics of a supplied state.
    Entangle(Flags),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Original,
    Fast,
}

#[derive(Args, Default)]
struct Flags {
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    profile: Option<ProfileArg>,
    /// Fast-profile knots `s0,s1,s2`.
    #[arg(long)]
    knots: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Loss rate, or a comma-separated list for `sweep`.
    #[arg(long)]
    kappa: Option<String>,
    #[arg(long)]
    omega: Option<f64>,
    /// Duration, or `start:stop:step` for `sweep`.
    #[arg(long = "T", allow_hyphen_values = true)]
    duration: Option<String>,
    #[arg(long)]
    segments: Option<usize>,
    /// Number of random optimizer starts.
    #[arg(long)]
    seeds: Option<usize>,
    /// Base RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Integrator steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Control samples per shortcut schedule.
    #[arg(long)]
    samples: Option<usize>,
    /// Keep every `stride`-th integrator step in trajectory output.
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    grid_min: Option<f64>,
    #[arg(long)]
    grid_max: Option<f64>,
    #[arg(long)]
    grid_step: Option<f64>,
    /// Control bounds `U_max,J_max`.
    #[arg(long)]
    bounds: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Upper end of the minimum-time search.
    #[arg(long)]
    t_max: Option<f64>,
    /// Constant nonlinearity for `simulate`.
    #[arg(long, allow_hyphen_values = true)]
    u: Option<f64>,
    /// Constant coupling for `simulate`.
    #[arg(long, allow_hyphen_values = true)]
    j: Option<f64>,
    /// CSV schedule `t,U,J` for `simulate`.
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// Twelve numbers: re,im of c00,c10,c01,c11,c20,c02.
    #[arg(long, allow_hyphen_values = true)]
    amplitudes: Option<String>,
    /// Skip the lossy re-optimization cross-check in `sweep`.
    #[arg(long)]
    no_reoptimize: bool,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the JSON summary here.
    #[arg(long)]
    json: Option<PathBuf>,
}

impl Flags {
    fn into_config(self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let flags = RunConfig {
            profile: self.profile.map(|p| match p {
                ProfileArg::Original => "original".to_string(),
                ProfileArg::Fast => "fast".to_string(),
            }),
            knots: self
                .knots
                .as_deref()
                .map(|s| parse_fixed::<3>(s, "knots"))
                .transpose()?,
            alpha: self.alpha,
            kappa: self
                .kappa
                .as_deref()
                .map(|s| parse_list(s, "kappa").map(OneOrMany::Many))
                .transpose()?,
            omega: self.omega,
            duration: match self.duration {
                Some(s) => {
                    parse_grid(&s)?;
                    Some(DurationSpec::Text(s))
                }
                None => None,
            },
            segments: self.segments,
            seeds: self.seeds,
            seed: self.seed,
            steps: self.steps,
            samples: self.samples,
            stride: self.stride,
            grid_min: self.grid_min,
            grid_max: self.grid_max,
            grid_step: self.grid_step,
            bounds: self
                .bounds
                .as_deref()
                .map(|s| parse_fixed::<2>(s, "bounds"))
                .transpose()?,
            epsilon: self.epsilon,
            t_max: self.t_max,
            u: self.u,
            j: self.j,
            schedule: self.schedule,
            amplitudes: self
                .amplitudes
                .as_deref()
                .map(|s| parse_list(s, "amplitudes"))
                .transpose()?,
            reoptimize: self.no_reoptimize.then_some(false),
            out: self.out,
            json: self.json,
        };
        Ok(flags.over(file))
    }
}

type Handler = fn(&commands::Ctx) -> Result<commands::Output, CliError>;

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, flags, f): (&str, Flags, Handler) = match cli.command {
        Command::Duration(a) => ("duration", a, commands::duration),
        Command::Shortcut(a) => ("shortcut", a, commands::shortcut),
        Command::Simulate(a) => ("simulate", a, commands::simulate),
        Command::Optimize(a) => ("optimize", a, commands::optimize),
        Command::Mintime(a) => ("mintime", a, commands::mintime),
        Command::Sweep(a) => ("sweep", a, commands::sweep),
        Command::Entangle(a) => ("entangle", a, commands::entangle),
    };
    let ctx = commands::Ctx::new(name, flags.into_config()?);
    let out = f(&ctx)?;
    ctx.emit(out)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
