//! Command-line flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "etk",
    version,
    about = "Electron-transfer rates and thermodynamics in a Debye solvent"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep forward/backward rate resolutions k(s), k'(s) along one axis.
    Rates(RatesArgs),
    /// Sweep ΔG°, ΔS°, ΔH° along one axis or over a two-axis grid.
    Thermo(ThermoArgs),
    /// Run the verification criteria.
    Verify(VerifyArgs),
    /// Propagate the hierarchy in time and write donor/acceptor populations.
    Propagate(PropagateArgs),
}

/// Sweep axes, named as in the CSV `axis_name` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Axis {
    TauL,
    E0,
    Lambda,
    V,
    Temperature,
    S,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::TauL => "tau_l",
            Axis::E0 => "e0",
            Axis::Lambda => "lambda",
            Axis::V => "v",
            Axis::Temperature => "temperature",
            Axis::S => "s",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        <Self as ValueEnum>::from_str(name, false).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SiteArg {
    Donor,
    Acceptor,
}

/// Fixed system parameters. Unset values come from `--config`, then from the
/// reference system E° = −3, λ = 3, V = 1 kJ/mol, T = 298 K, τ_L = 1 ps.
#[derive(Debug, Clone, Default, Args)]
pub struct SystemArgs {
    /// Reaction endothermicity E°, kJ/mol.
    #[arg(long, allow_negative_numbers = true)]
    pub e0: Option<f64>,
    /// Solvent reorganization energy λ, kJ/mol.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Donor–acceptor coupling V, kJ/mol.
    #[arg(long, allow_negative_numbers = true)]
    pub v: Option<f64>,
    /// Temperature, K.
    #[arg(long)]
    pub temp: Option<f64>,
    /// Solvent longitudinal relaxation time τ_L, ps.
    #[arg(long)]
    pub tau_l: Option<f64>,
    /// Plain-text key = value file supplying defaults for any flag.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GridArgs {
    /// Swept parameter.
    #[arg(long, value_enum)]
    pub axis: Option<Axis>,
    /// Logarithmic grid MIN:MAX:COUNT.
    #[arg(
        long,
        value_name = "MIN:MAX:COUNT",
        conflicts_with = "lin",
        allow_hyphen_values = true
    )]
    pub log: Option<String>,
    /// Linear grid MIN:MAX:COUNT.
    #[arg(long, value_name = "MIN:MAX:COUNT", allow_hyphen_values = true)]
    pub lin: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    /// CSV destination; standard output when omitted.
    #[arg(long, short, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Also write a gnuplot script next to the CSV (same name, `.gp`).
    #[arg(long, requires = "output")]
    pub gnuplot: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RatesArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Laplace argument s, 1/ps (0 gives the rate constants).
    #[arg(long)]
    pub s: Option<f64>,
    /// Relative tolerance of the hierarchy-depth convergence.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ThermoArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Second swept parameter for a two-axis grid (outer loop is --axis).
    #[arg(long, value_enum, requires = "axis")]
    pub axis2: Option<Axis>,
    /// Logarithmic grid of the second axis.
    #[arg(
        long,
        value_name = "MIN:MAX:COUNT",
        conflicts_with = "lin2",
        allow_hyphen_values = true
    )]
    pub log2: Option<String>,
    /// Linear grid of the second axis.
    #[arg(long, value_name = "MIN:MAX:COUNT", allow_hyphen_values = true)]
    pub lin2: Option<String>,
    /// Relative tolerance of the hierarchy-depth convergence.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Temperature step of the entropy central difference, K.
    #[arg(long)]
    pub delta_t: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Run only these criteria (repeatable).
    #[arg(long, value_name = "KEY")]
    pub only: Vec<String>,
    /// Also run the slow time-domain cross-validation.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PropagateArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Hierarchy depth (number of auxiliary levels).
    #[arg(long, default_value_t = 64)]
    pub depth: usize,
    /// Final time, ps; defaults to about 20 population relaxation times.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Integration step, ps; defaults to the largest stable step.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Sampling interval, ps.
    #[arg(long)]
    pub sample_interval: Option<f64>,
    /// Initially populated site.
    #[arg(long, value_enum, default_value_t = SiteArg::Donor)]
    pub site: SiteArg,
    /// CSV destination; standard output when omitted.
    #[arg(long, short, value_name = "PATH")]
    pub output: Option<std::path::PathBuf>,
}
