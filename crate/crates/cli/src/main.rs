//! `crw-qed`: command-line front end for the crw-qed simulation library.

mod commands;
mod config;
mod error;
mod plot;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "crw-qed", version, about = "Single-photon physics of a coupled-resonator waveguide with one atom")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Band dispersion omega_k of the bare chain.
    Dispersion(Flags),
    /// Reflection and transmission spectrum, ideal or dissipative.
    Scatter(Flags),
    /// Bound states outside the band; `--adjudicate` adds the decay-rate
    /// comparison against full dynamics.
    Bound(Flags),
    /// Decay-rate spectrum in the continuum and normalized-chain modes.
    Decay(Flags),
    /// Time evolution with optional baths or effective losses.
    Evolve(Flags),
    /// Gaussian wavepacket scattering off the atom.
    Wavepacket(Flags),
    /// Decay-rate lineshapes for the two detunings of the decay figure.
    #[command(name = "reproduce-fig2")]
    ReproduceFig2(Flags),
    /// Reflection spectra for the four dissipative parameter sets.
    #[command(name = "reproduce-fig3")]
    ReproduceFig3(Flags),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Units {
    /// Energies and rates divided by xi, times multiplied by xi.
    Xi,
    /// Values as computed.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodName {
    Adaptive,
    FixedStep,
    Chebyshev,
}

/// Flags shared by every subcommand. Each one can also be given in the
/// `--config` file under the same name without the leading dashes.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Flat key=value configuration file (or a `config.resolved.json`).
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub output: Option<std::path::PathBuf>,
    /// Resonator frequency.
    #[arg(long = "omega-c", allow_negative_numbers = true)]
    pub omega_c: Option<f64>,
    /// Atomic transition frequency.
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Hopping between neighbouring resonators.
    #[arg(long)]
    pub xi: Option<f64>,
    /// Atom-resonator coupling.
    #[arg(long = "J")]
    pub coupling: Option<f64>,
    /// Number of resonators (odd).
    #[arg(long = "n-sites")]
    pub n_sites: Option<usize>,
    /// Interior wavenumber samples.
    #[arg(long = "k-points")]
    pub k_points: Option<usize>,
    /// Output units.
    #[arg(long, value_enum)]
    pub units: Option<Units>,
    /// Worker threads for parameter sweeps.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Recorded for provenance; all physics is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Resonator loss rate of the effective model.
    #[arg(long = "gamma-c")]
    pub gamma_c: Option<f64>,
    /// Atom loss rate of the effective model.
    #[arg(long = "gamma-a")]
    pub gamma_a: Option<f64>,
    /// Resonator bath coupling; the memory function is g^2.
    #[arg(long)]
    pub g: Option<f64>,
    /// Atom bath coupling; the memory function is beta^2.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Discretized modes per bath (0 disables explicit baths).
    #[arg(long = "bath-modes")]
    pub bath_modes: Option<usize>,
    /// Bath bandwidth, centred on omega-c.
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Final time of an evolution.
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    /// Number of time steps in the output grid.
    #[arg(long = "t-points")]
    pub t_points: Option<usize>,
    /// Integrator.
    #[arg(long, value_enum)]
    pub method: Option<MethodName>,
    /// Step of the fixed-step integrator.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Initial state: atom, site:<j>, eigen:<index>, bound-below, bound-above.
    #[arg(long)]
    pub initial: Option<String>,
    /// Central wavenumber of the wavepacket.
    #[arg(long)]
    pub k0: Option<f64>,
    /// Wavepacket width in sites.
    #[arg(long)]
    pub width: Option<f64>,
    /// Also write the full amplitude history to amplitudes.bin.
    #[arg(long)]
    pub amplitudes: bool,
    /// Compare bound-state decay rates against full dynamics.
    #[arg(long)]
    pub adjudicate: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, flags) = match cli.command {
        Command::Dispersion(f) => ("dispersion", f),
        Command::Scatter(f) => ("scatter", f),
        Command::Bound(f) => ("bound", f),
        Command::Decay(f) => ("decay", f),
        Command::Evolve(f) => ("evolve", f),
        Command::Wavepacket(f) => ("wavepacket", f),
        Command::ReproduceFig2(f) => ("reproduce-fig2", f),
        Command::ReproduceFig3(f) => ("reproduce-fig3", f),
    };
    let result = RunConfig::resolve(name, &flags).and_then(|cfg| commands::run(&cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

impl From<MethodName> for &'static str {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::Adaptive => "adaptive",
            MethodName::FixedStep => "fixed-step",
            MethodName::Chebyshev => "chebyshev",
        }
    }
}

impl From<Units> for &'static str {
    fn from(u: Units) -> Self {
        match u {
            Units::Xi => "xi",
            Units::Raw => "raw",
        }
    }
}

#[doc(hidden)]
pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
