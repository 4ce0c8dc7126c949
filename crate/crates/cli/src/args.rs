use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qbath", version, about = "Equation of state and finite-size entropy of a quantum heat bath")]
pub struct Cli {
    /// Worker threads for parallel work (default: all cores). Output does
    /// not depend on this value.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scan log Z, E, S, C and T over a beta or energy grid.
    Eos(EosArgs),
    /// Solve E(beta) = E for beta and report the entropy.
    Invert(InvertArgs),
    /// Draw energies H(x) of Haar-random pure states.
    Sample(SampleArgs),
    /// Finite-n entropy (1/n) log P[avg <= E].
    Tail(TailArgs),
    /// Finite-n entropy of the shell E - delta <= avg <= E.
    Shell(ShellArgs),
    /// S_n(E) against the Chernoff bound over a list of n.
    Converge(ConvergeArgs),
    /// Probe P[H < eps] > 0 near the ground energy.
    Check(CheckArgs),
    /// Render an eos CSV table as an SVG line chart.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LawKind {
    Dirac,
    Haar,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Exact,
    Mc,
    Tilted,
}

#[derive(Debug, Clone, Args)]
pub struct LawArgs {
    /// Measure on the molecule's state space.
    #[arg(long, value_enum, default_value = "dirac")]
    pub law: LawKind,

    /// Spectrum as `e1,e2,...` or `e1:m1,e2:m2,...`.
    #[arg(long, allow_hyphen_values = true, required_unless_present = "atoms")]
    pub levels: Option<String>,

    /// JSON file holding a list of `{"energy": .., "weight": ..}` atoms
    /// (with `--law custom`).
    #[arg(long, conflicts_with = "levels")]
    pub atoms: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Write here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    /// Seed for Monte Carlo work.
    #[arg(long, env = "QBATH_SEED")]
    pub seed: Option<u64>,

    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
}

#[derive(Debug, Args)]
pub struct EosArgs {
    #[command(flatten)]
    pub law: LawArgs,

    /// Inverse temperatures: `start:stop:count` (inclusive) or a comma list.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "energy_grid", required_unless_present = "energy_grid")]
    pub beta: Option<String>,

    /// Specific energies, same syntax as `--beta`.
    #[arg(long, allow_hyphen_values = true)]
    pub energy_grid: Option<String>,

    #[arg(long, value_enum, default_value = "linear")]
    pub grid_scale: GridScale,

    /// Boltzmann constant; entropies and heat capacities are in its units.
    #[arg(long, default_value_t = 1.0)]
    pub kb: f64,

    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    #[command(flatten)]
    pub law: LawArgs,

    #[arg(long, allow_hyphen_values = true)]
    pub energy: f64,

    #[arg(long, default_value_t = 1.0)]
    pub kb: f64,

    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Spectrum of the molecule.
    #[arg(long, allow_hyphen_values = true)]
    pub levels: String,

    #[command(flatten)]
    pub mc: McArgs,

    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TailArgs {
    #[command(flatten)]
    pub law: LawArgs,

    /// Number of molecules.
    #[arg(long)]
    pub n: usize,

    #[arg(long, allow_hyphen_values = true)]
    pub energy: f64,

    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodArg,

    #[command(flatten)]
    pub mc: McArgs,

    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ShellArgs {
    #[command(flatten)]
    pub tail: TailArgs,

    /// Shell width.
    #[arg(long)]
    pub delta: f64,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub law: LawArgs,

    /// Ascending molecule counts, e.g. `10,100,1000`.
    #[arg(long)]
    pub n_list: String,

    #[arg(long, allow_hyphen_values = true)]
    pub energy: f64,

    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodArg,

    #[arg(long, default_value_t = 1.0)]
    pub kb: f64,

    #[command(flatten)]
    pub mc: McArgs,

    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub law: LawArgs,

    /// Extra thresholds to probe, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<String>,

    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// CSV table written by `qbath eos`.
    #[arg(long)]
    pub input: PathBuf,

    /// Column for the horizontal axis.
    #[arg(long, default_value = "beta")]
    pub x: String,

    /// Columns to draw, comma separated.
    #[arg(long, default_value = "energy,entropy,heat_capacity")]
    pub columns: String,

    /// Write here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}
