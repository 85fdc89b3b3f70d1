use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use phasefid::scanner::Range;
use phasefid::ModeModel;

#[derive(Debug, Parser)]
#[command(
    name = "phasefid",
    version,
    about = "Fidelity, partition-function ratio and Uhlmann overlap across mean-field phase diagrams"
)]
pub struct Cli {
    /// Flat `key = value` file; flags take precedence over its entries.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads for sweeps (defaults to the number of cores).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep the (t, coupling) plane and write grid.csv, critical_line.csv and plot.gp.
    Scan(ScanArgs),
    /// Compare the critical line with the per-row minimum of F.
    Critical(CriticalArgs),
    /// Check the closed forms against explicit 4x4 matrices.
    Oracle(OracleArgs),
    /// Self-consistent BCS gap at one point.
    Gap(GapArgs),
    /// Self-consistent Stoner magnetization and chemical potential at one point.
    Equilibrium(EquilibriumArgs),
    /// Per-mode Uhlmann connection deviation across the Debye window.
    Uhlmann(UhlmannArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Stoner,
    Bcs,
}

impl Model {
    pub fn mode(self) -> ModeModel {
        match self {
            Model::Stoner => ModeModel::Stoner,
            Model::Bcs => ModeModel::Bcs,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Stoner => "stoner",
            Model::Bcs => "bcs",
        }
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        <Model as ValueEnum>::from_str(s, true).map_err(|_| format!("unknown model `{s}` (stoner or bcs)"))
    }
}

/// `lo:hi:n`.
pub fn parse_range(s: &str) -> Result<Range, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(format!("expected lo:hi:n, got `{s}`"));
    };
    let lo: f64 = lo.trim().parse().map_err(|e| format!("lower bound `{lo}`: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("upper bound `{hi}`: {e}"))?;
    let n: usize = n.trim().parse().map_err(|e| format!("count `{n}`: {e}"))?;
    Ok(Range::new(lo, hi, n))
}

pub fn format_range(r: &Range) -> String {
    format!("{}:{}:{}", r.lo, r.hi, r.n)
}

pub fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"))
}

pub fn parse_usize(s: &str) -> Result<usize, String> {
    s.trim().parse::<usize>().map_err(|e| format!("`{s}`: {e}"))
}

pub fn parse_u64(s: &str) -> Result<u64, String> {
    s.trim().parse::<u64>().map_err(|e| format!("`{s}`: {e}"))
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub model: Option<Model>,

    /// Temperature grid.
    #[arg(long, value_name = "LO:HI:N", value_parser = parse_range)]
    pub t: Option<Range>,

    /// Coupling grid (u for Stoner, v for BCS).
    #[arg(long, value_name = "LO:HI:N", value_parser = parse_range)]
    pub coupling: Option<Range>,

    /// Temperature offset of the neighbouring point.
    #[arg(long, allow_hyphen_values = true)]
    pub dt: Option<f64>,

    /// Coupling offset for the Stoner model.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "dv")]
    pub du: Option<f64>,

    /// Coupling offset for the BCS model.
    #[arg(long, allow_hyphen_values = true)]
    pub dv: Option<f64>,

    /// Stoner system size n = (3/4)N.
    #[arg(long, conflicts_with = "nu")]
    pub size: Option<f64>,

    /// BCS mode density in the Debye window.
    #[arg(long)]
    pub nu: Option<f64>,

    /// Order parameter above which a cell counts as ordered.
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,

    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Largest tolerated fraction of failed cells before exiting with 2.
    #[arg(long)]
    pub max_failure_rate: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CriticalArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,

    /// Read a grid.csv written by `scan` instead of sweeping.
    #[arg(long, value_name = "FILE")]
    pub grid: Option<PathBuf>,

    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub seed: Option<u64>,

    /// Random draws per suite.
    #[arg(long)]
    pub draws: Option<usize>,

    /// Relative error injected into every closed form (negative control).
    #[arg(long, hide = true)]
    pub corrupt: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GapArgs {
    #[arg(long)]
    pub v: Option<f64>,

    #[arg(long)]
    pub t: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EquilibriumArgs {
    #[arg(long)]
    pub u: Option<f64>,

    #[arg(long)]
    pub t: Option<f64>,

    /// External field added to h_z.
    #[arg(long, allow_hyphen_values = true)]
    pub h_ext: Option<f64>,
}

#[derive(Debug, Args)]
pub struct UhlmannArgs {
    #[arg(long)]
    pub v: Option<f64>,

    #[arg(long)]
    pub t: Option<f64>,

    #[arg(long, allow_hyphen_values = true)]
    pub dt: Option<f64>,

    #[arg(long, allow_hyphen_values = true)]
    pub dv: Option<f64>,

    /// Mode energies relative to the Fermi level.
    #[arg(long, value_name = "LO:HI:N", value_parser = parse_range, allow_hyphen_values = true)]
    pub xi: Option<Range>,

    /// Write uhlmann.csv here instead of standard output.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}
