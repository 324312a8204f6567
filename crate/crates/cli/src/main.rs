mod commands;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use struct_wdro::combinatorics::DEFAULT_VARIABLE_CAP;

#[derive(Debug, Parser)]
#[command(
    name = "struct-wdro",
    version,
    about = "Structured Wasserstein DRO: relaxations, sweeps and reference values"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the lifted relaxation at one lifting level.
    Uq(RunConfig),
    /// Solve the relaxation over a range of lifting levels and emit a CSV curve.
    Sweep(RunConfig),
    /// Solve the outer decision problem over a range of lifting levels.
    Dro(RunConfig),
    /// Exact transport distance between two distribution files.
    Wasserstein(WassersteinArgs),
    /// Closed-form reference value of an example loss.
    Oracle(OracleArgs),
    /// Unstructured, symmetrized and multitransport values side by side.
    Compare(RunConfig),
    /// Regenerate the golden-value fixture file.
    Fixtures(RunConfig),
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Instance JSON file.
    #[arg(long)]
    pub instance: Option<std::path::PathBuf>,
    /// Lifting level.
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Lifting levels, e.g. `2..10`, `2-10` or `2,4,8`.
    #[arg(long = "M-range")]
    pub m_range: Option<String>,
    /// Override the radius stored in the instance.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Override the norm stored in the instance.
    #[arg(long)]
    pub norm: Option<struct_wdro::distributions::NormKind>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    /// Largest number of program variables, tuples or atoms.
    #[arg(long, env = "STRUCT_WDRO_CAP", default_value_t = DEFAULT_VARIABLE_CAP)]
    pub cap: usize,
    /// Solver tolerance, in (0, 1e-2].
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Concurrent solves; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Leave timing columns empty so repeated runs are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct WassersteinArgs {
    pub first: std::path::PathBuf,
    pub second: std::path::PathBuf,
    #[arg(long, default_value = "l2")]
    pub norm: struct_wdro::distributions::NormKind,
    /// Also print the optimal plan.
    #[arg(long)]
    pub plan: bool,
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    /// Example family (`variance`, `negative_product`, `symmetrization`,
    /// `lifted`, `cubic_mixed`) or a single `family/quantity`.
    #[arg(long)]
    pub case: String,
    #[arg(long)]
    pub rho: f64,
    #[arg(long = "M", default_value_t = 2)]
    pub m: usize,
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
