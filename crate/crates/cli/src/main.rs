mod commands;
mod grid;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use logcount_core::Error;

#[derive(Parser, Debug)]
#[command(name = "logcount", version, about = "Smooth unbounded private continual counting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coefficients of the left and right factors and of (1 - z)^(-1/2).
    Coeffs {
        #[command(flatten)]
        factor: FactorArgs,
        #[arg(long, default_value_t = 32)]
        t_max: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Limiting column norm of the right factor.
    Sensitivity {
        #[command(flatten)]
        factor: FactorArgs,
        #[arg(long, default_value_t = 1e-12, allow_hyphen_values = true)]
        tol: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Exact variance of one mechanism on a geometric grid of steps.
    Variance {
        #[arg(long, default_value = "logmatrix")]
        mechanism: String,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Exact variance of several mechanisms, one row per (t, mechanism).
    Compare {
        /// Comma-separated mechanism ids.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "logmatrix-fast,logmatrix-balanced,logmatrix-large-n,sqrt,hybrid-indep,hybrid-log"
        )]
        mechanisms: Vec<String>,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Runs a mechanism over an input stream.
    Simulate {
        #[arg(long, default_value = "logmatrix")]
        mechanism: String,
        /// `zeros:N`, `ones:N` or `file:PATH` (one value per line).
        #[arg(long)]
        input: String,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        n0: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        c_factor: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Relative error of the asymptotic coefficient expansion.
    ApproxError {
        #[command(flatten)]
        factor: FactorArgs,
        #[arg(long = "K", default_value_t = logcount_core::approx::DEFAULT_ORDER)]
        order: usize,
        #[arg(long, default_value_t = 1 << 16)]
        t_max: usize,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args, Debug, Clone)]
struct FactorArgs {
    #[arg(long, default_value_t = logcount_core::factor::DEFAULT_GAMMA, allow_hyphen_values = true)]
    gamma: f64,
    /// Defaults to `-gamma`.
    #[arg(long, allow_hyphen_values = true)]
    delta_log: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    #[command(flatten)]
    factor: FactorArgs,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    eps: f64,
    #[arg(long, default_value_t = 1e-6, allow_hyphen_values = true)]
    delta_priv: f64,
    #[arg(long, default_value_t = logcount_core::approx::DEFAULT_ETA, allow_hyphen_values = true)]
    eta: f64,
    #[arg(long = "K", default_value_t = logcount_core::approx::DEFAULT_ORDER)]
    order: usize,
    #[arg(long, default_value_t = 1 << 16)]
    t_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Budget share of the bounded hybrid component.
    #[arg(long, default_value_t = 0.75, allow_hyphen_values = true)]
    rho: f64,
    #[arg(long)]
    no_reuse: bool,
}

#[derive(Args, Debug, Clone)]
struct OutArgs {
    /// Output file; relative paths resolve against `LOGCOUNT_OUT_DIR` when set.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Svg,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidArgument(_)) => 2,
        Some(_) => 3,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
