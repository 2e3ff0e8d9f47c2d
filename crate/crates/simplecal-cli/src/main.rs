//! `simplecal` — calibrate simplified linear-Gaussian models, audit their
//! simplifications, and compare predictive posteriors against the full
//! reference model.

mod commands;
mod matfile;
mod problem;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::problem::SchemeChoice;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

/// Filter selection shared by the verbs that can run the data-driven
/// scheme: an explicit filter matrix file or a TSVD truncation index.
#[derive(Debug, Args)]
pub struct FilterArgs {
    /// Path to a data-filter matrix file (rows,cols header CSV).
    #[arg(long, conflicts_with = "tsvd_k")]
    pub filter: Option<PathBuf>,
    /// Build the filter from the top-k singular directions of the
    /// simplified data matrix.
    #[arg(long)]
    pub tsvd_k: Option<usize>,
}

#[derive(Parser)]
#[command(
    name = "simplecal",
    about = "Calibration and prediction schemes for simplified linear-Gaussian inverse problems",
    after_help = "Exit codes: 0 success, 1 condition-audit failure under --strict, \
                  2 input error, 3 numerical failure.\n\
                  Set SIMPLECAL_LOG=debug for verbose logging."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a calibration scheme on a problem spec and write the posterior.
    Run {
        /// Problem-spec file (key = value lines; see the README).
        #[arg(long)]
        spec: PathBuf,
        /// Scheme to run (overrides the spec file).
        #[arg(long, value_enum)]
        scheme: Option<SchemeChoice>,
        #[command(flatten)]
        filter: FilterArgs,
        /// Relative tolerance for condition checks.
        #[arg(long)]
        tol: Option<f64>,
        /// Exit with code 1 when the scheme's licensing condition fails.
        #[arg(long)]
        strict: bool,
        /// Output directory.
        #[arg(long, default_value = "simplecal-out")]
        out: PathBuf,
    },
    /// Check every scheme-licensing condition for a problem spec.
    Audit {
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long)]
        tol: Option<f64>,
        /// Exit with code 1 when any condition fails.
        #[arg(long)]
        strict: bool,
        /// Also write audit.txt to this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether a scheme's posterior is conservative with respect to
    /// the optimal scheme, optionally cross-checked by Monte Carlo.
    Conservativeness {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum)]
        scheme: Option<SchemeChoice>,
        #[command(flatten)]
        filter: FilterArgs,
        /// Monte Carlo sample count (0 disables the cross-check).
        #[arg(long)]
        mc_samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write conservativeness.txt to this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build and save the TSVD data filter for a given truncation index.
    FilterTsvd {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        tsvd_k: Option<usize>,
        #[arg(long, default_value = "simplecal-out")]
        out: PathBuf,
    },
    /// Reproduce the bundled 1-D aquifer example end to end.
    Example {
        #[arg(long, default_value = "simplecal-example")]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Monte Carlo samples for the conservativeness cross-checks.
        #[arg(long, default_value_t = 100_000)]
        mc_samples: usize,
        /// Metropolis chain length for the nonlinear-posterior comparison.
        #[arg(long, default_value_t = 100_000)]
        mcmc_iters: usize,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("SIMPLECAL_LOG", "warn"))
        .init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            spec,
            scheme,
            filter,
            tol,
            strict,
            out,
        } => commands::cmd_run(commands::RunArgs {
            spec,
            scheme,
            filter,
            tol,
            strict,
            out,
        }),
        Command::Audit {
            spec,
            filter,
            tol,
            strict,
            out,
        } => commands::cmd_audit(commands::AuditArgs {
            spec,
            filter,
            tol,
            strict,
            out,
        }),
        Command::Conservativeness {
            spec,
            scheme,
            filter,
            mc_samples,
            seed,
            out,
        } => commands::cmd_conservativeness(commands::ConservativenessArgs {
            spec,
            scheme,
            filter,
            mc_samples,
            seed,
            out,
        }),
        Command::FilterTsvd { spec, tsvd_k, out } => {
            commands::cmd_filter_tsvd(commands::FilterTsvdArgs { spec, tsvd_k, out })
        }
        Command::Example {
            out,
            seed,
            mc_samples,
            mcmc_iters,
        } => commands::cmd_example(commands::ExampleArgs {
            out,
            seed,
            mc_samples,
            mcmc_iters,
        }),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            std::process::exit(e.code);
        }
    }
}
