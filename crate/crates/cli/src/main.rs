mod commands;
mod instance;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exact support recovery for sparse Gaussian linear models: decoding,
/// bounds, Monte Carlo sweeps.
#[derive(Debug, Parser)]
#[command(name = "suppdec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate one instance and decode it.
    Decode(DecodeArgs),
    /// Print the theoretical bounds for one (n, p, s, m2) point.
    Bounds(BoundsArgs),
    /// Run a Monte Carlo sweep over a grid of sample sizes, writing CSV.
    Sweep(SweepArgs),
    /// Check the chi-square tail bounds and binomial bounds by simulation.
    VerifyTails(VerifyTailsArgs),
    /// List the built-in sweep presets.
    Presets,
}

#[derive(Debug, Args)]
struct DecodeArgs {
    #[arg(long, required_unless_present = "instance")]
    p: Option<usize>,
    #[arg(long, required_unless_present = "instance")]
    s: Option<usize>,
    #[arg(long, required_unless_present = "instance")]
    n: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Squared minimum magnitude of the signal.
    #[arg(long, default_value_t = 1.0)]
    m2: f64,
    #[arg(long, default_value = "exhaustive")]
    decoder: String,
    #[arg(long, default_value = "random-sign")]
    sign_mode: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Enumeration budget for the exhaustive decoder.
    #[arg(long, default_value_t = 1e8)]
    budget: f64,
    /// Write the generated instance to this file.
    #[arg(long, value_name = "PATH")]
    emit_instance: Option<PathBuf>,
    /// Decode a saved instance instead of generating one.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["p", "s", "n", "emit_instance"])]
    instance: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[arg(long)]
    p: usize,
    #[arg(long)]
    s: usize,
    /// Sample size; without it only the sample-size thresholds are printed.
    #[arg(long)]
    n: Option<usize>,
    /// Squared minimum magnitude in noise units.
    #[arg(long)]
    m2: f64,
    #[arg(long = "C", default_value_t = suppdec::bounds::DEFAULT_C)]
    c: f64,
    #[arg(long = "Cprime", default_value_t = suppdec::bounds::DEFAULT_C_PRIME)]
    c_prime: f64,
    #[arg(long, default_value = "exact-lemma2")]
    union_form: String,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Config file (`key = value` lines).
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    s: Option<String>,
    /// Comma-separated, strictly increasing sample sizes.
    #[arg(long)]
    n_grid: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    m2: Option<String>,
    #[arg(long)]
    sign_mode: Option<String>,
    /// Comma-separated decoder list.
    #[arg(long)]
    decoder: Option<String>,
    #[arg(long)]
    ensemble: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long = "C")]
    c: Option<String>,
    #[arg(long = "Cprime")]
    c_prime: Option<String>,
    #[arg(long)]
    union_form: Option<String>,
    /// CSV destination; stdout when neither this nor the config sets one.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Also write a JSON summary.
    #[arg(long, value_name = "PATH")]
    summary: Option<PathBuf>,
    /// Fill the mean_decode_ms column (makes the CSV run-dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct VerifyTailsArgs {
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Check one cell against a deliberately wrong threshold.
    #[arg(long)]
    selftest_break: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Decode(a) => commands::decode(a),
        Command::Bounds(a) => commands::bounds(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::VerifyTails(a) => commands::verify_tails(a),
        Command::Presets => commands::presets(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if let Some(msg) = f.message() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(f.code())
        }
    }
}
