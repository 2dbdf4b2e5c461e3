use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use metalab::experiment::{run_experiment, RunOptions};
use metalab::validate_config;

/// Exit codes: 0 success, 1 config error, 2 runtime error, 3 failed
/// guarantee check under --check.
const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_CHECK: u8 = 3;

#[derive(Parser)]
#[command(
    name = "metalab",
    about = "Finite-environment meta-learning laboratory",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config file.
    Run {
        /// Path to the experiment config.
        config: PathBuf,
        /// Exit with code 3 when a guarantee validation reports pass = false.
        #[arg(long)]
        check: bool,
        /// Seed override (highest priority; config seed and METALAB_SEED follow).
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory override.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Trial-count override for Monte Carlo kinds.
        #[arg(long)]
        trials: Option<usize>,
    },
}

/// Seed priority: --seed, then the config value, then METALAB_SEED, then 0.
fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> Result<u64, String> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(s) = config {
        return Ok(s);
    }
    match std::env::var("METALAB_SEED") {
        Ok(text) => text
            .parse::<u64>()
            .map_err(|e| format!("METALAB_SEED: {e}")),
        Err(_) => Ok(0),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run {
        config,
        check,
        seed,
        output,
        trials,
    } = cli.command;

    let text = match std::fs::read_to_string(&config) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("config error: {}: {e}", config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let cfg = match validate_config(&text) {
        Ok(cfg) => cfg,
        Err(errors) => {
            for e in errors {
                eprintln!("config error: {e}");
            }
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let seed = match resolve_seed(seed, cfg.seed) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let opts = RunOptions {
        seed,
        output_dir: output
            .or_else(|| cfg.output.clone())
            .unwrap_or_else(|| PathBuf::from("out")),
        trials_override: trials,
    };

    let report = match run_experiment(&cfg, &opts) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("runtime error: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };

    println!(
        "{} seed={} hash={} wrote {} file(s) to {}",
        report.kind,
        report.seed,
        &report.config_hash[..12],
        report.outputs.len() + 1,
        opts.output_dir.display()
    );
    println!("{}", report.summary);

    if check {
        if let Some(false) = report.pass {
            eprintln!("check failed: guarantee did not hold (pass = false)");
            return ExitCode::from(EXIT_CHECK);
        }
    }
    ExitCode::SUCCESS
}
