//! `specular verify <suite> --config <path>` runs one suite and writes its
//! report; `specular list-suites` prints the suite names.
//!
//! Exit codes: 0 when every mandatory check passes, 1 on a bound violation,
//! 2 on a usage or configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use specular::experiments::{exit_code, run_suite, ExperimentConfig, Suite};

#[derive(Parser)]
#[command(name = "specular", version, about = "Seeded verification suites for specular characteristics and collision quadratures")]
struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one suite.
    Verify {
        /// Suite name, see `list-suites`.
        suite: String,
        /// TOML config.
        #[arg(long)]
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// JSON report path; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-sample CSV path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print the suite names with a one-line description.
    ListSuites,
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if n == 0 {
            return usage("--jobs must be at least 1");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return usage(e);
        }
    }
    match cli.command {
        Command::ListSuites => {
            for s in Suite::ALL {
                println!("{:<20} {}", s.name(), s.description());
            }
            ExitCode::SUCCESS
        }
        Command::Verify { suite, config, seed, out, csv } => {
            let suite: Suite = match suite.parse() {
                Ok(s) => s,
                Err(e) => return usage(e),
            };
            let mut cfg = match ExperimentConfig::from_path(&config) {
                Ok(c) => c,
                Err(e) => return usage(e),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let out = out.or_else(|| cfg.output.report.clone());
            let csv = csv.or_else(|| cfg.output.csv.clone());

            let outcome = run_suite(suite, &cfg);
            let report = match &outcome {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(exit_code(&outcome) as u8);
                }
            };
            match &out {
                Some(path) => {
                    if let Err(e) = report.write_json(path) {
                        return usage(format!("{}: {e}", path.display()));
                    }
                }
                None => print!("{}", report.to_json()),
            }
            if let Some(path) = &csv {
                if let Err(e) = report.write_csv(path) {
                    return usage(format!("{}: {e}", path.display()));
                }
            }
            let failures = report.failures();
            if failures.is_empty() {
                eprintln!("{suite}: pass");
            } else {
                eprintln!("{suite}: FAIL ({})", failures.join(", "));
            }
            ExitCode::from(exit_code(&outcome) as u8)
        }
    }
}
