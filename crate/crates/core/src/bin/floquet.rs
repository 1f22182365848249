use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shiftfloquet::analysis::{self, exit, AnalysisConfig, Prepared};
use shiftfloquet::error::Error;

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (report schema 1.0.0)");

#[derive(Parser)]
#[command(name = "floquet", version = VERSION, about = "Floquet analysis of x^Δ = A(t)x (+F) on time scales periodic in shifts")]
struct Cli {
    /// Tolerance override, repeatable: quadrature, ode, eigen, resonance, eps_tol, epsilon, periodicity.
    #[arg(long = "tol", value_name = "KEY=VALUE", global = true)]
    tol: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write the JSON report (stdout by default).
    Analyze {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Run the periodicity checks only.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &Path, overrides: &[String]) -> Result<Prepared, Error> {
    let mut cfg = AnalysisConfig::load(path)?;
    for o in overrides {
        cfg.analysis.tolerances.apply_override(o)?;
    }
    Prepared::new(cfg)
}

fn fail(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(analysis::exit_code(err) as u8)
}

/// Writes to stdout, tolerating a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}").and_then(|_| out.flush());
}

fn print_json<T: serde::Serialize>(value: &T) {
    match serde_json::to_string_pretty(value) {
        Ok(s) => emit(&s),
        Err(e) => eprintln!("error: {e}"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify { config } => {
            let prepared = match load(&config, &cli.tol) {
                Ok(p) => p,
                Err(e) => return fail(&e),
            };
            let rep = prepared.verify();
            print_json(&rep);
            if rep.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(exit::PERIODICITY as u8)
            }
        }
        Command::Analyze { config, report, samples } => {
            let prepared = match load(&config, &cli.tol) {
                Ok(p) => p,
                Err(e) => return fail(&e),
            };
            let verification = prepared.verify();
            if !verification.pass {
                print_json(&verification);
                return fail(&Error::Periodicity("the scale or A is not periodic in shifts".into()));
            }
            let rep = match prepared.analyze_verified(verification) {
                Ok(r) => r,
                Err(e) => return fail(&e),
            };
            let outputs = &prepared.config.outputs;
            let written = match report.or_else(|| outputs.report_path.clone()) {
                Some(path) => rep.write_json(&path),
                None => rep.to_json().map(|s| emit(&s)),
            };
            if let Err(e) = written {
                return fail(&e);
            }
            if let Some(path) = samples.or_else(|| outputs.samples_path.clone()) {
                if let Err(e) = analysis::write_samples(&rep, &path) {
                    return fail(&e);
                }
            }
            ExitCode::SUCCESS
        }
    }
}
