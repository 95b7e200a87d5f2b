use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;

use monolab::cli::{load_spec, render, run, Command, Overrides};

/// Monodromy laboratory: monodromy tuples, isomonodromy verdicts, Schlesinger and Halphen runs.
///
/// Exit status: 0 on success or consistent verdicts, 1 on refuted verdicts, 2 on errors.
#[derive(Debug, Parser)]
#[command(name = "monolab", version)]
struct Args {
    /// TOML spec file (optional for dhv-demo).
    #[arg(long)]
    spec: Option<PathBuf>,

    #[arg(long, value_enum)]
    command: Command,

    /// Number of parameter samples, overriding the spec.
    #[arg(long)]
    samples: Option<usize>,

    /// Relative integrator tolerance, overriding the spec.
    #[arg(long)]
    tol: Option<f64>,

    /// Write the invariant profile as CSV to this path.
    #[arg(long)]
    csv: Option<PathBuf>,

    /// Recorded in the report metadata.
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(args: &Args) -> anyhow::Result<i32> {
    let spec = match &args.spec {
        Some(p) => Some(load_spec(p).with_context(|| format!("loading spec {}", p.display()))?),
        None => None,
    };
    let overrides = Overrides { samples: args.samples, tol: args.tol, csv: args.csv.clone(), seed: args.seed };
    let outcome = run(spec.as_ref(), args.command, &overrides).context(args.command.name())?;
    outcome.write_csv()?;
    print!("{}", render(&outcome.report));
    Ok(outcome.status.exit_code())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
