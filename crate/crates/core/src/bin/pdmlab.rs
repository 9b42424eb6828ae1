use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use pdmlab::cli::{execute, exit_code, RunOptions};

/// Runs one pdmlab experiment described by a config file.
#[derive(Debug, Parser)]
#[command(name = "pdmlab", version)]
struct Args {
    /// Experiment configuration (`[section]` / `key = value`).
    config: PathBuf,
    /// Directory for the CSV table and the text report.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed for inverse-iteration start vectors.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Only print failures.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let opts = RunOptions { seed: args.seed, mutation: None };
    let result = execute(&args.config, &args.out, &opts);
    match &result {
        Ok((report, out)) => {
            if !args.quiet {
                print!("{}", report.render());
                println!("wrote {} and {}", out.csv.display(), out.report.display());
            }
            for c in report.failing() {
                eprintln!("check failed: {}: {}", c.name, c.detail);
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
