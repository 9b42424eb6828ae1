//! Experiment configuration, orchestration and CSV/report output behind the
//! `pdmlab` binary.
//!
//! ```text
//! pdmlab <config-path> [--out DIR] [--seed INT] [--quiet]
//! ```
//!
//! Exit codes: 0 every check passed, 1 a check failed, 2 configuration
//! error, 3 runtime error.

mod config;
mod report;
mod run;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::hamiltonian::Mutation;
use crate::lattice::LatticeError;
use crate::spectral::SpectralError;
use crate::symexpr::ExprError;

pub use config::{
    parse_config, ConfigError, ExperimentConfig, ExperimentKind, Geometry, OrderingValue, Profile, DEFAULT_K,
    DEFAULT_REFINE, LENGTH_PARAM,
};
pub use report::{emit_csv, Cell, CheckOutcome, OrderFit, RunReport, Table};
pub use run::{
    continuum_matrix, fit_order, ordering_point, paired_spectra, run_compare, run_convergence, run_experiment,
    run_ordering_sweep, run_spectrum_chain, run_spectrum_effective, run_verify, CHECK_INVARIANCE, CHECK_MONOTONE,
    CHECK_RESIDUALS, COMPARE_HEADER, CONVERGENCE_HEADER, ORDERING_HEADER, SPECTRUM_HEADER, VERIFY_HEADER,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("cannot read config {path}: {message}")]
    ReadConfig { path: String, message: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ReadConfig { .. } | CliError::Config(_) => EXIT_CONFIG,
            _ => EXIT_RUNTIME,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    /// Seed of the inverse-iteration start vectors.
    pub seed: u64,
    /// Test hook: runs the verification suite against a defective build.
    pub mutation: Option<Mutation>,
}

/// Paths a run writes to.
#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub csv: PathBuf,
    pub report: PathBuf,
}

impl Outputs {
    /// `[output]` paths resolved against `out_dir`, defaulting to
    /// `<kind>.csv` and `<kind>-report.txt`.
    pub fn resolve(cfg: &ExperimentConfig, out_dir: &Path) -> Self {
        let pick = |given: &Option<String>, default: String| out_dir.join(given.clone().unwrap_or(default));
        Outputs {
            csv: pick(&cfg.csv_path, format!("{}.csv", cfg.kind)),
            report: pick(&cfg.report_path, format!("{}-report.txt", cfg.kind)),
        }
    }
}

/// Reads, runs and writes one experiment. Returns the report and where it
/// was written.
pub fn execute(config_path: &Path, out_dir: &Path, opts: &RunOptions) -> Result<(RunReport, Outputs), CliError> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| CliError::ReadConfig { path: config_path.display().to_string(), message: e.to_string() })?;
    let cfg = parse_config(&text)?;
    let report = run_experiment(&cfg, opts)?;
    let out = Outputs::resolve(&cfg, out_dir);
    for p in [&out.csv, &out.report] {
        if let Some(dir) = p.parent() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        }
    }
    emit_csv(&report, &out.csv)?;
    std::fs::write(&out.report, report.render()).map_err(|e| CliError::Io(format!("{}: {e}", out.report.display())))?;
    Ok((report, out))
}

/// Exit code for a finished run.
pub fn exit_code(result: &Result<(RunReport, Outputs), CliError>) -> i32 {
    match result {
        Ok((r, _)) if r.passed() => EXIT_PASS,
        Ok(_) => EXIT_CHECK_FAILED,
        Err(e) => e.exit_code(),
    }
}
