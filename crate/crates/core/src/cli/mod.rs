//! Batch front end for `sqvac`: flags, config loading, exit codes and the
//! machine-readable error record.

pub mod config;
pub mod report;
pub mod run;

pub use config::{Experiment, ExperimentConfig};
pub use run::{run, run_with_workers, Outcome};

use clap::Parser;
use serde_json::json;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "sqvac", version, about = "Squeezed-vacuum quantum vs stochastic-field experiments")]
pub struct Args {
    /// Experiment config (TOML).
    pub config: PathBuf,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for Monte Carlo; results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum)]
    pub experiment: Option<Experiment>,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. }
        | Error::InvalidLattice(_)
        | Error::InvalidParameter { .. }
        | Error::UnderResolved(_)
        | Error::ModeLeak { .. }
        | Error::ModeNotNormalized { .. }
        | Error::InsufficientRealizations { .. }
        | Error::Io(_) => EXIT_VALIDATION,
        _ => EXIT_INTERNAL,
    }
}

fn kind(err: &Error) -> &'static str {
    match err {
        Error::InvalidLattice(_) => "invalid_lattice",
        Error::InvalidParameter { .. } => "invalid_parameter",
        Error::LengthMismatch { .. } => "length_mismatch",
        Error::LatticeMismatch => "lattice_mismatch",
        Error::StageMismatch { .. } => "stage_mismatch",
        Error::InsufficientRealizations { .. } => "insufficient_realizations",
        Error::UnderResolved(_) => "under_resolved",
        Error::ModeLeak { .. } => "mode_leak",
        Error::ModeNotNormalized { .. } => "mode_not_normalized",
        Error::RenormalizationMismatch(_) => "renormalization_mismatch",
        Error::Decode(_) => "decode",
        Error::Config { .. } => "config",
        Error::ImaginaryResidual { .. } => "imaginary_residual",
        Error::Io(_) => "io",
        Error::Serialize(_) => "serialize",
    }
}

/// One-line JSON error record for stderr.
pub fn error_record(err: &Error, config_path: Option<&Path>) -> serde_json::Value {
    let (field, line) = match err {
        Error::Config { field, line, .. } => (field.clone(), *line),
        Error::InvalidParameter { field, .. } => (Some(field.to_string()), None),
        _ => (None, None),
    };
    json!({
        "error": kind(err),
        "message": err.to_string(),
        "file": config_path.map(|p| p.display().to_string()),
        "field": field,
        "line": line,
        "exit_code": exit_code(err),
    })
}

/// Reads `path` and applies flag overrides.
pub fn load(args: &Args) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| Error::Config {
        field: None,
        line: None,
        message: format!("cannot read {}: {e}", args.config.display()),
    })?;
    let mut cfg = ExperimentConfig::from_toml(&text)?;
    if let Some(seed) = args.seed {
        cfg.noise.seed = seed;
    }
    if let Some(w) = args.workers {
        cfg.run.workers = Some(w);
    }
    if let Some(e) = args.experiment {
        cfg.run.experiment = e;
    }
    if let Some(d) = &args.output_dir {
        cfg.run.output_dir = Some(d.clone());
    }
    // overrides can invalidate, e.g. a corr4 experiment on too few realizations
    cfg.resolve()?;
    Ok(cfg)
}

/// Output directory: the flag, else `run.output_dir` relative to the config
/// file, else `out` next to it.
pub fn output_dir(args: &Args, cfg: &ExperimentConfig) -> PathBuf {
    let base = args.config.parent().unwrap_or(Path::new("."));
    match (&args.output_dir, &cfg.run.output_dir) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) if d.is_absolute() => d.clone(),
        (None, Some(d)) => base.join(d),
        (None, None) => base.join("out"),
    }
}

/// Full command: parse, run, report. Returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = load(&args).and_then(|cfg| {
        let dir = output_dir(&args, &cfg);
        let workers = cfg.run.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        log::info!("running {} with {workers} workers into {}", cfg.run.experiment.name(), dir.display());
        run_with_workers(&cfg, &dir, workers)
    });
    match result {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            for f in &outcome.files {
                log::info!("wrote {}", f.display());
            }
            if outcome.passed {
                EXIT_OK
            } else {
                EXIT_INTERNAL
            }
        }
        Err(err) => {
            eprintln!("{}", error_record(&err, Some(&args.config)));
            exit_code(&err)
        }
    }
}
