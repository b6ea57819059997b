//! Config-driven experiment runner: `run`, `verify-all` and `list-experiments`.

pub mod config;
pub mod experiments;
pub mod output;

use std::path::Path;

use crate::error::{Error, Result};
use crate::verify;

pub use config::{ExperimentConfig, ExperimentKind, FunctionalChoice, Sweep};
pub use experiments::run_experiment;
pub use output::{csv_string, write_atomic, write_output, Check, ExperimentOutput, NamedRate, Row, Summary};

/// Process exit code for an error: 2 for rejected input, 3 for numerical failure.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::Config(_) | Error::Precondition(_) | Error::Unsupported(_) | Error::FrameMismatch(_) => 2,
        Error::Numerical(_) | Error::SingularStep(_) => 3,
        Error::Io(_) => 1,
    }
}

/// Runs one config and writes `<output>.csv` and `<output>.json`; the
/// output prefix defaults to `<config stem>_out` next to the config.
pub fn run_config_file(path: &Path) -> Result<ExperimentOutput> {
    let cfg = ExperimentConfig::load(path)?;
    let prefix = cfg.output.as_ref().map(Into::into).unwrap_or_else(|| {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        path.with_file_name(format!("{stem}_out"))
    });
    let out = run_experiment(&cfg)?;
    write_output(&prefix, &out)?;
    Ok(out)
}

pub fn list_experiments() -> String {
    let mut s = String::new();
    for k in ExperimentKind::ALL {
        s.push_str(&format!("{:<16} {}\n", k.name(), k.theorem()));
    }
    s
}

/// Runs every acceptance criterion, writing each experiment's CSV and JSON
/// plus `verify_summary.json` under `out`.
pub fn verify_all(out: &Path, seed: u64, mut progress: impl FnMut(&verify::CriterionOutcome)) -> Result<Vec<verify::CriterionOutcome>> {
    std::fs::create_dir_all(out)?;
    let mut outcomes = Vec::new();
    for id in verify::CRITERIA {
        let (outcome, outputs) = verify::run_criterion(id, seed)?;
        for (label, o) in &outputs {
            write_output(&out.join(label), o)?;
        }
        progress(&outcome);
        outcomes.push(outcome);
    }
    let mut text = serde_json::to_string_pretty(&outcomes).map_err(|e| Error::Config(e.to_string()))?;
    text.push('\n');
    write_atomic(&out.join("verify_summary.json"), text.as_bytes())?;
    Ok(outcomes)
}
