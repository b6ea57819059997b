use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::error_lab::RateReport;

use super::config::ExperimentConfig;

pub const CSV_HEADER: &str = "experiment,family,scheme,gamma,beta,J,h,k,n_paths,seed,error_kind,error_value,std_error";

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub experiment: String,
    pub family: String,
    pub scheme: String,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub j: Option<usize>,
    pub h: Option<f64>,
    pub k: Option<f64>,
    pub n_paths: usize,
    pub seed: u64,
    pub error_kind: String,
    pub error_value: f64,
    pub std_error: Option<f64>,
}

/// A rate fit with a label such as `k_sweep` or `h_sweep_deterministic`.
#[derive(Clone, Debug, Serialize)]
pub struct NamedRate {
    pub name: String,
    pub report: RateReport,
}

/// A non-rate assertion: `value <= bound` unless stated otherwise by the name.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Check {
        Check { name: name.into(), value, bound, pass: value <= bound }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Check {
        Check { name: name.into(), value, bound, pass: value >= bound }
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Check {
        let name = format!("{} in [{lo}, {hi}]", name.into());
        Check { name, value, bound: hi, pass: value >= lo && value <= hi }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub experiment: String,
    pub theorem: String,
    pub config: ExperimentConfig,
    pub rates: Vec<NamedRate>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl Summary {
    pub fn rate(&self, name: &str) -> Option<&RateReport> {
        self.rates.iter().find(|r| r.name == name).map(|r| &r.report)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub rows: Vec<Row>,
    pub summary: Summary,
}

/// Shortest representation that parses back to the same double.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn opt<T, F: Fn(&T) -> String>(v: &Option<T>, f: F) -> String {
    v.as_ref().map(f).unwrap_or_default()
}

pub fn csv_string(rows: &[Row]) -> String {
    let mut s = String::with_capacity(128 * (rows.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.experiment,
            r.family,
            r.scheme,
            opt(&r.gamma, |x| fmt_f64(*x)),
            opt(&r.beta, |x| fmt_f64(*x)),
            opt(&r.j, |x| x.to_string()),
            opt(&r.h, |x| fmt_f64(*x)),
            opt(&r.k, |x| fmt_f64(*x)),
            r.n_paths,
            r.seed,
            r.error_kind,
            fmt_f64(r.error_value),
            opt(&r.std_error, |x| fmt_f64(*x)),
        );
    }
    s
}

/// Writes through a temporary file in the same directory and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes `<prefix>.csv` and `<prefix>.json`.
pub fn write_output(prefix: &Path, out: &ExperimentOutput) -> Result<()> {
    let csv = prefix.with_extension("csv");
    let json = prefix.with_extension("json");
    write_atomic(&csv, csv_string(&out.rows).as_bytes())?;
    let mut text = serde_json::to_string_pretty(&out.summary).map_err(|e| crate::Error::Config(e.to_string()))?;
    text.push('\n');
    write_atomic(&json, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn floats_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let s = fmt_f64(x);
            prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
            prop_assert!(!s.contains(','));
        }
    }

    #[test]
    fn csv_layout() {
        let r = Row {
            experiment: "temporal_weak".into(),
            family: "wave".into(),
            scheme: "backward_euler".into(),
            gamma: Some(0.25),
            beta: Some(0.75),
            j: Some(1024),
            h: None,
            k: Some(0.7 / 16.0),
            n_paths: 0,
            seed: 3,
            error_kind: "weak_exact".into(),
            error_value: 1.25e-7,
            std_error: None,
        };
        let s = csv_string(&[r]);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "temporal_weak,wave,backward_euler,0.25,0.75,1024,,0.04375,0,3,weak_exact,1.25e-7,");
        assert!(!s.contains('\r'));
    }

    #[test]
    fn atomic_write_replaces() {
        let d = tempfile::tempdir().unwrap();
        let p = d.path().join("x.csv");
        write_atomic(&p, b"a").unwrap();
        write_atomic(&p, b"bb").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"bb");
        assert_eq!(std::fs::read_dir(d.path()).unwrap().count(), 1);
    }
}
