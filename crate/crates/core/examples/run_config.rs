//! Runs an experiment from a JSON config and writes the CSV rows and the
//! JSON summary, the same path the `ratelab run` command takes.
//!
//! cargo run --release --example run_config [config.json]

use std::path::PathBuf;

use ratelab::cli::{run_config_file, ExperimentConfig};

fn main() -> ratelab::Result<()> {
    let path = match std::env::args().nth(1) {
        Some(p) => PathBuf::from(p),
        None => {
            let dir = std::env::temp_dir().join("ratelab_example");
            std::fs::create_dir_all(&dir)?;
            let p = dir.join("temporal_strong.json");
            let text = r#"{
  "experiment": "temporal_strong",
  "scheme": "crank_nicolson",
  "gamma": 0.25,
  "j_ref": 64,
  "k_levels": [3, 6],
  "n_paths": 2000,
  "seed": 3
}"#;
            std::fs::write(&p, text)?;
            p
        }
    };
    let cfg = ExperimentConfig::load(&path)?;
    println!("{}", serde_json::to_string(&cfg).expect("serializable"));
    let out = run_config_file(&path)?;
    for row in &out.rows {
        println!("  k {:<10.4e} {:<12} {:.6e}", row.k.unwrap_or(f64::NAN), row.error_kind, row.error_value);
    }
    for c in &out.summary.checks {
        println!("  {}: {:.3e} <= {:.3e} {}", c.name, c.value, c.bound, c.pass);
    }
    let stem = path.file_stem().unwrap().to_string_lossy();
    println!("wrote {}", path.with_file_name(format!("{stem}_out.csv")).display());
    Ok(())
}
