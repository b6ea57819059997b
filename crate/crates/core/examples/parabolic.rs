//! Stochastic heat and linearized Cahn-Hilliard-Cook equations: weak rates
//! in h and k from the config-driven experiment runner.
//!
//! cargo run --release --example parabolic

use ratelab::cli::{run_experiment, ExperimentConfig, ExperimentKind};

fn main() -> ratelab::Result<()> {
    for kind in [ExperimentKind::HeatWeak, ExperimentKind::ChcWeak] {
        let cfg = ExperimentConfig::new(kind);
        let out = run_experiment(&cfg)?;
        println!("{} ({})", kind.name(), kind.theorem());
        for r in &out.summary.rates {
            let rep = &r.report;
            println!(
                "  {:<24} slope {:.3}  expected {:.3}  R^2 {:.4}  {:?} fit  {}",
                r.name,
                rep.slope,
                rep.expected.unwrap_or(f64::NAN),
                rep.r_squared,
                rep.model,
                if rep.pass == Some(true) { "within tolerance" } else { "outside tolerance" }
            );
        }
        for n in &out.summary.notes {
            println!("  note: {n}");
        }
    }
    Ok(())
}
