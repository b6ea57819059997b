//! Least-squares rate fits on synthetic data, plain and log-corrected.
//!
//! cargo run --release --example rate_fitting

use ratelab::error_lab::{fit_rate, RateModel, RatePoint};

fn main() -> ratelab::Result<()> {
    let t: f64 = 0.7;
    let h: f64 = 1.0 / 64.0;
    let mut plain = Vec::new();
    let mut logged = Vec::new();
    for l in 4..12 {
        let k = t * 2f64.powi(-l);
        let w = (t / (h.powi(4) + k)).ln();
        // deterministic 1% wobble
        let wobble = 1.0 + 0.01 * ((l as f64) * 1.7).sin();
        plain.push(RatePoint::new(k, 2.0 * k.powf(0.75) * wobble));
        logged.push(RatePoint::with_log(k, 3.0 * k.sqrt() * w, w));
    }
    let r = fit_rate(&plain, RateModel::Plain)?.judge(0.75, 0.02);
    println!("k^0.75 with wobble: slope {:.4}, R^2 {:.6}, pass {:?}", r.slope, r.r_squared, r.pass);
    let raw = fit_rate(&logged, RateModel::Plain)?;
    let corr = fit_rate(&logged, RateModel::LogCorrected)?;
    println!("k^0.5 log(T/(h^4+k)): plain slope {:.4}, log-corrected slope {:.4}", raw.slope, corr.slope);
    let short = fit_rate(&[RatePoint::new(1.0, 1.0), RatePoint::new(2.0, 4.0)], RateModel::Plain)?;
    println!("two points: slope {:.1}, adequate design {}", short.slope, short.adequate_design);
    let json = serde_json::to_string_pretty(&r).expect("serializable");
    println!("{}", json.lines().take(6).collect::<Vec<_>>().join("\n"));
    Ok(())
}
