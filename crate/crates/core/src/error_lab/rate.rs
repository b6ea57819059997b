use serde::Serialize;

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatePoint {
    /// `k` or `h`.
    pub resolution: f64,
    pub error: f64,
    /// Divisor applied by the log-corrected fit, e.g. `log(T / (h^4 + k))`.
    pub log_weight: Option<f64>,
}

impl RatePoint {
    pub fn new(resolution: f64, error: f64) -> Self {
        RatePoint { resolution, error, log_weight: None }
    }

    pub fn with_log(resolution: f64, error: f64, log_weight: f64) -> Self {
        RatePoint { resolution, error, log_weight: Some(log_weight) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateModel {
    /// `log e = c + r log x`.
    Plain,
    /// `log(e / w) = c + r log x` with the per-point log weight `w`.
    LogCorrected,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateReport {
    pub model: RateModel,
    pub points: Vec<RatePoint>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Points dropped because their error was exactly zero.
    pub excluded_zero: usize,
    /// At least four points spanning at least three dyadic levels.
    pub adequate_design: bool,
    pub expected: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
}

/// Least-squares fit of the observed order on log-log axes.
pub fn fit_rate(points: &[RatePoint], model: RateModel) -> Result<RateReport> {
    if points.iter().any(|p| !(p.resolution > 0.0) || !(p.error >= 0.0) || !p.error.is_finite()) {
        return invalid("rate points need positive resolution and finite nonnegative error");
    }
    let used: Vec<RatePoint> = points.iter().copied().filter(|p| p.error > 0.0).collect();
    if used.len() < 2 {
        return invalid("need at least two nonzero errors to fit a rate");
    }
    if model == RateModel::LogCorrected && used.iter().any(|p| !p.log_weight.is_some_and(|w| w > 0.0)) {
        return invalid("log-corrected fit needs a positive log weight on every point");
    }
    let xs: Vec<f64> = used.iter().map(|p| p.resolution.ln()).collect();
    let ys: Vec<f64> = used
        .iter()
        .zip(&xs)
        .map(|(p, _)| match model {
            RateModel::Plain => p.error.ln(),
            RateModel::LogCorrected => p.error.ln() - p.log_weight.unwrap_or(1.0).ln(),
        })
        .collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return invalid("resolutions must not all coincide");
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    let (lo, hi) = used.iter().fold((f64::INFINITY, 0f64), |(a, b), p| (a.min(p.resolution), b.max(p.resolution)));
    Ok(RateReport {
        model,
        points: points.to_vec(),
        slope,
        intercept: my - slope * mx,
        r_squared,
        excluded_zero: points.len() - used.len(),
        adequate_design: used.len() >= 4 && hi / lo >= 8.0 * (1.0 - 1e-12),
        expected: None,
        tolerance: None,
        pass: None,
    })
}

impl RateReport {
    /// Pass iff `|slope - expected| <= tol` on an adequate design.
    pub fn judge(mut self, expected: f64, tol: f64) -> RateReport {
        self.pass = Some(self.adequate_design && (self.slope - expected).abs() <= tol);
        self.expected = Some(expected);
        self.tolerance = Some(tol);
        self
    }

    /// Pass iff the slope is at least `floor` on an adequate design.
    pub fn judge_at_least(mut self, floor: f64) -> RateReport {
        self.pass = Some(self.adequate_design && self.slope >= floor);
        self.expected = Some(floor);
        self.tolerance = None;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(v: &[(f64, f64)]) -> Vec<RatePoint> {
        v.iter().map(|&(resolution, error)| RatePoint::new(resolution, error)).collect()
    }

    #[test]
    fn two_points() {
        let r = fit_rate(&pts(&[(1.0, 1.0), (2.0, 4.0)]), RateModel::Plain).unwrap();
        assert!((r.slope - 2.0).abs() < 1e-14);
        assert!(!r.adequate_design);
    }

    #[test]
    fn zeros_are_excluded() {
        let r = fit_rate(&pts(&[(0.5, 0.0), (0.25, 0.1), (0.125, 0.05)]), RateModel::Plain).unwrap();
        assert_eq!(r.excluded_zero, 1);
        assert!((r.slope - 1.0).abs() < 1e-12);
        assert!(fit_rate(&pts(&[(0.5, 0.0), (0.25, 0.1)]), RateModel::Plain).is_err());
    }

    #[test]
    fn log_corrected_recovers_exponent() {
        let (t, h): (f64, f64) = (0.7, 1.0 / 64.0);
        let v: Vec<RatePoint> = (4..12)
            .map(|l| {
                let k = t * 2f64.powi(-l);
                let w = (t / (h.powi(4) + k)).ln();
                RatePoint::with_log(k, 3.0 * k.sqrt() * w, w)
            })
            .collect();
        let r = fit_rate(&v, RateModel::LogCorrected).unwrap();
        assert!((r.slope - 0.5).abs() < 1e-12);
        let p = fit_rate(&v, RateModel::Plain).unwrap();
        assert!(p.slope < 0.45);
        assert!(r.adequate_design);
        assert!(fit_rate(&pts(&[(0.1, 1.0), (0.05, 0.5)]), RateModel::LogCorrected).is_err());
    }

    #[test]
    fn jittered_power_law() {
        use crate::noise::{stream_id, Domain, NormalStream};
        let mut z = NormalStream::new(11, stream_id(Domain::Auxiliary1, 0, 0), 0);
        let v: Vec<RatePoint> = (4..12)
            .map(|l| {
                let k = 2f64.powi(-l);
                RatePoint::new(k, k.powf(0.75) * (1.0 + 0.01 * z.next()))
            })
            .collect();
        let r = fit_rate(&v, RateModel::Plain).unwrap();
        assert!((r.slope - 0.75).abs() < 0.02);
        assert!(r.r_squared > 0.999);
    }

    #[test]
    fn negative_errors_are_invalid() {
        assert!(fit_rate(&pts(&[(0.5, -1.0), (0.25, 0.1), (0.125, 0.05)]), RateModel::Plain).is_err());
    }

    proptest! {
        #[test]
        fn exact_power_laws(c in 0.01f64..100.0, r in -1.0f64..3.0, l0 in 1i32..6) {
            let v: Vec<(f64, f64)> = (l0..l0 + 5).map(|l| { let x = 2f64.powi(-l); (x, c * x.powf(r)) }).collect();
            let rep = fit_rate(&pts(&v), RateModel::Plain).unwrap();
            prop_assert!((rep.slope - r).abs() < 1e-9);
            prop_assert!((rep.intercept - c.ln()).abs() < 1e-8);
            prop_assert!(rep.adequate_design);
            let j = rep.judge(r + 0.05, 0.1);
            prop_assert_eq!(j.pass, Some(true));
        }
    }
}
