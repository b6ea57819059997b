//! The acceptance suite: one function per criterion, shared by the
//! `verify-all` command and the acceptance test target.

use serde::Serialize;

use crate::cli::config::{ExperimentConfig, ExperimentKind, FunctionalChoice, Sweep};
use crate::cli::experiments::run_experiment;
use crate::cli::output::{csv_string, ExperimentOutput, NamedRate};
use crate::error::Result;
use crate::schemes::Preset;

pub const CRITERIA: [u32; 12] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12];

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub title: String,
    pub pass: bool,
    pub details: Vec<String>,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!("criterion {:>2} {}: {}", self.id, if self.pass { "PASS" } else { "FAIL" }, self.title)
    }
}

pub type Labelled = Vec<(String, ExperimentOutput)>;

fn cfg(kind: ExperimentKind, seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(kind);
    c.seed = seed;
    c
}

fn with_scheme(mut c: ExperimentConfig, p: Preset) -> ExperimentConfig {
    c.scheme = Some(p);
    c
}

fn rate_line(label: &str, r: &NamedRate) -> String {
    let rep = &r.report;
    let exp = match (rep.expected, rep.tolerance) {
        (Some(e), Some(t)) => format!("expected {e:.4} +- {t:.2}"),
        (Some(e), None) => format!("expected >= {e:.4}"),
        _ => "no expectation".into(),
    };
    format!(
        "{label} {}: slope {:.4} ({exp}, R^2 {:.4}, {} points) {}",
        r.name,
        rep.slope,
        rep.r_squared,
        rep.points.len() - rep.excluded_zero,
        match rep.pass {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "-",
        }
    )
}

fn summarize(outputs: &Labelled, details: &mut Vec<String>) -> bool {
    let mut ok = true;
    for (label, o) in outputs {
        for r in &o.summary.rates {
            details.push(rate_line(label, r));
        }
        for c in &o.summary.checks {
            details.push(format!(
                "{label} {}: {:.4e} vs {:.4e} {}",
                c.name,
                c.value,
                c.bound,
                if c.pass { "pass" } else { "FAIL" }
            ));
        }
        ok &= o.summary.pass;
    }
    ok
}

fn run_all(cfgs: Vec<(String, ExperimentConfig)>) -> Result<Labelled> {
    cfgs.into_iter().map(|(l, c)| Ok((l, run_experiment(&c)?))).collect()
}

fn slope(outputs: &Labelled, label: &str, rate: &str) -> f64 {
    outputs
        .iter()
        .find(|(l, _)| l == label)
        .and_then(|(_, o)| o.summary.rate(rate))
        .map(|r| r.slope)
        .unwrap_or(f64::NAN)
}

fn extra(details: &mut Vec<String>, name: &str, value: f64, pass: bool) -> bool {
    details.push(format!("{name}: {value:.4} {}", if pass { "pass" } else { "FAIL" }));
    pass
}

pub fn title(id: u32) -> &'static str {
    match id {
        1 => "trace identity to 1e-12",
        2 => "operator-noise inequality chain and diagonal equalities",
        3 => "Hoelder moduli of the wave group",
        4 => "deterministic semigroup error rates",
        5 => "temporal weak rate, wave",
        6 => "temporal strong rate, wave, and weak/strong ratio",
        7 => "fully discrete weak rate, wave",
        8 => "fully discrete strong rate, wave",
        9 => "linearized Cahn-Hilliard-Cook weak rate",
        10 => "stochastic heat equation rates",
        11 => "weak error representation for quadratic functionals",
        12 => "Monte Carlo closure and reproducibility",
        _ => "unknown criterion",
    }
}

/// Configurations run by criterion `id`, labelled for output files.
pub fn criterion_configs(id: u32, seed: u64) -> Vec<(String, ExperimentConfig)> {
    use ExperimentKind::*;
    use Preset::{BackwardEuler as Be, CrankNicolson as Cn};
    let l = |s: &str| s.to_string();
    match id {
        1 => vec![(l("trace_identity"), cfg(TraceIdentity, seed))],
        2 => vec![(l("aq_check"), cfg(AqCheck, seed))],
        3 => vec![(l("holder"), cfg(Holder, seed))],
        4 => [(Be, 1.0), (Be, 2.0), (Cn, 1.0), (Cn, 1.5)]
            .into_iter()
            .map(|(p, a)| {
                let mut c = with_scheme(cfg(DetSemigroup, seed), p);
                c.alpha = Some(a);
                (format!("det_semigroup_{}_alpha{a}", p.name()), c)
            })
            .collect(),
        5 | 6 => {
            let mut v: Vec<(String, ExperimentConfig)> = [Be, Cn]
                .into_iter()
                .map(|p| (format!("temporal_weak_{}", p.name()), with_scheme(cfg(TemporalWeak, seed), p)))
                .collect();
            if id == 6 {
                v.extend(
                    [Be, Cn].into_iter().map(|p| (format!("temporal_strong_{}", p.name()), with_scheme(cfg(TemporalStrong, seed), p))),
                );
            }
            v
        }
        7 | 8 => {
            let kind = if id == 7 { FullWeak } else { FullStrong };
            let mut be = with_scheme(cfg(kind, seed), Be);
            be.sweep = Some(Sweep::K);
            vec![
                (format!("{}_crank_nicolson", kind.name()), with_scheme(cfg(kind, seed), Cn)),
                (format!("{}_backward_euler_k", kind.name()), be),
            ]
        }
        9 => vec![(l("chc_weak"), cfg(ChcWeak, seed))],
        10 => vec![(l("heat_weak"), cfg(HeatWeak, seed))],
        11 => vec![(l("representation"), cfg(Representation, seed))],
        12 => mc_configs(seed),
        _ => vec![],
    }
}

/// Reduced sizes with `n_paths = 10^4` for every kind that has a Monte Carlo estimator.
pub fn mc_configs(seed: u64) -> Vec<(String, ExperimentConfig)> {
    use ExperimentKind::*;
    use Preset::{BackwardEuler as Be, CrankNicolson as Cn};
    let mk = |kind: ExperimentKind, p: Preset, sweep: Option<Sweep>, pinned: Option<u32>, f: FunctionalChoice| {
        let mut c = with_scheme(cfg(kind, seed), p);
        c.j_ref = Some(32);
        c.n_paths = 10_000;
        c.k_levels = Some([2, 4]);
        c.h_levels = Some([2, 4]);
        c.sweep = sweep;
        c.pinned_level = pinned;
        c.functional = Some(f);
        c
    };
    vec![
        ("mc_temporal_weak_backward_euler".into(), mk(TemporalWeak, Be, None, None, FunctionalChoice::Sine)),
        ("mc_temporal_weak_crank_nicolson".into(), mk(TemporalWeak, Cn, None, None, FunctionalChoice::GaussExp)),
        ("mc_temporal_strong_crank_nicolson".into(), mk(TemporalStrong, Cn, None, None, FunctionalChoice::Sine)),
        ("mc_full_weak_crank_nicolson".into(), mk(FullWeak, Cn, Some(Sweep::H), Some(5), FunctionalChoice::Sine)),
        ("mc_full_strong_backward_euler".into(), mk(FullStrong, Be, Some(Sweep::K), Some(3), FunctionalChoice::Sine)),
        ("mc_chc_weak_backward_euler".into(), mk(ChcWeak, Be, Some(Sweep::K), Some(3), FunctionalChoice::Sine)),
        ("mc_heat_weak_backward_euler".into(), mk(HeatWeak, Be, Some(Sweep::H), Some(5), FunctionalChoice::GaussExp)),
    ]
}

pub fn run_criterion(id: u32, seed: u64) -> Result<(CriterionOutcome, Labelled)> {
    let outputs = run_all(criterion_configs(id, seed))?;
    let mut details = Vec::new();
    let pass = match id {
        5 => {
            let ok = summarize(&outputs, &mut details);
            let gap = slope(&outputs, "temporal_weak_crank_nicolson", "k_sweep")
                - slope(&outputs, "temporal_weak_backward_euler", "k_sweep");
            ok & extra(&mut details, "crank_nicolson slope minus backward_euler slope (>= 0.15)", gap, gap >= 0.15)
        }
        6 => {
            let weak_be = slope(&outputs, "temporal_weak_backward_euler", "k_sweep");
            let weak_cn = slope(&outputs, "temporal_weak_crank_nicolson", "k_sweep");
            let (strong_only, _): (Labelled, Labelled) = outputs.iter().cloned().partition(|(l, _)| l.starts_with("temporal_strong"));
            let mut ok = summarize(&strong_only, &mut details);
            for (name, w) in [("backward_euler", weak_be), ("crank_nicolson", weak_cn)] {
                let ratio = w / slope(&outputs, &format!("temporal_strong_{name}"), "k_sweep");
                ok &= extra(&mut details, &format!("{name} weak/strong slope ratio (in [1.8, 2.2])"), ratio, (1.8..=2.2).contains(&ratio));
            }
            ok
        }
        12 => {
            // closure checks only
            let mut ok = true;
            for (label, o) in &outputs {
                for c in o.summary.checks.iter().filter(|c| c.name.contains("closure")) {
                    details.push(format!("{label} {}: |mc - exact| {:.3e} vs 3 SE {:.3e} {}", c.name, c.value, c.bound, if c.pass { "pass" } else { "FAIL" }));
                    ok &= c.pass;
                }
            }
            let (label, c) = &mc_configs(seed)[0];
            let again = run_experiment(c)?;
            let first = outputs.iter().find(|(l, _)| l == label).map(|(_, o)| csv_string(&o.rows)).unwrap_or_default();
            let same = first == csv_string(&again.rows);
            ok & extra(&mut details, &format!("{label} rerun byte-identical CSV"), same as u8 as f64, same)
        }
        _ => summarize(&outputs, &mut details),
    };
    Ok((CriterionOutcome { id, title: title(id).into(), pass, details }, outputs))
}
