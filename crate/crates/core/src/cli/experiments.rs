//! One runner per experiment kind. Each returns CSV rows and a summary with
//! rate fits judged against the theorem's exponent and any pointwise checks.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::error_lab::{
    fit_rate, representation_check, strong_error_exact, strong_error_mc, temporal_joint, weak_error_exact,
    weak_error_fem, weak_error_mc, FunctionalKind, Propagator, RateModel, RatePoint, Selector,
    StrongNorm, TestFunctional,
};
use crate::error_lab::functional::select;
use crate::fem1d::{fully_discrete_law, FemDiscretization};
use crate::models::{admissibility, beta_sup, holder_check, mild_law, trace_identity_check, Family, GaussianLaw, ModelSpec};
use crate::noise::{stream_id, Domain, NormalStream};
use crate::schemes::{discrete_law, interpolated_error_sup, DiscreteLawRequest, Preset, RationalScheme, SampleMode, Space};
use crate::spectral_core::{build_basis, check_aq, Bc, CovarianceSpec, EigenBasis};

use super::config::{ExperimentConfig, ExperimentKind, FunctionalChoice, Sweep};
use super::output::{Check, ExperimentOutput, NamedRate, Row, Summary};

/// Convergence order of linear finite elements.
pub const FEM_ORDER: f64 = 2.0;

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let (rows, rates, checks, notes) = match cfg.experiment {
        ExperimentKind::TraceIdentity => trace_identity(cfg)?,
        ExperimentKind::AqCheck => aq(cfg)?,
        ExperimentKind::Holder => holder(cfg)?,
        ExperimentKind::DetSemigroup => det_semigroup(cfg)?,
        ExperimentKind::TemporalWeak => temporal(cfg, false)?,
        ExperimentKind::TemporalStrong => temporal(cfg, true)?,
        ExperimentKind::FullWeak => full(cfg, false)?,
        ExperimentKind::FullStrong => full(cfg, true)?,
        ExperimentKind::ChcWeak => parabolic(cfg, Family::Chc)?,
        ExperimentKind::HeatWeak => parabolic(cfg, Family::Heat)?,
        ExperimentKind::Representation => representation(cfg)?,
    };
    let pass = rates.iter().all(|r| r.report.pass != Some(false)) && checks.iter().all(|c| c.pass);
    Ok(ExperimentOutput {
        rows,
        summary: Summary {
            experiment: cfg.experiment.name().into(),
            theorem: cfg.experiment.theorem().into(),
            config: cfg.clone(),
            rates,
            checks,
            notes,
            pass,
        },
    })
}

type Parts = (Vec<Row>, Vec<NamedRate>, Vec<Check>, Vec<String>);

struct Ctx {
    experiment: &'static str,
    family: String,
    scheme: String,
    gamma: Option<f64>,
    beta: Option<f64>,
    j: Option<usize>,
    seed: u64,
}

impl Ctx {
    fn new(cfg: &ExperimentConfig, family: Option<Family>, scheme: Option<&RationalScheme>) -> Ctx {
        Ctx {
            experiment: cfg.experiment.name(),
            family: family.map(|f| f.name().to_string()).unwrap_or_default(),
            scheme: scheme.map(|s| s.name.clone()).unwrap_or_default(),
            gamma: None,
            beta: None,
            j: None,
            seed: cfg.seed,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn row(&self, h: Option<f64>, k: Option<f64>, n_paths: usize, kind: &str, value: f64, se: Option<f64>) -> Row {
        Row {
            experiment: self.experiment.into(),
            family: self.family.clone(),
            scheme: self.scheme.clone(),
            gamma: self.gamma,
            beta: self.beta,
            j: self.j,
            h,
            k,
            n_paths,
            seed: self.seed,
            error_kind: kind.into(),
            error_value: value,
            std_error: se,
        }
    }
}

fn levels(range: [u32; 2], what: &str) -> Result<Vec<u32>> {
    if range[0] > range[1] || range[1] > 40 {
        return invalid(format!("{what} levels must satisfy lo <= hi <= 40"));
    }
    Ok((range[0]..=range[1]).collect())
}

/// Checks the configured regularity index against the trace condition and
/// returns `(beta, beta_sup)`.
fn resolve_beta(cfg: &ExperimentConfig, family: Family, q: &CovarianceSpec, basis: &EigenBasis) -> Result<(f64, f64)> {
    let gamma = match q {
        CovarianceSpec::Family { gamma } => *gamma,
        _ => return Err(Error::Unsupported("experiments use the lambda^-gamma noise family".into())),
    };
    let sup = beta_sup(family, gamma);
    let beta = cfg.beta.unwrap_or(sup - 0.05);
    let tc = admissibility(family, q, basis, beta)?;
    if tc.divergent {
        return Err(Error::Precondition(format!(
            "beta = {beta} is not admissible for {} with gamma = {gamma}: the trace condition diverges; {}",
            family.name(),
            tc.diagnostic()
        )));
    }
    if beta > sup - 0.05 + 1e-12 {
        return Err(Error::Precondition(format!(
            "beta = {beta} is within 0.05 of the admissible supremum {sup} for gamma = {gamma}; {}",
            tc.diagnostic()
        )));
    }
    Ok((beta, sup))
}

fn functional(cfg: &ExperimentConfig, model: &ModelSpec, default: FunctionalChoice) -> TestFunctional {
    let per = model.family.per_mode();
    let decay = cfg.psi_decay.unwrap_or(0.0);
    let w: Vec<f64> = (1..=model.modes()).map(|j| (j as f64).powf(-decay)).collect();
    let psi = select(&w, per, Selector::FirstComponent).expect("first component exists");
    let probes = DMatrix::from_row_slice(1, psi.len(), psi.as_slice());
    let frame = model.frame();
    let one = DMatrix::from_element(1, 1, 1.0);
    match cfg.functional.unwrap_or(default) {
        FunctionalChoice::Sine => TestFunctional { kind: FunctionalKind::Sine { phase: FRAC_PI_2 }, probes, frame },
        FunctionalChoice::GaussExp => TestFunctional { kind: FunctionalKind::GaussExp { m: one }, probes, frame },
        FunctionalChoice::GaussNorm => {
            let n = model.modes();
            let mut sel = DMatrix::zeros(n, n * per);
            for j in 0..n {
                sel[(j, per * j)] = w[j];
            }
            TestFunctional { kind: FunctionalKind::GaussExp { m: DMatrix::identity(n, n) }, probes: sel, frame }
        }
        FunctionalChoice::Quadratic => {
            TestFunctional { kind: FunctionalKind::Quadratic { m: one, lin: DVector::zeros(1) }, probes, frame }
        }
    }
}

fn judged(name: &str, points: &[RatePoint], model: RateModel, expected: f64, tol: f64) -> Result<NamedRate> {
    Ok(NamedRate { name: name.into(), report: fit_rate(points, model)?.judge(expected, tol) })
}

fn mc_check(name: String, mc: f64, se: f64, exact: f64) -> Check {
    // pass iff |mc - exact| <= 3 se
    let dev = (mc - exact).abs();
    Check { name, value: dev, bound: 3.0 * se, pass: dev <= 3.0 * se }
}

fn trace_identity(cfg: &ExperimentConfig) -> Result<Parts> {
    let mut ctx = Ctx::new(cfg, Some(Family::Wave), None);
    let mut rows = Vec::new();
    let mut worst = 0f64;
    for gamma in [0.0, cfg.gamma_or(0.25)] {
        for j in [16usize, 256] {
            let basis = build_basis(Bc::Dirichlet, j)?;
            for t in [0.5, 1.0, 2.0] {
                let r = trace_identity_check(&CovarianceSpec::Family { gamma }, &basis, t)?;
                let rel = r.abs_diff / r.rhs.abs().max(1e-300);
                worst = worst.max(rel);
                ctx.gamma = Some(gamma);
                ctx.j = Some(j);
                rows.push(ctx.row(None, None, 0, &format!("trace_identity_rel_diff_T{t}"), rel, None));
            }
        }
    }
    Ok((rows, vec![], vec![Check::at_most("max relative difference", worst, 1e-12)], vec![]))
}

fn aq(cfg: &ExperimentConfig) -> Result<Parts> {
    let n_diag = cfg.cases.unwrap_or(100);
    let n_dense = n_diag.div_ceil(5);
    let ctx = Ctx::new(cfg, None, None);
    let mut rows = Vec::new();
    let (mut ineq_fail, mut eq_fail) = (0usize, 0usize);
    for case in 0..n_diag + n_dense {
        let mut u = NormalStream::new(cfg.seed, stream_id(Domain::Auxiliary1, case as u64, 0), 0);
        let dense = case >= n_diag;
        let j = if dense { 3 + (u.next_uniform() * 22.0) as usize } else { 4 + (u.next_uniform() * 60.0) as usize };
        let s = -1.5 + 2.0 * u.next_uniform();
        let alpha = 0.55 + 1.45 * u.next_uniform();
        let gamma = 2.0 * u.next_uniform();
        let basis = build_basis(Bc::Dirichlet, j)?;
        let q = if dense {
            let mut z = NormalStream::new(cfg.seed, stream_id(Domain::Auxiliary2, case as u64, 0), 0);
            let a = DMatrix::from_fn(j, j, |r, _| z.next() * basis.lambdas[r].powf(-0.5 * gamma));
            let m = &a * a.transpose() / j as f64;
            CovarianceSpec::Dense((&m + m.transpose()) * 0.5)
        } else {
            let mut z = NormalStream::new(cfg.seed, stream_id(Domain::Auxiliary2, case as u64, 0), 0);
            CovarianceSpec::Diagonal(basis.lambdas.iter().map(|l| z.next().exp() * l.powf(-gamma)).collect())
        };
        let r = check_aq(&q, &basis, s, alpha)?;
        let slack = [r.mids[0] - r.lhs, r.mids[1] - r.mids[0], r.rhs - r.lhs]
            .iter()
            .zip([r.mids[0], r.mids[1], r.rhs])
            .map(|(d, b)| d / b.abs().max(1e-300))
            .fold(f64::INFINITY, f64::min);
        if !r.all_inequalities_hold {
            ineq_fail += 1;
        }
        if !dense && !(r.equality_flags[0] && r.equality_flags[1]) {
            eq_fail += 1;
        }
        let mut c = ctx.row(None, None, 0, if dense { "aq_min_rel_slack_dense" } else { "aq_min_rel_slack_diagonal" }, slack, None);
        c.j = Some(j);
        rows.push(c);
    }
    let checks = vec![
        Check::at_most("cases violating the inequality chain", ineq_fail as f64, 0.0),
        Check::at_most("diagonal cases without exact equalities", eq_fail as f64, 0.0),
    ];
    Ok((rows, vec![], checks, vec![format!("{n_diag} diagonal and {n_dense} dense covariances")]))
}

fn holder(cfg: &ExperimentConfig) -> Result<Parts> {
    let j = cfg.j_ref.unwrap_or(256);
    let basis = build_basis(Bc::Dirichlet, j)?;
    let cases = cfg.cases.unwrap_or(1000);
    let mut ctx = Ctx::new(cfg, Some(Family::Wave), None);
    ctx.j = Some(j);
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for (ai, (alpha, bound)) in [(0.0, 2.0), (0.5, 2f64.powf(1.25)), (1.0, 8f64.sqrt())].into_iter().enumerate() {
        let mut u = NormalStream::new(cfg.seed, stream_id(Domain::Auxiliary1, ai as u64, 1), 0);
        let mut worst = 0f64;
        for _ in 0..cases {
            let t = 2.0 * u.next_uniform();
            let s = 2.0 * u.next_uniform();
            worst = worst.max(holder_check(&basis, alpha, t, s)?);
        }
        rows.push(ctx.row(None, None, 0, &format!("holder_max_ratio_alpha{alpha}"), worst, None));
        checks.push(Check::at_most(format!("max ratio, alpha = {alpha}"), worst, bound));
    }
    Ok((rows, vec![], checks, vec![]))
}

fn det_semigroup(cfg: &ExperimentConfig) -> Result<Parts> {
    let scheme = RationalScheme::preset(cfg.scheme_or(Preset::BackwardEuler));
    let alpha = cfg.alpha.unwrap_or(1.0);
    let t = cfg.t();
    let basis = build_basis(Bc::Dirichlet, cfg.j_ref())?;
    let mut ctx = Ctx::new(cfg, Some(Family::Wave), Some(&scheme));
    ctx.j = Some(basis.len());
    let mut rows = Vec::new();
    let mut pts = Vec::new();
    for l in levels(cfg.k_levels_or(4, 12), "k")? {
        let k = t * 2f64.powi(-(l as i32));
        let e = interpolated_error_sup(&scheme, k, &basis, alpha, t, SampleMode::Sup)?;
        rows.push(ctx.row(None, Some(k), 0, "semigroup_sup", e, None));
        pts.push(RatePoint::new(k, e));
    }
    let p = scheme.order as f64;
    let expected = (alpha * p / (p + 1.0)).min(1.0);
    Ok((rows, vec![judged("k_sweep", &pts, RateModel::Plain, expected, 0.10)?], vec![], vec![format!("alpha = {alpha}")]))
}

struct WaveSetup {
    scheme: RationalScheme,
    model: ModelSpec,
    beta: f64,
    beta_sup: f64,
    f: TestFunctional,
}

fn wave_setup(cfg: &ExperimentConfig) -> Result<WaveSetup> {
    if cfg.family_or(Family::Wave) != Family::Wave {
        return invalid(format!("{} runs on the wave family", cfg.experiment.name()));
    }
    let scheme = RationalScheme::preset(cfg.scheme_or(Preset::CrankNicolson));
    let q = CovarianceSpec::Family { gamma: cfg.gamma_or(0.25) };
    let basis = build_basis(Bc::Dirichlet, cfg.j_ref())?;
    let (beta, beta_sup) = resolve_beta(cfg, Family::Wave, &q, &basis)?;
    let model = ModelSpec::zero_start(Family::Wave, basis, q)?;
    let f = functional(cfg, &model, FunctionalChoice::Sine);
    Ok(WaveSetup { scheme, model, beta, beta_sup, f })
}

fn wave_ctx(cfg: &ExperimentConfig, w: &WaveSetup) -> Ctx {
    let mut ctx = Ctx::new(cfg, Some(Family::Wave), Some(&w.scheme));
    ctx.gamma = Some(cfg.gamma_or(0.25));
    ctx.beta = Some(w.beta);
    ctx.j = Some(w.model.modes());
    ctx
}

fn sup_note(beta: f64, sup: f64) -> String {
    format!("expected slopes use the admissible supremum beta = {sup} (configured beta = {beta} is the checked interior point)")
}

fn temporal(cfg: &ExperimentConfig, strong: bool) -> Result<Parts> {
    let w = wave_setup(cfg)?;
    let ctx = wave_ctx(cfg, &w);
    let t = cfg.t();
    let exact = mild_law(&w.model, t)?;
    let mut rows = Vec::new();
    let mut pts = Vec::new();
    let mut checks = Vec::new();
    for l in levels(cfg.k_levels_or(4, 12), "k")? {
        let n = 1usize << l;
        let k = t / n as f64;
        let req = DiscreteLawRequest { model: &w.model, scheme: &w.scheme, k, n, t_final: t, space: Space::Spectral };
        let signed = if strong {
            strong_error_exact(&temporal_joint(&w.model, &w.scheme, k, n, StrongNorm::First)?)?
        } else {
            weak_error_exact(&exact, &discrete_law(&req, &w.model.x0)?, &w.f)?
        };
        rows.push(ctx.row(None, Some(k), 0, if strong { "strong_exact" } else { "weak_exact" }, signed.abs(), None));
        pts.push(RatePoint::new(k, signed.abs()));
        if cfg.n_paths > 0 {
            let mc = if strong {
                strong_error_mc(&req, StrongNorm::First, cfg.n_paths, cfg.seed)?
            } else {
                weak_error_mc(&req, &w.f, cfg.n_paths, cfg.seed)?
            };
            let kind = if strong { "strong_mc" } else { "weak_mc" };
            rows.push(ctx.row(None, Some(k), cfg.n_paths, kind, mc.estimate, Some(mc.standard_error)));
            checks.push(mc_check(format!("{kind} closure at k level {l}"), mc.estimate, mc.standard_error, signed));
        }
    }
    let p = w.scheme.order as f64;
    let b = w.beta_sup;
    let (expected, tol) = if strong { ((b * p / (p + 1.0)).min(1.0), 0.08) } else { ((2.0 * b * p / (p + 1.0)).min(1.0), 0.10) };
    let rates = vec![judged("k_sweep", &pts, RateModel::Plain, expected, tol)?];
    Ok((rows, rates, checks, vec![sup_note(w.beta, w.beta_sup)]))
}

/// One fully discrete error at `(fd, k, n)`, signed for weak errors.
fn fem_error(w: &WaveSetup, fd: &FemDiscretization, exact: &GaussianLaw, k: f64, n: usize, strong: bool) -> Result<f64> {
    let fdl = fully_discrete_law(fd, &w.scheme, k, n, &w.model)?;
    if strong {
        strong_error_exact(&fdl.joint)
    } else {
        weak_error_fem(exact, &fdl.law, fd, Family::Wave, &w.f)
    }
}

fn full(cfg: &ExperimentConfig, strong: bool) -> Result<Parts> {
    let w = wave_setup(cfg)?;
    let ctx = wave_ctx(cfg, &w);
    let t = cfg.t();
    let exact = mild_law(&w.model, t)?;
    let (kind, mc_kind) = if strong { ("strong_exact", "strong_mc") } else { ("weak_exact", "weak_mc") };
    let p = w.scheme.order as f64;
    let b = w.beta_sup;
    let r = FEM_ORDER;
    let mut rows = Vec::new();
    let mut rates = Vec::new();
    let mut checks = Vec::new();
    let sweeps: Vec<Sweep> = cfg.sweep.map(|s| vec![s]).unwrap_or(vec![Sweep::H, Sweep::K]);
    let max_elements = w.model.modes();

    let point = |fd: &FemDiscretization, h: f64, l_label: String, k: f64, n: usize, rows: &mut Vec<Row>, checks: &mut Vec<Check>| -> Result<f64> {
        let e = fem_error(&w, fd, &exact, k, n, strong)?;
        rows.push(ctx.row(Some(h), Some(k), 0, kind, e.abs(), None));
        if cfg.n_paths > 0 {
            let req = DiscreteLawRequest { model: &w.model, scheme: &w.scheme, k, n, t_final: t, space: Space::Fem(fd) };
            let mc = if strong {
                strong_error_mc(&req, StrongNorm::First, cfg.n_paths, cfg.seed)?
            } else {
                weak_error_mc(&req, &w.f, cfg.n_paths, cfg.seed)?
            };
            rows.push(ctx.row(Some(h), Some(k), cfg.n_paths, mc_kind, mc.estimate, Some(mc.standard_error)));
            checks.push(mc_check(format!("{mc_kind} closure at {l_label}"), mc.estimate, mc.standard_error, e));
        }
        Ok(e.abs())
    };

    for sweep in sweeps {
        match sweep {
            Sweep::H => {
                let hl = levels(cfg.h_levels_or(3, 8), "h")?;
                let kl = cfg.pinned_level.unwrap_or(hl[hl.len() - 1] + 2);
                let n = 1usize << kl;
                let k = t / n as f64;
                let mut pts = Vec::new();
                for l in hl {
                    let m = 1usize << l;
                    if m > max_elements + 1 {
                        return invalid("J_ref must be at least the number of elements");
                    }
                    let fd = FemDiscretization::new(m, &w.model.basis)?;
                    let h = 1.0 / m as f64;
                    let e = point(&fd, h, format!("h level {l}"), k, n, &mut rows, &mut checks)?;
                    pts.push(RatePoint::new(h, e));
                }
                let (expected, tol) =
                    if strong { ((b * r / (r + 1.0)).min(r), 0.10) } else { ((2.0 * b * r / (r + 1.0)).min(r), 0.15) };
                rates.push(judged("h_sweep", &pts, RateModel::Plain, expected, tol)?);
            }
            Sweep::K => {
                let hl = cfg.pinned_level.unwrap_or(10);
                let m = 1usize << hl;
                if m > max_elements + 1 {
                    return invalid("J_ref must be at least the number of elements");
                }
                let fd = FemDiscretization::new(m, &w.model.basis)?;
                let h = 1.0 / m as f64;
                let mut pts = Vec::new();
                for l in levels(cfg.k_levels_or(4, 9), "k")? {
                    let n = 1usize << l;
                    let k = t / n as f64;
                    let e = point(&fd, h, format!("k level {l}"), k, n, &mut rows, &mut checks)?;
                    pts.push(RatePoint::new(k, e));
                }
                let (expected, tol) =
                    if strong { ((b * p / (p + 1.0)).min(1.0), 0.08) } else { ((2.0 * b * p / (p + 1.0)).min(1.0), 0.10) };
                rates.push(judged("k_sweep", &pts, RateModel::Plain, expected, tol)?);
            }
        }
    }
    Ok((rows, rates, checks, vec![sup_note(w.beta, w.beta_sup)]))
}

fn parabolic(cfg: &ExperimentConfig, family: Family) -> Result<Parts> {
    if cfg.family_or(family) != family {
        return invalid(format!("{} runs on the {} family", cfg.experiment.name(), family.name()));
    }
    let scheme = RationalScheme::preset(cfg.scheme_or(Preset::BackwardEuler));
    let gamma = cfg.gamma_or(0.0);
    let q = CovarianceSpec::Family { gamma };
    let t = cfg.t();
    let basis = build_basis(family.bc(), cfg.j_ref())?;
    let (beta, sup) = resolve_beta(cfg, family, &q, &basis)?;
    let mut notes = vec![sup_note(beta, sup)];
    // chc: beta is capped at r/2
    let b = if family == Family::Chc { sup.min(FEM_ORDER / 2.0) } else { sup };
    if b < sup {
        notes.push(format!("beta capped at r/2 = {b}"));
    }
    let model = ModelSpec::zero_start(family, basis.clone(), q)?;
    let f = functional(cfg, &model, FunctionalChoice::GaussNorm);
    let exact = mild_law(&model, t)?;
    let det_model = (family == Family::Heat)
        .then(|| {
            let x0 = (0..basis.len()).map(|j| ((j + 1) as f64).powi(-4)).collect();
            ModelSpec::new(family, basis.clone(), CovarianceSpec::Diagonal(vec![0.0; basis.len()]), x0)
        })
        .transpose()?;
    let mut ctx = Ctx::new(cfg, Some(family), Some(&scheme));
    ctx.gamma = Some(gamma);
    ctx.beta = Some(beta);
    ctx.j = Some(basis.len());
    let mut rows = Vec::new();
    let mut rates = Vec::new();
    let mut checks = Vec::new();
    let sweeps: Vec<Sweep> = cfg.sweep.map(|s| vec![s]).unwrap_or(vec![Sweep::H, Sweep::K]);
    let (k_tol, h_tol, k_model) = match family {
        Family::Chc => (0.15, 0.20, RateModel::LogCorrected),
        _ => (0.15, 0.15, RateModel::Plain),
    };
    let (k_expected, h_expected) = match family {
        Family::Chc => (b / 2.0, 2.0 * b),
        _ => (b, 2.0 * b),
    };

    for sweep in sweeps {
        let (grid, pinned): (Vec<(usize, usize)>, u32) = match sweep {
            Sweep::H => {
                let kl = cfg.pinned_level.unwrap_or(30);
                (levels(cfg.h_levels_or(3, 7), "h")?.into_iter().map(|l| (1usize << l, 1usize << kl)).collect(), kl)
            }
            Sweep::K => {
                let hl = cfg.pinned_level.unwrap_or(10);
                (levels(cfg.k_levels_or(4, 12), "k")?.into_iter().map(|l| (1usize << hl, 1usize << l)).collect(), hl)
            }
        };
        let mut pts = Vec::new();
        let mut det_pts = Vec::new();
        let mut fd_cache: Option<FemDiscretization> = None;
        for (m, n) in grid {
            if m > basis.len() + 1 {
                return invalid("J_ref must be at least the number of elements");
            }
            if fd_cache.as_ref().is_none_or(|fd| fd.space.elements != m) {
                fd_cache = Some(FemDiscretization::new(m, &basis)?);
            }
            let fd = fd_cache.as_ref().unwrap();
            let h = 1.0 / m as f64;
            let k = t / n as f64;
            let fdl = fully_discrete_law(fd, &scheme, k, n, &model)?;
            let e = weak_error_fem(&exact, &fdl.law, fd, family, &f)?;
            rows.push(ctx.row(Some(h), Some(k), 0, "weak_exact", e.abs(), None));
            let res = if sweep == Sweep::H { h } else { k };
            pts.push(RatePoint::with_log(res, e.abs(), (t / (h.powi(4) + k)).ln()));
            if let Some(dm) = &det_model {
                let d = strong_error_exact(&fully_discrete_law(fd, &scheme, k, n, dm)?.joint)?;
                rows.push(ctx.row(Some(h), Some(k), 0, "deterministic_l2", d, None));
                det_pts.push(RatePoint::new(res, d));
            }
            if cfg.n_paths > 0 {
                let req = DiscreteLawRequest { model: &model, scheme: &scheme, k, n, t_final: t, space: Space::Fem(fd) };
                let mc = weak_error_mc(&req, &f, cfg.n_paths, cfg.seed)?;
                rows.push(ctx.row(Some(h), Some(k), cfg.n_paths, "weak_mc", mc.estimate, Some(mc.standard_error)));
                checks.push(mc_check(format!("weak_mc closure at h = {h}, k = {k}"), mc.estimate, mc.standard_error, e));
            }
        }
        match sweep {
            Sweep::H => {
                rates.push(judged("h_sweep", &pts, RateModel::Plain, h_expected, h_tol)?);
                if !det_pts.is_empty() {
                    rates.push(judged("h_sweep_deterministic", &det_pts, RateModel::Plain, 2.0, 0.15)?);
                }
                notes.push(format!("h sweep at k = T 2^-{pinned}"));
            }
            Sweep::K => {
                rates.push(judged("k_sweep", &pts, k_model, k_expected, k_tol)?);
                if !det_pts.is_empty() {
                    rates.push(judged("k_sweep_deterministic", &det_pts, RateModel::Plain, 1.0, 0.15)?);
                }
                notes.push(format!("k sweep at h = 2^-{pinned}"));
            }
        }
    }
    if family == Family::Heat {
        notes.push("stochastic heat rates are observational".into());
    }
    Ok((rows, rates, checks, notes))
}

fn representation(cfg: &ExperimentConfig) -> Result<Parts> {
    let cases = cfg.cases.unwrap_or(20);
    let ctx = Ctx::new(cfg, None, None);
    let mut rows = Vec::new();
    let (mut worst_gap, mut worst_swap) = (0f64, 0f64);
    for case in 0..=cases {
        let mut u = NormalStream::new(cfg.seed, stream_id(Domain::Auxiliary1, case as u64, 2), 0);
        let mut z = NormalStream::new(cfg.seed, stream_id(Domain::Auxiliary2, case as u64, 2), 0);
        let family = [Family::Wave, Family::Heat, Family::Chc][(u.next_uniform() * 3.0) as usize];
        let preset = if u.next_uniform() < 0.5 { Preset::BackwardEuler } else { Preset::CrankNicolson };
        let scheme = RationalScheme::preset(preset);
        let j = 2 + (u.next_uniform() * 15.0) as usize;
        let n = 4 + (u.next_uniform() * 13.0) as usize;
        let k = 0.01 + 0.19 * u.next_uniform();
        let gamma = u.next_uniform();
        let rank = 1 + (u.next_uniform() * 2.0) as usize;
        let basis = build_basis(family.bc(), j)?;
        let dim = family.per_mode() * j;
        let x0: Vec<f64> = (0..dim).map(|_| z.next() * 0.5).collect();
        let model = ModelSpec::new(family, basis, CovarianceSpec::Family { gamma }, x0)?;
        let v = DMatrix::from_fn(dim, rank, |_, _| z.next());
        let m = &v * v.transpose();
        let lin = DVector::from_fn(dim, |_, _| z.next());
        let f = TestFunctional::quadratic(model.frame(), &m, &lin)?;
        // the last case replaces the scheme by the exact group
        let prop = if case == cases { Propagator::Exact } else { Propagator::Scheme(&scheme) };
        let r = representation_check(&model, prop, k, n, &f)?;
        let rel = r.abs_gap / (1.0 + r.lhs.abs());
        let swap = (r.rhs_term2 - r.rhs_term2_swapped).abs() / (1.0 + r.rhs_term2.abs());
        worst_gap = worst_gap.max(rel);
        worst_swap = worst_swap.max(swap);
        let mut c = ctx.row(None, Some(k), 0, "representation_rel_gap", rel, None);
        c.family = family.name().into();
        c.scheme = if case == cases { "exact".into() } else { scheme.name.clone() };
        c.gamma = Some(gamma);
        c.j = Some(j);
        rows.push(c.clone());
        c.error_kind = "factor_order_rel_diff".into();
        c.error_value = swap;
        rows.push(c);
    }
    let checks = vec![
        Check::at_most("max relative gap", worst_gap, 1e-8),
        Check::at_most("max difference between factor orders", worst_swap, 1e-10),
    ];
    Ok((rows, vec![], checks, vec![format!("{cases} randomized cases plus the exact group")]))
}

