//! Rational single-step schemes `R(z)`: verification, per-mode multipliers,
//! trajectories, exact discrete laws and the interpolated error operator.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cmath::{LogMul, C64, I};
use crate::error::{invalid, Error, Result};
use crate::fem1d::FemDiscretization;
use crate::models::{weighted_block_norm, Covariance, Family, GaussianLaw, ModelSpec};
use crate::noise::NoisePath;
use crate::spectral_core::{slope, EigenBasis};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    BackwardEuler,
    CrankNicolson,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::BackwardEuler => "backward_euler",
            Preset::CrankNicolson => "crank_nicolson",
        }
    }
}

#[derive(Clone, Debug)]
pub enum SchemeSpec {
    Preset(Preset),
    /// Ascending coefficients of numerator and denominator.
    Coefficients { num: Vec<f64>, den: Vec<f64> },
}

#[derive(Clone, Debug, Serialize)]
pub struct RationalScheme {
    pub name: String,
    pub num: Vec<f64>,
    pub den: Vec<f64>,
    pub order: u32,
    pub order_slope: f64,
    pub i_stable: bool,
    pub b: f64,
}

fn trim(mut c: Vec<f64>) -> Vec<f64> {
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    c
}

fn horner(c: &[f64], z: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// `ln p(iy)` for `p(0) = 1`, computed from `|p|^2 - 1` so that the modulus
/// keeps full relative precision near one.
fn log_poly_imag(c: &[f64], y: f64) -> Option<C64> {
    let (mut re_m1, mut im) = (0.0, 0.0);
    let mut yp = 1.0;
    for (n, &a) in c.iter().enumerate() {
        if n > 0 {
            yp *= y;
            let sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if n % 2 == 0 {
                re_m1 += sign * a * yp;
            } else {
                im += sign * a * yp;
            }
        }
    }
    let re = 1.0 + re_m1;
    if re == 0.0 && im == 0.0 {
        return None;
    }
    let m2m1 = re_m1 * (re_m1 + 2.0) + im * im;
    Some(C64::new(0.5 * m2m1.ln_1p(), im.atan2(re)))
}

fn log_poly_real(c: &[f64], x: f64) -> Option<C64> {
    let mut pm1 = 0.0;
    let mut xp = 1.0;
    for &a in c.iter().skip(1) {
        xp *= x;
        pm1 += a * xp;
    }
    let p = 1.0 + pm1;
    if p == 0.0 {
        None
    } else if p > 0.0 {
        Some(C64::new(pm1.ln_1p(), 0.0))
    } else {
        Some(C64::new((-p).ln(), std::f64::consts::PI))
    }
}

pub fn make_scheme(spec: &SchemeSpec, b: f64) -> Result<RationalScheme> {
    if !(b > 1e-3) {
        return invalid("order-verification radius b must exceed 1e-3");
    }
    let (name, num, den) = match spec {
        SchemeSpec::Preset(Preset::BackwardEuler) => ("backward_euler".to_string(), vec![1.0], vec![1.0, 1.0]),
        SchemeSpec::Preset(Preset::CrankNicolson) => {
            ("crank_nicolson".to_string(), vec![1.0, -0.5], vec![1.0, 0.5])
        }
        SchemeSpec::Coefficients { num, den } => ("custom".to_string(), num.clone(), den.clone()),
    };
    let (num, den) = (trim(num), trim(den));
    if num.is_empty() || den.is_empty() || den[0] == 0.0 {
        return invalid("denominator must have a nonzero constant term");
    }
    if ((num[0] / den[0]) - 1.0).abs() > 1e-14 {
        return invalid("R(0) must equal 1");
    }
    let d0 = den[0];
    let num: Vec<f64> = num.iter().map(|a| a / d0).collect();
    let den: Vec<f64> = den.iter().map(|a| a / d0).collect();

    // order from the local slope of |R(iy) - e^{-iy}|
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for i in 0..40 {
        let y = (1e-3f64.ln() + (b.ln() - 1e-3f64.ln()) * i as f64 / 39.0).exp();
        let r = horner(&num, I * y) / horner(&den, I * y);
        let e = (r - (-I * y).exp()).norm();
        if e > 0.0 {
            xs.push(y.ln());
            ys.push(e.ln());
        }
    }
    let order_slope = if xs.len() >= 2 { slope(&xs, &ys) } else { f64::INFINITY };
    let mut p = (order_slope.round() as i64 - 1).max(0);
    if (order_slope as f64) < p as f64 + 1.0 - 0.05 {
        p -= 1;
    }
    let order = p.max(0) as u32;

    let mut i_stable = true;
    for i in 0..2000 {
        let y = 10f64.powf(-6.0 + 12.0 * i as f64 / 1999.0);
        let dv = horner(&den, I * y);
        let nv = horner(&num, I * y);
        if dv.norm() <= 1e-14 * (1.0 + nv.norm()) || (nv / dv).norm() > 1.0 + 1e-12 {
            i_stable = false;
            break;
        }
    }
    let limit = match num.len().cmp(&den.len()) {
        std::cmp::Ordering::Greater => f64::INFINITY,
        std::cmp::Ordering::Equal => (num.last().unwrap() / den.last().unwrap()).abs(),
        std::cmp::Ordering::Less => 0.0,
    };
    if limit > 1.0 + 1e-12 {
        i_stable = false;
    }
    if den.len() > 1 {
        let deg = den.len() - 1;
        let lead = den[deg];
        let mut comp = DMatrix::zeros(deg, deg);
        for r in 1..deg {
            comp[(r, r - 1)] = 1.0;
        }
        for r in 0..deg {
            comp[(r, deg - 1)] = -den[r] / lead;
        }
        for root in comp.complex_eigenvalues().iter() {
            if root.re.abs() <= 1e-10 * root.norm().max(1.0) {
                i_stable = false;
            }
        }
    }
    Ok(RationalScheme { name, num, den, order, order_slope, i_stable, b })
}

impl RationalScheme {
    pub fn preset(p: Preset) -> RationalScheme {
        make_scheme(&SchemeSpec::Preset(p), 1.0).expect("preset schemes are valid")
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        let d = horner(&self.den, z);
        if d.norm() <= 1e-14 * (1.0 + horner(&self.num, z).norm()) {
            return Err(Error::SingularStep(format!("{z}")));
        }
        Ok(horner(&self.num, z) / d)
    }

    fn require_stable(&self) -> Result<()> {
        if !self.i_stable {
            return Err(Error::Precondition(format!("scheme {} is not I-stable", self.name)));
        }
        Ok(())
    }

    /// `R(i k sqrt(lambda))`, the action of `R(kA_j)` on `x1 + i x2 / sqrt(lambda)`.
    pub fn wave_multiplier(&self, k: f64, lambda: f64) -> Result<LogMul> {
        let y = k * lambda.sqrt();
        let ln = log_poly_imag(&self.num, y);
        match log_poly_imag(&self.den, y) {
            None => Err(Error::SingularStep(format!("i{y}"))),
            Some(ld) => Ok(match ln {
                None => LogMul::zero(),
                Some(l) => LogMul::from_log(l - ld),
            }),
        }
    }

    /// `R(k a)` for a nonnegative real generator eigenvalue `a`.
    pub fn parabolic_multiplier(&self, k: f64, a: f64) -> Result<LogMul> {
        let x = k * a;
        let ln = log_poly_real(&self.num, x);
        match log_poly_real(&self.den, x) {
            None => Err(Error::SingularStep(format!("{x}"))),
            Some(ld) => Ok(match ln {
                None => LogMul::zero(),
                Some(l) => LogMul::from_log(l - ld),
            }),
        }
    }
}

/// `R(kA_j)` in raw coordinates: `a I + b A_j` with `a = Re R(ik w)`,
/// `b = Im R(ik w) / w`, since `A_j^2 = -lambda I`.
pub fn mode_step_wave(scheme: &RationalScheme, k: f64, lambda: f64) -> Result<Matrix2<f64>> {
    scheme.require_stable()?;
    if !(lambda > 0.0) {
        return invalid("lambda must be positive");
    }
    let w = lambda.sqrt();
    let r = scheme.eval(I * (k * w))?;
    let (a, b) = (r.re, r.im / w);
    Ok(Matrix2::new(a, -b, b * lambda, a))
}

pub enum Space<'a> {
    Spectral,
    Fem(&'a FemDiscretization),
}

pub struct DiscreteLawRequest<'a> {
    pub model: &'a ModelSpec,
    pub scheme: &'a RationalScheme,
    pub k: f64,
    pub n: usize,
    pub t_final: f64,
    pub space: Space<'a>,
}

impl DiscreteLawRequest<'_> {
    pub fn validate(&self) -> Result<()> {
        self.scheme.require_stable()?;
        if !(self.k > 0.0) {
            return invalid("k must be positive");
        }
        if ((self.n as f64) * self.k - self.t_final).abs() > 1e-12 * self.t_final.max(1e-300) {
            return invalid(format!("N k = {} differs from T = {}", self.n as f64 * self.k, self.t_final));
        }
        if !self.model.q.is_diagonal() {
            return Err(Error::Unsupported("discrete law for dense Q".into()));
        }
        Ok(())
    }
}

/// Final state `X^N` of `X^j = R(kA)(X^{j-1} + B dW^j)`.
pub fn evolve_discrete(req: &DiscreteLawRequest, x0: &[f64], noise: &NoisePath) -> Result<DVector<f64>> {
    req.validate()?;
    let model = req.model;
    if noise.modes() != model.modes() || noise.steps() != req.n || (noise.k - req.k).abs() > 1e-12 * req.k {
        return invalid(format!(
            "noise is {}x{} with k = {}, request needs {}x{} with k = {}",
            noise.modes(),
            noise.steps(),
            noise.k,
            model.modes(),
            req.n,
            req.k
        ));
    }
    if let Space::Fem(fd) = req.space {
        return fd.evolve(req, x0, noise);
    }
    if x0.len() != model.dim() {
        return invalid("X0 length does not match the model");
    }
    let lam = &model.basis.lambdas;
    let mut out = DVector::from_column_slice(x0);
    match model.family {
        Family::Wave => {
            for j in 0..lam.len() {
                let r = mode_step_wave(req.scheme, req.k, lam[j])?;
                let mut x = Vector2::new(x0[2 * j], x0[2 * j + 1]);
                for n in 0..req.n {
                    x = r * (x + Vector2::new(0.0, noise.increments[(j, n)]));
                }
                out[2 * j] = x[0];
                out[2 * j + 1] = x[1];
            }
        }
        fam => {
            for j in 0..lam.len() {
                let r = req.scheme.parabolic_multiplier(req.k, fam.rate(lam[j]))?.value().re;
                let mut x = x0[j];
                for n in 0..req.n {
                    x = r * (x + noise.increments[(j, n)]);
                }
                out[j] = x;
            }
        }
    }
    Ok(out)
}

/// Raw second moments `k q sum_{m=1}^N (R^m c)(R^m c)^T` of the discrete
/// stochastic convolution of a wave mode, `c = i / w` in weighted form.
pub(crate) fn wave_discrete_block(rho: LogMul, lambda: f64, q: f64, k: f64, n: u64) -> Matrix2<f64> {
    let w = lambda.sqrt();
    let c = I / w;
    let a1 = (c.norm_sqr() * rho.mul(rho.conj()).geom_sum(n)).re;
    let a2 = c * c * rho.mul(rho).geom_sum(n);
    let uu = 0.5 * (a1 + a2.re);
    let vv = 0.5 * (a1 - a2.re);
    let uv = 0.5 * a2.im;
    let s = k * q;
    Matrix2::new(s * uu, s * w * uv, s * w * uv, s * lambda * vv)
}

pub fn discrete_law(req: &DiscreteLawRequest, x0: &[f64]) -> Result<GaussianLaw> {
    req.validate()?;
    if let Space::Fem(fd) = req.space {
        return Ok(crate::fem1d::fully_discrete_law(fd, req.scheme, req.k, req.n, req.model)?.law);
    }
    let model = req.model;
    if x0.len() != model.dim() {
        return invalid("X0 length does not match the model");
    }
    let q = model.q.weights(&model.basis)?;
    let lam = &model.basis.lambdas;
    let n = req.n as u64;
    match model.family {
        Family::Wave => {
            let mut mean = DVector::zeros(model.dim());
            let mut blocks = Vec::with_capacity(lam.len());
            for j in 0..lam.len() {
                let rho = req.scheme.wave_multiplier(req.k, lam[j])?;
                let w = lam[j].sqrt();
                let z = rho.pow(req.n as f64) * C64::new(x0[2 * j], x0[2 * j + 1] / w);
                mean[2 * j] = z.re;
                mean[2 * j + 1] = w * z.im;
                blocks.push(wave_discrete_block(rho, lam[j], q[j], req.k, n));
            }
            Ok(GaussianLaw { frame: model.frame(), mean, cov: Covariance::Blocks(blocks) })
        }
        fam => {
            let mut mean = DVector::zeros(model.dim());
            let mut var = Vec::with_capacity(lam.len());
            for j in 0..lam.len() {
                let r = req.scheme.parabolic_multiplier(req.k, fam.rate(lam[j]))?;
                mean[j] = r.pow(req.n as f64).re * x0[j];
                var.push(req.k * q[j] * r.mul(r).geom_sum(n).re);
            }
            Ok(GaussianLaw { frame: model.frame(), mean, cov: Covariance::Scalars(var) })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// Grid points `t_n` only.
    Grid,
    /// Each step refined by 16 sub-intervals, including the right limit at `t_{n-1}`.
    Sup,
}

const SUBSAMPLES: usize = 16;

fn mode_sup(rho: C64, w: f64, k: f64, n: usize, mode: SampleMode) -> f64 {
    let mut p = C64::new(1.0, 0.0);
    let mut best = 0f64;
    let rot = (-I * (w * k / SUBSAMPLES as f64)).exp();
    for m in 1..=n {
        p *= rho;
        match mode {
            SampleMode::Grid => {
                let e = (-I * (w * k * m as f64)).exp();
                best = best.max((p - e).norm());
            }
            SampleMode::Sup => {
                let mut e = (-I * (w * k * (m - 1) as f64)).exp();
                for _ in 0..=SUBSAMPLES {
                    best = best.max((p - e).norm());
                    e *= rot;
                }
            }
        }
    }
    best
}

/// `sup_t ||E_k~(t) - E(t)||_{B(H^alpha, H)}` over `[0, T]` for the wave.
///
/// In the weighted coordinates each mode block of the difference is a
/// multiple of a rotation, so its norm is `|R(ikw)^m - e^{-iwt}|`.
pub fn interpolated_error_sup(
    scheme: &RationalScheme,
    k: f64,
    basis: &EigenBasis,
    alpha: f64,
    t_final: f64,
    mode: SampleMode,
) -> Result<f64> {
    scheme.require_stable()?;
    if alpha < 0.0 || !(k > 0.0) {
        return invalid("need alpha >= 0 and k > 0");
    }
    let n = (t_final / k).round() as usize;
    if ((n as f64) * k - t_final).abs() > 1e-9 * t_final {
        return invalid("T must be a multiple of k");
    }
    let lam = &basis.lambdas;
    let mut best = 0f64;
    let chunk = 32;
    let mut start = 0;
    while start < lam.len() {
        // both propagators are contractions, so a mode contributes at most 2 lambda^{-alpha/2}
        if 2.0 * lam[start].powf(-0.5 * alpha) <= best {
            break;
        }
        let end = (start + chunk).min(lam.len());
        let part = (start..end)
            .into_par_iter()
            .map(|j| -> Result<f64> {
                let rho = scheme.wave_multiplier(k, lam[j])?.value();
                Ok(mode_sup(rho, lam[j].sqrt(), k, n, mode) * lam[j].powf(-0.5 * alpha))
            })
            .collect::<Result<Vec<f64>>>()?;
        best = part.into_iter().fold(best, f64::max);
        start = end;
    }
    Ok(best)
}

/// `max_{1 <= n <= N} max_j ||R(kA_j)^n||` in the H metric; 1 for `N = 0`.
pub fn stability_sup(scheme: &RationalScheme, k: f64, basis: &EigenBasis, n: usize) -> Result<f64> {
    scheme.require_stable()?;
    if n == 0 {
        return Ok(1.0);
    }
    let vals = basis
        .lambdas
        .par_iter()
        .map(|&l| -> Result<f64> {
            let r = mode_step_wave(scheme, k, l)?;
            let mut p = r;
            let mut best = weighted_block_norm(&p, l, 0.0);
            for _ in 1..n {
                p = r * p;
                best = best.max(weighted_block_norm(&p, l, 0.0));
            }
            Ok(best)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_core::{build_basis, Bc};

    #[test]
    fn presets_verified() {
        for &b in &[0.5, 1.0] {
            let be = make_scheme(&SchemeSpec::Preset(Preset::BackwardEuler), b).unwrap();
            assert_eq!((be.order, be.i_stable), (1, true));
            let cn = make_scheme(&SchemeSpec::Preset(Preset::CrankNicolson), b).unwrap();
            assert_eq!((cn.order, cn.i_stable), (2, true));
        }
        let ee = make_scheme(&SchemeSpec::Coefficients { num: vec![1.0, -1.0], den: vec![1.0] }, 1.0).unwrap();
        assert!(!ee.i_stable);
        assert!(mode_step_wave(&ee, 0.1, 1.0).is_err());
        assert!(make_scheme(&SchemeSpec::Coefficients { num: vec![2.0], den: vec![1.0, 1.0] }, 1.0).is_err());
    }

    #[test]
    fn pole_on_imaginary_axis_is_rejected() {
        // R(z) = 1 / (1 + z^2) has poles at +-i
        let s = make_scheme(&SchemeSpec::Coefficients { num: vec![1.0], den: vec![1.0, 0.0, 1.0] }, 1.0).unwrap();
        assert!(!s.i_stable);
    }

    #[test]
    fn mode_step_examples() {
        let be = RationalScheme::preset(Preset::BackwardEuler);
        assert!((mode_step_wave(&be, 0.0, 3.0).unwrap() - Matrix2::identity()).amax() < 1e-15);
        let m = mode_step_wave(&be, 1.0, 1.0).unwrap();
        let by_hand = Matrix2::new(1.0, 1.0, -1.0, 1.0) * 0.5;
        assert!((m - by_hand).amax() < 1e-15);
        // direct solve of (I + kA) X = I
        let a = Matrix2::new(0.0, -1.0, 4.0, 0.0);
        let direct = (Matrix2::identity() + a * 0.3).try_inverse().unwrap();
        assert!((mode_step_wave(&be, 0.3, 4.0).unwrap() - direct).amax() < 1e-14);
        let cn = RationalScheme::preset(Preset::CrankNicolson);
        let r = mode_step_wave(&cn, 0.7, 13.0).unwrap();
        for e in r.complex_eigenvalues().iter() {
            assert!((e.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn log_multipliers_match_direct_values() {
        let cn = RationalScheme::preset(Preset::CrankNicolson);
        for &y in &[1e-6, 0.3, 2.0, 50.0] {
            let a = cn.wave_multiplier(y, 1.0).unwrap().value();
            let b = cn.eval(I * y).unwrap();
            assert!((a - b).norm() < 1e-14);
        }
        for &x in &[1e-9, 0.5, 2.0, 3.0, 100.0] {
            let a = cn.parabolic_multiplier(x, 1.0).unwrap().value();
            let b = cn.eval(C64::new(x, 0.0)).unwrap();
            assert!((a - b).norm() < 1e-14, "{x}: {a} {b}");
        }
    }

    #[test]
    fn stability_sup_examples() {
        let b = build_basis(Bc::Dirichlet, 20).unwrap();
        let be = RationalScheme::preset(Preset::BackwardEuler);
        let cn = RationalScheme::preset(Preset::CrankNicolson);
        assert!(stability_sup(&be, 0.01, &b, 10).unwrap() < 1.0);
        assert!((stability_sup(&cn, 0.01, &b, 10).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(stability_sup(&be, 0.01, &b, 0).unwrap(), 1.0);
    }

    #[test]
    fn interpolated_sup_bounded_by_two_for_one_step() {
        let b = build_basis(Bc::Dirichlet, 64).unwrap();
        let be = RationalScheme::preset(Preset::BackwardEuler);
        let v = interpolated_error_sup(&be, 1.0, &b, 0.0, 1.0, SampleMode::Sup).unwrap();
        assert!(v <= 2.0 && v > 0.0);
    }
}
