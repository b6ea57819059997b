//! Exact continuous-time objects: wave group, heat and Cahn-Hilliard-Cook
//! semigroups, and Gaussian laws of mild solutions.

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::cmath::{one_minus_sinc, sinc};
use crate::error::{invalid, Error, Result};
use crate::spectral_core::{series_condition, Bc, CovarianceSpec, EigenBasis, TraceCondition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Wave,
    Heat,
    Chc,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Wave => "wave",
            Family::Heat => "heat",
            Family::Chc => "chc",
        }
    }

    pub fn bc(self) -> Bc {
        match self {
            Family::Chc => Bc::NeumannMeanzero,
            _ => Bc::Dirichlet,
        }
    }

    pub fn per_mode(self) -> usize {
        match self {
            Family::Wave => 2,
            _ => 1,
        }
    }

    /// Generator eigenvalue for parabolic families.
    pub fn rate(self, lambda: f64) -> f64 {
        match self {
            Family::Chc => lambda * lambda,
            _ => lambda,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub family: Family,
    pub basis: EigenBasis,
    pub q: CovarianceSpec,
    /// Raw eigen-coefficients; `(x1_j, x2_j)` interleaved for the wave.
    pub x0: Vec<f64>,
}

impl ModelSpec {
    pub fn new(family: Family, basis: EigenBasis, q: CovarianceSpec, x0: Vec<f64>) -> Result<Self> {
        if basis.bc != family.bc() {
            return invalid(format!("{} requires {:?} boundary conditions", family.name(), family.bc()));
        }
        if x0.len() != basis.len() * family.per_mode() {
            return invalid(format!("X0 has length {}, expected {}", x0.len(), basis.len() * family.per_mode()));
        }
        q.validate()?;
        Ok(ModelSpec { family, basis, q, x0 })
    }

    pub fn zero_start(family: Family, basis: EigenBasis, q: CovarianceSpec) -> Result<Self> {
        let n = basis.len() * family.per_mode();
        Self::new(family, basis, q, vec![0.0; n])
    }

    pub fn modes(&self) -> usize {
        self.basis.len()
    }

    pub fn dim(&self) -> usize {
        self.modes() * self.family.per_mode()
    }

    pub fn frame(&self) -> Frame {
        Frame::Spectral { family: self.family, modes: self.modes() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Frame {
    Spectral { family: Family, modes: usize },
    Fem { family: Family, dofs: usize, elements: usize },
    /// Image of a law under a `d`-row probe matrix.
    Probe { dim: usize },
}

#[derive(Clone, Debug)]
pub enum Covariance {
    Scalars(Vec<f64>),
    Blocks(Vec<Matrix2<f64>>),
    Dense(DMatrix<f64>),
}

#[derive(Clone, Debug)]
pub struct GaussianLaw {
    pub frame: Frame,
    pub mean: DVector<f64>,
    pub cov: Covariance,
}

impl GaussianLaw {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn cov_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        match &self.cov {
            Covariance::Scalars(v) => DMatrix::from_diagonal(&DVector::from_column_slice(v)),
            Covariance::Blocks(b) => {
                let mut m = DMatrix::zeros(n, n);
                for (j, blk) in b.iter().enumerate() {
                    m.view_mut((2 * j, 2 * j), (2, 2)).copy_from(blk);
                }
                m
            }
            Covariance::Dense(m) => m.clone(),
        }
    }

    /// Min eigenvalue over blocks relative to the largest.
    pub fn is_psd(&self) -> bool {
        let (lo, hi) = match &self.cov {
            Covariance::Scalars(v) => v.iter().fold((f64::INFINITY, 0f64), |(a, b), &x| (a.min(x), b.max(x))),
            Covariance::Blocks(bs) => bs.iter().fold((f64::INFINITY, 0f64), |(a, b), m| {
                let e = SymmetricEigen::new(*m).eigenvalues;
                (a.min(e.min()), b.max(e.max()))
            }),
            Covariance::Dense(m) => {
                let e = SymmetricEigen::new(m.clone()).eigenvalues;
                (e.min(), e.max())
            }
        };
        lo >= -1e-10 * hi.max(0.0) || self.dim() == 0
    }

    /// Law of `L X` for a `d x n` probe matrix.
    pub fn push_forward(&self, l: &DMatrix<f64>) -> Result<GaussianLaw> {
        if l.ncols() != self.dim() {
            return Err(Error::FrameMismatch(format!("probe has {} columns, law has dimension {}", l.ncols(), self.dim())));
        }
        let d = l.nrows();
        let mean = l * &self.mean;
        let cov = match &self.cov {
            Covariance::Scalars(v) => {
                let mut lw = l.clone();
                for (j, s) in v.iter().enumerate() {
                    lw.column_mut(j).scale_mut(*s);
                }
                lw * l.transpose()
            }
            Covariance::Blocks(bs) => {
                let mut out = DMatrix::zeros(d, d);
                for (j, b) in bs.iter().enumerate() {
                    let lj = l.columns(2 * j, 2);
                    out += &lj * b * lj.transpose();
                }
                out
            }
            Covariance::Dense(m) => l * m * l.transpose(),
        };
        Ok(GaussianLaw { frame: Frame::Probe { dim: d }, mean, cov: Covariance::Dense(cov) })
    }
}

pub fn wave_group_mode(lambda: f64, t: f64) -> Result<Matrix2<f64>> {
    if !(lambda > 0.0) {
        return invalid("lambda must be positive");
    }
    let w = lambda.sqrt();
    let (s, c) = (t * w).sin_cos();
    Ok(Matrix2::new(c, s / w, -w * s, c))
}

/// `e^(-t a)` with `a = lambda` (heat) or `lambda^2` (chc); flushed to zero
/// below double-precision underflow.
pub fn parabolic_factor(family: Family, lambda: f64, t: f64) -> Result<f64> {
    if family == Family::Wave {
        return Err(Error::InvalidArgument("wave is not parabolic".into()));
    }
    let x = t * family.rate(lambda);
    Ok(if x > 745.0 { 0.0 } else { (-x).exp() })
}

/// `q * int_0^t e^(-2 a s) ds`.
pub fn parabolic_variance(a: f64, q: f64, t: f64) -> f64 {
    if a * t < 1e-300 {
        return q * t;
    }
    q * (-(-2.0 * a * t).exp_m1()) / (2.0 * a)
}

/// `(int sin^2, int sin cos, int cos^2)` of `w * tau` over `[a, b]`.
pub fn trig_moments(w: f64, a: f64, b: f64) -> (f64, f64, f64) {
    let d = b - a;
    let sg = a + b;
    let x = w * d;
    let sx = sinc(x);
    let hs = (0.5 * w * sg).sin();
    let ss = 0.5 * d * (one_minus_sinc(x) + sx * 2.0 * hs * hs);
    let cc = d - ss;
    let sc = 0.5 * d * sx * (w * sg).sin();
    (ss, sc, cc)
}

/// Covariance block `q * int_0^t v v^T` with `v(tau) = E(tau)(0, 1)^T` in raw coordinates.
pub fn wave_noise_block(lambda: f64, q: f64, a: f64, b: f64) -> Matrix2<f64> {
    let w = lambda.sqrt();
    let (ss, sc, cc) = trig_moments(w, a, b);
    Matrix2::new(q * ss / lambda, q * sc / w, q * sc / w, q * cc)
}

pub fn mild_law(model: &ModelSpec, t: f64) -> Result<GaussianLaw> {
    if t < 0.0 {
        return invalid("T must be >= 0");
    }
    if !model.q.is_diagonal() {
        return Err(Error::Unsupported("mild law for dense Q".into()));
    }
    let q = model.q.weights(&model.basis)?;
    let lam = &model.basis.lambdas;
    match model.family {
        Family::Wave => {
            let mut mean = DVector::zeros(model.dim());
            let mut blocks = Vec::with_capacity(lam.len());
            for j in 0..lam.len() {
                let e = wave_group_mode(lam[j], t)?;
                let x = e * nalgebra::Vector2::new(model.x0[2 * j], model.x0[2 * j + 1]);
                mean[2 * j] = x[0];
                mean[2 * j + 1] = x[1];
                blocks.push(wave_noise_block(lam[j], q[j], 0.0, t));
            }
            Ok(GaussianLaw { frame: model.frame(), mean, cov: Covariance::Blocks(blocks) })
        }
        fam => {
            let mut mean = DVector::zeros(model.dim());
            let mut var = Vec::with_capacity(lam.len());
            for j in 0..lam.len() {
                mean[j] = parabolic_factor(fam, lam[j], t)? * model.x0[j];
                var.push(parabolic_variance(fam.rate(lam[j]), q[j], t));
            }
            Ok(GaussianLaw { frame: model.frame(), mean, cov: Covariance::Scalars(var) })
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceIdentity {
    pub lhs: f64,
    pub rhs: f64,
    pub abs_diff: f64,
}

/// Compares the H-trace of the wave mild covariance with `T * sum q_j / lambda_j`.
pub fn trace_identity_check(q: &CovarianceSpec, basis: &EigenBasis, t: f64) -> Result<TraceIdentity> {
    let model = ModelSpec::zero_start(Family::Wave, basis.clone(), q.clone())?;
    let law = mild_law(&model, t)?;
    let lhs = match &law.cov {
        Covariance::Blocks(b) => b.iter().zip(&basis.lambdas).map(|(m, l)| m[(0, 0)] + m[(1, 1)] / l).sum(),
        _ => unreachable!(),
    };
    let w = q.weights(basis)?;
    let rhs = t * w.iter().zip(&basis.lambdas).map(|(q, l)| q / l).sum::<f64>();
    Ok(TraceIdentity { lhs, rhs, abs_diff: (lhs - rhs).abs() })
}

/// Largest singular value of a raw wave block measured from `H^alpha` into `H`.
pub fn weighted_block_norm(raw: &Matrix2<f64>, lambda: f64, alpha: f64) -> f64 {
    let w = lambda.sqrt();
    // y = (x1, x2 / w) makes the H-norm Euclidean
    let m = Matrix2::new(raw[(0, 0)], raw[(0, 1)] * w, raw[(1, 0)] / w, raw[(1, 1)]);
    top_singular(&m) * lambda.powf(-0.5 * alpha)
}

pub fn top_singular(m: &Matrix2<f64>) -> f64 {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    0.5 * ((a + d).hypot(b - c) + (a - d).hypot(b + c))
}

/// `sup_j ||(E(t) - E(s)) P_j||_{B(H^alpha, H)} / |t - s|^alpha`.
pub fn holder_check(basis: &EigenBasis, alpha: f64, t: f64, s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) || t < 0.0 || s < 0.0 {
        return invalid("need alpha in [0, 1] and t, s >= 0");
    }
    if t == s {
        return Ok(0.0);
    }
    let dt = (t - s).abs().powf(alpha);
    let mut best = 0f64;
    for &l in &basis.lambdas {
        let d = wave_group_mode(l, t)? - wave_group_mode(l, s)?;
        best = best.max(weighted_block_norm(&d, l, alpha) / dt);
    }
    Ok(best)
}

/// Exact `||X(T)||_{L2(Omega, H^beta)}` from the mild law.
pub fn regularity_norm(model: &ModelSpec, t: f64, beta: f64) -> Result<f64> {
    let law = mild_law(model, t)?;
    let lam = &model.basis.lambdas;
    let mut acc = 0.0;
    match &law.cov {
        Covariance::Blocks(b) => {
            for j in 0..lam.len() {
                let (p1, p2) = (lam[j].powf(beta), lam[j].powf(beta - 1.0));
                acc += p1 * law.mean[2 * j].powi(2) + p2 * law.mean[2 * j + 1].powi(2);
                acc += p1 * b[j][(0, 0)] + p2 * b[j][(1, 1)];
            }
        }
        Covariance::Scalars(v) => {
            for j in 0..lam.len() {
                acc += lam[j].powf(beta) * (law.mean[j].powi(2) + v[j]);
            }
        }
        Covariance::Dense(_) => unreachable!(),
    }
    Ok(acc.sqrt())
}

/// `||X0||_{H^beta} + T^(1/2) ||L^((beta-1)/2) Q^(1/2)||_HS`.
pub fn regularity_bound(model: &ModelSpec, t: f64, beta: f64) -> Result<f64> {
    let x0 = match model.family {
        Family::Wave => crate::spectral_core::wave_norm(&model.basis, &model.x0, beta)?,
        _ => crate::spectral_core::hdot_norm(&model.basis, &model.x0, beta)?,
    };
    let q = model.q.weights(&model.basis)?;
    let hs: f64 = q.iter().zip(&model.basis.lambdas).map(|(q, l)| q * l.powf(beta - 1.0)).sum();
    Ok(x0 + t.sqrt() * hs.sqrt())
}

/// The trace series whose finiteness makes `beta` admissible for `family`.
pub fn admissibility(family: Family, q: &CovarianceSpec, basis: &EigenBasis, beta: f64) -> Result<TraceCondition> {
    if beta < 0.0 {
        return invalid("beta must be >= 0");
    }
    match family {
        Family::Wave | Family::Heat => series_condition(q, basis, beta - 0.5, -0.5),
        Family::Chc => series_condition(q, basis, beta - 2.0, 0.0),
    }
}

/// Supremum of the admissible range for the `q_j = lambda_j^(-gamma)` family.
pub fn beta_sup(family: Family, gamma: f64) -> f64 {
    match family {
        Family::Wave | Family::Heat => gamma + 0.5,
        Family::Chc => gamma + 1.5,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_core::build_basis;
    use std::f64::consts::PI;

    #[test]
    fn group_examples() {
        assert!((wave_group_mode(3.0, 0.0).unwrap() - Matrix2::identity()).amax() < 1e-15);
        let m = wave_group_mode(PI * PI, 1.0).unwrap();
        assert!((m - Matrix2::new(-1.0, 0.0, 0.0, -1.0)).amax() < 1e-15);
        assert!(wave_group_mode(0.0, 1.0).is_err());
    }

    #[test]
    fn parabolic_examples() {
        assert_eq!(parabolic_factor(Family::Heat, 5.0, 0.0).unwrap(), 1.0);
        assert!((parabolic_factor(Family::Heat, 1.0, 2f64.ln()).unwrap() - 0.5).abs() < 1e-15);
        let c = parabolic_factor(Family::Chc, PI * PI, 1.0).unwrap();
        assert!((c / (-PI.powi(4)).exp() - 1.0).abs() < 1e-12);
        assert_eq!(parabolic_factor(Family::Chc, 1e3, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn mild_law_examples() {
        let b = build_basis(Bc::Dirichlet, 1).unwrap();
        let m = ModelSpec::zero_start(Family::Wave, b.clone(), CovarianceSpec::identity()).unwrap();
        let law = mild_law(&m, 1.0).unwrap();
        let Covariance::Blocks(bl) = &law.cov else { panic!() };
        assert!((bl[0][(0, 0)] - 1.0 / (2.0 * PI * PI)).abs() < 1e-15);
        let h = ModelSpec::zero_start(Family::Heat, b, CovarianceSpec::identity()).unwrap();
        let law = mild_law(&h, 1.0).unwrap();
        let Covariance::Scalars(v) = &law.cov else { panic!() };
        assert!((v[0] - (1.0 - (-2.0 * PI * PI).exp()) / (2.0 * PI * PI)).abs() < 1e-16);
        let law0 = mild_law(&m, 0.0).unwrap();
        assert!(law0.cov_dense().amax() == 0.0);
    }

    #[test]
    fn trace_identity_example() {
        let b = build_basis(Bc::Dirichlet, 2).unwrap();
        let r = trace_identity_check(&CovarianceSpec::identity(), &b, 2.0).unwrap();
        assert!((r.rhs - 5.0 / (2.0 * PI * PI)).abs() < 1e-15);
        assert!(r.abs_diff <= 1e-12 * r.rhs);
        let z = trace_identity_check(&CovarianceSpec::Diagonal(vec![0.0, 0.0]), &b, 1.0).unwrap();
        assert_eq!((z.lhs, z.rhs), (0.0, 0.0));
        let t0 = trace_identity_check(&CovarianceSpec::identity(), &b, 0.0).unwrap();
        assert_eq!(t0.rhs, 0.0);
        assert!(t0.lhs.abs() < 1e-300);
    }

    #[test]
    fn holder_examples() {
        let b = build_basis(Bc::Dirichlet, 50).unwrap();
        assert_eq!(holder_check(&b, 0.5, 0.3, 0.3).unwrap(), 0.0);
        assert!(holder_check(&b, 0.0, 0.1, 0.9).unwrap() <= 2.0 + 1e-12);
        let b1 = build_basis(Bc::Dirichlet, 1).unwrap();
        let r = holder_check(&b1, 1.0, 0.2, 0.5).unwrap();
        let direct = ((0.2 * PI).sin() - (0.5 * PI).sin()).abs() / PI / 0.3;
        assert!(direct <= 1.0 && r <= 1.0 + 1e-12 && r >= direct);
    }

    #[test]
    fn regularity_examples() {
        let b = build_basis(Bc::Dirichlet, 256).unwrap();
        let mut x0 = vec![0.0; 512];
        x0[0] = 1.0;
        let m = ModelSpec::new(Family::Wave, b.clone(), CovarianceSpec::Diagonal(vec![0.0; 256]), x0.clone()).unwrap();
        let n = regularity_norm(&m, 0.8, 0.4).unwrap();
        assert!((n - PI.powi(2).powf(0.2)).abs() < 1e-12);
        let m = ModelSpec::new(Family::Wave, b, CovarianceSpec::identity(), x0).unwrap();
        assert!((regularity_norm(&m, 0.0, 0.4).unwrap() - PI.powi(2).powf(0.2)).abs() < 1e-12);
        let v = regularity_norm(&m, 1.0, 0.4).unwrap();
        assert!(v.is_finite() && v <= 2.0 * regularity_bound(&m, 1.0, 0.4).unwrap());
    }
}
