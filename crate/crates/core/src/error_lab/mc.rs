//! Monte Carlo weak and strong errors on coupled paths.
//!
//! The reference solution is advanced exactly over each step: the group is
//! applied exactly and the stochastic convolution increment is drawn from its
//! conditional law given the Brownian increment of that step, so the pair
//! (reference, scheme) has exactly the law of (mild solution, scheme).

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::models::{parabolic_factor, wave_group_mode, wave_noise_block, Family};
use crate::noise::{sample_path_indexed, stream_id, Domain, NoisePath, NormalStream};
use crate::schemes::{evolve_discrete, DiscreteLawRequest, Space};

use super::functional::TestFunctional;
use super::strong::StrongNorm;

/// Paths per reduction chunk; sums are formed per chunk and then combined in
/// chunk order, which fixes the floating-point result for a given seed.
pub const MC_CHUNK: usize = 256;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    pub n_paths: usize,
}

/// Per-mode step data for the exact reference.
enum RefStep {
    Wave { e: Matrix2<f64>, gain: Vector2<f64>, chol: Matrix2<f64> },
    Parabolic { e: f64, gain: f64, sd: f64 },
}

fn chol2(c: &Matrix2<f64>) -> Matrix2<f64> {
    let l11 = c[(0, 0)].max(0.0).sqrt();
    let l21 = if l11 > 0.0 { c[(1, 0)] / l11 } else { 0.0 };
    let l22 = (c[(1, 1)] - l21 * l21).max(0.0).sqrt();
    Matrix2::new(l11, 0.0, l21, l22)
}

fn ref_steps(req: &DiscreteLawRequest, q: &[f64]) -> Result<Vec<RefStep>> {
    let k = req.k;
    let lam = &req.model.basis.lambdas;
    (0..lam.len())
        .map(|j| match req.model.family {
            Family::Wave => {
                let w = lam[j].sqrt();
                let iv = Vector2::new(2.0 * (0.5 * w * k).sin().powi(2) / lam[j], (w * k).sin() / w);
                let cov = (wave_noise_block(lam[j], 1.0, 0.0, k) - iv * iv.transpose() / k) * q[j];
                Ok(RefStep::Wave { e: wave_group_mode(lam[j], k)?, gain: iv / k, chol: chol2(&cov) })
            }
            fam => {
                let a = fam.rate(lam[j]);
                let x = a * k;
                // int_0^k e^{-a u} du / k and the conditional variance given dW
                let psi = if x < 1e-8 { 1.0 - 0.5 * x } else { -(-x).exp_m1() / x };
                let var = if x < 1e-8 { k } else { -(-2.0 * x).exp_m1() / (2.0 * a) };
                let cond = q[j] * (var - k * psi * psi).max(0.0);
                Ok(RefStep::Parabolic { e: parabolic_factor(fam, lam[j], k)?, gain: psi, sd: cond.sqrt() })
            }
        })
        .collect()
}

fn reference(req: &DiscreteLawRequest, steps: &[RefStep], noise: &NoisePath, seed: u64, path: u64) -> DVector<f64> {
    let x0 = &req.model.x0;
    let mut out = DVector::zeros(x0.len());
    for (j, st) in steps.iter().enumerate() {
        let mut a1 = NormalStream::new(seed, stream_id(Domain::Auxiliary1, path, j as u64), 0);
        match st {
            RefStep::Wave { e, gain, chol } => {
                let mut a2 = NormalStream::new(seed, stream_id(Domain::Auxiliary2, path, j as u64), 0);
                let mut x = Vector2::new(x0[2 * j], x0[2 * j + 1]);
                for n in 0..req.n {
                    let z = Vector2::new(a1.next(), a2.next());
                    x = e * x + gain * noise.increments[(j, n)] + chol * z;
                }
                out[2 * j] = x[0];
                out[2 * j + 1] = x[1];
            }
            RefStep::Parabolic { e, gain, sd } => {
                let mut x = x0[j];
                for n in 0..req.n {
                    x = e * x + gain * noise.increments[(j, n)] + sd * a1.next();
                }
                out[j] = x;
            }
        }
    }
    out
}

/// Runs `sample(path)` over all paths and returns the mean and standard
/// error of the samples.
fn run<F>(n_paths: usize, sample: F) -> Result<(f64, f64)>
where
    F: Fn(u64) -> Result<f64> + Sync,
{
    if n_paths < 2 {
        return invalid("need at least two paths");
    }
    // (count, mean, sum of squared deviations) per chunk, merged in order
    let chunks: Vec<(f64, f64, f64)> = (0..n_paths.div_ceil(MC_CHUNK))
        .into_par_iter()
        .map(|c| {
            let (mut n, mut mean, mut m2) = (0.0, 0.0, 0.0);
            for p in c * MC_CHUNK..((c + 1) * MC_CHUNK).min(n_paths) {
                let v = sample(p as u64)?;
                n += 1.0;
                let d = v - mean;
                mean += d / n;
                m2 += d * (v - mean);
            }
            Ok((n, mean, m2))
        })
        .collect::<Result<_>>()?;
    let (n, mean, m2) = chunks.into_iter().fold((0.0, 0.0, 0.0), |(na, ma, sa), (nb, mb, sb)| {
        let n = na + nb;
        let d = mb - ma;
        (n, ma + d * nb / n, sa + sb + d * d * na * nb / n)
    });
    Ok((mean, (m2 / (n - 1.0) / n).sqrt()))
}

fn prepare<'a>(req: &'a DiscreteLawRequest) -> Result<(Vec<RefStep>, Option<&'a crate::fem1d::FemDiscretization>)> {
    req.validate()?;
    let q = req.model.q.weights(&req.model.basis)?;
    let fd = match req.space {
        Space::Spectral => None,
        Space::Fem(fd) => Some(fd),
    };
    Ok((ref_steps(req, &q)?, fd))
}

/// Sample mean of `G(X~) - G(X_ref)` on coupled paths.
pub fn weak_error_mc(req: &DiscreteLawRequest, f: &TestFunctional, n_paths: usize, seed: u64) -> Result<McEstimate> {
    let (steps, fd) = prepare(req)?;
    let model = req.model;
    if f.frame != model.frame() {
        return Err(Error::FrameMismatch("functional must be given on the spectral frame".into()));
    }
    let disc_probes: DMatrix<f64> = match fd {
        None => f.probes.clone(),
        Some(fd) => fd.map_probes(model.family, &f.probes)?,
    };
    let (estimate, standard_error) = run(n_paths, |p| {
        let noise = sample_path_indexed(&model.q, &model.basis, req.n, req.k, seed, p, 0..model.modes())?;
        let xt = evolve_discrete(req, &model.x0, &noise)?;
        let x = reference(req, &steps, &noise, seed, p);
        let yt = &disc_probes * xt;
        let y = &f.probes * x;
        Ok(f.eval_probe(yt.as_slice()) - f.eval_probe(y.as_slice()))
    })?;
    Ok(McEstimate { estimate, standard_error, n_paths })
}

/// `(E||X~ - X_ref||^2)^{1/2}` on coupled paths, with a delta-method standard error.
pub fn strong_error_mc(req: &DiscreteLawRequest, norm: StrongNorm, n_paths: usize, seed: u64) -> Result<McEstimate> {
    let (steps, fd) = prepare(req)?;
    let model = req.model;
    let fam = model.family;
    if norm == StrongNorm::First && fam != Family::Wave {
        return invalid("first-component norm applies to the wave only");
    }
    if fd.is_some() && fam == Family::Wave && norm == StrongNorm::Full {
        return Err(Error::Unsupported("FEM strong error is measured on the first component".into()));
    }
    let lam = &model.basis.lambdas;
    let (ms, sem) = run(n_paths, |p| {
        let noise = sample_path_indexed(&model.q, &model.basis, req.n, req.k, seed, p, 0..model.modes())?;
        let xt = evolve_discrete(req, &model.x0, &noise)?;
        let x = reference(req, &steps, &noise, seed, p);
        let per = fam.per_mode();
        Ok(match fd {
            None => (0..lam.len())
                .map(|j| {
                    let d1 = xt[per * j] - x[per * j];
                    match (fam, norm) {
                        (Family::Wave, StrongNorm::Full) => {
                            let d2 = xt[2 * j + 1] - x[2 * j + 1];
                            d1 * d1 + d2 * d2 / lam[j]
                        }
                        _ => d1 * d1,
                    }
                })
                .sum(),
            Some(fd) => {
                let a = DVector::from_iterator(fd.modes(), (0..fd.modes()).map(|i| xt[per * i]));
                let b = DVector::from_iterator(lam.len(), (0..lam.len()).map(|j| x[per * j]));
                a.norm_squared() + b.norm_squared() - 2.0 * a.dot(&(&fd.gram.g * &b))
            }
        })
    })?;
    let estimate = ms.max(0.0).sqrt();
    let standard_error = if estimate > 0.0 { sem / (2.0 * estimate) } else { 0.0 };
    Ok(McEstimate { estimate, standard_error, n_paths })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error_lab::{strong_error_exact, temporal_joint, weak_error_exact};
    use crate::models::{mild_law, ModelSpec};
    use crate::schemes::{discrete_law, Preset, RationalScheme};
    use crate::spectral_core::{build_basis, Bc, CovarianceSpec};

    #[test]
    fn zero_noise_is_deterministic() {
        let basis = build_basis(Bc::Dirichlet, 6).unwrap();
        let mut x0 = vec![0.0; 12];
        x0[0] = 1.0;
        x0[5] = 0.5;
        let model = ModelSpec::new(Family::Wave, basis, CovarianceSpec::Diagonal(vec![0.0; 6]), x0).unwrap();
        let s = RationalScheme::preset(Preset::CrankNicolson);
        let req = DiscreteLawRequest { model: &model, scheme: &s, k: 0.05, n: 10, t_final: 0.5, space: Space::Spectral };
        let f = TestFunctional::sine(model.frame(), DVector::from_element(12, 0.3), 0.2);
        let e = weak_error_mc(&req, &f, 16, 1).unwrap();
        assert_eq!(e.standard_error, 0.0);
        let exact = weak_error_exact(&mild_law(&model, 0.5).unwrap(), &discrete_law(&req, &model.x0).unwrap(), &f).unwrap();
        assert!((e.estimate - exact).abs() < 1e-12);
    }

    #[test]
    fn heat_strong_closure() {
        let basis = build_basis(Bc::Dirichlet, 8).unwrap();
        let model = ModelSpec::zero_start(Family::Heat, basis, CovarianceSpec::identity()).unwrap();
        let s = RationalScheme::preset(Preset::BackwardEuler);
        let req = DiscreteLawRequest { model: &model, scheme: &s, k: 0.02, n: 10, t_final: 0.2, space: Space::Spectral };
        let mc = strong_error_mc(&req, StrongNorm::Full, 4000, 9).unwrap();
        let ex = strong_error_exact(&temporal_joint(&model, &s, 0.02, 10, StrongNorm::Full).unwrap()).unwrap();
        assert!((mc.estimate - ex).abs() < 3.0 * mc.standard_error, "{mc:?} {ex}");
    }

    #[test]
    fn rejects_single_path() {
        assert!(run(1, |_| Ok(0.0)).is_err());
    }
}
