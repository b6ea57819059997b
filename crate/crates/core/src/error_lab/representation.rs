//! The weak error of a quadratic functional written as a deterministic term
//! plus the time integral of `Tr(M O(t))`, both in closed form.

use nalgebra::{DVector, Matrix2, Vector2};
use serde::Serialize;

use crate::cmath::{C64, I};
use crate::error::{invalid, Error, Result};
use crate::models::{mild_law, parabolic_factor, wave_group_mode, Family, ModelSpec};
use crate::oracle::{disc_disc, disc_exact, exact_exact, DiscMode, ExactMode, Moments};
use crate::schemes::{discrete_law, mode_step_wave, DiscreteLawRequest, RationalScheme, Space};

use super::functional::TestFunctional;
use super::weak::weak_error_exact;

#[derive(Clone, Copy, Debug)]
pub enum Propagator<'a> {
    Scheme(&'a RationalScheme),
    /// The exact group at the grid points with exact interpolation.
    Exact,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RepresentationReport {
    pub lhs: f64,
    pub rhs_term1: f64,
    /// With `O = (F - E) Q (F + E)*`.
    pub rhs_term2: f64,
    /// With the factors in the other order, `(F + E) Q (F - E)*`.
    pub rhs_term2_swapped: f64,
    pub abs_gap: f64,
}

impl RepresentationReport {
    pub fn holds(&self, rel: f64) -> bool {
        self.abs_gap <= rel * (1.0 + self.lhs.abs())
    }
}

pub fn representation_check(
    model: &ModelSpec,
    prop: Propagator,
    k: f64,
    n: usize,
    f: &TestFunctional,
) -> Result<RepresentationReport> {
    let (m, lin) = f.quadratic_parts()?;
    if f.frame != model.frame() {
        return Err(Error::FrameMismatch("functional must be given on the model frame".into()));
    }
    if !(k > 0.0) || n == 0 {
        return invalid("need k > 0 and N >= 1");
    }
    if !model.q.is_diagonal() {
        return Err(Error::Unsupported("representation check for dense Q".into()));
    }
    let t = k * n as f64;
    let nu = n as u64;
    let q = model.q.weights(&model.basis)?;
    let lam = &model.basis.lambdas;
    let fam = model.family;
    let dim = model.dim();

    let exact = mild_law(model, t)?;
    let lhs = match prop {
        Propagator::Exact => weak_error_exact(&exact, &exact, f)?,
        Propagator::Scheme(s) => {
            let req = DiscreteLawRequest { model, scheme: s, k, n, t_final: t, space: Space::Spectral };
            weak_error_exact(&exact, &discrete_law(&req, &model.x0)?, f)?
        }
    };

    // deterministic part, by repeated one-step products
    let mut y = DVector::zeros(dim);
    let mut yt = DVector::zeros(dim);
    for j in 0..lam.len() {
        match fam {
            Family::Wave => {
                let x0 = Vector2::new(model.x0[2 * j], model.x0[2 * j + 1]);
                let e = wave_group_mode(lam[j], t)? * x0;
                let d = match prop {
                    Propagator::Exact => e,
                    Propagator::Scheme(s) => {
                        let r = mode_step_wave(s, k, lam[j])?;
                        (0..n).fold(x0, |x, _| r * x)
                    }
                };
                y[2 * j] = e[0];
                y[2 * j + 1] = e[1];
                yt[2 * j] = d[0];
                yt[2 * j + 1] = d[1];
            }
            _ => {
                y[j] = parabolic_factor(fam, lam[j], t)? * model.x0[j];
                yt[j] = match prop {
                    Propagator::Exact => y[j],
                    Propagator::Scheme(s) => {
                        let r = s.parabolic_multiplier(k, fam.rate(lam[j]))?.value().re;
                        (0..n).fold(model.x0[j], |x, _| r * x)
                    }
                };
            }
        }
    }
    let rhs_term1 = (&m * (&yt + &y) + &lin).dot(&(&yt - &y));

    // stochastic part, mode by mode
    let mut t2 = 0.0;
    let mut t2s = 0.0;
    for j in 0..lam.len() {
        if q[j] == 0.0 {
            continue;
        }
        let (fde, ee, ff, nn) = match fam {
            Family::Wave => {
                let w = lam[j].sqrt();
                let c = I / w;
                let e = ExactMode { s: I * w, c };
                let ee = exact_exact(e, e, t);
                let (fde, ff) = match prop {
                    Propagator::Exact => (ee, ee),
                    Propagator::Scheme(s) => {
                        let d = DiscMode { rho: s.wave_multiplier(k, lam[j])?, c };
                        (disc_exact(d, e, k, nu), disc_disc(d, d, k, nu))
                    }
                };
                let mj = Matrix2::new(m[(2 * j, 2 * j)], m[(2 * j, 2 * j + 1)], m[(2 * j + 1, 2 * j)], m[(2 * j + 1, 2 * j + 1)]);
                let dg = Matrix2::new(1.0, 0.0, 0.0, w);
                (fde, ee, ff, dg * mj * dg)
            }
            _ => {
                let a = fam.rate(lam[j]);
                let one = C64::new(1.0, 0.0);
                let e = ExactMode { s: C64::new(a, 0.0), c: one };
                let ee = exact_exact(e, e, t);
                let (fde, ff) = match prop {
                    Propagator::Exact => (ee, ee),
                    Propagator::Scheme(s) => {
                        let d = DiscMode { rho: s.parabolic_multiplier(k, a)?, c: one };
                        (disc_exact(d, e, k, nu), disc_disc(d, d, k, nu))
                    }
                };
                // a real scalar process reads as (Re, 0)
                (fde, ee, ff, Matrix2::new(m[(j, j)], 0.0, 0.0, 0.0))
            }
        };
        let b = |mo: &Moments, n: &Matrix2<f64>| mo.bilinear(n);
        let fnf = b(&ff, &nn);
        let fne = b(&fde, &nn);
        let enf = b(&fde, &nn.transpose());
        let ene = b(&ee, &nn);
        t2 += q[j] * (fnf - fne + enf - ene);
        t2s += q[j] * (fnf + fne - enf - ene);
    }
    Ok(RepresentationReport {
        lhs,
        rhs_term1,
        rhs_term2: t2,
        rhs_term2_swapped: t2s,
        abs_gap: (lhs - rhs_term1 - t2).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::Preset;
    use crate::spectral_core::{build_basis, Bc, CovarianceSpec};
    use nalgebra::DMatrix;

    fn rank_one(dim: usize, idx: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(dim, dim);
        m[(idx, idx)] = 1.0;
        m
    }

    #[test]
    fn backward_euler_wave_rank_one() {
        let basis = build_basis(Bc::Dirichlet, 4).unwrap();
        let model = ModelSpec::new(Family::Wave, basis, CovarianceSpec::identity(), vec![0.3, -0.2, 0.1, 0.0, 0.0, 0.5, 0.0, 0.0]).unwrap();
        let f = TestFunctional::quadratic(model.frame(), &rank_one(8, 0), &DVector::zeros(8)).unwrap();
        let s = RationalScheme::preset(Preset::BackwardEuler);
        let r = representation_check(&model, Propagator::Scheme(&s), 0.1, 8, &f).unwrap();
        assert!(r.holds(1e-8), "{r:?}");
        assert!((r.rhs_term2 - r.rhs_term2_swapped).abs() < 1e-10);
        assert!(r.lhs.abs() > 1e-4);
    }

    #[test]
    fn exact_propagator_gives_zero() {
        let basis = build_basis(Bc::Dirichlet, 4).unwrap();
        let model = ModelSpec::zero_start(Family::Wave, basis, CovarianceSpec::identity()).unwrap();
        let f = TestFunctional::quadratic(model.frame(), &rank_one(8, 1), &DVector::from_element(8, 0.2)).unwrap();
        let r = representation_check(&model, Propagator::Exact, 0.1, 8, &f).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.rhs_term1.abs() < 1e-15 && r.rhs_term2.abs() < 1e-14, "{r:?}");
    }

    #[test]
    fn heat_and_chc() {
        for fam in [Family::Heat, Family::Chc] {
            let basis = build_basis(fam.bc(), 6).unwrap();
            let model = ModelSpec::new(fam, basis, CovarianceSpec::Family { gamma: 0.5 }, vec![1.0, 0.5, 0.0, 0.0, 0.2, 0.0]).unwrap();
            let mut m = rank_one(6, 0);
            m[(1, 1)] = 2.0;
            let f = TestFunctional::quadratic(model.frame(), &m, &DVector::from_element(6, 0.1)).unwrap();
            let s = RationalScheme::preset(Preset::CrankNicolson);
            let r = representation_check(&model, Propagator::Scheme(&s), 0.01, 20, &f).unwrap();
            assert!(r.holds(1e-8), "{fam:?} {r:?}");
        }
    }

    #[test]
    fn non_quadratic_is_unsupported() {
        let basis = build_basis(Bc::Dirichlet, 2).unwrap();
        let model = ModelSpec::zero_start(Family::Heat, basis, CovarianceSpec::identity()).unwrap();
        let f = TestFunctional::sine(model.frame(), DVector::from_element(2, 1.0), 0.0);
        assert!(matches!(representation_check(&model, Propagator::Exact, 0.1, 2, &f), Err(Error::Unsupported(_))));
    }
}
