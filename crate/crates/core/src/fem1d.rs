//! Piecewise-linear finite elements on a uniform mesh of the unit interval.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen, Vector2};
use rayon::prelude::*;

use crate::cmath::{sinc, C64, I};
use crate::error::{invalid, Error, Result};
use crate::error_lab::strong::{JointLaw, StrongNorm};
use crate::models::{mild_law, Covariance, Family, Frame, GaussianLaw, ModelSpec};
use crate::noise::NoisePath;
use crate::oracle::{disc_disc, disc_exact, DiscMode, ExactMode};
use crate::schemes::{mode_step_wave, DiscreteLawRequest, RationalScheme};
use crate::spectral_core::{Bc, EigenBasis};

#[derive(Clone, Debug)]
pub struct FemSpace {
    pub bc: Bc,
    pub elements: usize,
    pub h: f64,
    /// Coordinates of the degrees of freedom.
    pub nodes: Vec<f64>,
    pub mass: DMatrix<f64>,
    pub stiff: DMatrix<f64>,
}

pub fn assemble_fem(h: f64, bc: Bc) -> Result<FemSpace> {
    let m = (1.0 / h).round();
    if !(h > 0.0) || (m * h - 1.0).abs() > 1e-12 || m < 2.0 {
        return invalid(format!("1/h must be an integer >= 2, got h = {h}"));
    }
    assemble_elements(m as usize, bc)
}

pub fn assemble_elements(m: usize, bc: Bc) -> Result<FemSpace> {
    if m < 2 {
        return invalid("need at least two elements");
    }
    let h = 1.0 / m as f64;
    let nodes: Vec<f64> = match bc {
        Bc::Dirichlet => (1..m).map(|n| n as f64 * h).collect(),
        Bc::NeumannMeanzero => (0..=m).map(|n| n as f64 * h).collect(),
    };
    let d = nodes.len();
    let mut mass = DMatrix::zeros(d, d);
    let mut stiff = DMatrix::zeros(d, d);
    // element e spans global nodes e, e+1; map to dof indices
    let dof = |g: usize| -> Option<usize> {
        match bc {
            Bc::Dirichlet => (g >= 1 && g < m).then(|| g - 1),
            Bc::NeumannMeanzero => Some(g),
        }
    };
    let me = [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]];
    let ke = [[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]];
    for e in 0..m {
        let g = [e, e + 1];
        for a in 0..2 {
            for b in 0..2 {
                if let (Some(i), Some(j)) = (dof(g[a]), dof(g[b])) {
                    mass[(i, j)] += me[a][b];
                    stiff[(i, j)] += ke[a][b];
                }
            }
        }
    }
    Ok(FemSpace { bc, elements: m, h, nodes, mass, stiff })
}

#[derive(Clone, Debug)]
pub struct FemEigs {
    pub lambdas: Vec<f64>,
    /// Nodal values; column `i` is the M-normalized eigenvector `i`.
    pub vectors: DMatrix<f64>,
}

pub fn fem_eigs(space: &FemSpace) -> Result<FemEigs> {
    let chol = space
        .mass
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv_k = l
        .solve_lower_triangular(&space.stiff)
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
    let c = l
        .solve_lower_triangular(&linv_k.transpose())
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(c, 1e-14, 10_000)
        .ok_or_else(|| Error::Numerical("generalized eigensolve did not converge".into()))?;
    let lt = l.transpose();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let skip = match space.bc {
        Bc::Dirichlet => 0,
        Bc::NeumannMeanzero => {
            let l0 = eig.eigenvalues[order[0]];
            if l0.abs() > 1e-8 * eig.eigenvalues[order[1]] {
                return Err(Error::Numerical(format!("constant mode not found (smallest eigenvalue {l0})")));
            }
            1
        }
    };
    let kept = &order[skip..];
    let mut vectors = DMatrix::zeros(space.nodes.len(), kept.len());
    let mut lambdas = Vec::with_capacity(kept.len());
    for (col, &i) in kept.iter().enumerate() {
        let mut v = lt
            .solve_upper_triangular(&eig.eigenvectors.column(i).into_owned())
            .ok_or_else(|| Error::Numerical("back substitution failed".into()))?;
        let pivot = v.iter().copied().find(|x| x.abs() > 1e-9).unwrap_or(1.0);
        if pivot < 0.0 {
            v.neg_mut();
        }
        vectors.set_column(col, &v);
        lambdas.push(eig.eigenvalues[i]);
    }
    Ok(FemEigs { lambdas, vectors })
}

/// `6(1 - cos(i pi h)) / (h^2 (2 + cos(i pi h)))` for the retained modes.
pub fn closed_form_eigenvalues(space: &FemSpace) -> Vec<f64> {
    let h = space.h;
    let count = match space.bc {
        Bc::Dirichlet => space.elements - 1,
        Bc::NeumannMeanzero => space.elements,
    };
    (1..=count)
        .map(|i| {
            let c = (i as f64 * PI * h).cos();
            6.0 * (1.0 - c) / (h * h * (2.0 + c))
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct CrossGramian {
    /// `G[(i, j)] = <phi_j, phi_{h,i}>`.
    pub g: DMatrix<f64>,
}

/// `<phi_j, hat_n>` for every dof `n` and mode `j`.
fn nodal_loads(space: &FemSpace, basis: &EigenBasis) -> DMatrix<f64> {
    let h = space.h;
    let mut out = DMatrix::zeros(space.nodes.len(), basis.len());
    for j in 0..basis.len() {
        let w = (j + 1) as f64 * PI;
        let s2 = sinc(0.5 * w * h).powi(2);
        for (n, &x) in space.nodes.iter().enumerate() {
            let boundary = space.bc == Bc::NeumannMeanzero && (n == 0 || n + 1 == space.nodes.len());
            let weight = if boundary { 0.5 * h * s2 } else { h * s2 };
            out[(n, j)] = basis.eval(j, x) * weight;
        }
    }
    out
}

pub fn cross_gramian(space: &FemSpace, eigs: &FemEigs, basis: &EigenBasis) -> Result<CrossGramian> {
    if space.bc != basis.bc {
        return invalid("FEM space and eigenbasis use different boundary conditions");
    }
    Ok(CrossGramian { g: eigs.vectors.transpose() * nodal_loads(space, basis) })
}

#[derive(Clone, Debug)]
pub struct Projections {
    /// Coefficients in the discrete eigenframe.
    pub l2: DVector<f64>,
    pub ritz: DVector<f64>,
    pub l2_error: f64,
    pub ritz_error: f64,
}

/// `P_h v` and `R_h v` for `v` given by eigen-coefficients.
pub fn fem_projections(eigs: &FemEigs, gram: &CrossGramian, basis: &EigenBasis, v: &[f64]) -> Result<Projections> {
    if v.len() != basis.len() {
        return invalid("coefficient length does not match J");
    }
    let vv = DVector::from_column_slice(v);
    let l2 = &gram.g * &vv;
    let lv = DVector::from_iterator(v.len(), v.iter().zip(&basis.lambdas).map(|(c, l)| c * l));
    let mut ritz = &gram.g * lv;
    for (i, r) in ritz.iter_mut().enumerate() {
        *r /= eigs.lambdas[i];
    }
    let n2 = vv.norm_squared();
    let l2_error = (n2 - l2.norm_squared()).max(0.0).sqrt();
    let ritz_error = (n2 + ritz.norm_squared() - 2.0 * ritz.dot(&l2)).max(0.0).sqrt();
    Ok(Projections { l2, ritz, l2_error, ritz_error })
}

/// Space, discrete eigenframe and cross-Gramian against a fixed truncation.
#[derive(Clone, Debug)]
pub struct FemDiscretization {
    pub space: FemSpace,
    pub eigs: FemEigs,
    pub gram: CrossGramian,
    pub basis: EigenBasis,
}

impl FemDiscretization {
    pub fn new(elements: usize, basis: &EigenBasis) -> Result<Self> {
        let space = assemble_elements(elements, basis.bc)?;
        let eigs = fem_eigs(&space)?;
        let gram = cross_gramian(&space, &eigs, basis)?;
        Ok(FemDiscretization { space, eigs, gram, basis: basis.clone() })
    }

    pub fn modes(&self) -> usize {
        self.eigs.lambdas.len()
    }

    pub fn frame(&self, family: Family) -> Frame {
        Frame::Fem { family, dofs: self.modes(), elements: self.space.elements }
    }

    /// Probe rows given on spectral raw coordinates, re-expressed on the
    /// discrete raw coordinates.
    pub fn map_probes(&self, family: Family, probes: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let per = family.per_mode();
        if probes.ncols() != per * self.basis.len() {
            return Err(Error::FrameMismatch("probe width does not match the spectral frame".into()));
        }
        let mut out = DMatrix::zeros(probes.nrows(), per * self.modes());
        for c in 0..per {
            let cols: Vec<usize> = (0..self.basis.len()).map(|j| per * j + c).collect();
            let sub = probes.select_columns(&cols);
            let mapped = sub * self.gram.g.transpose();
            for i in 0..self.modes() {
                out.set_column(per * i + c, &mapped.column(i));
            }
        }
        Ok(out)
    }

    fn project_x0(&self, model: &ModelSpec) -> Vec<DVector<f64>> {
        let per = model.family.per_mode();
        (0..per)
            .map(|c| {
                let comp = DVector::from_iterator(model.modes(), (0..model.modes()).map(|j| model.x0[per * j + c]));
                &self.gram.g * comp
            })
            .collect()
    }

    pub(crate) fn evolve(&self, req: &DiscreteLawRequest, _x0: &[f64], noise: &NoisePath) -> Result<DVector<f64>> {
        let model = req.model;
        self.check_model(model)?;
        let a0 = self.project_x0(model);
        let inj = &self.gram.g * &noise.increments;
        let lam = &self.eigs.lambdas;
        match model.family {
            Family::Wave => {
                let mut out = DVector::zeros(2 * lam.len());
                for i in 0..lam.len() {
                    let r = mode_step_wave(req.scheme, req.k, lam[i])?;
                    let mut x = Vector2::new(a0[0][i], a0[1][i]);
                    for n in 0..req.n {
                        x = r * (x + Vector2::new(0.0, inj[(i, n)]));
                    }
                    out[2 * i] = x[0];
                    out[2 * i + 1] = x[1];
                }
                Ok(out)
            }
            fam => {
                let mut out = DVector::zeros(lam.len());
                for i in 0..lam.len() {
                    let r = req.scheme.parabolic_multiplier(req.k, fam.rate(lam[i]))?.value().re;
                    let mut x = a0[0][i];
                    for n in 0..req.n {
                        x = r * (x + inj[(i, n)]);
                    }
                    out[i] = x;
                }
                Ok(out)
            }
        }
    }

    fn check_model(&self, model: &ModelSpec) -> Result<()> {
        if model.basis != self.basis {
            return invalid("model truncation differs from the cross-Gramian truncation");
        }
        if !model.q.is_diagonal() {
            return Err(Error::Unsupported("fully discrete law for dense Q".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct FullyDiscrete {
    pub law: GaussianLaw,
    /// Against the mild law at `T = N k`: first component for the wave, L2 otherwise.
    pub joint: JointLaw,
}

pub fn fully_discrete_law(
    fd: &FemDiscretization,
    scheme: &RationalScheme,
    k: f64,
    n: usize,
    model: &ModelSpec,
) -> Result<FullyDiscrete> {
    fd.check_model(model)?;
    if !scheme.i_stable {
        return Err(Error::Precondition(format!("scheme {} is not I-stable", scheme.name)));
    }
    let t = k * n as f64;
    let q = model.q.weights(&model.basis)?;
    let g = &fd.gram.g;
    let lam_h = &fd.eigs.lambdas;
    let lam = &model.basis.lambdas;
    let nm = lam_h.len();
    let nu = n as u64;
    let mut gq = g.clone();
    for (j, qj) in q.iter().enumerate() {
        gq.column_mut(j).scale_mut(*qj);
    }
    let w = &gq * g.transpose();
    let a0 = fd.project_x0(model);
    let exact = mild_law(model, t)?;
    let fam = model.family;

    let (disc, exm): (Vec<DiscMode>, Vec<ExactMode>) = match fam {
        Family::Wave => (
            lam_h
                .iter()
                .map(|&l| Ok(DiscMode { rho: scheme.wave_multiplier(k, l)?, c: I / l.sqrt() }))
                .collect::<Result<_>>()?,
            lam.iter().map(|&l| ExactMode { s: I * l.sqrt(), c: I / l.sqrt() }).collect(),
        ),
        _ => (
            lam_h
                .iter()
                .map(|&l| Ok(DiscMode { rho: scheme.parabolic_multiplier(k, fam.rate(l))?, c: C64::new(1.0, 0.0) }))
                .collect::<Result<_>>()?,
            lam.iter().map(|&l| ExactMode { s: C64::new(fam.rate(l), 0.0), c: C64::new(1.0, 0.0) }).collect(),
        ),
    };

    let per = fam.per_mode();
    let dim = per * nm;
    let mut mean = DVector::zeros(dim);
    let mut mean1 = DVector::zeros(nm);
    for i in 0..nm {
        match fam {
            Family::Wave => {
                let wh = lam_h[i].sqrt();
                let z = disc[i].rho.pow(n as f64) * C64::new(a0[0][i], a0[1][i] / wh);
                mean[2 * i] = z.re;
                mean[2 * i + 1] = wh * z.im;
                mean1[i] = z.re;
            }
            _ => {
                let v = disc[i].rho.pow(n as f64).re * a0[0][i];
                mean[i] = v;
                mean1[i] = v;
            }
        }
    }

    let rows: Vec<Vec<f64>> = (0..nm)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; per * dim];
            for i2 in 0..nm {
                let mo = disc_disc(disc[i], disc[i2], k, nu);
                let wv = w[(i, i2)];
                match fam {
                    Family::Wave => {
                        let (w1, w2) = (lam_h[i].sqrt(), lam_h[i2].sqrt());
                        row[2 * i2] = wv * mo.rr();
                        row[2 * i2 + 1] = wv * mo.ri() * w2;
                        row[dim + 2 * i2] = wv * mo.ir() * w1;
                        row[dim + 2 * i2 + 1] = wv * mo.ii() * w1 * w2;
                    }
                    _ => row[i2] = wv * mo.zy.re,
                }
            }
            row
        })
        .collect();
    let mut cov = DMatrix::zeros(dim, dim);
    for (i, row) in rows.iter().enumerate() {
        for r in 0..per {
            for c in 0..dim {
                cov[(per * i + r, c)] = row[r * dim + c];
            }
        }
    }

    // cross covariance in the first component, accumulated over the hybrid frame
    let tr_cross: f64 = (0..lam.len())
        .into_par_iter()
        .map(|j| {
            let mut acc = 0.0;
            for i in 0..nm {
                let gij = g[(i, j)];
                if gij == 0.0 {
                    continue;
                }
                let mo = disc_exact(disc[i], exm[j], k, nu);
                acc += gij * gij * mo.rr();
            }
            q[j] * acc
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .sum();
    let tr_a: f64 = (0..nm).map(|i| cov[(per * i, per * i)]).sum();
    let (tr_b, mu1): (f64, Vec<f64>) = match &exact.cov {
        Covariance::Blocks(b) => (b.iter().map(|m| m[(0, 0)]).sum(), (0..lam.len()).map(|j| exact.mean[2 * j]).collect()),
        Covariance::Scalars(v) => (v.iter().sum(), exact.mean.iter().copied().collect()),
        Covariance::Dense(_) => unreachable!(),
    };
    let mu1 = DVector::from_vec(mu1);
    let mean_diff_sq = mean1.norm_squared() + mu1.norm_squared() - 2.0 * mean1.dot(&(g * &mu1));
    let norm = match fam {
        Family::Wave => StrongNorm::First,
        _ => StrongNorm::Full,
    };
    Ok(FullyDiscrete {
        law: GaussianLaw { frame: fd.frame(fam), mean, cov: Covariance::Dense(cov) },
        joint: JointLaw { norm, mean_diff_sq, tr_a, tr_b, tr_cross },
    })
}
