use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::models::{Frame, GaussianLaw};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selector {
    Full,
    FirstComponent,
    SecondComponent,
}

/// Function `g` acting on the probe image `y = L x` in `R^d`.
#[derive(Clone, Debug)]
pub enum FunctionalKind {
    /// `<M y, y> + <m, y>`; outside `C_b^2`, used as an oracle only.
    Quadratic { m: DMatrix<f64>, lin: DVector<f64> },
    /// `sin(y + phase)` with `d = 1`.
    Sine { phase: f64 },
    /// `exp(-<M y, y> / 2)`.
    GaussExp { m: DMatrix<f64> },
}

#[derive(Clone, Debug)]
pub struct TestFunctional {
    pub kind: FunctionalKind,
    /// `d x n` probe rows on the raw coordinates of `frame`.
    pub probes: DMatrix<f64>,
    pub frame: Frame,
}

/// Spreads per-mode weights onto the selected component(s) of an
/// interleaved state with `per` entries per mode.
pub fn select(weights: &[f64], per: usize, sel: Selector) -> Result<DVector<f64>> {
    let mut v = DVector::zeros(weights.len() * per);
    for (j, w) in weights.iter().enumerate() {
        match (per, sel) {
            (1, Selector::SecondComponent) => return invalid("scalar states have no second component"),
            (1, _) => v[j] = *w,
            (_, Selector::Full) => {
                v[per * j] = *w;
                v[per * j + 1] = *w;
            }
            (_, Selector::FirstComponent) => v[per * j] = *w,
            (_, Selector::SecondComponent) => v[per * j + 1] = *w,
        }
    }
    Ok(v)
}

fn low_rank(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>)> {
    if !m.is_square() {
        return invalid("functional matrix must be square");
    }
    let scale = m.amax().max(1e-300);
    if (m - m.transpose()).amax() > 1e-12 * scale {
        return invalid("functional matrix must be symmetric");
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut cols = Vec::new();
    let mut w = Vec::new();
    for (i, &e) in eig.eigenvalues.iter().enumerate() {
        if e < -1e-10 * scale {
            return Err(Error::Precondition("functional matrix must be positive semidefinite".into()));
        }
        if e > 1e-13 * scale {
            cols.push(eig.eigenvectors.column(i).into_owned());
            w.push(e);
        }
    }
    let v = if cols.is_empty() { DMatrix::zeros(m.nrows(), 0) } else { DMatrix::from_columns(&cols) };
    Ok((v, w))
}

impl TestFunctional {
    pub fn dim(&self) -> usize {
        self.probes.nrows()
    }

    pub fn sine(frame: Frame, psi: DVector<f64>, phase: f64) -> TestFunctional {
        TestFunctional { kind: FunctionalKind::Sine { phase }, probes: DMatrix::from_row_slice(1, psi.len(), psi.as_slice()), frame }
    }

    /// Quadratic functional from a full symmetric PSD matrix and linear term
    /// on the frame coordinates, stored through its range.
    pub fn quadratic(frame: Frame, m: &DMatrix<f64>, lin: &DVector<f64>) -> Result<TestFunctional> {
        if lin.len() != m.nrows() {
            return invalid("linear term length does not match M");
        }
        let (v, w) = low_rank(m)?;
        let r = w.len();
        let mut probes = DMatrix::zeros(r + 1, m.nrows());
        for c in 0..r {
            probes.set_row(c, &v.column(c).transpose());
        }
        probes.set_row(r, &lin.transpose());
        let mut md = DMatrix::zeros(r + 1, r + 1);
        for c in 0..r {
            md[(c, c)] = w[c];
        }
        let mut ld = DVector::zeros(r + 1);
        ld[r] = 1.0;
        Ok(TestFunctional { kind: FunctionalKind::Quadratic { m: md, lin: ld }, probes, frame })
    }

    pub fn gauss_exp(frame: Frame, m: &DMatrix<f64>) -> Result<TestFunctional> {
        let (v, w) = low_rank(m)?;
        Ok(TestFunctional {
            kind: FunctionalKind::GaussExp { m: DMatrix::from_diagonal(&DVector::from_vec(w)) },
            probes: v.transpose(),
            frame,
        })
    }

    /// Full `M` and `m` on the frame coordinates (quadratic kind only).
    pub fn quadratic_parts(&self) -> Result<(DMatrix<f64>, DVector<f64>)> {
        match &self.kind {
            FunctionalKind::Quadratic { m, lin } => {
                Ok((self.probes.transpose() * m * &self.probes, self.probes.transpose() * lin))
            }
            _ => Err(Error::Unsupported("not a quadratic functional".into())),
        }
    }

    /// `g(y)` for a probe image `y`.
    pub fn eval_probe(&self, y: &[f64]) -> f64 {
        match &self.kind {
            FunctionalKind::Sine { phase } => (y[0] + phase).sin(),
            FunctionalKind::Quadratic { m, lin } => {
                let yv = DVector::from_column_slice(y);
                (m * &yv).dot(&yv) + lin.dot(&yv)
            }
            FunctionalKind::GaussExp { m } => {
                let yv = DVector::from_column_slice(y);
                (-0.5 * (m * &yv).dot(&yv)).exp()
            }
        }
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        let y = &self.probes * x;
        self.eval_probe(y.as_slice())
    }

    /// `E g(Y)` for `Y ~ N(mu, Sigma)` in the probe frame.
    pub fn expect_probe(&self, mu: &DVector<f64>, sigma: &DMatrix<f64>) -> Result<f64> {
        match &self.kind {
            FunctionalKind::Sine { phase } => Ok((mu[0] + phase).sin() * (-0.5 * sigma[(0, 0)]).exp()),
            FunctionalKind::Quadratic { m, lin } => Ok((m * mu).dot(mu) + lin.dot(mu) + (m * sigma).trace()),
            FunctionalKind::GaussExp { m } => {
                // with Y' = M^{1/2} Y ~ N(nu, S): det(I+S)^{-1/2} exp(-<(I+S)^{-1} nu, nu>/2)
                let d = m.nrows();
                if d == 0 {
                    return Ok(1.0);
                }
                let half = if (0..d).all(|i| (0..d).all(|j| i == j || m[(i, j)] == 0.0)) {
                    DMatrix::from_diagonal(&m.diagonal().map(|e| e.max(0.0).sqrt()))
                } else {
                    let eig = SymmetricEigen::new(m.clone());
                    &eig.eigenvectors
                        * DMatrix::from_diagonal(&eig.eigenvalues.map(|e| e.max(0.0).sqrt()))
                        * eig.eigenvectors.transpose()
                };
                let nu = &half * mu;
                let s = &half * sigma * &half;
                let a = DMatrix::identity(d, d) + s;
                let ch = a.cholesky().ok_or_else(|| Error::Numerical("I + S not positive definite".into()))?;
                let logdet: f64 = ch.l().diagonal().iter().map(|x| 2.0 * x.ln()).sum();
                let quad = nu.dot(&ch.solve(&nu));
                Ok((-0.5 * logdet - 0.5 * quad).exp())
            }
        }
    }

    /// `E g(L X)` for a law in the functional's frame or already in its probe frame.
    pub fn expect(&self, law: &GaussianLaw) -> Result<f64> {
        let pushed;
        let l = match law.frame {
            Frame::Probe { dim } if dim == self.dim() => law,
            f if f == self.frame => {
                pushed = law.push_forward(&self.probes)?;
                &pushed
            }
            f => return Err(Error::FrameMismatch(format!("law frame {f:?}, functional frame {:?}", self.frame))),
        };
        self.expect_probe(&l.mean, &l.cov_dense())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_gauss_exp_is_a_product() {
        let f = TestFunctional {
            kind: FunctionalKind::GaussExp { m: DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.5, 2.0])) },
            probes: DMatrix::identity(3, 3),
            frame: Frame::Probe { dim: 3 },
        };
        let mu = DVector::from_vec(vec![0.3, -1.0, 0.2]);
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![0.4, 1.2, 0.05]));
        let want: f64 = (0..3)
            .map(|i| {
                let (m, v): (f64, f64) = ([1.0, 0.5, 2.0][i], s[(i, i)]);
                (1.0 + m * v).powf(-0.5) * (-0.5 * m * mu[i] * mu[i] / (1.0 + m * v)).exp()
            })
            .product();
        assert!((f.expect_probe(&mu, &s).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn rank_checks() {
        let frame = Frame::Probe { dim: 2 };
        assert!(TestFunctional::gauss_exp(frame, &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 1.0])).is_err());
        assert!(matches!(
            TestFunctional::gauss_exp(frame, &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])),
            Err(Error::Precondition(_))
        ));
        let f = TestFunctional::gauss_exp(frame, &DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0])).unwrap();
        assert_eq!(f.dim(), 1);
        assert!(select(&[1.0], 1, Selector::SecondComponent).is_err());
    }
}
