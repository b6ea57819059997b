//! Eigenbasis of the Dirichlet / mean-zero Neumann Laplacian on the unit
//! interval, fractional norms, and Schatten-class calculus on the truncation.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bc {
    Dirichlet,
    NeumannMeanzero,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenBasis {
    pub bc: Bc,
    pub lambdas: Vec<f64>,
}

impl EigenBasis {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn omega(&self, j: usize) -> f64 {
        self.lambdas[j].sqrt()
    }

    /// Value of the `j`-th (0-based) eigenfunction at `x`.
    pub fn eval(&self, j: usize, x: f64) -> f64 {
        let w = (j + 1) as f64 * PI;
        match self.bc {
            Bc::Dirichlet => 2f64.sqrt() * (w * x).sin(),
            Bc::NeumannMeanzero => 2f64.sqrt() * (w * x).cos(),
        }
    }
}

pub fn build_basis(bc: Bc, j: usize) -> Result<EigenBasis> {
    if j == 0 {
        return invalid("mode count J must be positive");
    }
    let lambdas = (1..=j).map(|i| (i as f64 * PI).powi(2)).collect();
    Ok(EigenBasis { bc, lambdas })
}

fn check_len(basis: &EigenBasis, n: usize, per_mode: usize) -> Result<()> {
    if n != basis.len() * per_mode {
        return invalid(format!(
            "coefficient length {n} does not match J = {} ({per_mode} per mode)",
            basis.len()
        ));
    }
    Ok(())
}

/// `(sum_j lambda_j^alpha c_j^2)^(1/2)`.
pub fn hdot_norm(basis: &EigenBasis, coeffs: &[f64], alpha: f64) -> Result<f64> {
    check_len(basis, coeffs.len(), 1)?;
    Ok(coeffs
        .iter()
        .zip(&basis.lambdas)
        .map(|(c, l)| l.powf(alpha) * c * c)
        .sum::<f64>()
        .sqrt())
}

/// Product-space norm on `H^alpha = Hdot^alpha x Hdot^(alpha-1)`; `coeffs`
/// interleaves `(x1_j, x2_j)`.
pub fn wave_norm(basis: &EigenBasis, coeffs: &[f64], alpha: f64) -> Result<f64> {
    check_len(basis, coeffs.len(), 2)?;
    Ok(basis
        .lambdas
        .iter()
        .enumerate()
        .map(|(j, l)| {
            let (a, b) = (coeffs[2 * j], coeffs[2 * j + 1]);
            l.powf(alpha) * a * a + l.powf(alpha - 1.0) * b * b
        })
        .sum::<f64>()
        .sqrt())
}

/// A truncated operator, either diagonal in the eigenbasis or dense.
#[derive(Clone, Debug)]
pub enum Operator {
    Diagonal(Vec<f64>),
    Dense(DMatrix<f64>),
}

pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Schatten norm for `p` in {1, 2}.
pub fn schatten(p: u32, op: &Operator) -> Result<f64> {
    match (p, op) {
        (1, Operator::Diagonal(d)) => Ok(d.iter().map(|x| x.abs()).sum()),
        (2, Operator::Diagonal(d)) => Ok(d.iter().map(|x| x * x).sum::<f64>().sqrt()),
        (1, Operator::Dense(m)) => Ok(singular_values(m).iter().sum()),
        (2, Operator::Dense(m)) => Ok(m.norm()),
        _ => Err(Error::Unsupported(format!("Schatten p = {p}"))),
    }
}

pub fn trace(op: &Operator) -> f64 {
    match op {
        Operator::Diagonal(d) => d.iter().sum(),
        Operator::Dense(m) => m.trace(),
    }
}

pub fn operator_norm(op: &Operator) -> f64 {
    match op {
        Operator::Diagonal(d) => d.iter().fold(0.0, |a, x| a.max(x.abs())),
        Operator::Dense(m) => singular_values(m).first().copied().unwrap_or(0.0),
    }
}

/// Noise covariance in eigencoordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum CovarianceSpec {
    /// `q_j = lambda_j^(-gamma)`.
    Family { gamma: f64 },
    Diagonal(Vec<f64>),
    Dense(DMatrix<f64>),
}

impl CovarianceSpec {
    pub fn identity() -> Self {
        CovarianceSpec::Family { gamma: 0.0 }
    }

    pub fn is_diagonal(&self) -> bool {
        !matches!(self, CovarianceSpec::Dense(_))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CovarianceSpec::Family { gamma } if !gamma.is_finite() => {
                invalid("gamma must be finite")
            }
            CovarianceSpec::Family { .. } => Ok(()),
            CovarianceSpec::Diagonal(w) => {
                if w.iter().any(|q| !(q.is_finite() && *q >= 0.0)) {
                    return Err(Error::Precondition("diagonal weights must be finite and >= 0".into()));
                }
                Ok(())
            }
            CovarianceSpec::Dense(m) => {
                if !m.is_square() {
                    return Err(Error::Precondition("dense Q must be square".into()));
                }
                let scale = m.amax().max(1.0);
                if (m - m.transpose()).amax() > 1e-12 * scale {
                    return Err(Error::Precondition("dense Q is not symmetric".into()));
                }
                let ev = SymmetricEigen::new(m.clone()).eigenvalues;
                if ev.iter().any(|&e| e < -1e-10) {
                    return Err(Error::Precondition("dense Q is not positive semidefinite".into()));
                }
                Ok(())
            }
        }
    }

    /// Weight of mode `j` (0-based) for a diagonal spec.
    pub fn weight(&self, j: usize) -> Result<f64> {
        match self {
            CovarianceSpec::Family { gamma } => Ok(((j + 1) as f64 * PI).powi(2).powf(-gamma)),
            CovarianceSpec::Diagonal(w) => w.get(j).copied().ok_or_else(|| {
                Error::InvalidArgument(format!("diagonal Q has {} weights, mode {} requested", w.len(), j + 1))
            }),
            CovarianceSpec::Dense(_) => Err(Error::Unsupported("dense Q has no per-mode weights".into())),
        }
    }

    pub fn weights(&self, basis: &EigenBasis) -> Result<Vec<f64>> {
        (0..basis.len()).map(|j| self.weight(j)).collect()
    }

    /// Dense `J x J` matrix on the truncation.
    pub fn matrix(&self, basis: &EigenBasis) -> Result<DMatrix<f64>> {
        match self {
            CovarianceSpec::Dense(m) => {
                if m.nrows() != basis.len() {
                    return invalid(format!("dense Q is {}x{}, basis has J = {}", m.nrows(), m.ncols(), basis.len()));
                }
                Ok(m.clone())
            }
            _ => Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.weights(basis)?))),
        }
    }
}

fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let d = eig.eigenvalues.map(|e| e.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose()
}

fn diag_scale(basis: &EigenBasis, pow: f64) -> DMatrix<f64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        basis.len(),
        basis.lambdas.iter().map(|l| l.powf(pow)),
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct AqReport {
    /// `||L^(s/2) Q^(1/2)||_HS^2`
    pub lhs: f64,
    /// `[||L^s Q||_Tr, ||L^(s+a) Q||_B * ||L^(-a)||_Tr]`
    pub mids: [f64; 2],
    /// `||L^(s+1/2) Q L^(-1/2)||_Tr`
    pub rhs: f64,
    pub all_inequalities_hold: bool,
    /// Whether `lhs == mids[0]` and `lhs == rhs` to 1e-12 relative.
    pub equality_flags: [bool; 2],
}

fn leq(a: f64, b: f64) -> bool {
    a <= b * (1.0 + 1e-12) + 1e-300
}

fn rel_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
}

pub fn check_aq(q: &CovarianceSpec, basis: &EigenBasis, s: f64, alpha: f64) -> Result<AqReport> {
    if alpha <= 0.0 {
        return invalid("alpha must be positive");
    }
    q.validate()?;
    let qm = q.matrix(basis)?;
    let (lhs, tr, opn, c2) = if q.is_diagonal() {
        let w = q.weights(basis)?;
        let l = &basis.lambdas;
        let lhs: f64 = w.iter().zip(l).map(|(q, l)| l.powf(s) * q).sum();
        let tr = schatten(1, &Operator::Diagonal(w.iter().zip(l).map(|(q, l)| l.powf(s) * q).collect()))?;
        let opn = operator_norm(&Operator::Diagonal(w.iter().zip(l).map(|(q, l)| l.powf(s + alpha) * q).collect()));
        let c2 = schatten(
            1,
            &Operator::Diagonal(w.iter().zip(l).map(|(q, l)| l.powf(s + 0.5) * q * l.powf(-0.5)).collect()),
        )?;
        (lhs, tr, opn, c2)
    } else {
        let half = diag_scale(basis, 0.5 * s) * psd_sqrt(&qm);
        let lhs = half.norm_squared();
        let tr = schatten(1, &Operator::Dense(diag_scale(basis, s) * &qm))?;
        let opn = operator_norm(&Operator::Dense(diag_scale(basis, s + alpha) * &qm));
        let c2 = schatten(1, &Operator::Dense(diag_scale(basis, s + 0.5) * &qm * diag_scale(basis, -0.5)))?;
        (lhs, tr, opn, c2)
    };
    let neg: f64 = basis.lambdas.iter().map(|l| l.powf(-alpha)).sum();
    let prod = opn * neg;
    Ok(AqReport {
        lhs,
        mids: [tr, prod],
        rhs: c2,
        all_inequalities_hold: leq(lhs, tr) && leq(tr, prod) && leq(lhs, c2),
        equality_flags: [rel_eq(lhs, tr), rel_eq(lhs, c2)],
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceCondition {
    pub value: f64,
    /// Least-squares slope of log(S(2J) - S(J)) against log J over the dyadic sweep.
    pub tail_slope: f64,
    pub divergent: bool,
    pub sweep: Vec<(usize, f64)>,
}

impl TraceCondition {
    pub fn diagnostic(&self) -> String {
        let sums: Vec<String> = self.sweep.iter().map(|(j, s)| format!("J={j}: {s:.6e}")).collect();
        format!(
            "partial sums [{}], tail slope {:.3} ({})",
            sums.join(", "),
            self.tail_slope,
            if self.divergent { "divergent" } else { "convergent" }
        )
    }
}

pub(crate) fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Trace norm of `L^(a) Q L^(b)` on the leading `n` modes.
fn weighted_trace_norm(q: &CovarianceSpec, n: usize, a: f64, b: f64) -> Result<f64> {
    let basis = build_basis(Bc::Dirichlet, n)?;
    match q {
        CovarianceSpec::Dense(m) => {
            let sub = m.view((0, 0), (n, n)).into_owned();
            schatten(1, &Operator::Dense(diag_scale(&basis, a) * sub * diag_scale(&basis, b)))
        }
        _ => {
            let mut s = 0.0;
            for j in 0..n {
                s += (q.weight(j)? * basis.lambdas[j].powf(a + b)).abs();
            }
            Ok(s)
        }
    }
}

/// Dyadic sweep of `||L^a Q L^b||_Tr` over leading blocks and the resulting
/// divergence flag.
pub fn series_condition(q: &CovarianceSpec, basis: &EigenBasis, a: f64, b: f64) -> Result<TraceCondition> {
    q.validate()?;
    let value = weighted_trace_norm(q, basis.len(), a, b)?;
    let j_max = match q {
        CovarianceSpec::Family { .. } => 4096,
        CovarianceSpec::Diagonal(w) => w.len().min(4096),
        CovarianceSpec::Dense(m) => m.nrows(),
    };
    let j_min = match q {
        CovarianceSpec::Family { .. } => 64,
        _ => 4,
    };
    let mut sweep = Vec::new();
    let mut j = j_min;
    while j <= j_max {
        sweep.push((j, weighted_trace_norm(q, j, a, b)?));
        j *= 2;
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for w in sweep.windows(2) {
        let inc = w[1].1 - w[0].1;
        if inc > 0.0 {
            xs.push((w[0].0 as f64).ln());
            ys.push(inc.ln());
        }
    }
    let tail_slope = if xs.len() >= 2 { slope(&xs, &ys) } else { f64::NAN };
    Ok(TraceCondition { value, tail_slope, divergent: tail_slope > -0.05, sweep })
}

/// `K2 = ||L^(beta-1/2) Q L^(-1/2)||_Tr` with its tail diagnostic.
pub fn trace_condition(q: &CovarianceSpec, basis: &EigenBasis, beta: f64) -> Result<TraceCondition> {
    if beta < 0.0 {
        return invalid("beta must be >= 0");
    }
    series_condition(q, basis, beta - 0.5, -0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_eigenvalues() {
        let b = build_basis(Bc::Dirichlet, 2).unwrap();
        assert!((b.lambdas[0] - 9.869_604_401_089_358).abs() < 1e-12);
        assert!((b.lambdas[1] - 4.0 * PI * PI).abs() < 1e-12);
        let n = build_basis(Bc::NeumannMeanzero, 1).unwrap();
        assert!((n.lambdas[0] - PI * PI).abs() < 1e-12);
        assert!(build_basis(Bc::Dirichlet, 0).is_err());
    }

    #[test]
    fn norms_of_unit_vector() {
        let b = build_basis(Bc::Dirichlet, 3).unwrap();
        let e1 = [1.0, 0.0, 0.0];
        assert!((hdot_norm(&b, &e1, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((hdot_norm(&b, &e1, 1.0).unwrap() - PI).abs() < 1e-14);
        assert!((hdot_norm(&b, &e1, -1.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert!(hdot_norm(&b, &[1.0], 0.0).is_err());
        let w = [0.0, PI, 0.0, 0.0, 0.0, 0.0];
        assert!((wave_norm(&b, &w, 0.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn schatten_examples() {
        assert_eq!(schatten(1, &Operator::Diagonal(vec![1.0, 1.0])).unwrap(), 2.0);
        assert_eq!(schatten(2, &Operator::Diagonal(vec![3.0, 4.0])).unwrap(), 5.0);
        let d = Operator::Dense(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
        assert_eq!(trace(&d), 0.0);
        assert!((schatten(1, &d).unwrap() - 2.0).abs() < 1e-14);
        assert!(schatten(3, &d).is_err());
    }

    #[test]
    fn aq_identity_all_equal() {
        let b = build_basis(Bc::Dirichlet, 10).unwrap();
        for &s in &[-1.0, -0.3, 0.0, 0.4] {
            let r = check_aq(&CovarianceSpec::identity(), &b, s, 1.0).unwrap();
            let sum: f64 = b.lambdas.iter().map(|l| l.powf(s)).sum();
            assert!((r.lhs - sum).abs() < 1e-12 * sum);
            assert!(r.equality_flags[0] && r.equality_flags[1] && r.all_inequalities_hold);
        }
        let r = check_aq(&CovarianceSpec::Family { gamma: 1.0 }, &b, 0.0, 0.7).unwrap();
        assert!(r.equality_flags == [true, true]);
    }

    #[test]
    fn aq_dense_example_strict() {
        let b = build_basis(Bc::Dirichlet, 3).unwrap();
        let q = DMatrix::from_row_slice(3, 3, &[2.0, 0.8, 0.3, 0.8, 1.0, 0.4, 0.3, 0.4, 0.5]);
        let r = check_aq(&CovarianceSpec::Dense(q.clone()), &b, 0.5, 1.0).unwrap();
        // direct: ||L^{s/2} Q^{1/2}||_HS^2 = sum_j lambda_j^s Q_jj
        let direct: f64 = (0..3).map(|j| b.lambdas[j].powf(0.5) * q[(j, j)]).sum();
        assert!((r.lhs - direct).abs() < 1e-10 * direct);
        assert!(r.all_inequalities_hold);
        assert!(r.lhs < r.rhs * (1.0 - 1e-6));
    }

    #[test]
    fn trace_condition_examples() {
        let b = build_basis(Bc::Dirichlet, 2).unwrap();
        let t = trace_condition(&CovarianceSpec::identity(), &b, 0.0).unwrap();
        assert!((t.value - 5.0 / (4.0 * PI * PI)).abs() < 1e-15);
        assert!(!t.divergent);
        let t = trace_condition(&CovarianceSpec::identity(), &b, 0.5).unwrap();
        assert!(t.divergent);
        let t = trace_condition(&CovarianceSpec::Family { gamma: 0.25 }, &b, 0.7).unwrap();
        assert!(!t.divergent && t.tail_slope < 0.0);
        let t = trace_condition(&CovarianceSpec::Family { gamma: 0.25 }, &b, 0.9).unwrap();
        assert!(t.divergent);
    }
}
