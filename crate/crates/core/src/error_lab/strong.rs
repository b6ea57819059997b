use serde::Serialize;

use crate::cmath::{C64, I};
use crate::error::{invalid, Error, Result};
use crate::models::{Family, ModelSpec};
use crate::oracle::{disc_disc, disc_exact, exact_exact, DiscMode, ExactMode};
use crate::schemes::RationalScheme;

/// Which part of the state the strong error measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StrongNorm {
    /// The full `H` norm (weighted product norm for the wave).
    Full,
    /// Displacement only, in `L2`.
    First,
}

/// Second-order summary of the pair `(A, B)` on a common probability space,
/// enough to evaluate `E||A - B||^2`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct JointLaw {
    pub norm: StrongNorm,
    /// `||E A - E B||^2`.
    pub mean_diff_sq: f64,
    /// `Tr Cov A`.
    pub tr_a: f64,
    pub tr_b: f64,
    /// `Tr Cov(A, B)`.
    pub tr_cross: f64,
}

/// `(E||A - B||^2)^{1/2}`; fails if cancellation pushes the square
/// meaningfully below zero.
pub fn strong_error_exact(j: &JointLaw) -> Result<f64> {
    let v = j.mean_diff_sq + j.tr_a + j.tr_b - 2.0 * j.tr_cross;
    let scale = j.mean_diff_sq.abs() + j.tr_a.abs() + j.tr_b.abs();
    if v < -1e-8 * scale.max(1e-300) {
        return Err(Error::Numerical(format!("negative mean square error {v:e}")));
    }
    Ok(v.max(0.0).sqrt())
}

fn modes(model: &ModelSpec, scheme: &RationalScheme, k: f64) -> Result<Vec<(DiscMode, ExactMode, C64)>> {
    let lam = &model.basis.lambdas;
    (0..lam.len())
        .map(|j| match model.family {
            Family::Wave => {
                let w = lam[j].sqrt();
                let c = I / w;
                let w0 = C64::new(model.x0[2 * j], model.x0[2 * j + 1] / w);
                Ok((DiscMode { rho: scheme.wave_multiplier(k, lam[j])?, c }, ExactMode { s: I * w, c }, w0))
            }
            fam => {
                let a = fam.rate(lam[j]);
                let one = C64::new(1.0, 0.0);
                Ok((
                    DiscMode { rho: scheme.parabolic_multiplier(k, a)?, c: one },
                    ExactMode { s: C64::new(a, 0.0), c: one },
                    C64::new(model.x0[j], 0.0),
                ))
            }
        })
        .collect()
}

fn check(model: &ModelSpec, scheme: &RationalScheme, k: f64, norm: StrongNorm) -> Result<Vec<f64>> {
    if !scheme.i_stable {
        return Err(Error::Precondition(format!("scheme {} is not I-stable", scheme.name)));
    }
    if !(k > 0.0) {
        return invalid("k must be positive");
    }
    if norm == StrongNorm::First && model.family != Family::Wave {
        return invalid("first-component norm applies to the wave only");
    }
    if !model.q.is_diagonal() {
        return Err(Error::Unsupported("strong error for dense Q".into()));
    }
    model.q.weights(&model.basis)
}

/// Joint law of the time-discrete solution and the mild solution at
/// `T = N k`, both driven by the same noise, in closed form.
pub fn temporal_joint(model: &ModelSpec, scheme: &RationalScheme, k: f64, n: usize, norm: StrongNorm) -> Result<JointLaw> {
    let q = check(model, scheme, k, norm)?;
    let t = k * n as f64;
    let nu = n as u64;
    let mut out = JointLaw { norm, mean_diff_sq: 0.0, tr_a: 0.0, tr_b: 0.0, tr_cross: 0.0 };
    for (j, (d, e, w0)) in modes(model, scheme, k)?.into_iter().enumerate() {
        let dd = disc_disc(d, d, k, nu);
        let ee = exact_exact(e, e, t);
        let de = disc_exact(d, e, k, nu);
        let diff = d.rho.pow(n as f64) * w0 - (-e.s * t).exp() * w0;
        match norm {
            StrongNorm::Full => {
                out.mean_diff_sq += diff.norm_sqr();
                out.tr_a += q[j] * dd.zyb.re;
                out.tr_b += q[j] * ee.zyb.re;
                out.tr_cross += q[j] * de.zyb.re;
            }
            StrongNorm::First => {
                out.mean_diff_sq += diff.re * diff.re;
                out.tr_a += q[j] * dd.rr();
                out.tr_b += q[j] * ee.rr();
                out.tr_cross += q[j] * de.rr();
            }
        }
    }
    Ok(out)
}

/// The same error by direct Ito isometry: one pass over the steps with the
/// exact integral of `|R^m c - e^{-s tau} c|^2` on each step.
pub fn strong_error_ito(model: &ModelSpec, scheme: &RationalScheme, k: f64, n: usize, norm: StrongNorm) -> Result<f64> {
    let q = check(model, scheme, k, norm)?;
    let t = k * n as f64;
    // int over ((m-1)k, mk] of e^{-sigma tau}
    let seg = |sigma: C64, m: usize| -> C64 {
        let x = sigma * k;
        let w = if x.norm() < 1e-8 { C64::new(1.0, 0.0) - x * 0.5 } else { (C64::new(1.0, 0.0) - (-x).exp()) / x };
        (-sigma * (k * (m - 1) as f64)).exp() * k * w
    };
    let mut total = 0.0;
    for (j, (d, e, w0)) in modes(model, scheme, k)?.into_iter().enumerate() {
        let rho = d.rho.value();
        let c = d.c;
        let mut p = C64::new(1.0, 0.0);
        let mut acc = 0.0;
        for m in 1..=n {
            p *= rho;
            let s = e.s;
            acc += match norm {
                StrongNorm::Full => {
                    // |p - e|^2 = |p|^2 + |e|^2 - 2 Re(p conj(e))
                    let pe = (p * seg(s.conj(), m)).re;
                    let ee = seg(s + s.conj(), m).re;
                    c.norm_sqr() * (p.norm_sqr() * k + ee - 2.0 * pe)
                }
                StrongNorm::First => {
                    // (Re D)^2 = (|D|^2 + Re D^2) / 2 with D = (p - e) c
                    let full = p.norm_sqr() * k + seg(s + s.conj(), m).re - 2.0 * (p * seg(s.conj(), m)).re;
                    let sq = p * p * k - p * seg(s, m) * 2.0 + seg(s * 2.0, m);
                    0.5 * (c.norm_sqr() * full + (c * c * sq).re)
                }
            };
        }
        let mut pn = C64::new(1.0, 0.0);
        for _ in 0..n {
            pn *= rho;
        }
        let diff = (pn - (-e.s * t).exp()) * w0;
        total += q[j] * acc
            + match norm {
                StrongNorm::Full => diff.norm_sqr(),
                StrongNorm::First => diff.re * diff.re,
            };
    }
    Ok(total.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::Preset;
    use crate::spectral_core::{build_basis, Bc, CovarianceSpec};

    #[test]
    fn closed_form_matches_stepwise() {
        let basis = build_basis(Bc::Dirichlet, 24).unwrap();
        let mut x0 = vec![0.0; 48];
        x0[0] = 0.4;
        x0[3] = -1.1;
        let model = ModelSpec::new(Family::Wave, basis.clone(), CovarianceSpec::Family { gamma: 0.25 }, x0).unwrap();
        for p in [Preset::BackwardEuler, Preset::CrankNicolson] {
            let s = RationalScheme::preset(p);
            for norm in [StrongNorm::Full, StrongNorm::First] {
                let a = strong_error_exact(&temporal_joint(&model, &s, 0.7 / 64.0, 64, norm).unwrap()).unwrap();
                let b = strong_error_ito(&model, &s, 0.7 / 64.0, 64, norm).unwrap();
                assert!((a - b).abs() < 1e-9 * b, "{a} {b}");
            }
        }
        let heat = ModelSpec::new(Family::Heat, basis, CovarianceSpec::identity(), (0..24).map(|j| 1.0 / (j + 1) as f64).collect()).unwrap();
        let s = RationalScheme::preset(Preset::BackwardEuler);
        let a = strong_error_exact(&temporal_joint(&heat, &s, 0.01, 70, StrongNorm::Full).unwrap()).unwrap();
        let b = strong_error_ito(&heat, &s, 0.01, 70, StrongNorm::Full).unwrap();
        assert!((a - b).abs() < 1e-9 * b);
    }

    #[test]
    fn first_norm_is_wave_only() {
        let basis = build_basis(Bc::Dirichlet, 4).unwrap();
        let heat = ModelSpec::zero_start(Family::Heat, basis, CovarianceSpec::identity()).unwrap();
        let s = RationalScheme::preset(Preset::BackwardEuler);
        assert!(temporal_joint(&heat, &s, 0.1, 3, StrongNorm::First).is_err());
    }

    #[test]
    fn joint_law_rejects_negative_mean_square() {
        let j = JointLaw { norm: StrongNorm::Full, mean_diff_sq: 0.0, tr_a: 1.0, tr_b: 1.0, tr_cross: 1.5 };
        assert!(matches!(strong_error_exact(&j), Err(Error::Numerical(_))));
        let j = JointLaw { norm: StrongNorm::Full, mean_diff_sq: 0.0, tr_a: 1.0, tr_b: 1.0, tr_cross: 1.0 };
        assert_eq!(strong_error_exact(&j).unwrap(), 0.0);
    }
}
