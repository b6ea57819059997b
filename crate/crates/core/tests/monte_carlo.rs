use nalgebra::DVector;

use ratelab::error_lab::{weak_error_mc, TestFunctional};
use ratelab::models::{Family, ModelSpec};
use ratelab::noise::{coarsen, sample_path};
use ratelab::schemes::{DiscreteLawRequest, Preset, RationalScheme, Space};
use ratelab::spectral_core::{build_basis, Bc, CovarianceSpec};

fn se_at(n_paths: usize) -> f64 {
    let basis = build_basis(Bc::Dirichlet, 8).unwrap();
    let model = ModelSpec::zero_start(Family::Wave, basis, CovarianceSpec::identity()).unwrap();
    let s = RationalScheme::preset(Preset::BackwardEuler);
    let req = DiscreteLawRequest { model: &model, scheme: &s, k: 0.1, n: 4, t_final: 0.4, space: Space::Spectral };
    let psi = DVector::from_fn(16, |i, _| if i % 2 == 0 { 1.0 } else { 0.0 });
    let f = TestFunctional::sine(model.frame(), psi, 0.0);
    weak_error_mc(&req, &f, n_paths, 3).unwrap().standard_error
}

#[test]
fn standard_error_scales_as_inverse_square_root() {
    let ns = [1000usize, 2000, 4000, 8000, 16000, 32000];
    let se: Vec<f64> = ns.iter().map(|&n| se_at(n)).collect();
    for w in se.windows(2) {
        let r = w[0] / w[1];
        assert!((r / std::f64::consts::SQRT_2 - 1.0).abs() <= 0.10, "ratio {r}");
    }
    // least squares on (ln n, ln se)
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = se.iter().map(|s| s.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 6.0, ys.iter().sum::<f64>() / 6.0);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    assert!((slope + 0.5).abs() <= 0.05, "slope {slope}");
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
fn ks(mut a: Vec<f64>, mut b: Vec<f64>) -> (f64, f64) {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    let lam = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    let p: f64 = (1..=100).map(|k| 2.0 * (-1f64).powi(k - 1) * (-2.0 * (k as f64 * lam).powi(2)).exp()).sum();
    (d, p.clamp(0.0, 1.0))
}

#[test]
fn coarsened_and_direct_paths_agree_in_distribution() {
    let basis = build_basis(Bc::Dirichlet, 2).unwrap();
    let q = CovarianceSpec::Family { gamma: 0.5 };
    let n = 100_000;
    let k = 0.01;
    let fine = sample_path(&q, &basis, 4 * n, k, 21).unwrap();
    let coarse = coarsen(&fine, 4).unwrap();
    let direct = sample_path(&q, &basis, n, 4.0 * k, 22).unwrap();
    assert!((coarse.k - 4.0 * k).abs() < 1e-15);
    for j in 0..2 {
        let a: Vec<f64> = coarse.increments.row(j).iter().copied().collect();
        let b: Vec<f64> = direct.increments.row(j).iter().copied().collect();
        let var = a.iter().map(|x| x * x).sum::<f64>() / n as f64;
        let want = 4.0 * k * basis.lambdas[j].powf(-0.5);
        // variance of the sample second moment is 2 want^2 / n
        assert!((var - want).abs() <= 3.0 * want * (2.0 / n as f64).sqrt(), "mode {j}: {var} vs {want}");
        let (d, p) = ks(a, b);
        assert!(p > 0.001, "mode {j}: D = {d}, p = {p}");
    }
}
