//! Monte Carlo weak and strong errors on coupled paths, checked against the
//! exact oracles, plus the counter-based noise and path coarsening.
//!
//! cargo run --release --example monte_carlo

use nalgebra::{DMatrix, DVector};
use ratelab::error_lab::{
    strong_error_exact, strong_error_mc, temporal_joint, weak_error_exact, weak_error_mc, StrongNorm, TestFunctional,
};
use ratelab::models::{mild_law, Family, ModelSpec};
use ratelab::noise::{coarsen, sample_path};
use ratelab::schemes::{discrete_law, DiscreteLawRequest, Preset, RationalScheme, Space};
use ratelab::spectral_core::{build_basis, Bc, CovarianceSpec};

fn main() -> ratelab::Result<()> {
    let j = 32;
    let basis = build_basis(Bc::Dirichlet, j)?;
    let q = CovarianceSpec::Family { gamma: 0.25 };

    let fine = sample_path(&q, &basis, 8, 0.05, 42)?;
    let coarse = coarsen(&fine, 4)?;
    println!("mode 1 increments, k = 0.05: {:.4?}", fine.increments.row(0).iter().collect::<Vec<_>>());
    println!("coarsened by 4, k = {}: {:.4?}", coarse.k, coarse.increments.row(0).iter().collect::<Vec<_>>());

    let mut x0 = vec![0.0; 2 * j];
    x0[0] = 0.5;
    let model = ModelSpec::new(Family::Wave, basis, q, x0)?;
    let t = 0.7;
    let exact = mild_law(&model, t)?;
    let psi = DVector::from_fn(2 * j, |i, _| if i % 2 == 0 { 1.0 } else { 0.0 });
    let sine = TestFunctional::sine(model.frame(), psi, 0.0);
    let mut m = DMatrix::zeros(2 * j, 2 * j);
    for i in 0..4 {
        m[(2 * i, 2 * i)] = 1.0;
    }
    let gauss = TestFunctional::gauss_exp(model.frame(), &m)?;

    for preset in [Preset::BackwardEuler, Preset::CrankNicolson] {
        let s = RationalScheme::preset(preset);
        println!("\n{}", s.name);
        for n in [4usize, 16] {
            let k = t / n as f64;
            let req = DiscreteLawRequest { model: &model, scheme: &s, k, n, t_final: t, space: Space::Spectral };
            let disc = discrete_law(&req, &model.x0)?;
            for (name, f) in [("sine", &sine), ("gauss_exp", &gauss)] {
                let ex = weak_error_exact(&exact, &disc, f)?;
                let mc = weak_error_mc(&req, f, 10_000, 1)?;
                println!(
                    "  N={n:<3} weak {name:<9} exact {ex:>11.4e}  mc {:>11.4e} +- {:.1e}  |z| = {:.2}",
                    mc.estimate,
                    mc.standard_error,
                    (mc.estimate - ex).abs() / mc.standard_error
                );
            }
            let ex = strong_error_exact(&temporal_joint(&model, &s, k, n, StrongNorm::First)?)?;
            let mc = strong_error_mc(&req, StrongNorm::First, 10_000, 1)?;
            println!(
                "  N={n:<3} strong           exact {ex:>11.4e}  mc {:>11.4e} +- {:.1e}  |z| = {:.2}",
                mc.estimate,
                mc.standard_error,
                (mc.estimate - ex).abs() / mc.standard_error
            );
        }
    }
    Ok(())
}
