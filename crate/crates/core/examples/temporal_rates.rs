//! Temporal weak and strong errors for the stochastic wave equation with
//! exact Gaussian oracles, backward Euler against Crank-Nicolson.
//!
//! cargo run --release --example temporal_rates

use std::f64::consts::FRAC_PI_2;

use nalgebra::DVector;
use ratelab::error_lab::{
    fit_rate, strong_error_exact, temporal_joint, weak_error_exact, RateModel, RatePoint, StrongNorm, TestFunctional,
};
use ratelab::models::{beta_sup, mild_law, Family, ModelSpec};
use ratelab::schemes::{discrete_law, DiscreteLawRequest, Preset, RationalScheme, Space};
use ratelab::spectral_core::{build_basis, Bc, CovarianceSpec};

fn main() -> ratelab::Result<()> {
    let (j, t, gamma) = (1024, 0.7, 0.25);
    let basis = build_basis(Bc::Dirichlet, j)?;
    let model = ModelSpec::zero_start(Family::Wave, basis, CovarianceSpec::Family { gamma })?;
    let exact = mild_law(&model, t)?;
    let psi = DVector::from_fn(2 * j, |i, _| if i % 2 == 0 { 1.0 } else { 0.0 });
    let f = TestFunctional::sine(model.frame(), psi, FRAC_PI_2);
    let b = beta_sup(Family::Wave, gamma);
    println!("q_j = lambda_j^-{gamma}, admissible beta up to {b}");

    for preset in [Preset::BackwardEuler, Preset::CrankNicolson] {
        let s = RationalScheme::preset(preset);
        let p = s.order as f64;
        let (mut weak, mut strong) = (Vec::new(), Vec::new());
        println!("\n{}", s.name);
        println!("{:>10} {:>14} {:>14}", "k", "weak", "strong");
        for l in 4..=12 {
            let n = 1usize << l;
            let k = t / n as f64;
            let req = DiscreteLawRequest { model: &model, scheme: &s, k, n, t_final: t, space: Space::Spectral };
            let w = weak_error_exact(&exact, &discrete_law(&req, &model.x0)?, &f)?.abs();
            let e = strong_error_exact(&temporal_joint(&model, &s, k, n, StrongNorm::First)?)?;
            println!("{k:>10.3e} {w:>14.6e} {e:>14.6e}");
            weak.push(RatePoint::new(k, w));
            strong.push(RatePoint::new(k, e));
        }
        let (w, e) = (fit_rate(&weak, RateModel::Plain)?, fit_rate(&strong, RateModel::Plain)?);
        println!(
            "weak slope {:.3} (expected {:.3}), strong slope {:.3} (expected {:.3}), ratio {:.3}",
            w.slope,
            (2.0 * b * p / (p + 1.0)).min(1.0),
            e.slope,
            (b * p / (p + 1.0)).min(1.0),
            w.slope / e.slope
        );
    }
    Ok(())
}
