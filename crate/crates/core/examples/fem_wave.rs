//! Linear finite elements for the wave equation: generalized eigenproblem,
//! cross-Gramian with the exact eigenbasis, and fully discrete errors
//! along a mesh sweep.
//!
//! cargo run --release --example fem_wave

use std::f64::consts::FRAC_PI_2;

use nalgebra::DVector;
use ratelab::error_lab::{fit_rate, strong_error_exact, weak_error_fem, RateModel, RatePoint, TestFunctional};
use ratelab::fem1d::{assemble_elements, closed_form_eigenvalues, fem_eigs, fully_discrete_law, FemDiscretization};
use ratelab::models::{mild_law, Family, ModelSpec};
use ratelab::schemes::{Preset, RationalScheme};
use ratelab::spectral_core::{build_basis, Bc, CovarianceSpec};

fn main() -> ratelab::Result<()> {
    let space = assemble_elements(8, Bc::Dirichlet)?;
    let eigs = fem_eigs(&space)?;
    println!("FEM eigenvalues on 8 elements, solver against closed form against exact:");
    for (i, (a, b)) in eigs.lambdas.iter().zip(closed_form_eigenvalues(&space)).enumerate() {
        let exact = ((i + 1) as f64 * std::f64::consts::PI).powi(2);
        println!("  {:>2}: {a:>12.6} {b:>12.6} {exact:>12.6}", i + 1);
    }

    let (j, t, gamma) = (1024, 0.7, 0.25);
    let basis = build_basis(Bc::Dirichlet, j)?;
    let model = ModelSpec::zero_start(Family::Wave, basis.clone(), CovarianceSpec::Family { gamma })?;
    let exact = mild_law(&model, t)?;
    let psi = DVector::from_fn(2 * j, |i, _| if i % 2 == 0 { 1.0 } else { 0.0 });
    let f = TestFunctional::sine(model.frame(), psi, FRAC_PI_2);
    let s = RationalScheme::preset(Preset::CrankNicolson);

    println!("\nCrank-Nicolson, k pinned two levels finer than the finest mesh");
    println!("{:>10} {:>14} {:>14}", "h", "weak", "strong");
    let n = 1usize << 10;
    let k = t / n as f64;
    let (mut weak, mut strong) = (Vec::new(), Vec::new());
    for l in 3..=8 {
        let m = 1usize << l;
        let fd = FemDiscretization::new(m, &basis)?;
        let fdl = fully_discrete_law(&fd, &s, k, n, &model)?;
        let w = weak_error_fem(&exact, &fdl.law, &fd, Family::Wave, &f)?.abs();
        let e = strong_error_exact(&fdl.joint)?;
        let h = 1.0 / m as f64;
        println!("{h:>10.3e} {w:>14.6e} {e:>14.6e}");
        weak.push(RatePoint::new(h, w));
        strong.push(RatePoint::new(h, e));
    }
    println!(
        "weak h-slope {:.3}, strong h-slope {:.3}",
        fit_rate(&weak, RateModel::Plain)?.slope,
        fit_rate(&strong, RateModel::Plain)?.slope
    );
    Ok(())
}
