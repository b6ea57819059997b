//! The weak error of a quadratic functional split into its deterministic
//! line-integral term and its noise term, each evaluated in closed form.
//!
//! cargo run --release --example representation

use nalgebra::{DMatrix, DVector};
use ratelab::error_lab::{representation_check, Propagator, TestFunctional};
use ratelab::models::{Family, ModelSpec};
use ratelab::schemes::{Preset, RationalScheme};
use ratelab::spectral_core::{build_basis, Bc, CovarianceSpec};

fn main() -> ratelab::Result<()> {
    let j = 4;
    let basis = build_basis(Bc::Dirichlet, j)?;
    let x0 = vec![1.0, 0.0, 0.3, -0.5, 0.0, 0.2, 0.1, 0.0];
    let model = ModelSpec::new(Family::Wave, basis, CovarianceSpec::identity(), x0)?;
    let mut m = DMatrix::zeros(2 * j, 2 * j);
    m[(0, 0)] = 1.0;
    m[(0, 2)] = 0.5;
    m[(2, 0)] = 0.5;
    m[(2, 2)] = 0.25;
    let f = TestFunctional::quadratic(model.frame(), &m, &DVector::from_element(2 * j, 0.1))?;
    let be = RationalScheme::preset(Preset::BackwardEuler);
    let cn = RationalScheme::preset(Preset::CrankNicolson);
    for (name, prop) in [("backward_euler", Propagator::Scheme(&be)), ("crank_nicolson", Propagator::Scheme(&cn)), ("exact", Propagator::Exact)] {
        let r = representation_check(&model, prop, 0.125, 8, &f)?;
        println!(
            "{name:<15} lhs {:>12.6e} = {:>12.6e} + {:>12.6e}  gap {:.1e}  factor-order difference {:.1e}",
            r.lhs,
            r.rhs_term1,
            r.rhs_term2,
            r.abs_gap,
            (r.rhs_term2 - r.rhs_term2_swapped).abs()
        );
    }
    Ok(())
}
