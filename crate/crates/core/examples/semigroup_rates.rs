//! Deterministic error of rational approximations of the wave group,
//! measured as a sup over time in the operator norm from H^alpha to H.
//!
//! cargo run --release --example semigroup_rates

use ratelab::error_lab::{fit_rate, RateModel, RatePoint};
use ratelab::schemes::{interpolated_error_sup, make_scheme, stability_sup, Preset, RationalScheme, SampleMode, SchemeSpec};
use ratelab::spectral_core::{build_basis, Bc};

fn main() -> ratelab::Result<()> {
    let basis = build_basis(Bc::Dirichlet, 1024)?;
    let t = 1.0;
    let cases = [
        (RationalScheme::preset(Preset::BackwardEuler), 1.0),
        (RationalScheme::preset(Preset::BackwardEuler), 2.0),
        (RationalScheme::preset(Preset::CrankNicolson), 1.0),
        (RationalScheme::preset(Preset::CrankNicolson), 1.5),
    ];
    for (s, alpha) in cases {
        let p = s.order as f64;
        let mut pts = Vec::new();
        for l in 4..=12 {
            let k = t / f64::from(1u32 << l);
            pts.push(RatePoint::new(k, interpolated_error_sup(&s, k, &basis, alpha, t, SampleMode::Sup)?));
        }
        let rep = fit_rate(&pts, RateModel::Plain)?;
        let expected = (alpha * p / (p + 1.0)).min(1.0);
        println!("{:<16} alpha={alpha:<4} slope {:.3}  expected {expected:.3}  R^2 {:.4}", s.name, rep.slope, rep.r_squared);
    }
    let cn = RationalScheme::preset(Preset::CrankNicolson);
    println!("sup_n ||R(kA)^n|| for Crank-Nicolson: {:.15}", stability_sup(&cn, 0.01, &basis, 100)?);

    // two-stage Radau IIA from its coefficients
    let radau = make_scheme(&SchemeSpec::Coefficients { num: vec![1.0, -1.0 / 3.0], den: vec![1.0, 2.0 / 3.0, 1.0 / 6.0] }, 0.5)?;
    println!(
        "custom scheme: order {}, I-stable {}, R(0.3) = {:.12} against e^-0.3 = {:.12}",
        radau.order,
        radau.i_stable,
        radau.eval(ratelab::cmath::C64::new(0.3, 0.0))?.re,
        (-0.3f64).exp()
    );
    let explicit = make_scheme(&SchemeSpec::Coefficients { num: vec![1.0, -1.0], den: vec![1.0] }, 0.5)?;
    println!("explicit Euler: order {}, I-stable {}", explicit.order, explicit.i_stable);
    Ok(())
}
