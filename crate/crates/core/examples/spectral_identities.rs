//! Trace identity for the wave covariance, the operator-noise inequality
//! chain, and Hoelder moduli of the wave group.
//!
//! cargo run --release --example spectral_identities

use ratelab::models::{holder_check, trace_identity_check};
use ratelab::spectral_core::{build_basis, check_aq, trace_condition, Bc, CovarianceSpec};

fn main() -> ratelab::Result<()> {
    println!("trace identity: Tr Cov X(T) against T sum q_j / lambda_j");
    for j in [16, 256] {
        let basis = build_basis(Bc::Dirichlet, j)?;
        for gamma in [0.0, 0.25] {
            let q = CovarianceSpec::Family { gamma };
            for t in [0.5, 1.0, 2.0] {
                let r = trace_identity_check(&q, &basis, t)?;
                println!("  J={j:<4} gamma={gamma:<5} T={t:<4} lhs={:.12e} rel diff={:.1e}", r.lhs, r.abs_diff / r.rhs);
            }
        }
    }

    println!("\ninequality chain for q_j = lambda_j^-1/2, s = 0.25, alpha = 1");
    let basis = build_basis(Bc::Dirichlet, 64)?;
    let r = check_aq(&CovarianceSpec::Family { gamma: 0.5 }, &basis, 0.25, 1.0)?;
    println!("  lhs {:.6}  trace {:.6}  product {:.6}  rhs {:.6}", r.lhs, r.mids[0], r.mids[1], r.rhs);
    println!("  inequalities hold: {}, equalities: {:?}", r.all_inequalities_hold, r.equality_flags);

    println!("\nregularity condition sum q_j lambda_j^(beta-1) for gamma = 0.25");
    for beta in [0.5, 0.7, 0.8] {
        let tc = trace_condition(&CovarianceSpec::Family { gamma: 0.25 }, &basis, beta)?;
        println!("  beta={beta}: {}", tc.diagnostic());
    }

    println!("\nHoelder ratio of the wave group, ||E(t) - E(s)|| / |t - s|^(alpha/2)");
    let basis = build_basis(Bc::Dirichlet, 256)?;
    for alpha in [0.0, 0.5, 1.0] {
        let worst = [(0.3, 0.31), (1.0, 0.2), (2.0, 1.999), (0.05, 0.7)]
            .iter()
            .map(|&(t, s)| holder_check(&basis, alpha, t, s))
            .collect::<ratelab::Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        println!("  alpha={alpha}: max ratio {worst:.4}");
    }
    Ok(())
}
