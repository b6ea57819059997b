use crate::error::Result;
use crate::fem1d::FemDiscretization;
use crate::models::{Family, GaussianLaw};

use super::functional::TestFunctional;

/// `E G(B) - E G(A)`.
pub fn weak_error_exact(a: &GaussianLaw, b: &GaussianLaw, f: &TestFunctional) -> Result<f64> {
    Ok(f.expect(b)? - f.expect(a)?)
}

/// Weak error of a law in FEM coordinates against a spectral law, with the
/// functional's probes carried across by the cross-Gramian.
pub fn weak_error_fem(
    spectral: &GaussianLaw,
    fem: &GaussianLaw,
    fd: &FemDiscretization,
    family: Family,
    f: &TestFunctional,
) -> Result<f64> {
    let a = spectral.push_forward(&f.probes)?;
    let b = fem.push_forward(&fd.map_probes(family, &f.probes)?)?;
    weak_error_exact(&a, &b, f)
}
