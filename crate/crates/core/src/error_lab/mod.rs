//! Weak and strong errors (exact and Monte Carlo), the representation check
//! for quadratic functionals, and rate fitting.

pub mod functional;
pub mod mc;
pub mod rate;
pub mod representation;
pub mod strong;
pub mod weak;

pub use functional::{FunctionalKind, Selector, TestFunctional};
pub use mc::{strong_error_mc, weak_error_mc, McEstimate, MC_CHUNK};
pub use rate::{fit_rate, RateModel, RatePoint, RateReport};
pub use representation::{representation_check, Propagator, RepresentationReport};
pub use strong::{strong_error_exact, strong_error_ito, temporal_joint, JointLaw, StrongNorm};
pub use weak::{weak_error_exact, weak_error_fem};
