//! Exact Gaussian oracles and Monte Carlo estimators for the weak and strong
//! convergence rates of rational time stepping and linear finite elements
//! applied to linear SPDEs with additive noise: the stochastic wave equation,
//! the stochastic heat equation and the linearized Cahn-Hilliard-Cook equation
//! on the unit interval.

pub mod cli;
pub mod cmath;
pub mod error;
pub mod error_lab;
pub mod fem1d;
pub mod models;
pub mod noise;
pub mod oracle;
pub mod schemes;
pub mod spectral_core;
pub mod verify;

pub use error::{Error, Result};
