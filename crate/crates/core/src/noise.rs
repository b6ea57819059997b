//! Q-Wiener increments in eigencoordinates from a counter-based generator.
//!
//! Normal number `n` of stream `s` is a pure function of `(seed, s, n)`:
//! ChaCha8 keyed by the seed, positioned at stream `s` and word `4n`, then
//! Box-Muller on two 53-bit uniforms.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::spectral_core::{CovarianceSpec, EigenBasis};

/// Streams are split by purpose so that auxiliary draws never alias the
/// Brownian increments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Increment = 0,
    Auxiliary1 = 1,
    Auxiliary2 = 2,
}

pub fn stream_id(domain: Domain, path: u64, mode: u64) -> u64 {
    ((domain as u64) << 56) | ((path & 0xF_FFFF_FFFF) << 20) | (mode & 0xF_FFFF)
}

/// Sequential reader of one stream, starting at a given counter.
pub struct NormalStream {
    rng: ChaCha8Rng,
}

impl NormalStream {
    pub fn new(seed: u64, stream: u64, start: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        rng.set_word_pos(4 * start as u128);
        NormalStream { rng }
    }

    #[inline]
    pub fn next(&mut self) -> f64 {
        let a = self.rng.next_u64();
        let b = self.rng.next_u64();
        let u1 = 1.0 - (a >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }

    /// Uniform on `[0, 1)` from one position of the same counter sequence.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        let a = self.rng.next_u64();
        let _ = self.rng.next_u64();
        (a >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

pub fn normal_at(seed: u64, stream: u64, index: u64) -> f64 {
    NormalStream::new(seed, stream, index).next()
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoisePath {
    /// `J x N`; entry `(j, n)` is the increment of mode `j` over step `n`.
    pub increments: DMatrix<f64>,
    pub k: f64,
    pub seed: u64,
    pub path: u64,
}

impl NoisePath {
    pub fn modes(&self) -> usize {
        self.increments.nrows()
    }

    pub fn steps(&self) -> usize {
        self.increments.ncols()
    }
}

/// Single path with index 0.
pub fn sample_path(q: &CovarianceSpec, basis: &EigenBasis, n: usize, k: f64, seed: u64) -> Result<NoisePath> {
    sample_path_indexed(q, basis, n, k, seed, 0, 0..basis.len())
}

/// Rows `modes` of path number `path`; rows outside the range are zero.
pub fn sample_path_indexed(
    q: &CovarianceSpec,
    basis: &EigenBasis,
    n: usize,
    k: f64,
    seed: u64,
    path: u64,
    modes: std::ops::Range<usize>,
) -> Result<NoisePath> {
    if !q.is_diagonal() {
        return Err(Error::Unsupported("noise sampling for dense Q".into()));
    }
    if n == 0 || !(k > 0.0) {
        return invalid("need N >= 1 and k > 0");
    }
    let mut inc = DMatrix::zeros(basis.len(), n);
    for j in modes {
        let sd = (k * q.weight(j)?).sqrt();
        if sd == 0.0 {
            continue;
        }
        let mut s = NormalStream::new(seed, stream_id(Domain::Increment, path, j as u64), 0);
        for col in 0..n {
            inc[(j, col)] = sd * s.next();
        }
    }
    Ok(NoisePath { increments: inc, k, seed, path })
}

pub fn coarsen(path: &NoisePath, m: usize) -> Result<NoisePath> {
    if m == 0 || path.steps() % m != 0 {
        return invalid(format!("coarsening factor {m} does not divide N = {}", path.steps()));
    }
    let nc = path.steps() / m;
    let mut inc = DMatrix::zeros(path.modes(), nc);
    for j in 0..path.modes() {
        for c in 0..nc {
            inc[(j, c)] = (0..m).map(|r| path.increments[(j, c * m + r)]).sum();
        }
    }
    Ok(NoisePath { increments: inc, k: path.k * m as f64, seed: path.seed, path: path.path })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_core::{build_basis, Bc};

    #[test]
    fn zero_weights_give_zero_path() {
        let b = build_basis(Bc::Dirichlet, 4).unwrap();
        let p = sample_path(&CovarianceSpec::Diagonal(vec![0.0; 4]), &b, 10, 0.1, 3).unwrap();
        assert_eq!(p.increments.amax(), 0.0);
    }

    #[test]
    fn reproducible_and_enumeration_independent() {
        let b = build_basis(Bc::Dirichlet, 8).unwrap();
        let q = CovarianceSpec::Family { gamma: 0.3 };
        let a = sample_path(&q, &b, 16, 0.01, 42).unwrap();
        let c = sample_path(&q, &b, 16, 0.01, 42).unwrap();
        assert_eq!(a, c);
        let only5 = sample_path_indexed(&q, &b, 16, 0.01, 42, 0, 5..6).unwrap();
        assert_eq!(only5.increments.row(5), a.increments.row(5));
        let other = sample_path(&q, &b, 16, 0.01, 43).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn coarsen_sums_and_rejects() {
        let p = NoisePath { increments: DMatrix::from_row_slice(1, 2, &[0.5, 0.25]), k: 0.1, seed: 0, path: 0 };
        let c = coarsen(&p, 2).unwrap();
        assert_eq!(c.increments[(0, 0)], 0.75);
        assert!((c.k - 0.2).abs() < 1e-15);
        assert!(coarsen(&p, 3).is_err());
    }

    #[test]
    fn rejects_dense() {
        let b = build_basis(Bc::Dirichlet, 2).unwrap();
        let q = CovarianceSpec::Dense(DMatrix::identity(2, 2));
        assert!(matches!(sample_path(&q, &b, 2, 0.1, 0), Err(Error::Unsupported(_))));
    }
}
