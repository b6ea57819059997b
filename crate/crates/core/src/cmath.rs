//! Complex helpers shared by the closed-form accumulations.
//!
//! A per-step multiplier `z` is carried as its logarithm so that powers and
//! geometric sums stay accurate when `|z|` is within round-off of one.

use num_complex::Complex64;

pub type C64 = Complex64;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// `exp(z) - 1` without cancellation near zero.
pub fn cexpm1(z: C64) -> C64 {
    let em1 = z.re.exp_m1();
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    C64::new(em1 * c - 2.0 * half * half, z.re.exp() * s)
}

/// `(exp(z) - 1) / z`, equal to 1 at the origin.
pub fn phi1(z: C64) -> C64 {
    if z.norm() < 1e-5 {
        C64::new(1.0, 0.0) + z * (0.5 + z / 6.0)
    } else {
        cexpm1(z) / z
    }
}

/// `1 - sin(x)/x`, accurate for small `x`.
pub fn one_minus_sinc(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    } else {
        1.0 - x.sin() / x
    }
}

/// `sin(x)/x`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Logarithm of a step multiplier. `None` encodes an exact zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogMul(pub Option<C64>);

impl LogMul {
    pub fn one() -> Self {
        LogMul(Some(C64::new(0.0, 0.0)))
    }

    pub fn zero() -> Self {
        LogMul(None)
    }

    pub fn from_value(z: C64) -> Self {
        if z == C64::new(0.0, 0.0) {
            LogMul(None)
        } else {
            LogMul(Some(z.ln()))
        }
    }

    pub fn from_log(l: C64) -> Self {
        if l.re == f64::NEG_INFINITY {
            LogMul(None)
        } else {
            LogMul(Some(l))
        }
    }

    pub fn value(self) -> C64 {
        self.pow(1.0)
    }

    pub fn pow(self, n: f64) -> C64 {
        match self.0 {
            None if n == 0.0 => C64::new(1.0, 0.0),
            None => C64::new(0.0, 0.0),
            Some(l) => (l * n).exp(),
        }
    }

    pub fn mul(self, other: LogMul) -> LogMul {
        match (self.0, other.0) {
            (Some(a), Some(b)) => LogMul(Some(a + b)),
            _ => LogMul(None),
        }
    }

    pub fn conj(self) -> LogMul {
        LogMul(self.0.map(|l| l.conj()))
    }

    /// Multiplies by `exp(s)`.
    pub fn shift(self, s: C64) -> LogMul {
        LogMul(self.0.map(|l| l + s))
    }

    /// `sum_{m=1}^{n} z^m`.
    pub fn geom_sum(self, n: u64) -> C64 {
        let l = match self.0 {
            None => return C64::new(0.0, 0.0),
            Some(l) => l,
        };
        if n == 0 {
            return C64::new(0.0, 0.0);
        }
        let nf = n as f64;
        let d = cexpm1(l);
        if d.norm() < 1e-300 {
            return C64::new(nf, 0.0);
        }
        if l.re > 0.0 || d.norm() > 0.5 {
            // away from z = 1 the plain formula is already accurate
            let z = l.exp();
            return z * (C64::new(1.0, 0.0) - (l * nf).exp()) / (C64::new(1.0, 0.0) - z);
        }
        l.exp() * cexpm1(l * nf) / d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(z: C64, n: u64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        let mut p = C64::new(1.0, 0.0);
        for _ in 0..n {
            p *= z;
            acc += p;
        }
        acc
    }

    #[test]
    fn geom_sum_matches_brute_force() {
        for &(re, im) in &[(0.3, 0.4), (0.999, 0.01), (-0.5, 0.2), (0.0, 0.99), (1.0, 0.0), (0.6, -0.79)] {
            let z = C64::new(re, im);
            for &n in &[1u64, 2, 7, 64, 500] {
                let a = LogMul::from_value(z).geom_sum(n);
                let b = brute(z, n);
                assert!((a - b).norm() <= 1e-11 * (1.0 + b.norm()), "{z} {n}: {a} vs {b}");
            }
        }
        assert_eq!(LogMul::zero().geom_sum(10), C64::new(0.0, 0.0));
        assert_eq!(LogMul::one().geom_sum(10), C64::new(10.0, 0.0));
    }

    #[test]
    fn geom_sum_near_one_keeps_precision() {
        // z = exp(-1e-12): the sum of n terms is n - n(n+1)/2 * 1e-12 + ...
        let l = C64::new(-1e-12, 0.0);
        let s = LogMul::from_log(l).geom_sum(1000);
        let expect = 1000.0 - 500.5 * 1000.0 * 1e-12;
        assert!((s.re - expect).abs() < 1e-9);
    }

    #[test]
    fn expm1_small_and_large() {
        let z = C64::new(1e-9, -2e-9);
        let e = cexpm1(z);
        assert!((e - z).norm() < 1e-17);
        let w = C64::new(0.7, 2.1);
        assert!((cexpm1(w) - (w.exp() - 1.0)).norm() < 1e-14);
        assert!((phi1(C64::new(1e-7, 0.0)).re - (1.0 + 5e-8 + 1e-14 / 6.0)).abs() < 1e-16);
    }

    #[test]
    fn one_minus_sinc_continuity() {
        for &x in &[0.0999, 0.1001, 0.05, 1.0] {
            let direct = 1.0 - f64::sin(x) / x;
            assert!((one_minus_sinc(x) - direct).abs() < 1e-13);
        }
        assert!((one_minus_sinc(1e-4) / (1e-8 / 6.0 - 1e-16 / 120.0) - 1.0).abs() < 1e-14);
    }
}
