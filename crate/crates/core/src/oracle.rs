//! Closed-form second moments of scalar complex processes that are either
//! piecewise constant on the step intervals (`rho^m c` on `((m-1)k, mk]`) or
//! exact exponentials (`e^{-s tau} c`).  Every exact oracle in the crate
//! reduces to sums of these.

use crate::cmath::{phi1, LogMul, C64};

#[derive(Clone, Copy, Debug)]
pub struct DiscMode {
    pub rho: LogMul,
    pub c: C64,
}

#[derive(Clone, Copy, Debug)]
pub struct ExactMode {
    /// Decay rate with nonnegative real part (`i w` for the wave, `a` for parabolic).
    pub s: C64,
    pub c: C64,
}

/// `(int z y, int z conj(y))` over `[0, T]`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Moments {
    pub zy: C64,
    pub zyb: C64,
}

impl Moments {
    /// `int Re z Re y`
    pub fn rr(&self) -> f64 {
        0.5 * (self.zy + self.zyb).re
    }
    /// `int Im z Im y`
    pub fn ii(&self) -> f64 {
        0.5 * (self.zyb - self.zy).re
    }
    /// `int Re z Im y`
    pub fn ri(&self) -> f64 {
        0.5 * (self.zy - self.zyb).im
    }
    /// `int Im z Re y`
    pub fn ir(&self) -> f64 {
        0.5 * (self.zy + self.zyb).im
    }

    /// `int z^T N y` with `z, y` read as real 2-vectors `(Re, Im)`.
    pub fn bilinear(&self, n: &nalgebra::Matrix2<f64>) -> f64 {
        n[(0, 0)] * self.rr() + n[(0, 1)] * self.ri() + n[(1, 0)] * self.ir() + n[(1, 1)] * self.ii()
    }
}

fn psi(x: C64) -> C64 {
    // (1 - e^{-x}) / x
    phi1(-x)
}

pub fn disc_disc(a: DiscMode, b: DiscMode, k: f64, n: u64) -> Moments {
    Moments {
        zy: a.c * b.c * k * a.rho.mul(b.rho).geom_sum(n),
        zyb: a.c * b.c.conj() * k * a.rho.mul(b.rho.conj()).geom_sum(n),
    }
}

/// `sum_m rho^m int_{I_m} e^{-sigma tau} d tau`.
fn disc_exp(rho: LogMul, sigma: C64, k: f64, n: u64) -> C64 {
    if n == 0 {
        return C64::new(0.0, 0.0);
    }
    let step = rho.shift(-sigma * k);
    let head = C64::new(1.0, 0.0) + step.geom_sum(n - 1);
    rho.value() * head * k * psi(sigma * k)
}

pub fn disc_exact(a: DiscMode, b: ExactMode, k: f64, n: u64) -> Moments {
    Moments {
        zy: a.c * b.c * disc_exp(a.rho, b.s, k, n),
        zyb: a.c * b.c.conj() * disc_exp(a.rho, b.s.conj(), k, n),
    }
}

pub fn exact_exact(a: ExactMode, b: ExactMode, t: f64) -> Moments {
    let f = |sigma: C64| psi(sigma * t) * t;
    Moments { zy: a.c * b.c * f(a.s + b.s), zyb: a.c * b.c.conj() * f(a.s + b.s.conj()) }
}

pub fn swap(m: Moments) -> Moments {
    Moments { zy: m.zy, zyb: m.zyb.conj() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmath::I;

    fn quad<F: Fn(f64) -> (C64, C64)>(f: F, k: f64, n: usize) -> Moments {
        // composite Gauss-Legendre, 5 points per step
        let x = [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664];
        let w = [0.236_926_885_056_189, 0.478_628_670_499_366, 0.568_888_888_888_889, 0.478_628_670_499_366, 0.236_926_885_056_189];
        let mut m = Moments::default();
        for s in 0..n {
            for sub in 0..8 {
                let h = k / 8.0;
                let a = s as f64 * k + sub as f64 * h;
                for (xi, wi) in x.iter().zip(&w) {
                    let t = a + 0.5 * h * (1.0 + xi);
                    let (z, y) = f(t);
                    m.zy += z * y * (0.5 * h * wi);
                    m.zyb += z * y.conj() * (0.5 * h * wi);
                }
            }
        }
        m
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let (k, n) = (0.05, 12usize);
        let rho = C64::new(0.8, -0.5);
        let a = DiscMode { rho: LogMul::from_value(rho), c: C64::new(0.3, 0.7) };
        let b = ExactMode { s: I * 4.0, c: C64::new(-0.2, 0.5) };
        let p = ExactMode { s: C64::new(3.0, 0.0), c: C64::new(1.0, 0.0) };
        let zt = |t: f64| {
            let m = (t / k).ceil().max(1.0);
            a.c * rho.powf(m)
        };
        let et = |e: ExactMode, t: f64| e.c * (-e.s * t).exp();
        let got = disc_exact(a, b, k, n as u64);
        let want = quad(|t| (zt(t), et(b, t)), k, n);
        assert!((got.zy - want.zy).norm() < 1e-9 && (got.zyb - want.zyb).norm() < 1e-9);
        let got = exact_exact(b, p, k * n as f64);
        let want = quad(|t| (et(b, t), et(p, t)), k, n);
        assert!((got.zy - want.zy).norm() < 1e-9 && (got.zyb - want.zyb).norm() < 1e-9);
        let got = disc_disc(a, a, k, n as u64);
        let want = quad(|t| (zt(t), zt(t)), k, n);
        assert!((got.zy - want.zy).norm() < 1e-9 && (got.zyb - want.zyb).norm() < 1e-9);
    }
}
