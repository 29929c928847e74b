//! Modified Bessel function `I_0` and `g = log I_0`, complex and real.

use num_complex::Complex64 as C64;
use std::f64::consts::TAU;

use crate::error::{ensure, Result};

const ASYMPTOTIC_RADIUS: f64 = 30.0;

/// Taylor series `sum (z^2/4)^n / (n!)^2`, returned as `I_0(z) - 1`.
fn series_minus_one(z: C64) -> C64 {
    let q = z * z * 0.25;
    let mut term = C64::new(1.0, 0.0);
    let mut sum = C64::new(0.0, 0.0);
    for n in 1..500 {
        let nf = n as f64;
        term *= q / (nf * nf);
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

/// `e^{-z} I_0(z) = (1/2pi) int exp(z (cos t - 1)) dt` by the periodic
/// trapezoid rule, doubling the node count until it settles.
fn scaled_by_quadrature(z: C64) -> C64 {
    let eval = |n: usize| {
        let mut s = C64::new(0.0, 0.0);
        for j in 0..n {
            let c = (TAU * j as f64 / n as f64).cos() - 1.0;
            s += (z * c).exp();
        }
        s / n as f64
    };
    let mut n = 32 + 2 * (8.0 * z.norm().sqrt()).ceil() as usize;
    let mut prev = eval(n);
    loop {
        n *= 2;
        let next = eval(n);
        if (next - prev).norm() <= 1e-15 * next.norm() || n > 1 << 20 {
            return next;
        }
        prev = next;
    }
}

/// `sqrt(2 pi z) e^{-z} I_0(z)` by the large-argument expansion
/// `sum_k a_k z^{-k}`, `a_k = ((2k-1)!!)^2 / (k! 8^k)`.
fn asymptotic_sum(z: C64) -> C64 {
    let inv = z.inv();
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..200 {
        let kf = k as f64;
        let factor = (2.0 * kf - 1.0).powi(2) / (8.0 * kf);
        let next = term * inv * factor;
        if next.norm() > term.norm() {
            break;
        }
        term = next;
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

/// `I_0(z)` for `Re z >= 0`.
pub fn bessel_i0(z: C64) -> Result<C64> {
    ensure!(z.re >= 0.0 && z.re.is_finite() && z.im.is_finite(), Domain, "I0 needs finite z with Re z >= 0, got {z}");
    let r = z.norm();
    // the series cancels badly along the imaginary axis, so it is used only
    // where its terms stay comparable to the result
    if r <= 2.0 || (r <= ASYMPTOTIC_RADIUS && z.im.abs() <= z.re) {
        return Ok(C64::new(1.0, 0.0) + series_minus_one(z));
    }
    Ok(z.exp() * scaled_by_quadrature(z))
}

fn ln_1p(w: C64) -> C64 {
    if w.norm() < 1e-4 {
        // w - w^2/2 + w^3/3 - w^4/4 + w^5/5
        let mut sum = C64::new(0.0, 0.0);
        let mut p = w;
        for k in 1..=6 {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sum += p * (sign / k as f64);
            p *= w;
        }
        sum
    } else {
        (C64::new(1.0, 0.0) + w).ln()
    }
}

fn in_delta(z: C64) -> bool {
    z.re >= 0.0 && z.im.abs() <= z.re * (1.0 + 1e-12)
}

/// `g(z) = log I_0(z)` on the sector `x >= 0, |y| <= x`, on the branch that is
/// real on the positive axis.
pub fn log_i0(z: C64) -> Result<C64> {
    ensure!(z.re.is_finite() && z.im.is_finite() && in_delta(z), Domain, "log I0 needs z in the sector |Im z| <= Re z, got {z}");
    let r = z.norm();
    if r <= 1.0 {
        return Ok(ln_1p(series_minus_one(z)));
    }
    // e^{-z} I_0(z) ~ (2 pi z)^{-1/2} has argument in [-pi/8, pi/8] on the
    // sector, so the principal logarithm is continuous there
    if r <= ASYMPTOTIC_RADIUS {
        return Ok(z + scaled_by_quadrature(z).ln());
    }
    Ok(z - 0.5 * (TAU * z).ln() + asymptotic_sum(z).ln())
}

/// Real-argument Bessel data used by the cumulant engine: `log I_0(a)`
/// and the ratios `R_k = I_k(a) / I_0(a)` for `k = 1..4`.
#[derive(Debug, Clone, Copy)]
pub struct RealBessel {
    pub log_i0: f64,
    pub r: [f64; 5],
}

impl RealBessel {
    pub fn new(a: f64) -> Self {
        debug_assert!(a >= 0.0);
        if a <= 25.0 {
            Self::by_series(a)
        } else {
            Self::by_asymptotics(a)
        }
    }

    fn by_series(a: f64) -> Self {
        let h = 0.5 * a;
        let q = h * h;
        // I_k(a) = h^k sum_j q^j / (j! (j+k)!)
        let mut vals = [0.0f64; 5];
        let mut i0_minus_one = 0.0;
        for (k, v) in vals.iter_mut().enumerate() {
            let mut term = 1.0;
            for i in 1..=k {
                term *= h / i as f64;
            }
            let mut sum = if k == 0 { 0.0 } else { term };
            for j in 1..400 {
                let jf = j as f64;
                term *= q / (jf * (jf + k as f64));
                sum += term;
                if term <= 1e-17 * sum {
                    break;
                }
            }
            if k == 0 {
                i0_minus_one = sum;
                *v = 1.0 + sum;
            } else {
                *v = sum;
            }
        }
        let mut r = [1.0; 5];
        for k in 1..5 {
            r[k] = vals[k] / vals[0];
        }
        RealBessel { log_i0: i0_minus_one.ln_1p(), r }
    }

    fn by_asymptotics(a: f64) -> Self {
        // sqrt(2 pi a) e^{-a} I_k(a) ~ sum_j (-1)^j prod_{i<=j} (4k^2 - (2i-1)^2) / (j! (8a)^j)
        let mut sums = [0.0f64; 5];
        for (k, s) in sums.iter_mut().enumerate() {
            let mu = 4.0 * (k * k) as f64;
            let mut term = 1.0f64;
            let mut sum = 1.0;
            for j in 1..200 {
                let jf = j as f64;
                let next = -term * (mu - (2.0 * jf - 1.0).powi(2)) / (jf * 8.0 * a);
                if next.abs() > term.abs() && j > 2 {
                    break;
                }
                term = next;
                sum += term;
                if term.abs() <= 1e-17 * sum.abs() {
                    break;
                }
            }
            *s = sum;
        }
        let mut r = [1.0; 5];
        for k in 1..5 {
            r[k] = sums[k] / sums[0];
        }
        RealBessel { log_i0: a - 0.5 * (TAU * a).ln() + sums[0].ln(), r }
    }

    /// `g'(a) = I_1/I_0`.
    pub fn g1(&self) -> f64 {
        self.r[1]
    }

    /// `g''(a) = (1 + R_2)/2 - R_1^2`.
    pub fn g2(&self) -> f64 {
        0.5 * (1.0 + self.r[2]) - self.r[1] * self.r[1]
    }

    /// Derivatives of `R_k` from `I_k' = (I_{k-1} + I_{k+1})/2`:
    /// `R_k' = (R_{k-1} + R_{k+1})/2 - R_k R_1`.
    pub fn dr(&self, k: usize) -> f64 {
        let below = if k == 0 { self.r[1] } else { self.r[k - 1] };
        0.5 * (below + self.r[k + 1]) - self.r[k] * self.r[1]
    }

    /// `R_2''`.
    pub fn d2r2(&self) -> f64 {
        0.5 * (self.dr(1) + self.dr(3)) - self.dr(2) * self.r[1] - self.r[2] * self.dr(1)
    }
}

/// `log I_0(a)` for real `a >= 0`.
pub fn log_i0_real(a: f64) -> f64 {
    RealBessel::new(a.abs()).log_i0
}
