//! The constants `g_n(sigma) = int_0^inf g^{(n)}(u) u^{n - 1 - 1/sigma} du`
//! with `g = log I_0`, and the large-deviation constants built from them.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::model::ModelPoint;
use crate::quad::integrate;
use crate::specfun::RealBessel;

/// Split point between quadrature and the large-`u` expansion of `g`.
const SPLIT: f64 = 60.0;
/// `g(u) = u - log(2 pi u)/2 + sum_j B[j-1] u^{-j} + O(u^{-5})`.
const B: [f64; 4] = [1.0 / 8.0, 1.0 / 16.0, 25.0 / 384.0, 13.0 / 128.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnTable {
    pub sigma: f64,
    /// `g_n(sigma)` for `n = 0..=n_max`.
    pub values: Vec<f64>,
    /// `G(sigma) = int_0^inf log I_0(u) u^{-1-1/sigma} du`, the same integral as `g_0`.
    pub g0_alias_g: f64,
    /// `g_1` from direct quadrature of `g'`, kept as a consistency check.
    pub g1_direct: f64,
}

/// `G_n(sigma) = prod_{j<n} (1/sigma - j)`.
pub fn falling_factor(sigma: f64, n: usize) -> f64 {
    (0..n).map(|j| 1.0 / sigma - j as f64).product()
}

/// `int_0^SPLIT` in the variable `t = u^beta`, `beta = 2 - 1/sigma`, where
/// `u^{-1-1/sigma} du = dt / (beta u^2)`; `h` already carries the power of `u`.
fn head(sigma: f64, h: impl Fn(f64) -> f64) -> Result<f64> {
    let beta = 2.0 - 1.0 / sigma;
    let t_max = SPLIT.powf(beta);
    let r = integrate(|t| h(t.powf(1.0 / beta)) / beta, 0.0, t_max, 1e-15, 1e-13)?;
    Ok(r.value)
}

/// `g_0(sigma)`: after the substitution the integrand is `g(u) / (beta u^2)`.
fn g0(sigma: f64) -> Result<f64> {
    let q = 1.0 / sigma;
    let body = head(sigma, |u| if u == 0.0 { 0.25 } else { RealBessel::new(u).log_i0 / (u * u) })?;
    let a = SPLIT;
    let mut tail = a.powf(1.0 - q) / (q - 1.0) - 0.5 * (std::f64::consts::TAU).ln() * a.powf(-q) / q
        - 0.5 * a.powf(-q) * (a.ln() / q + 1.0 / (q * q));
    for (j, b) in B.iter().enumerate() {
        let e = q + (j + 1) as f64;
        tail += b * a.powf(-e) / e;
    }
    Ok(body + tail)
}

/// `g_1(sigma)` by quadrature of `g' = I_1/I_0`; the integrand becomes `g'(u) / (beta u)`.
fn g1_direct(sigma: f64) -> Result<f64> {
    let q = 1.0 / sigma;
    let body = head(sigma, |u| if u == 0.0 { 0.5 } else { RealBessel::new(u).r[1] / u })?;
    let a = SPLIT;
    let mut tail = a.powf(1.0 - q) / (q - 1.0) - 0.5 * a.powf(-q) / q;
    for (j, b) in B.iter().enumerate() {
        let jj = (j + 1) as f64;
        tail -= jj * b * a.powf(-q - jj) / (q + jj);
    }
    Ok(body + tail)
}

pub fn gn_quadrature(sigma: f64, n_max: usize) -> Result<GnTable> {
    ensure!(sigma > 0.5 && sigma < 1.0, Domain, "g_n needs 1/2 < sigma < 1, got {sigma}");
    let g0 = g0(sigma)?;
    Ok(GnTable {
        sigma,
        values: (0..=n_max).map(|n| falling_factor(sigma, n) * g0).collect(),
        g0_alias_g: g0,
        g1_direct: g1_direct(sigma)?,
    })
}

/// `A(sigma)` of the Hattori-Matsumoto tail, from `G(sigma)`.
pub fn a_sigma(sigma: f64, g: f64) -> f64 {
    (sigma.powf(2.0 * sigma) / ((1.0 - sigma).powf(2.0 * sigma - 1.0) * g.powf(sigma))).powf(1.0 / (1.0 - sigma))
}

/// `A_m(sigma) = (sigma / ((1 - sigma)^{(m-1)/sigma + 2} g_1))^{sigma/(1-sigma)}`.
pub fn a_m(sigma: f64, m: u32, g1: f64) -> f64 {
    let e = (m as f64 - 1.0) / sigma + 2.0;
    (sigma / ((1.0 - sigma).powf(e) * g1)).powf(sigma / (1.0 - sigma))
}

/// `C_m(sigma)` in `kappa ~ C_m tau^{sigma/(1-sigma)} (log tau)^{(m+sigma)/(1-sigma)}`.
pub fn c_m(sigma: f64, m: u32, g1: f64) -> f64 {
    let e = m as f64 / sigma + 1.0;
    (sigma / ((1.0 - sigma).powf(e) * g1)).powf(sigma / (1.0 - sigma))
}

/// Default lower bound on `kappa` for the asymptotic formulas.
pub const DEFAULT_KAPPA_FLOOR: f64 = 1e3;

/// Main term `sigma^{m/sigma} g_n kappa^{1/sigma - n} / (log kappa)^{m/sigma + 1}` of `f^{(n)}(kappa)`.
pub fn cumulant_asymptotic(mp: &ModelPoint, n: usize, kappa: f64) -> Result<f64> {
    cumulant_asymptotic_with(mp, n, kappa, DEFAULT_KAPPA_FLOOR)
}

pub fn cumulant_asymptotic_with(mp: &ModelPoint, n: usize, kappa: f64, floor: f64) -> Result<f64> {
    ensure!(mp.in_critical_strip(), Domain, "asymptotics need 1/2 < sigma < 1");
    ensure!(kappa >= floor, Domain, "kappa = {kappa} is below the asymptotic floor {floor}");
    let table = gn_quadrature(mp.sigma, n)?;
    Ok(asymptotic_from_table(mp, &table, n, kappa))
}

pub(crate) fn asymptotic_from_table(mp: &ModelPoint, table: &GnTable, n: usize, kappa: f64) -> f64 {
    let s = mp.sigma;
    let mq = mp.m as f64 / s;
    s.powf(mq) * table.values[n] * kappa.powf(1.0 / s - n as f64) / kappa.ln().powf(mq + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expansion_coefficients_match_bessel() {
        for &u in &[60.0, 100.0] {
            let mut g = u - 0.5 * (std::f64::consts::TAU * u).ln();
            for (j, b) in B.iter().enumerate() {
                g += b / u.powi(j as i32 + 1);
            }
            assert!((g - RealBessel::new(u).log_i0).abs() < 1.0 / u.powi(5));
        }
    }

    #[test]
    fn g0_against_plain_quadrature() {
        // independent route: integrate in u directly up to 1e4, then the two
        // leading terms of g in closed form
        let s = 0.75;
        let q = 1.0 / s;
        let f = |u: f64| RealBessel::new(u).log_i0 * u.powf(-1.0 - q);
        let a = integrate(f, 0.0, 1.0, 1e-14, 1e-12).unwrap().value + integrate(f, 1.0, 1e4, 1e-14, 1e-12).unwrap().value;
        let y: f64 = 1e4;
        let b = y.powf(1.0 - q) / (q - 1.0)
            - 0.5 * (std::f64::consts::TAU.ln() * y.powf(-q) / q + y.powf(-q) * (y.ln() / q + 1.0 / (q * q)));
        let t = gn_quadrature(s, 3).unwrap();
        assert!(((a + b) - t.values[0]).abs() < 1e-7 * t.values[0], "{} {}", a + b, t.values[0]);
        assert_eq!(t.g0_alias_g, t.values[0]);
    }

    #[test]
    fn signs_follow_falling_factor() {
        let t = gn_quadrature(0.75, 3).unwrap();
        assert!(t.values.iter().take(3).all(|&v| v > 0.0));
        // 1/sigma - 2 < 0
        assert!(t.values[3] < 0.0);
        assert!((t.values[1] / t.values[0] - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn a_m_depends_on_m_and_matches_a() {
        let t = gn_quadrature(0.7, 1).unwrap();
        let a0 = a_m(0.7, 0, t.values[1]);
        assert!((a0 - a_sigma(0.7, t.values[0])).abs() < 1e-12 * a0);
        assert!(a_m(0.7, 1, t.values[1]) != a0);
    }

    #[test]
    fn asymptotic_floor() {
        let mp = ModelPoint::new(0.75, 0, 0.0).unwrap();
        assert_eq!(cumulant_asymptotic(&mp, 0, 10.0).unwrap_err().kind(), "domain");
        assert!(cumulant_asymptotic(&mp, 3, 1e4).unwrap() < 0.0);
    }
}
