//! Per-prime moment-generating functions
//! `F_p(s) = (1/2pi) int exp(s Y_p(theta)) d theta`, `Y_p = Re e^{-i alpha} eta_p(e^{i theta})`.

use num_complex::Complex64 as C64;
use std::f64::consts::TAU;

use crate::charfun::local_coefs;
use crate::error::{ensure, Result};
use crate::model::{ModelPoint, Truncation};
use crate::specfun::lambda_zeros;

const MAX_NODES: usize = 1 << 26;

/// `Y_p` at `theta_j = 2 pi j / n` for odd `j` only (`odd = true`) or all `j`.
pub(crate) fn y_nodes(coefs: &[f64], alpha: f64, n: usize, odd: bool) -> Vec<f64> {
    let (start, stride) = if odd { (1, 2) } else { (0, 1) };
    let rot = C64::from_polar(1.0, -alpha);
    (start..n)
        .step_by(stride)
        .map(|j| {
            let x = C64::from_polar(1.0, TAU * j as f64 / n as f64);
            let mut xk = C64::new(1.0, 0.0);
            let mut eta = C64::new(0.0, 0.0);
            for &c in coefs {
                xk *= x;
                eta += xk * c;
            }
            (eta * rot).re
        })
        .collect()
}

/// Relative accuracy reachable when exponents `s Y` carry rounding error `eps |s| sum c_k`.
fn noise_floor(coefs: &[f64], s_abs: f64) -> f64 {
    (8.0 * f64::EPSILON * s_abs * coefs.iter().sum::<f64>()).max(1e-14)
}

fn start_nodes(scale: f64) -> usize {
    let want = (8.0 * scale.sqrt().ceil()).max(64.0) as usize;
    want.next_power_of_two()
}

/// `log F_p(s)` by a nested periodic trapezoid rule, shifted by the largest
/// exponent so that no term overflows.
pub fn log_mgf_local(mp: &ModelPoint, p: u64, s: C64) -> Result<C64> {
    ensure!(p >= 2, Parameter, "p must be a prime, got {p}");
    let coefs = local_coefs(mp, p, Truncation::Full);
    log_mgf_coefs(&coefs, mp.alpha, s)
}

pub(crate) fn log_mgf_coefs(coefs: &[f64], alpha: f64, s: C64) -> Result<C64> {
    if s == C64::new(0.0, 0.0) {
        return Ok(C64::new(0.0, 0.0));
    }
    let c1 = coefs.first().copied().unwrap_or(0.0);
    let mut n = start_nodes(s.norm() * c1);
    let mut ys = y_nodes(coefs, alpha, n, false);
    let shift = ys.iter().map(|y| s.re * y).fold(f64::NEG_INFINITY, f64::max);
    let term = |y: f64| (s * y - shift).exp();
    let mut sum: C64 = ys.iter().map(|&y| term(y)).sum();
    let mut prev = sum / n as f64;
    loop {
        ensure!(2 * n <= MAX_NODES, Numeric, "local MGF quadrature did not settle by {MAX_NODES} nodes at s = {s}");
        let odd = y_nodes(coefs, alpha, 2 * n, true);
        sum += odd.iter().map(|&y| term(y)).sum::<C64>();
        ys.clear();
        n *= 2;
        let next = sum / n as f64;
        if (next - prev).norm() <= noise_floor(coefs, s.norm()) * next.norm() {
            return Ok(next.ln() + shift);
        }
        prev = next;
    }
}

/// `F_p(s)`; for large `|s| p^{-sigma}` prefer [`log_mgf_local`].
pub fn mgf_local(mp: &ModelPoint, p: u64, s: C64) -> Result<C64> {
    Ok(log_mgf_local(mp, p, s)?.exp())
}

/// Log-normalizer, mean and variance of `Y_p` under the tilt `e^{kappa Y_p}`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Tilted {
    pub log_f: f64,
    pub mean: f64,
    pub var: f64,
}

impl Tilted {
    pub fn add(self, o: Tilted) -> Tilted {
        Tilted { log_f: self.log_f + o.log_f, mean: self.mean + o.mean, var: self.var + o.var }
    }
}

pub(crate) fn tilted_moments(coefs: &[f64], alpha: f64, kappa: f64) -> Result<Tilted> {
    let c1 = coefs.first().copied().unwrap_or(0.0);
    if kappa == 0.0 || c1 == 0.0 {
        let v: f64 = coefs.iter().map(|c| c * c).sum();
        return Ok(Tilted { log_f: 0.0, mean: 0.0, var: 0.5 * v });
    }
    let mut n = start_nodes(2.0 * kappa.abs() * c1);
    let mut ys = y_nodes(coefs, alpha, n, false);
    let shift = ys.iter().map(|y| kappa * y).fold(f64::NEG_INFINITY, f64::max);
    let sums = |ys: &[f64]| {
        ys.iter().fold((0.0, 0.0), |(s0, s1), &y| {
            let w = (kappa * y - shift).exp();
            (s0 + w, s1 + w * y)
        })
    };
    let (mut s0, mut s1) = sums(&ys);
    let (mut f_prev, mut m_prev) = (s0 / n as f64, s1 / s0);
    loop {
        ensure!(2 * n <= MAX_NODES, Numeric, "tilted quadrature did not settle by {MAX_NODES} nodes at kappa = {kappa}");
        let odd = y_nodes(coefs, alpha, 2 * n, true);
        let (a0, a1) = sums(&odd);
        s0 += a0;
        s1 += a1;
        ys.extend(odd);
        n *= 2;
        let (f, m) = (s0 / n as f64, s1 / s0);
        let floor = noise_floor(coefs, kappa.abs());
        if (f - f_prev).abs() <= floor * f && (m - m_prev).abs() <= 10.0 * floor * c1 {
            let var = ys.iter().map(|&y| (kappa * y - shift).exp() * (y - m) * (y - m)).sum::<f64>() / s0;
            return Ok(Tilted { log_f: f.ln() + shift, mean: m, var });
        }
        f_prev = f;
        m_prev = m;
    }
}

/// Saddle-point main term of `log F_p(s)`:
/// `s lambda(theta_1) / (log p)^m + (1/2) log((log p)^m / (2 pi s |lambda''(theta_1)|))`,
/// with the principal branch, so the value is real for real `s`.
pub fn log_mgf_local_saddle_main(mp: &ModelPoint, p: u64, s: C64) -> Result<C64> {
    ensure!(p >= 2, Parameter, "p must be a prime, got {p}");
    ensure!(s.re > 0.0, Domain, "saddle approximation needs Re s > 0");
    let log_p = (p as f64).ln();
    let r = (-mp.sigma * log_p).exp();
    let z = lambda_zeros(r, mp.m, mp.alpha)?;
    let scale = log_p.powi(mp.m as i32);
    Ok(s * z.lambda_at_theta1 / scale + 0.5 * (C64::new(scale, 0.0) / (s * TAU * z.lambda_dd_at_theta1.abs())).ln())
}

/// `F_p(s)` by the saddle point at `theta_1`, under
/// `p^sigma (log p)^m <= kappa (log kappa)^{-3}` and `|Im s| <= kappa = Re s`.
pub fn mgf_local_saddle(mp: &ModelPoint, p: u64, s: C64) -> Result<C64> {
    Ok(log_mgf_local_saddle(mp, p, s)?.exp())
}

/// Logarithm of [`mgf_local_saddle`], which overflows for moderate `kappa`.
pub fn log_mgf_local_saddle(mp: &ModelPoint, p: u64, s: C64) -> Result<C64> {
    let kappa = s.re;
    ensure!(kappa > 1.0, Domain, "saddle approximation needs Re s > 1, got {kappa}");
    ensure!(s.im.abs() <= kappa, Domain, "saddle approximation needs |Im s| <= Re s");
    let log_p = (p as f64).ln();
    let size = (mp.sigma * log_p).exp() * log_p.powi(mp.m as i32);
    ensure!(
        size <= kappa / kappa.ln().powi(3),
        Domain,
        "p^sigma (log p)^m = {size} exceeds kappa (log kappa)^-3 = {}",
        kappa / kappa.ln().powi(3)
    );
    log_mgf_local_saddle_main(mp, p, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::bessel_i0;

    fn mp(s: f64, m: u32, a: f64) -> ModelPoint {
        ModelPoint::new(s, m, a).unwrap()
    }

    #[test]
    fn zero_and_real_axis() {
        let m = mp(0.75, 0, 0.4);
        assert_eq!(mgf_local(&m, 2, C64::new(0.0, 0.0)).unwrap(), C64::new(1.0, 0.0));
        for &k in &[-50.0, -1.0, 0.5, 3.0, 100.0, 1e5] {
            let l = log_mgf_local(&m, 3, C64::new(k, 0.0)).unwrap();
            assert!(l.im.abs() < 1e-12 * l.re.abs().max(1.0));
            // Jensen: E e^{kY} >= e^{k E Y} = 1
            assert!(l.re >= -1e-14, "kappa {k}: {l}");
        }
    }

    #[test]
    fn bessel_limit_for_large_primes() {
        // F_p(s) ~ I_0(s c_1) once the c_2 term is negligible
        let m = mp(0.75, 1, 0.0);
        let p = 100_003u64;
        let c1 = m.leading((p as f64).ln());
        for &s in &[C64::new(50.0, 0.0), C64::new(300.0, 40.0)] {
            let f = mgf_local(&m, p, s).unwrap();
            let g = bessel_i0(s * c1).unwrap();
            let bound = 2.0 * s.norm() * m.coefficient((p as f64).ln(), 2);
            assert!(((f - g) / g).norm() < bound, "{f} vs {g}");
        }
    }

    #[test]
    fn tilted_moments_match_derivatives() {
        let m = mp(0.6, 0, 0.7);
        let coefs = local_coefs(&m, 5, Truncation::Full);
        for &k in &[0.3, 7.0, 120.0] {
            let t = tilted_moments(&coefs, m.alpha, k).unwrap();
            let h = 1e-3 * k;
            let lf = |k: f64| log_mgf_coefs(&coefs, m.alpha, C64::new(k, 0.0)).unwrap().re;
            assert!((t.log_f - lf(k)).abs() < 1e-12 * t.log_f.abs().max(1.0));
            let d1 = (lf(k + h) - lf(k - h)) / (2.0 * h);
            let d2 = (lf(k + h) - 2.0 * lf(k) + lf(k - h)) / (h * h);
            assert!((t.mean - d1).abs() < 1e-6 * d1.abs(), "{} {d1}", t.mean);
            assert!((t.var - d2).abs() < 1e-3 * d2.abs(), "{} {d2}", t.var);
        }
    }

    #[test]
    fn saddle_term_tracks_quadrature() {
        let m = mp(0.75, 0, 0.0);
        let s = C64::new(1e4, 0.0);
        let exact = log_mgf_local(&m, 2, s).unwrap();
        let saddle = log_mgf_local_saddle(&m, 2, s).unwrap();
        assert!(((saddle - exact) / exact).norm() < 1e-3, "{saddle} {exact}");
        assert!(saddle.im == 0.0);
        assert_eq!(mgf_local_saddle(&m, 1_000_003, s).unwrap_err().kind(), "domain");
        let small = mgf_local_saddle(&m, 2, C64::new(600.0, 0.0)).unwrap();
        assert!(small.re.is_finite() && small.im == 0.0 && small.re > 0.0);
        // a mid-size prime deep in the saddle regime
        let s = C64::new(1e6, 2e5);
        let main = log_mgf_local_saddle(&m, 97, s).unwrap();
        let exact = log_mgf_local(&m, 97, s).unwrap();
        // logs agree modulo 2 pi i
        assert!(((main - exact).exp() - 1.0).norm() < 1e-2, "{main} {exact}");
    }

    #[test]
    fn complex_shift_is_hermitian() {
        let m = mp(0.75, 0, 0.3);
        let a = log_mgf_local(&m, 7, C64::new(20.0, 13.0)).unwrap().exp();
        let b = log_mgf_local(&m, 7, C64::new(20.0, -13.0)).unwrap().exp();
        assert!((a - b.conj()).norm() < 1e-12 * a.norm());
    }
}
