//! The angular function `lambda_r(theta; m, alpha) = Re e^{-i alpha} Li_{m+1}(r e^{i theta})`
//! and the two critical points of its `theta`-derivative structure.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use crate::error::{ensure, Error, Result};

/// `sum_k r^k k^{-(m+1)} cos(k theta - alpha)`, differentiated `deriv` times in `theta`.
///
/// The `d`-th derivative of `cos x` is taken as `cos, -sin, -cos, sin` so
/// that symmetric points give exact zeros.
pub fn lambda(r: f64, theta: f64, m: i32, alpha: f64, deriv: u32) -> Result<f64> {
    ensure!(r > 0.0 && r <= FRAC_1_SQRT_2 * (1.0 + 1e-12), Domain, "lambda needs 0 < r <= 1/sqrt(2), got {r}");
    ensure!(m >= -2, Parameter, "lambda needs m >= -2, got {m}");
    Ok(lambda_unchecked(r, theta, m, alpha, deriv))
}

pub(crate) fn lambda_unchecked(r: f64, theta: f64, m: i32, alpha: f64, deriv: u32) -> f64 {
    let e = deriv as i32 - m - 1;
    let log_r = r.ln();
    // past the peak of k^e r^k, stop once the geometric tail is negligible
    let k_peak = if e > 0 { (e as f64 / -log_r).ceil() as usize } else { 1 };
    let mut sum = 0.0;
    let mut rk = 1.0;
    for k in 1..4000usize {
        rk *= r;
        let kf = k as f64;
        let mag = rk * kf.powi(e);
        let x = kf * theta - alpha;
        let trig = match deriv % 4 {
            0 => x.cos(),
            1 => -x.sin(),
            2 => -x.cos(),
            _ => x.sin(),
        };
        sum += mag * trig;
        if k > k_peak && mag < 1e-18 * (1.0 - r) {
            break;
        }
    }
    sum
}

/// The maximizer `theta1` and minimizer `theta2` of `lambda_r(.; m, alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaZeros {
    pub theta1: f64,
    pub theta2: f64,
    pub lambda_at_theta1: f64,
    pub lambda_dd_at_theta1: f64,
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    while b - a > 1e-13 {
        let c = 0.5 * (a + b);
        let fc = f(c);
        if fc == 0.0 {
            return c;
        }
        if (fc > 0.0) == (fa > 0.0) {
            a = c;
            fa = fc;
        } else {
            b = c;
        }
    }
    0.5 * (a + b)
}

fn scan_zeros<F: Fn(f64) -> f64>(f: &F, n: usize) -> Vec<f64> {
    let h = TAU / n as f64;
    let mut vals: Vec<f64> = (0..=n).map(|i| f(i as f64 * h)).collect();
    // rounding in k theta - alpha leaves ~1e-16 residues at symmetric points;
    // snap them to exact zeros so they are counted once
    let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for v in vals.iter_mut() {
        if v.abs() <= 1e-13 * scale {
            *v = 0.0;
        }
    }
    let mut zeros = Vec::new();
    for i in 0..n {
        let (a, b) = (vals[i], vals[i + 1]);
        if a == 0.0 {
            zeros.push(i as f64 * h);
        } else if b != 0.0 && (a > 0.0) != (b > 0.0) {
            zeros.push(bisect(f, i as f64 * h, (i + 1) as f64 * h, a));
        }
    }
    zeros
}

/// Both zeros of `lambda'` in one period, by a uniform sign scan (720 points,
/// doubled up to twice on failure) and bisection.
pub fn lambda_zeros(r: f64, m: u32, alpha: f64) -> Result<LambdaZeros> {
    ensure!(r > 0.0 && r <= FRAC_1_SQRT_2 * (1.0 + 1e-12), Domain, "lambda_zeros needs 0 < r <= 1/sqrt(2), got {r}");
    ensure!(alpha.is_finite(), Parameter, "alpha must be finite");
    let m = m as i32;
    let d1 = |t: f64| lambda_unchecked(r, t, m, alpha, 1);
    let mut n = 720;
    let zeros = loop {
        let z = scan_zeros(&d1, n);
        if z.len() == 2 {
            break z;
        }
        if n >= 2880 {
            return Err(Error::Internal(format!(
                "found {} zeros of lambda' for r = {r}, m = {m}, alpha = {alpha}; expected exactly 2",
                z.len()
            )));
        }
        n *= 2;
    };
    let dd: Vec<f64> = zeros.iter().map(|&t| lambda_unchecked(r, t, m, alpha, 2)).collect();
    let (i1, i2) = if dd[0] < dd[1] { (0, 1) } else { (1, 0) };
    let theta1 = zeros[i1].rem_euclid(TAU);
    let mut theta2 = zeros[i2];
    while theta2 <= theta1 {
        theta2 += TAU;
    }
    while theta2 >= theta1 + TAU {
        theta2 -= TAU;
    }
    let lambda1 = lambda_unchecked(r, theta1, m, alpha, 0);
    let lambda2 = lambda_unchecked(r, theta2, m, alpha, 0);
    if !(dd[i1] < 0.0 && lambda1 > lambda2) {
        return Err(Error::Internal(format!(
            "critical points of lambda for r = {r}, m = {m}, alpha = {alpha} are not a strict max/min pair"
        )));
    }
    Ok(LambdaZeros { theta1, theta2, lambda_at_theta1: lambda1, lambda_dd_at_theta1: dd[i1] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn closed_form_at_origin() {
        let r = 0.4;
        assert!((lambda(r, 0.0, 0, 0.0, 0).unwrap() + (1.0 - r).ln()).abs() < 1e-15);
        assert!(lambda(0.8, 0.0, 0, 0.0, 0).is_err());
    }

    #[test]
    fn shift_rule_matches_differences() {
        let h = 1e-5;
        for &(r, m, alpha, theta) in &[(0.5, 0, 0.3, 1.1), (0.7, 2, 2.0, -0.4), (0.2, -1, 0.0, 3.0)] {
            for d in 0..4u32 {
                let num = (lambda(r, theta + h, m, alpha, d).unwrap() - lambda(r, theta - h, m, alpha, d).unwrap()) / (2.0 * h);
                let exact = lambda(r, theta, m, alpha, d + 1).unwrap();
                assert!((num - exact).abs() < 1e-6, "r={r} m={m} d={d}");
                // the shift identity lambda' (m, alpha) = lambda(m - 1, alpha - pi/2)
                if d == 0 {
                    let shifted = lambda(r, theta, m - 1, alpha - PI / 2.0, 0).unwrap();
                    assert!((shifted - exact).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn derivative_growth_bound() {
        // |lambda^{(n)}| <= S_n(r) = sum k^n r^k, and S_n(r) <= C n! r; the
        // constant is modest for small r but grows with n near r = 1/sqrt(2)
        let mut worst: f64 = 0.0;
        for &r in &[0.1, 0.3, 0.5, FRAC_1_SQRT_2] {
            let mut fact = 1.0;
            for n in 1..=6u32 {
                fact *= n as f64;
                let s_n: f64 = (1..2000).map(|k| (k as f64).powi(n as i32) * r.powi(k)).sum();
                for i in 0..16 {
                    let v = lambda(r, i as f64 * 0.4, -1, 0.2, n).unwrap();
                    assert!(v.abs() <= s_n * (1.0 + 1e-12));
                    worst = worst.max(v.abs() / (fact * r));
                }
            }
        }
        // about 2.3e3 at r = 1/sqrt(2), n = 6 with m = -1
        assert!(worst < 2500.0, "C = {worst}");
        let r: f64 = 0.1;
        let c_small = (1..=6u32).map(|n| {
            let fact: f64 = (1..=n).map(|j| j as f64).product();
            (1..200).map(|k| (k as f64).powi(n as i32) * r.powi(k)).sum::<f64>() / (fact * r)
        }).fold(0.0f64, f64::max);
        assert!(c_small < 2.0, "C(r = 0.1) = {c_small}");
    }

    #[test]
    fn symmetric_cases() {
        for m in 0..4 {
            let z = lambda_zeros(0.5, m, 0.0).unwrap();
            assert_eq!(z.theta1, 0.0);
            assert!((z.theta2 - PI).abs() < 1e-12);
        }
        let z = lambda_zeros(0.5, 0, PI).unwrap();
        assert!((z.theta1 - PI).abs() < 1e-12);
        assert!((z.theta2 - TAU).abs() < 1e-12);
    }

    #[test]
    fn zeros_against_dense_scan() {
        let (r, m, alpha) = (0.3, 1u32, 0.7);
        let z = lambda_zeros(r, m, alpha).unwrap();
        // brute force: argmax and argmin of lambda on 10^5 points
        let n = 100_000;
        let (mut best, mut worst) = ((0.0, f64::MIN), (0.0, f64::MAX));
        for i in 0..n {
            let t = TAU * i as f64 / n as f64;
            let v = lambda(r, t, m as i32, alpha, 0).unwrap();
            if v > best.1 {
                best = (t, v);
            }
            if v < worst.1 {
                worst = (t, v);
            }
        }
        let h = TAU / n as f64;
        let dist = |a: f64, b: f64| {
            let d = (a - b).rem_euclid(TAU);
            d.min(TAU - d)
        };
        assert!(dist(z.theta1, best.0) < h);
        assert!(dist(z.theta2, worst.0) < h);
        assert!(lambda(r, z.theta1, m as i32, alpha, 1).unwrap().abs() < 1e-12);
        assert!(lambda(r, z.theta2, m as i32, alpha, 1).unwrap().abs() < 1e-12);
    }
}
