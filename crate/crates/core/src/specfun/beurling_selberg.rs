//! Beurling-Selberg smoothing of interval indicators.
//!
//! With `G(u) = 2u/pi + 2(1-u)u cot(pi u)` and `f_{c,d}(u) = (e^{-2 pi i u c} - e^{-2 pi i u d})/2`,
//! the band-limited function
//! `S(x) = Im int_0^L G(u/L) e^{2 pi i u x} f_{c,d}(u) du/u`
//! approximates `1_{(c,d)}(x)` up to `K(L(x-c)) + K(L(x-d))`, `K(x) = (sin pi x / pi x)^2`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{ensure, Error, Result};
use crate::quad::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    G,
    K,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BSParams {
    #[serde(rename = "L")]
    pub l: f64,
    pub c: f64,
    pub d: f64,
}

impl BSParams {
    pub fn new(l: f64, c: f64, d: f64) -> Result<Self> {
        ensure!(l.is_finite() && l > 0.0, Parameter, "L must be finite and positive, got {l}");
        ensure!(c.is_finite() && d.is_finite() && c < d, Parameter, "need finite c < d, got c = {c}, d = {d}");
        Ok(Self { l, c, d })
    }
}

/// `x cot x` for small `x`.
fn x_cot_x_series(x: f64) -> f64 {
    let x2 = x * x;
    1.0 - x2 / 3.0 - x2 * x2 / 45.0 - 2.0 * x2 * x2 * x2 / 945.0
}

pub(crate) fn g_kernel(u: f64) -> f64 {
    const EDGE: f64 = 1e-4;
    if u < EDGE {
        2.0 * u / PI + 2.0 * (1.0 - u) / PI * x_cot_x_series(PI * u)
    } else if u > 1.0 - EDGE {
        let v = 1.0 - u;
        2.0 * u / PI - 2.0 * u / PI * x_cot_x_series(PI * v)
    } else {
        2.0 * u / PI + 2.0 * (1.0 - u) * u / (PI * u).tan()
    }
}

pub(crate) fn k_kernel(x: f64) -> f64 {
    let y = PI * x;
    if y.abs() < 1e-4 {
        1.0 - y * y / 3.0
    } else {
        let s = y.sin() / y;
        s * s
    }
}

/// `G(u)` on `[0, 1]` or `K(x)` on the real line.
pub fn bs_kernel(u_or_x: f64, which: Kernel) -> Result<f64> {
    match which {
        Kernel::G => {
            ensure!((0.0..=1.0).contains(&u_or_x), Domain, "G is defined on [0, 1], got {u_or_x}");
            Ok(g_kernel(u_or_x))
        }
        Kernel::K => {
            ensure!(u_or_x.is_finite(), Domain, "K needs a finite argument");
            Ok(k_kernel(u_or_x))
        }
    }
}

/// `f_{c,d}(u) = (e^{-2 pi i u c} - e^{-2 pi i u d}) / 2`.
pub fn bs_f(u: f64, c: f64, d: f64) -> C64 {
    0.5 * (C64::from_polar(1.0, -TAU * u * c) - C64::from_polar(1.0, -TAU * u * d))
}

/// Composite Gauss-Legendre on `[0, 1]` in `v = u/L`, doubling the panel
/// count until two successive values agree.
fn oscillatory_integral<F: Fn(f64) -> f64>(f: F, oscillations: f64) -> Result<f64> {
    let (gx, gw) = gauss_legendre(16);
    let eval = |panels: usize| {
        let h = 1.0 / panels as f64;
        let mut s = 0.0;
        for j in 0..panels {
            let c = (j as f64 + 0.5) * h;
            for (x, w) in gx.iter().zip(&gw) {
                s += w * f(c + 0.5 * h * x);
            }
        }
        0.5 * h * s
    };
    let mut panels = (8.0 + oscillations).ceil() as usize;
    let mut prev = eval(panels);
    for _ in 0..8 {
        panels *= 2;
        let next = eval(panels);
        if (next - prev).abs() <= 1e-12 * (1.0 + next.abs()) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Numeric(format!(
        "smoothed indicator quadrature did not settle with {panels} panels (last change {:e})",
        (eval(panels) - prev).abs()
    )))
}

/// `Im int_0^L G(u/L) e^{2 pi i u x} f_{c,d}(u) du/u`.
pub fn smoothed_indicator(x: f64, bs: &BSParams) -> Result<f64> {
    ensure!(x.is_finite(), Parameter, "x must be finite");
    let BSParams { l, c, d } = *bs;
    let (a, b) = (x - c, x - d);
    // in v = u/L: int_0^1 G(v) (sin(2 pi L v a) - sin(2 pi L v b)) / (2 v) dv
    let integrand = |v: f64| {
        let h = if v == 0.0 {
            PI * l * (d - c)
        } else {
            0.5 * ((TAU * l * v * a).sin() - (TAU * l * v * b).sin()) / v
        };
        g_kernel(v) * h
    };
    oscillatory_integral(integrand, l * a.abs().max(b.abs()))
}

/// Fast batch evaluation of `S(x) = H(x - c) - H(x - d)` with
/// `H(a) = (1/2) int_0^1 G(v) sin(2 pi L a v) / v dv`, tabulated once
/// with cubic Hermite interpolation.
#[derive(Debug, Clone)]
pub struct SmoothedIndicator {
    pub l: f64,
    reach: f64,
    step: f64,
    h: Vec<f64>,
    dh: Vec<f64>,
}

impl SmoothedIndicator {
    /// Table valid for `|a| <= reach`; larger arguments are integrated directly.
    pub fn new(l: f64, reach: f64) -> Result<Self> {
        ensure!(l.is_finite() && l > 0.0, Parameter, "L must be finite and positive, got {l}");
        ensure!(reach.is_finite() && reach > 0.0, Parameter, "reach must be positive");
        let step = 1.0 / (64.0 * l);
        let n = (reach / step).ceil() as usize + 1;
        let mut h = Vec::with_capacity(n);
        let mut dh = Vec::with_capacity(n);
        for i in 0..n {
            let a = i as f64 * step;
            let (v, dv) = Self::direct(l, a)?;
            h.push(v);
            dh.push(dv);
        }
        Ok(Self { l, reach: (n - 1) as f64 * step, step, h, dh })
    }

    fn direct(l: f64, a: f64) -> Result<(f64, f64)> {
        let osc = l * a.abs();
        let v = oscillatory_integral(
            |v| {
                let s = if v == 0.0 { TAU * l * a } else { (TAU * l * a * v).sin() / v };
                0.5 * g_kernel(v) * s
            },
            osc,
        )?;
        let dv = oscillatory_integral(|v| PI * l * g_kernel(v) * (TAU * l * a * v).cos(), osc)?;
        Ok((v, dv))
    }

    /// `H(a)`, odd in `a`.
    pub fn h(&self, a: f64) -> f64 {
        let s = a.abs();
        let sign = if a < 0.0 { -1.0 } else { 1.0 };
        if s >= self.reach {
            return sign * Self::direct(self.l, s).map(|r| r.0).unwrap_or(0.5);
        }
        let t = s / self.step;
        let i = t.floor() as usize;
        let u = t - i as f64;
        let (y0, y1) = (self.h[i], self.h[i + 1]);
        let (m0, m1) = (self.dh[i] * self.step, self.dh[i + 1] * self.step);
        let u2 = u * u;
        let u3 = u2 * u;
        let v = (2.0 * u3 - 3.0 * u2 + 1.0) * y0 + (u3 - 2.0 * u2 + u) * m0 + (-2.0 * u3 + 3.0 * u2) * y1 + (u3 - u2) * m1;
        sign * v
    }

    /// Smoothed indicator of `(c, d)` at `x`.
    pub fn eval(&self, x: f64, c: f64, d: f64) -> f64 {
        self.h(x - c) - self.h(x - d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_values() {
        assert_eq!(bs_kernel(0.0, Kernel::K).unwrap(), 1.0);
        for n in 1..5 {
            assert!(bs_kernel(n as f64, Kernel::K).unwrap() < 1e-30);
        }
        assert!((bs_kernel(0.5, Kernel::G).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert!((bs_kernel(0.0, Kernel::G).unwrap() - 2.0 / PI).abs() < 1e-15);
        assert!(bs_kernel(1.0, Kernel::G).unwrap().abs() < 1e-15);
        assert!(bs_kernel(1.5, Kernel::G).is_err());
    }

    #[test]
    fn g_series_matches_closed_form_near_edges() {
        for u in [1.0001e-4, 0.999_899_9] {
            let closed = 2.0 * u / PI + 2.0 * (1.0 - u) * u / (PI * u).tan();
            let edge = if u < 0.5 { 9.999e-5 } else { 0.999_900_01 };
            assert!((g_kernel(edge) - closed).abs() < 1e-6);
        }
    }

    #[test]
    fn f_bound() {
        for i in 0..200 {
            let u = i as f64 * 0.05;
            let (c, d) = (-0.7, 1.3);
            assert!(bs_f(u, c, d).norm() <= PI * u * (d - c) + 1e-14);
        }
    }

    #[test]
    fn indicator_limits() {
        let bs = BSParams::new(500.0, -1.0, 1.0).unwrap();
        let oracle = smoothed_indicator(0.0, &bs).unwrap();
        assert!((oracle - 1.0).abs() < 1e-4);
        let bs50 = BSParams::new(50.0, -1.0, 1.0).unwrap();
        assert!((smoothed_indicator(0.0, &bs50).unwrap() - oracle).abs() < 1e-3);
        assert!(smoothed_indicator(3.0, &bs50).unwrap().abs() < 1e-3);
    }

    #[test]
    fn table_matches_direct() {
        let t = SmoothedIndicator::new(20.0, 6.0).unwrap();
        let bs = BSParams::new(20.0, -0.5, 1.5).unwrap();
        for i in 0..60 {
            let x = -4.0 + 0.137 * i as f64;
            let d = smoothed_indicator(x, &bs).unwrap();
            assert!((t.eval(x, -0.5, 1.5) - d).abs() < 1e-7, "x = {x}");
        }
    }
}
