//! Smoothed Perron integrals bracketing the indicator `chi(y) = [y > 1]`:
//! `0 <= I_1(y) - chi(y) <= I_2(y)` with
//! `I_1 = (1/2 pi i) int_(c) y^s (e^{lambda s} - 1) / (lambda s^2) ds` and
//! `I_2 = (1/2 pi i) int_(c) y^s (e^{lambda s} - 2 + e^{-lambda s}) / (lambda s^2) ds`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{ensure, Result};
use crate::quad::gauss_legendre;

const MAX_HEIGHT: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MellinBracket {
    /// `I_1 - I_2`.
    pub lower: f64,
    /// `I_1`.
    pub upper: f64,
    pub second_integral: f64,
    /// Height of the truncated line.
    pub height: f64,
    /// Bound on the part of either integral beyond `height`.
    pub truncation_error: f64,
}

pub fn mellin_smoothing_bracket(y: f64, c: f64, lambda: f64) -> Result<MellinBracket> {
    mellin_smoothing_bracket_with(y, c, lambda, 1e-4)
}

pub fn mellin_smoothing_bracket_with(y: f64, c: f64, lambda: f64, tol: f64) -> Result<MellinBracket> {
    ensure!(y > 0.0 && y.is_finite(), Parameter, "y must be positive");
    ensure!(c > 0.0 && lambda > 0.0, Domain, "need c > 0 and lambda > 0");
    ensure!(tol > 0.0, Parameter, "tolerance must be positive");
    let l = y.ln();
    // |integrand| <= y^c (e^{lambda c} + 2 + e^{-lambda c}) / (lambda T^2) past T
    let envelope = (c * l).exp() * ((lambda * c).exp() + 2.0 + (-lambda * c).exp()) / lambda;
    let height = envelope / (PI * 0.5 * tol);
    ensure!(
        height <= MAX_HEIGHT,
        Numeric,
        "truncation error bound needs a line of height {height:e}, beyond {MAX_HEIGHT:e}"
    );
    let freq = l.abs() + lambda + 1.0;
    let panel = (0.5 * PI / freq).min(1.0);
    let panels = (height / panel).ceil() as usize;
    let (xs, ws) = gauss_legendre(16);
    let (mut i1, mut i2) = (0.0, 0.0);
    for k in 0..panels {
        let a = k as f64 * panel;
        for (x, w) in xs.iter().zip(&ws) {
            let t = a + 0.5 * panel * (x + 1.0);
            let s = C64::new(c, t);
            let base = (s * l).exp() / (lambda * s * s);
            let up = (s * lambda).exp();
            let down = (-s * lambda).exp();
            i1 += 0.5 * panel * w * (base * (up - 1.0)).re;
            i2 += 0.5 * panel * w * (base * (up - 2.0 + down)).re;
        }
    }
    // the integrands are Hermitian in t, so (1/2 pi) int over R = (1/pi) int over t > 0
    let (i1, i2) = (i1 / PI, i2 / PI);
    Ok(MellinBracket { lower: i1 - i2, upper: i1, second_integral: i2, height, truncation_error: envelope / (PI * height) })
}
