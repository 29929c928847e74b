//! The saddle point `f'(kappa) = tau`, the tail main term and the tilted density.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use super::engine::{CumulantEngine, CumulantValue};
use super::gn::{a_m, c_m, gn_quadrature};
use crate::charfun::CharFn;
use crate::error::{ensure, Result};
use crate::model::{ModelPoint, Truncation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleOptions {
    /// Relative tolerance on `|f'(kappa) - tau| / tau`.
    pub tol: f64,
    /// Smallest `kappa` for which the tail main term is reported.
    pub kappa_min: f64,
    pub table_limit: u64,
    /// Accepted closed-form error in `f`, relative to `max(1, |f|)`.
    pub cumulant_tol: f64,
}

impl Default for SaddleOptions {
    fn default() -> Self {
        SaddleOptions { tol: 1e-10, kappa_min: 10.0, table_limit: crate::charfun::DEFAULT_TABLE_LIMIT, cumulant_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleResult {
    pub tau: f64,
    pub kappa: f64,
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
    /// `F(kappa) e^{-tau kappa} / (kappa sqrt(2 pi f''))`; underflows to 0 long
    /// before `log_tail_main` loses meaning.
    pub tail_main: f64,
    pub log_tail_main: f64,
    /// `kappa^{-1/(2 sigma)} (log kappa)^{(m/sigma + 1)/2}`.
    pub error_scale: f64,
    pub cutoff_y: f64,
    /// Starting guess `C_m tau^{sigma/(1-sigma)} (log tau)^{(m+sigma)/(1-sigma)}`.
    pub kappa_asymptotic: f64,
    pub iterations: usize,
    /// Contribution of primes beyond `cutoff_y` to `f`, from the Bessel-form integral.
    pub tail_correction: f64,
    pub cumulant_error: f64,
}

/// `C_m(sigma) tau^{sigma/(1-sigma)} (log tau)^{(m+sigma)/(1-sigma)}`, with
/// `log tau` floored at 1; outside the strip a Gaussian guess `tau / f''(0)`.
pub fn kappa_asymptotic(mp: &ModelPoint, tau: f64, engine: &CumulantEngine) -> Result<f64> {
    if mp.in_critical_strip() {
        let g1 = gn_quadrature(mp.sigma, 1)?.values[1];
        let s = mp.sigma;
        let l = tau.ln().max(1.0);
        Ok(c_m(s, mp.m, g1) * tau.powf(s / (1.0 - s)) * l.powf((mp.m as f64 + s) / (1.0 - s)))
    } else {
        let v = engine.eval(1e-8, 1e-8)?;
        Ok(tau / v.f2)
    }
}

fn sampled(samples: &[(f64, f64)]) -> String {
    samples.iter().map(|(k, f1)| format!("f'({k:.4e}) = {f1:.6e}")).collect::<Vec<_>>().join(", ")
}

pub fn solve_saddle(mp: &ModelPoint, tau: f64, tol: f64) -> Result<SaddleResult> {
    let opts = SaddleOptions { tol, ..SaddleOptions::default() };
    let engine = CumulantEngine::with_table(mp, opts.table_limit)?;
    solve_saddle_with(&engine, tau, &opts)
}

pub fn solve_saddle_with(engine: &CumulantEngine, tau: f64, opts: &SaddleOptions) -> Result<SaddleResult> {
    let mp = engine.mp;
    ensure!(tau > 0.0 && tau.is_finite(), Domain, "tau must be positive, got {tau}");
    ensure!(opts.tol > 0.0 && opts.tol < 1.0, Parameter, "tolerance must lie in (0, 1)");
    let k0 = kappa_asymptotic(&mp, tau, engine)?;
    let mut samples = Vec::new();
    let eval = |k: f64, samples: &mut Vec<(f64, f64)>| -> Result<CumulantValue> {
        let v = engine.eval(k, opts.cumulant_tol)?;
        samples.push((k, v.f1));
        Ok(v)
    };
    // f' is increasing, so widen by factors of 4 until tau is bracketed
    let (mut lo, mut hi) = (k0 / 4.0, 4.0 * k0);
    let mut v_lo = eval(lo, &mut samples)?;
    let mut tries = 0;
    while v_lo.f1 > tau {
        ensure!(tries < 40, Numeric, "could not bracket the saddle from below: {}", sampled(&samples));
        hi = lo;
        lo /= 4.0;
        v_lo = eval(lo, &mut samples)?;
        tries += 1;
    }
    let mut v_hi = eval(hi, &mut samples)?;
    while v_hi.f1 < tau {
        ensure!(tries < 40, Numeric, "could not bracket the saddle from above: {}", sampled(&samples));
        lo = hi;
        v_lo = v_hi;
        hi *= 4.0;
        v_hi = eval(hi, &mut samples)?;
        tries += 1;
    }
    // Newton in log kappa, falling back to bisection
    let mut k = if (lo..=hi).contains(&k0) { k0 } else { (lo * hi).sqrt() };
    let mut v = if k == lo { v_lo } else { eval(k, &mut samples)? };
    let mut iterations = 0;
    while (v.f1 - tau).abs() > opts.tol * tau {
        ensure!(iterations < 200, Numeric, "saddle iteration did not converge: {}", sampled(&samples));
        iterations += 1;
        if v.f1 < tau {
            lo = k;
        } else {
            hi = k;
        }
        let step = (tau - v.f1) / (k * v.f2);
        let mut next = k * step.clamp(-50.0, 50.0).exp();
        if !(next > lo && next < hi) {
            next = (lo * hi).sqrt();
        }
        if (hi - lo) <= 1e-15 * hi {
            break;
        }
        k = next;
        v = eval(k, &mut samples)?;
    }
    ensure!(v.f2 > 0.0, Numeric, "tilted variance is not positive at kappa = {k}");
    let log_tail = v.f - tau * k - k.ln() - 0.5 * (TAU * v.f2).ln();
    let s = mp.sigma;
    let error_scale = k.powf(-0.5 / s) * k.ln().max(1.0).powf(0.5 * (mp.m as f64 / s + 1.0));
    Ok(SaddleResult {
        tau,
        kappa: k,
        f: v.f,
        f1: v.f1,
        f2: v.f2,
        tail_main: log_tail.exp(),
        log_tail_main: log_tail,
        error_scale,
        cutoff_y: v.cutoff_y,
        kappa_asymptotic: k0,
        iterations,
        tail_correction: v.tail_f,
        cumulant_error: v.error_estimate,
    })
}

/// Saddle-point approximation of `P(Re e^{-i alpha} eta > tau)`.
pub fn tail_saddle(mp: &ModelPoint, tau: f64) -> Result<SaddleResult> {
    let opts = SaddleOptions::default();
    tail_saddle_with(&CumulantEngine::with_table(mp, opts.table_limit)?, tau, &opts)
}

pub fn tail_saddle_with(engine: &CumulantEngine, tau: f64, opts: &SaddleOptions) -> Result<SaddleResult> {
    let r = solve_saddle_with(engine, tau, opts)?;
    ensure!(
        r.kappa >= opts.kappa_min,
        Domain,
        "saddle kappa = {} is below the minimum {} for the tail approximation",
        r.kappa,
        opts.kappa_min
    );
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailAsymptotic {
    pub tau: f64,
    pub a_m: f64,
    /// `-A_m tau^{1/(1-sigma)} (log tau)^{(m+sigma)/(1-sigma)}`.
    pub log_value: f64,
    pub value: f64,
    /// `log_value (1 -+ log log tau / log tau)`, the unapplied correction.
    pub log_bracket: (f64, f64),
}

pub fn tail_asymptotic(mp: &ModelPoint, tau: f64) -> Result<TailAsymptotic> {
    ensure!(mp.in_critical_strip(), Domain, "the tail asymptotic needs 1/2 < sigma < 1");
    ensure!(tau > std::f64::consts::E, Domain, "the tail asymptotic needs tau > e, got {tau}");
    let s = mp.sigma;
    let g1 = gn_quadrature(s, 1)?.values[1];
    let a = a_m(s, mp.m, g1);
    let l = tau.ln();
    let log_value = -a * tau.powf(1.0 / (1.0 - s)) * l.powf((mp.m as f64 + s) / (1.0 - s));
    let rel = l.ln().max(0.0) / l;
    Ok(TailAsymptotic { tau, a_m: a, log_value, value: log_value.exp(), log_bracket: (log_value * (1.0 + rel), log_value * (1.0 - rel)) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltedDensity {
    pub saddle: SaddleResult,
    pub xs: Vec<f64>,
    /// `N^tau(x) = e^{kappa tau} F(kappa)^{-1} e^{kappa x} M(x + tau)`, against `|dx|`.
    pub values: Vec<f64>,
    /// `exp(-x^2 / (2 f'')) / sqrt(f'')`.
    pub gaussian: Vec<f64>,
    pub t_max: f64,
}

/// `N^tau` by inverting `t -> e^{-i t tau} F(kappa + i t) / F(kappa)`.
pub fn tilted_density(mp: &ModelPoint, tau: f64, xs: &[f64]) -> Result<TiltedDensity> {
    let opts = SaddleOptions { kappa_min: 0.0, ..SaddleOptions::default() };
    let engine = CumulantEngine::with_table(mp, opts.table_limit)?;
    let saddle = solve_saddle_with(&engine, tau, &opts)?;
    tilted_density_at(mp, saddle, xs, 1e-10)
}

pub fn tilted_density_at(mp: &ModelPoint, saddle: SaddleResult, xs: &[f64], tol: f64) -> Result<TiltedDensity> {
    ensure!(xs.iter().all(|x| x.is_finite()), Parameter, "abscissae must be finite");
    let k = saddle.kappa;
    let sd = saddle.f2.sqrt();
    let reach = xs.iter().fold(0.0f64, |a, x| a.max(x.abs())) + 12.0 * sd + 1.0;
    let dt = PI / reach;
    let lambda = CharFn::new(mp, Truncation::Full, 2.0 * k + 10.0 / sd)?;
    let base = lambda.log_mgf(C64::new(k, 0.0));
    let ratio = |t: f64| (lambda.log_mgf(C64::new(k, t)) - base - C64::new(0.0, t * saddle.tau)).exp();
    let mut ts = vec![0.0];
    let mut phis = vec![C64::new(1.0, 0.0)];
    let mut quiet = 0;
    let mut j = 1usize;
    while quiet < 16 || (j as f64) * dt < 6.0 / sd {
        ensure!(j < 2_000_000, Numeric, "tilted characteristic function does not decay below {tol:e}");
        let t = j as f64 * dt;
        let v = ratio(t);
        quiet = if v.norm() < tol { quiet + 1 } else { 0 };
        ts.push(t);
        phis.push(v);
        j += 1;
    }
    let t_max = *ts.last().unwrap();
    let values = xs
        .iter()
        .map(|&x| {
            let s: f64 = ts
                .iter()
                .zip(&phis)
                .enumerate()
                .map(|(i, (&t, &p))| {
                    let w = if i == 0 { 0.5 } else { 1.0 };
                    w * (p * C64::from_polar(1.0, -t * x)).re
                })
                .sum();
            (2.0 / PI).sqrt() * dt * s
        })
        .collect();
    let gaussian = xs.iter().map(|&x| (-x * x / (2.0 * saddle.f2)).exp() / sd).collect();
    Ok(TiltedDensity { saddle, xs: xs.to_vec(), values, gaussian, t_max })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saddle_contract_and_monotonicity() {
        let mp = ModelPoint::new(0.75, 0, 0.0).unwrap();
        let engine = CumulantEngine::with_table(&mp, 100_000).unwrap();
        let opts = SaddleOptions { kappa_min: 0.0, table_limit: 100_000, ..SaddleOptions::default() };
        let mut last = (0.0, 0.0);
        for &tau in &[2.0, 3.0, 4.0, 8.0] {
            let r = solve_saddle_with(&engine, tau, &opts).unwrap();
            assert!((r.f1 - tau).abs() <= 1e-10 * tau);
            assert!(r.f2 > 0.0);
            assert!(r.kappa > last.0);
            assert!(r.log_tail_main < last.1 || last.0 == 0.0);
            assert!(r.log_tail_main < 0.0 && r.tail_main < 1.0 && (r.tail_main > 0.0 || r.log_tail_main < -700.0));
            last = (r.kappa, r.log_tail_main);
        }
    }

    #[test]
    fn kappa_floor_applies_to_tail() {
        let mp = ModelPoint::new(0.75, 0, 0.0).unwrap();
        let engine = CumulantEngine::with_table(&mp, 100_000).unwrap();
        let opts = SaddleOptions { table_limit: 100_000, ..SaddleOptions::default() };
        assert_eq!(tail_saddle_with(&engine, 1.0, &opts).unwrap_err().kind(), "domain");
    }

    #[test]
    fn tilted_density_is_centered_probability() {
        let mp = ModelPoint::new(0.75, 0, 0.0).unwrap();
        let xs: Vec<f64> = (-400..=400).map(|i| i as f64 * 0.01).collect();
        let d = tilted_density(&mp, 2.5, &xs).unwrap();
        let h = 0.01 / (TAU).sqrt();
        let mass: f64 = d.values.iter().sum::<f64>() * h;
        let mean: f64 = d.values.iter().zip(&xs).map(|(v, x)| v * x).sum::<f64>() * h;
        assert!((mass - 1.0).abs() < 1e-6, "{mass}");
        assert!(mean.abs() < 1e-6, "{mean}");
        let peak = d.values[400] * d.saddle.f2.sqrt();
        assert!((peak - 1.0).abs() < 3.0 * d.saddle.error_scale, "{peak}");
    }

    #[test]
    fn asymptotic_bracket_orders() {
        let mp = ModelPoint::new(0.75, 1, 0.0).unwrap();
        let t = tail_asymptotic(&mp, 20.0).unwrap();
        assert!(t.log_bracket.0 < t.log_value && t.log_value < t.log_bracket.1);
        assert!(tail_asymptotic(&mp, 2.0).is_err());
    }
}
