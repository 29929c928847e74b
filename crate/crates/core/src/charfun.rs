//! Characteristic function `Lambda(w) = E exp(i <eta_m(sigma, X), w>)` of the
//! random model and the densities obtained from it by Fourier inversion.
//!
//! Measures follow the normalization `|dz| = dx dy / (2 pi)` on the plane and
//! `|dx| = dx / sqrt(2 pi)` on the line, so `M(z) = 2 pi * pdf(z)` and
//! `M(x; alpha) = sqrt(2 pi) * pdf(x)`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::io::Write;

use crate::arith::{prime_tail_integral, PrimePowerTable};
use crate::error::{ensure, Error, Result};
use crate::model::{ModelPoint, Truncation};

/// Primes tabulated explicitly when no cutoff is given; the rest of the
/// Euler product enters through a logarithmic-density integral.
pub const DEFAULT_TABLE_LIMIT: u64 = 1_000_000;
/// Every prime below this bound gets exact quadrature.
const QUAD_MIN_PRIME: u64 = 1000;
/// Above this bound on `|w| c_1(p)` a prime gets quadrature instead of the expansion.
const SERIES_THRESHOLD: f64 = 0.25;
const COEF_FLOOR: f64 = 1e-18;

/// `<z, w> = Re z Re w + Im z Im w`.
#[inline]
pub fn inner(z: C64, w: C64) -> f64 {
    z.re * w.re + z.im * w.im
}

/// Coefficients `c_k` of `X(p)^k` kept under the truncation.
pub(crate) fn local_coefs(mp: &ModelPoint, p: u64, truncation: Truncation) -> Vec<f64> {
    let log_p = (p as f64).ln();
    let c1 = mp.leading(log_p);
    let mut out = Vec::new();
    let mut n = 1f64;
    for k in 1u32.. {
        n *= p as f64;
        if let Some(y) = truncation.cutoff() {
            if n > y {
                break;
            }
        }
        let c = mp.coefficient(log_p, k);
        if c < COEF_FLOOR * c1 && k > 1 {
            break;
        }
        out.push(c);
        if k > 400 {
            break;
        }
    }
    out
}

fn eta_nodes(coefs: &[f64], n: usize) -> Vec<C64> {
    (0..n)
        .map(|j| {
            let x = C64::from_polar(1.0, TAU * j as f64 / n as f64);
            let mut xk = C64::new(1.0, 0.0);
            let mut s = C64::new(0.0, 0.0);
            for &c in coefs {
                xk *= x;
                s += xk * c;
            }
            s
        })
        .collect()
}

/// Nested periodic trapezoid: the values at `n` nodes contain those at
/// `n/2`, so doubling only adds the odd nodes.
fn trapezoid_nested<F: Fn(usize, usize) -> C64>(f: F, n_max: usize) -> Option<C64> {
    let mut n = 64.min(n_max);
    let mut sum: C64 = (0..n).map(|j| f(j, n)).sum();
    let mut prev = sum / n as f64;
    while n < n_max {
        let odd: C64 = (0..n).map(|j| f(2 * j + 1, 2 * n)).sum();
        sum += odd;
        n *= 2;
        let next = sum / n as f64;
        if (next - prev).norm() < 1e-12 {
            return Some(next);
        }
        prev = next;
    }
    None
}

/// `Lambda_p(w) = (1/2pi) int exp(i <eta_p(e^{i theta}), w>) d theta` for a
/// single prime, by a nested periodic trapezoid rule.
pub fn char_fn_local(mp: &ModelPoint, p: u64, w: C64) -> C64 {
    let coefs = local_coefs(mp, p, Truncation::Full);
    let mut n_max = 1024usize;
    loop {
        let nodes = eta_nodes(&coefs, n_max);
        let step = |j: usize, n: usize| C64::from_polar(1.0, inner(nodes[j * (n_max / n)], w));
        if let Some(v) = trapezoid_nested(step, n_max) {
            return v;
        }
        n_max *= 4;
    }
}

struct QuadPrime {
    nodes: Vec<C64>,
}

impl QuadPrime {
    fn log_factor(&self, w: C64) -> C64 {
        let n_max = self.nodes.len();
        let v = trapezoid_nested(|j, n| C64::from_polar(1.0, inner(self.nodes[j * (n_max / n)], w)), n_max)
            .unwrap_or_else(|| self.nodes.iter().map(|z| C64::from_polar(1.0, inner(*z, w))).sum::<C64>() / n_max as f64);
        if v.norm() == 0.0 {
            C64::new(f64::NEG_INFINITY, 0.0)
        } else {
            v.ln()
        }
    }
}

impl QuadPrime {
    /// `log E exp(s Re(rot eta_p))`, shifted by the largest real exponent.
    fn log_mgf(&self, s: C64, rot: C64) -> C64 {
        let n_max = self.nodes.len();
        let ys: Vec<f64> = self.nodes.iter().map(|z| (z * rot).re).collect();
        let shift = ys.iter().map(|y| s.re * y).fold(f64::NEG_INFINITY, f64::max);
        let term = |y: f64| (s * y - shift).exp();
        let v = trapezoid_nested(|j, n| term(ys[j * (n_max / n)]), n_max)
            .unwrap_or_else(|| ys.iter().map(|&y| term(y)).sum::<C64>() / n_max as f64);
        v.ln() + shift
    }
}

/// Local sums entering the small-`|w|` expansion of `log Lambda_p(w)`.
///
/// With `a = |w| c_1` the real part is `-|w|^2 v/4` plus the higher terms of
/// `log J_0(a)`; the imaginary part is the first order in `c_2` of
/// `-i Re(w) c_2 J_2(a)/J_0(a)`, whose leading `a^2/8` term is part of
/// `s3 = sum_{a,b} c_a c_b c_{a+b}`.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct LocalSums {
    pub v: f64,
    pub s3: f64,
    pub c4: f64,
    pub c6: f64,
    pub c8: f64,
    pub c10: f64,
    pub s5: f64,
    pub s7: f64,
}

impl LocalSums {
    pub fn from_coefs(c: &[f64]) -> Self {
        let v = c.iter().map(|x| x * x).sum();
        let mut s3 = 0.0;
        for a in 1..=c.len() {
            for b in 1..=c.len() {
                if a + b <= c.len() {
                    s3 += c[a - 1] * c[b - 1] * c[a + b - 1];
                }
            }
        }
        let c1 = c.first().copied().unwrap_or(0.0);
        let second = c.get(1).copied().unwrap_or(0.0);
        let q = c1 * c1;
        LocalSums {
            v,
            s3,
            c4: q * q,
            c6: q * q * q,
            c8: q * q * q * q,
            c10: q * q * q * q * q,
            s5: q * q * second,
            s7: q * q * q * second,
        }
    }

    fn add(&self, o: &LocalSums) -> LocalSums {
        LocalSums {
            v: self.v + o.v,
            s3: self.s3 + o.s3,
            c4: self.c4 + o.c4,
            c6: self.c6 + o.c6,
            c8: self.c8 + o.c8,
            c10: self.c10 + o.c10,
            s5: self.s5 + o.s5,
            s7: self.s7 + o.s7,
        }
    }

    fn log_lambda(&self, w: C64) -> C64 {
        let a2 = w.norm_sqr();
        let re = -a2 * self.v / 4.0 - a2 * a2 * self.c4 / 64.0 - a2.powi(3) * self.c6 / 576.0 - 11.0 * a2.powi(4) * self.c8 / 49152.0
            - 19.0 * a2.powi(5) * self.c10 / 614_400.0;
        let im = -w.re * (a2 * self.s3 / 8.0 + a2 * a2 * self.s5 / 48.0 + 11.0 * a2.powi(3) * self.s7 / 3072.0);
        C64::new(re, im)
    }

    /// The same expansion for `log E exp(s Y)`, `Y = Re e^{-i alpha} eta`:
    /// `log E e^{sY}` is `log Lambda(t e^{i alpha})` continued to `t = -i s`.
    fn log_mgf(&self, s: C64, alpha: f64) -> C64 {
        let s2 = s * s;
        let even = s2 * self.v / 4.0 - s2 * s2 * self.c4 / 64.0 + s2.powi(3) * self.c6 / 576.0
            - s2.powi(4) * self.c8 * (11.0 / 49152.0)
            + s2.powi(5) * self.c10 * (19.0 / 614_400.0);
        let odd = s * s2 * (self.s3 / 8.0 - s2 * self.s5 / 48.0 + s2 * s2 * self.s7 * (11.0 / 3072.0));
        even + odd * alpha.cos()
    }
}

/// Evaluator for `Lambda(w)` under a truncation.
///
/// Small primes are integrated exactly; for the rest, `|w| c_1(p)` is small and
/// the cumulant expansion is summed through suffix sums over the tabulated
/// primes, with the primes beyond the table (when untruncated) added as an
/// integral against `dx / log x`.
pub struct CharFn {
    pub mp: ModelPoint,
    pub truncation: Truncation,
    pub table_limit: u64,
    primes: Vec<u64>,
    c1: Vec<f64>,
    quad: Vec<QuadPrime>,
    suffix: Vec<LocalSums>,
    tail: LocalSums,
}

impl CharFn {
    /// `w_max` sizes the cache of exactly integrated primes; larger `|w|`
    /// still work, with slower on-the-fly quadrature.
    pub fn new(mp: &ModelPoint, truncation: Truncation, w_max: f64) -> Result<Self> {
        let limit = match truncation {
            Truncation::Full => DEFAULT_TABLE_LIMIT,
            Truncation::Cutoff(y) => {
                ensure!(y.is_finite(), Parameter, "cutoff must be finite");
                ensure!(y <= crate::arith::MAX_SIEVE_LIMIT as f64, Capacity, "cutoff {y:e} exceeds the sieve limit");
                y.max(0.0).floor() as u64
            }
        };
        let primes = if limit >= 2 { PrimePowerTable::up_to(limit as f64)?.primes } else { Vec::new() };
        let c1: Vec<f64> = primes.iter().map(|&p| mp.leading((p as f64).ln())).collect();
        let mut suffix = vec![LocalSums::default(); primes.len() + 1];
        for i in (0..primes.len()).rev() {
            let s = LocalSums::from_coefs(&local_coefs(mp, primes[i], truncation));
            suffix[i] = suffix[i + 1].add(&s);
        }
        let tail = match truncation {
            Truncation::Full => Self::tail_sums(mp, limit as f64)?,
            Truncation::Cutoff(_) => LocalSums::default(),
        };
        let mut me = CharFn { mp: *mp, truncation, table_limit: limit, primes, c1, quad: Vec::new(), suffix, tail };
        let n_quad = me.quad_count(w_max.max(1.0));
        me.quad = (0..n_quad).into_par_iter().map(|i| me.make_quad(i, w_max)).collect();
        Ok(me)
    }

    fn make_quad(&self, i: usize, w_max: f64) -> QuadPrime {
        let coefs = local_coefs(&self.mp, self.primes[i], self.truncation);
        let a = w_max * coefs.iter().sum::<f64>();
        let mut n = 1024usize;
        while (n as f64) < 4.0 * (a + 32.0) {
            n *= 2;
        }
        QuadPrime { nodes: eta_nodes(&coefs, n) }
    }

    fn tail_sums(mp: &ModelPoint, y: f64) -> Result<LocalSums> {
        let sums = |x: f64| {
            let lx = x.ln();
            let c1 = (-mp.sigma * lx).exp() / lx.powi(mp.m as i32);
            let c2 = mp.coefficient(lx, 2);
            let c3 = mp.coefficient(lx, 3);
            LocalSums::from_coefs(&[c1, c2, c3])
        };
        let t = |f: &dyn Fn(&LocalSums) -> f64| prime_tail_integral(|x| f(&sums(x)), y, 1e-10);
        Ok(LocalSums {
            v: t(&|s| s.v)?,
            s3: t(&|s| s.s3)?,
            c4: t(&|s| s.c4)?,
            c6: t(&|s| s.c6)?,
            c8: t(&|s| s.c8)?,
            c10: t(&|s| s.c10)?,
            s5: t(&|s| s.s5)?,
            s7: t(&|s| s.s7)?,
        })
    }

    /// Number of leading primes integrated exactly at modulus `|w|`.
    fn quad_count(&self, w_abs: f64) -> usize {
        let small = self.primes.partition_point(|&p| p < QUAD_MIN_PRIME);
        let big = self.c1.partition_point(|&c| w_abs * c > SERIES_THRESHOLD);
        small.max(big)
    }

    /// `log Lambda(w)` on an arbitrary branch.
    pub fn log_eval(&self, w: C64) -> C64 {
        let n = self.quad_count(w.norm());
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            let term = if i < self.quad.len() {
                self.quad[i].log_factor(w)
            } else {
                self.make_quad(i, w.norm()).log_factor(w)
            };
            acc += term;
        }
        acc + self.suffix[n].add(&self.tail).log_lambda(w)
    }

    /// `log E exp(s Re e^{-i alpha} eta)` for complex `s`.
    pub fn log_mgf(&self, s: C64) -> C64 {
        let n = self.quad_count(s.norm());
        let rot = C64::from_polar(1.0, -self.mp.alpha);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            acc += if i < self.quad.len() {
                self.quad[i].log_mgf(s, rot)
            } else {
                self.make_quad(i, s.norm()).log_mgf(s, rot)
            };
        }
        acc + self.suffix[n].add(&self.tail).log_mgf(s, self.mp.alpha)
    }

    pub fn eval(&self, w: C64) -> C64 {
        let l = self.log_eval(w);
        if l.re == f64::NEG_INFINITY {
            C64::new(0.0, 0.0)
        } else {
            l.exp()
        }
    }

    /// `sum_p v_p`, so `Var Re(e^{-i alpha} eta) = total_variance / 2`.
    pub fn total_variance(&self) -> f64 {
        self.suffix[0].v + self.tail.v
    }

    /// Largest prime used explicitly.
    pub fn cutoff_y(&self) -> f64 {
        match self.truncation {
            Truncation::Cutoff(y) => y,
            Truncation::Full => self.table_limit as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharFnValue {
    pub value: C64,
    /// Primes up to this bound enter the product explicitly.
    pub cutoff_y: f64,
    /// The cutoff a `|w| Y^{1/2 - sigma}` truncation rule would demand.
    pub nominal_cutoff: f64,
}

/// `Lambda(w)` for the full model.
pub fn char_fn(mp: &ModelPoint, w: C64, tol: f64) -> Result<CharFnValue> {
    ensure!(tol > 0.0, Parameter, "tolerance must be positive");
    let engine = CharFn::new(mp, Truncation::Full, w.norm())?;
    Ok(CharFnValue {
        value: engine.eval(w),
        cutoff_y: engine.cutoff_y(),
        nominal_cutoff: crate::random_model::cutoff_for_tolerance(mp, w.norm(), tol).unwrap_or(f64::MAX),
    })
}

/// Smallest radius `W0` on a scan of `[0.5, w_max]` beyond which
/// `|Lambda(w)| <= exp(-|w|^{1/(2 sigma)})` held at every probed point.
pub fn calibrate_w0(engine: &CharFn, w_max: f64) -> f64 {
    let angles = 24;
    let radii: Vec<f64> = (1..=(2.0 * w_max) as usize).map(|i| 0.5 * i as f64).collect();
    let violated: Vec<bool> = radii
        .par_iter()
        .map(|&r| {
            let bound = (-r.powf(0.5 / engine.mp.sigma)).exp();
            (0..angles).any(|k| engine.eval(C64::from_polar(r, PI * k as f64 / angles as f64)).norm() > bound)
        })
        .collect();
    match violated.iter().rposition(|&v| v) {
        None => radii[0],
        Some(i) if i + 1 < radii.len() => radii[i + 1],
        Some(_) => f64::INFINITY,
    }
}

/// The density `M(z)` on a square grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityGrid {
    pub mp: ModelPoint,
    pub extent: f64,
    pub step: f64,
    /// Points per axis; node `(i, j)` is `(-extent + i step, -extent + j step)`.
    pub n: usize,
    /// Row-major by `y`: `values[j * n + i]`, clipped at zero.
    pub values: Vec<f64>,
    pub raw_values: Vec<f64>,
    pub cutoff_y: f64,
    /// True when primes beyond `cutoff_y` enter through the tail integral.
    pub tail_correction: bool,
    pub inversion_radius: f64,
    pub w_step: f64,
    /// `sum values h^2 / (2 pi)`.
    pub normalization: f64,
    pub min_raw: f64,
    /// Largest `|Lambda|` on the circle `|w| = inversion_radius`.
    pub truncation_residual: f64,
    pub tol: f64,
}

/// Radius beyond which `|Lambda|` stays below `level` on probed rays.
fn inversion_radius(engine: &CharFn, start: f64, level: f64, rays: usize, full_circle: bool) -> Result<(f64, f64)> {
    let mut r = start.max(4.0);
    let span = if full_circle { PI } else { 0.0 };
    loop {
        let ring: f64 = (0..rays.max(1))
            .into_par_iter()
            .map(|k| {
                let phi = engine.mp.alpha + span * k as f64 / rays as f64;
                [1.0, 1.1, 1.25].iter().map(|f| engine.eval(C64::from_polar(r * f, phi)).norm()).fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max);
        if ring <= level {
            return Ok((r, ring));
        }
        r *= 1.25;
        ensure!(r < 5000.0, Numeric, "characteristic function does not decay below {level:e} before |w| = 5000");
    }
}

pub fn density_grid(mp: &ModelPoint, extent: f64, step: f64, tol: f64) -> Result<DensityGrid> {
    density_grid_with(mp, extent, step, tol, Truncation::Full)
}

pub fn density_grid_with(mp: &ModelPoint, extent: f64, step: f64, tol: f64, truncation: Truncation) -> Result<DensityGrid> {
    ensure!(extent.is_finite() && extent > 0.0, Parameter, "extent must be positive");
    ensure!(step.is_finite() && step > 0.0 && extent / step <= 2000.0, Parameter, "step must be positive with extent/step <= 2000");
    ensure!(tol > 0.0 && tol < 1.0, Parameter, "tolerance must lie in (0, 1)");
    let start = (1.0 / tol).ln().powf(2.0 * mp.sigma);
    let probe = CharFn::new(mp, truncation, start)?;
    let (rw, residual) = inversion_radius(&probe, start, 1e-2 * tol, 16, true)?;
    let engine = if rw > start { CharFn::new(mp, truncation, rw)? } else { probe };
    let mut extent = extent;
    for _ in 0..4 {
        let grid = invert_grid(&engine, extent, step, rw, residual, tol)?;
        let n = grid.n;
        let edge = (0..n)
            .flat_map(|i| [grid.raw_values[i], grid.raw_values[(n - 1) * n + i], grid.raw_values[i * n], grid.raw_values[i * n + n - 1]])
            .fold(0.0f64, |a, v| a.max(v.abs()));
        // values at the inversion noise floor carry no information about decay
        let floor = 4.0 * (-grid.min_raw).max(0.0);
        if edge <= 1e-8f64.max(floor) {
            ensure!(
                (grid.normalization - 1.0).abs() <= 10.0 * tol,
                Numeric,
                "density normalization {} misses 1 by more than 10 tol",
                grid.normalization
            );
            return Ok(grid);
        }
        extent *= 2.0;
    }
    Err(Error::Numeric("density does not decay to 1e-8 at the grid edge after 4 doublings".into()))
}

fn invert_grid(engine: &CharFn, extent: f64, step: f64, rw: f64, residual: f64, tol: f64) -> Result<DensityGrid> {
    let n = (2.0 * extent / step).round() as usize + 1;
    let step = 2.0 * extent / (n - 1) as f64;
    // the w-lattice period 2pi/delta = 4 extent keeps aliased copies of the
    // density far from the box
    let delta = PI / (2.0 * extent);
    let jmax = (rw / delta).ceil() as i64;
    let width = (2 * jmax + 1) as usize;
    let idx = |k: i64| (k + jmax) as usize;
    // Lambda on the upper half of the disk; the lower half is its conjugate
    let rows: Vec<Vec<C64>> = (0..=jmax)
        .into_par_iter()
        .map(|k| {
            let v = k as f64 * delta;
            (-jmax..=jmax)
                .map(|j| {
                    let u = j as f64 * delta;
                    if u * u + v * v > rw * rw || (k == 0 && j < 0) {
                        C64::new(0.0, 0.0)
                    } else {
                        engine.eval(C64::new(u, v))
                    }
                })
                .collect()
        })
        .collect();
    let mut lam = vec![C64::new(0.0, 0.0); width * width];
    for k in 0..=jmax {
        for j in -jmax..=jmax {
            let val = rows[k as usize][idx(j)];
            if k == 0 && j < 0 {
                continue;
            }
            lam[idx(k) * width + idx(j)] = val;
            lam[idx(-k) * width + idx(-j)] = val.conj();
        }
    }
    let xs: Vec<f64> = (0..n).map(|i| -extent + i as f64 * step).collect();
    let phase = |x: f64, j: i64| C64::from_polar(1.0, -x * j as f64 * delta);
    let ex: Vec<C64> = xs.iter().flat_map(|&x| (-jmax..=jmax).map(move |j| phase(x, j))).collect();
    // a[k][i] = sum_j lam[k][j] e^{-i x_i u_j}
    let a: Vec<C64> = (0..width)
        .into_par_iter()
        .flat_map_iter(|k| {
            let row = &lam[k * width..(k + 1) * width];
            let ex = &ex;
            (0..n).map(move |i| row.iter().zip(&ex[i * width..(i + 1) * width]).map(|(l, e)| l * e).sum::<C64>())
        })
        .collect();
    let scale = delta * delta / TAU;
    let raw: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|l| {
            let ey = &ex[l * width..(l + 1) * width];
            let a = &a;
            (0..n).map(move |i| (0..width).map(|k| a[k * n + i] * ey[k]).sum::<C64>().re * scale)
        })
        .collect();
    let values: Vec<f64> = raw.iter().map(|v| v.max(0.0)).collect();
    let normalization = values.iter().sum::<f64>() * step * step / TAU;
    let min_raw = raw.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(DensityGrid {
        mp: engine.mp,
        extent,
        step,
        n,
        values,
        raw_values: raw,
        cutoff_y: engine.cutoff_y(),
        tail_correction: matches!(engine.truncation, Truncation::Full),
        inversion_radius: rw,
        w_step: delta,
        normalization,
        min_raw,
        truncation_residual: residual,
        tol,
    })
}

impl DensityGrid {
    pub fn coord(&self, i: usize) -> f64 {
        -self.extent + i as f64 * self.step
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n + i]
    }

    /// Probability mass of each cell `[x_i, x_{i+1}] x [y_j, y_{j+1}]` by the
    /// trapezoid rule, `(n-1) x (n-1)` row-major.
    pub fn cell_masses(&self) -> Vec<f64> {
        let m = self.n - 1;
        let w = self.step * self.step / TAU / 4.0;
        let mut out = vec![0.0; m * m];
        for j in 0..m {
            for i in 0..m {
                out[j * m + i] = w * (self.at(i, j) + self.at(i + 1, j) + self.at(i, j + 1) + self.at(i + 1, j + 1));
            }
        }
        out
    }

    /// Marginal density in `x` (direction `alpha = 0`) at the grid abscissae,
    /// normalized for `|dx| = dx / sqrt(2 pi)`.
    pub fn x_marginal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.at(i, j)).sum::<f64>() * self.step / TAU.sqrt())
            .collect()
    }

    /// `int e^{a |z|} M(z) |dz|` over the grid.
    pub fn exponential_moment(&self, a: f64) -> f64 {
        let mut s = 0.0;
        for j in 0..self.n {
            for i in 0..self.n {
                let r = self.coord(i).hypot(self.coord(j));
                s += (a * r).exp() * self.at(i, j);
            }
        }
        s * self.step * self.step / TAU
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,y,value")?;
        for j in 0..self.n {
            for i in 0..self.n {
                writeln!(out, "{},{},{:e}", self.coord(i), self.coord(j), self.at(i, j))?;
            }
        }
        Ok(())
    }
}

/// Inverse of the one-dimensional characteristic function
/// `t -> Lambda(t e^{i alpha})`, sampled on `t_j = j dt`.
#[derive(Debug, Clone)]
pub struct MarginalInverter {
    pub mp: ModelPoint,
    pub dt: f64,
    pub t_max: f64,
    pub truncation_residual: f64,
    lam: Vec<C64>,
}

impl MarginalInverter {
    pub fn new(mp: &ModelPoint, truncation: Truncation, tol: f64) -> Result<Self> {
        ensure!(tol > 0.0 && tol < 1.0, Parameter, "tolerance must lie in (0, 1)");
        let start = (1.0 / tol).ln().powf(2.0 * mp.sigma);
        let engine = CharFn::new(mp, truncation, 2.0 * start)?;
        Self::from_engine(&engine, tol)
    }

    pub fn from_engine(engine: &CharFn, tol: f64) -> Result<Self> {
        let start = (1.0 / tol).ln().powf(2.0 * engine.mp.sigma);
        let (t_max, residual) = inversion_radius(engine, start, 1e-3 * tol, 1, false)?;
        let t_max = 1.25 * t_max;
        let dt = 0.05;
        let n = (t_max / dt).ceil() as usize;
        let dir = C64::from_polar(1.0, engine.mp.alpha);
        let lam: Vec<C64> = (0..=n).into_par_iter().map(|j| engine.eval(dir * (j as f64 * dt))).collect();
        Ok(Self { mp: engine.mp, dt, t_max: n as f64 * dt, truncation_residual: residual, lam })
    }

    /// `M(x; alpha) = sqrt(2/pi) Re int_0^inf Lambda(t e^{i alpha}) e^{-itx} dt`.
    pub fn density(&self, x: f64) -> f64 {
        let rot = C64::from_polar(1.0, -x * self.dt);
        let mut e = C64::new(1.0, 0.0);
        let mut s = 0.5 * self.lam[0].re;
        for l in &self.lam[1..] {
            e *= rot;
            s += (l * e).re;
        }
        (2.0 / PI).sqrt() * self.dt * s
    }

    /// `P(Re e^{-i alpha} eta > x)` by the Gil-Pelaez formula.
    pub fn tail(&self, x: f64) -> f64 {
        let mut s = -0.5 * x;
        for (j, l) in self.lam.iter().enumerate().skip(1) {
            let t = j as f64 * self.dt;
            s += (l * C64::from_polar(1.0, -t * x)).im / t;
        }
        0.5 + self.dt / PI * s
    }

    pub fn cdf(&self, x: f64) -> f64 {
        1.0 - self.tail(x)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginalDensity {
    pub mp: ModelPoint,
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub raw_values: Vec<f64>,
    pub t_max: f64,
    pub dt: f64,
    pub tol: f64,
}

/// The marginal density of `Re e^{-i alpha} eta_m(sigma, X)` at `xs`.
pub fn marginal_density(mp: &ModelPoint, xs: &[f64], tol: f64) -> Result<MarginalDensity> {
    marginal_density_with(mp, xs, tol, Truncation::Full)
}

pub fn marginal_density_with(mp: &ModelPoint, xs: &[f64], tol: f64, truncation: Truncation) -> Result<MarginalDensity> {
    let inv = MarginalInverter::new(mp, truncation, tol)?;
    let raw_values: Vec<f64> = xs.par_iter().map(|&x| inv.density(x)).collect();
    Ok(MarginalDensity {
        mp: *mp,
        xs: xs.to_vec(),
        values: raw_values.iter().map(|v| v.max(0.0)).collect(),
        raw_values,
        t_max: inv.t_max,
        dt: inv.dt,
        tol,
    })
}
