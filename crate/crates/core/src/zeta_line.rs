//! The deterministic side: `P_{m,Y}(sigma + it)` along `t in [T, 2T]`, exact
//! time averages of its mixed moments, empirical measures and rectangle
//! discrepancies against the model density.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::arith::PrimePowerTable;
use crate::charfun::DensityGrid;
use crate::dd::{phase, Dd};
use crate::error::{ensure, Result};
use crate::model::ModelPoint;
use crate::random_model::{check_tuple_budget, product_weights};
use crate::specfun::SmoothedIndicator;

/// Samples between exact double-double phase refreshes in [`empirical_measure`].
const REFRESH: usize = 512;

/// `P_{m,Y}(sigma + it) = sum_{p^k <= Y} p^{-ikt} / (k p^{k sigma} (log p^k)^m)`.
pub fn dirichlet_poly(mp: &ModelPoint, table: &PrimePowerTable, t: f64) -> C64 {
    table
        .prime_powers
        .iter()
        .map(|pp| C64::from_polar(mp.coefficient(pp.log_p, pp.k), -phase(t, pp.log_n_dd())))
        .sum()
}

fn log_ratio(a: u128, b: u128) -> Dd {
    let ln = |n: u128| if n <= u64::MAX as u128 { Dd::ln_u64(n as u64) } else { Dd::from_f64(n as f64).ln() };
    ln(a) - ln(b)
}

/// `(1/T) int_T^{2T} P^k conj(P)^l dt`, in closed form over tuples of prime powers.
pub fn exact_time_moment(mp: &ModelPoint, table: &PrimePowerTable, k: u32, l: u32, t_len: f64) -> Result<C64> {
    ensure!(t_len > 0.0 && t_len.is_finite(), Parameter, "T must be positive");
    check_tuple_budget(table, k, l)?;
    let a = product_weights(mp, table, k)?;
    let b = if k == l { a.clone() } else { product_weights(mp, table, l)? };
    // P^k conj(P)^l = sum w_a(N) w_b(M) (M/N)^{it}
    let pairs: Vec<(u128, f64, u128, f64)> =
        a.iter().flat_map(|(&n, &wa)| b.iter().map(move |(&m, &wb)| (n, wa, m, wb))).collect();
    let total: C64 = pairs
        .par_iter()
        .with_min_len(256)
        .map(|&(n, wa, m, wb)| {
            let w = wa * wb;
            if n == m {
                return C64::new(w, 0.0);
            }
            let lr = log_ratio(m, n);
            let e2 = C64::from_polar(1.0, phase(2.0 * t_len, lr));
            let e1 = C64::from_polar(1.0, phase(t_len, lr));
            w * (e2 - e1) / (C64::new(0.0, lr.to_f64()) * t_len)
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    Ok(total)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    pub mp: ModelPoint,
    #[serde(rename = "T")]
    pub t_len: f64,
    pub cutoff_y: f64,
    pub t_step: f64,
    /// `P_{m,Y}(sigma + i t_j)`, `t_j = T + j t_step`.
    pub samples: Vec<C64>,
    /// Sorted `Re e^{-i alpha} P(t_j)` for CDF queries.
    pub sorted_projection: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn t(&self, j: usize) -> f64 {
        self.t_len + j as f64 * self.t_step
    }

    /// Fraction of samples with projection `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        crate::stats::ecdf(&self.sorted_projection, x)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,re,im")?;
        for (j, z) in self.samples.iter().enumerate() {
            writeln!(out, "{},{:e},{:e}", self.t(j), z.re, z.im)?;
        }
        Ok(())
    }
}

/// `P_{m,Y}` on the uniform grid `t_j = T + j T/(n-1)`, `j < n`. Each block of
/// samples starts from exact phases and advances by multiplication.
pub fn empirical_measure(mp: &ModelPoint, table: &PrimePowerTable, t_len: f64, n_samples: usize) -> Result<EmpiricalMeasure> {
    ensure!(n_samples >= 1000, Parameter, "need at least 1000 samples, got {n_samples}");
    ensure!(t_len > 0.0 && t_len.is_finite(), Parameter, "T must be positive");
    let t_step = t_len / (n_samples - 1) as f64;
    let coefs: Vec<f64> = table.prime_powers.iter().map(|pp| mp.coefficient(pp.log_p, pp.k)).collect();
    let logs: Vec<Dd> = table.prime_powers.iter().map(|pp| pp.log_n_dd()).collect();
    let steps: Vec<C64> = logs.iter().map(|l| C64::from_polar(1.0, -phase(t_step, *l))).collect();
    let blocks: Vec<Vec<C64>> = (0..n_samples.div_ceil(REFRESH))
        .into_par_iter()
        .map(|b| {
            let j0 = b * REFRESH;
            let len = REFRESH.min(n_samples - j0);
            let t0 = t_len + j0 as f64 * t_step;
            let mut rot: Vec<C64> = logs.iter().zip(&coefs).map(|(l, c)| C64::from_polar(*c, -phase(t0, *l))).collect();
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                out.push(rot.iter().sum());
                for (r, s) in rot.iter_mut().zip(&steps) {
                    *r *= s;
                }
            }
            out
        })
        .collect();
    let samples: Vec<C64> = blocks.into_iter().flatten().collect();
    let turn = C64::from_polar(1.0, -mp.alpha);
    let mut sorted_projection: Vec<f64> = samples.iter().map(|z| (z * turn).re).collect();
    sorted_projection.par_sort_unstable_by(|a, b| a.total_cmp(b));
    Ok(EmpiricalMeasure { mp: *mp, t_len, cutoff_y: table.cutoff_y, t_step, samples, sorted_projection })
}

/// Default `Y = (log T)^{5/(sigma - 1/2)}`, capped at `cap`.
pub fn default_cutoff(sigma: f64, t_len: f64, cap: f64) -> f64 {
    if sigma <= 0.5 {
        return cap;
    }
    t_len.ln().powf(5.0 / (sigma - 0.5)).min(cap)
}

/// `R = (c1, d1) x i(c2, d2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub c1: f64,
    pub d1: f64,
    pub c2: f64,
    pub d2: f64,
}

impl Rectangle {
    pub fn new(c1: f64, d1: f64, c2: f64, d2: f64) -> Result<Self> {
        ensure!(c1 < d1 && c2 < d2, Parameter, "rectangle needs c1 < d1 and c2 < d2");
        Ok(Rectangle { c1, d1, c2, d2 })
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re > self.c1 && z.re < self.d1 && z.im > self.c2 && z.im < self.d2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectangleFamily {
    /// Half-width of the square `[-L, L]^2` holding every rectangle.
    pub half_width: f64,
    pub rectangles: Vec<Rectangle>,
}

impl RectangleFamily {
    pub fn new(half_width: f64, rectangles: Vec<Rectangle>) -> Result<Self> {
        ensure!(!rectangles.is_empty(), Parameter, "rectangle family is empty");
        ensure!(
            rectangles.iter().all(|r| r.c1 >= -half_width && r.d1 <= half_width && r.c2 >= -half_width && r.d2 <= half_width),
            Parameter,
            "rectangles must lie in [-{half_width}, {half_width}]^2"
        );
        Ok(RectangleFamily { half_width, rectangles })
    }

    /// All rectangles with corners on an `n x n` grid over `[-L, L]^2`,
    /// `L = log log T`, thinned to at most `max_count` by taking evenly spaced
    /// members of the lexicographic enumeration.
    pub fn default_for(t_len: f64, n: usize, max_count: usize) -> Result<Self> {
        ensure!(t_len > std::f64::consts::E.exp(), Parameter, "default family needs log log T > 1");
        ensure!(n >= 2 && max_count >= 1, Parameter, "need at least a 2 x 2 corner grid");
        let l = t_len.ln().ln();
        let xs: Vec<f64> = (0..n).map(|i| if i + 1 == n { l } else { -l + 2.0 * l * i as f64 / (n - 1) as f64 }).collect();
        let spans: Vec<(f64, f64)> = (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))).map(|(a, b)| (xs[a], xs[b])).collect();
        let total = spans.len() * spans.len();
        let count = total.min(max_count);
        let rectangles = (0..count)
            .map(|i| {
                let idx = (i as u128 * total as u128 / count as u128) as usize;
                let (x, y) = (spans[idx / spans.len()], spans[idx % spans.len()]);
                Rectangle { c1: x.0, d1: x.1, c2: y.0, d2: y.1 }
            })
            .collect();
        Self::new(l, rectangles)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    #[serde(rename = "T")]
    pub t_len: f64,
    #[serde(rename = "Y")]
    pub cutoff_y: f64,
    pub family_size: usize,
    pub value: f64,
    pub argmax: Rectangle,
    pub empirical_probability: f64,
    pub model_probability: f64,
    pub n_samples: usize,
    /// Samples on a regular t-grid are correlated; no standard error is claimed.
    pub note: String,
}

/// Mass of `[-R, x] x [-R, y]` under the grid density, bilinear between nodes.
struct GridCdf {
    n: usize,
    extent: f64,
    step: f64,
    cum: Vec<f64>,
}

impl GridCdf {
    fn new(dg: &DensityGrid) -> Self {
        let n = dg.n;
        let m = n - 1;
        let cells = dg.cell_masses();
        let mut cum = vec![0.0; n * n];
        for j in 1..n {
            for i in 1..n {
                cum[j * n + i] = cells[(j - 1) * m + (i - 1)] + cum[(j - 1) * n + i] + cum[j * n + i - 1] - cum[(j - 1) * n + i - 1];
            }
        }
        GridCdf { n, extent: dg.extent, step: dg.step, cum }
    }

    fn at(&self, x: f64, y: f64) -> f64 {
        let locate = |v: f64| {
            let t = ((v + self.extent) / self.step).clamp(0.0, (self.n - 1) as f64);
            let i = (t.floor() as usize).min(self.n - 2);
            (i, t - i as f64)
        };
        let (i, u) = locate(x);
        let (j, v) = locate(y);
        let c = |a: usize, b: usize| self.cum[b * self.n + a];
        (1.0 - u) * (1.0 - v) * c(i, j) + u * (1.0 - v) * c(i + 1, j) + (1.0 - u) * v * c(i, j + 1) + u * v * c(i + 1, j + 1)
    }

    fn rect(&self, r: &Rectangle) -> f64 {
        self.at(r.d1, r.d2) - self.at(r.c1, r.d2) - self.at(r.d1, r.c2) + self.at(r.c1, r.c2)
    }
}

/// Largest `|P_T(P in R) - P(eta in R)|` over the family.
pub fn discrepancy(em: &EmpiricalMeasure, dg: &DensityGrid, rf: &RectangleFamily) -> Result<DiscrepancyReport> {
    ensure!(!rf.rectangles.is_empty(), Parameter, "rectangle family is empty");
    let inside = |v: f64| v >= -dg.extent && v <= dg.extent;
    ensure!(
        rf.rectangles.iter().all(|r| inside(r.c1) && inside(r.d1) && inside(r.c2) && inside(r.d2)),
        Parameter,
        "a rectangle leaves the density grid [-{0}, {0}]^2",
        dg.extent
    );
    // counts on the grid of all corner coordinates, so each rectangle is O(1)
    let coords = |f: fn(&Rectangle) -> [f64; 2]| {
        let mut v: Vec<f64> = rf.rectangles.iter().flat_map(f).collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v.dedup();
        v
    };
    let xs = coords(|r| [r.c1, r.d1]);
    let ys = coords(|r| [r.c2, r.d2]);
    let (nx, ny) = (xs.len() + 1, ys.len() + 1);
    ensure!(nx * ny <= 50_000_000, Capacity, "rectangle corners span a {nx} x {ny} count grid");
    // bin a = #{corners < x}; x < xs[a] exactly when bin <= a
    let mut cnt = vec![0u64; nx * ny];
    for z in &em.samples {
        let a = xs.partition_point(|&c| c < z.re);
        let b = ys.partition_point(|&c| c < z.im);
        cnt[b * nx + a] += 1;
    }
    for b in 0..ny {
        for a in 0..nx {
            let left = if a > 0 { cnt[b * nx + a - 1] } else { 0 };
            let below = if b > 0 { cnt[(b - 1) * nx + a] } else { 0 };
            let diag = if a > 0 && b > 0 { cnt[(b - 1) * nx + a - 1] } else { 0 };
            cnt[b * nx + a] += left + below - diag;
        }
    }
    let index = |v: &[f64], c: f64| v.partition_point(|&u| u < c);
    let total = em.samples.len() as f64;
    let model = GridCdf::new(dg);
    let scored: Vec<(f64, f64, f64)> = rf
        .rectangles
        .par_iter()
        .with_min_len(1024)
        .map(|r| {
            let (a1, a2) = (index(&xs, r.c1), index(&xs, r.d1));
            let (b1, b2) = (index(&ys, r.c2), index(&ys, r.d2));
            let c = |a: usize, b: usize| cnt[b * nx + a] as f64;
            let emp = (c(a2, b2) - c(a1, b2) - c(a2, b1) + c(a1, b1)) / total;
            let mdl = model.rect(r);
            ((emp - mdl).abs(), emp, mdl)
        })
        .collect();
    let (best, &(value, emp, mdl)) = scored
        .iter()
        .enumerate()
        .fold((0, &scored[0]), |acc, (i, s)| if s.0 > acc.1 .0 { (i, s) } else { acc });
    Ok(DiscrepancyReport {
        t_len: em.t_len,
        cutoff_y: em.cutoff_y,
        family_size: rf.rectangles.len(),
        value,
        argmax: rf.rectangles[best],
        empirical_probability: emp,
        model_probability: mdl,
        n_samples: em.samples.len(),
        note: "t-samples on a regular grid are correlated; no standard error is claimed".into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsCrosscheck {
    /// Fraction of samples in the rectangle.
    pub plain: f64,
    /// Sample mean of the Beurling-Selberg smoothing `W_{L,R}`.
    pub smoothed: f64,
    /// Sample mean of `K(L(x-c1)) + K(L(x-d1)) + K(L(y-c2)) + K(L(y-d2))`.
    pub kernel_bound: f64,
}

fn fejer(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let s = (std::f64::consts::PI * x).sin() / (std::f64::consts::PI * x);
        s * s
    }
}

/// Rectangle probability by counting and by averaging
/// `W_{L,R}(z) = S_{c1,d1}(Re z) S_{c2,d2}(Im z)`.
pub fn bs_discrepancy_crosscheck(em: &EmpiricalMeasure, rect: &Rectangle, l: f64) -> Result<BsCrosscheck> {
    ensure!(rect.c1 < rect.d1 && rect.c2 < rect.d2, Parameter, "rectangle needs c1 < d1 and c2 < d2");
    let far = em.samples.iter().fold(0.0f64, |a, z| a.max(z.re.abs()).max(z.im.abs()));
    let reach = far + [rect.c1, rect.d1, rect.c2, rect.d2].iter().fold(0.0f64, |a, v| a.max(v.abs())) + 1.0;
    let s = SmoothedIndicator::new(l, reach)?;
    let (plain, smoothed, bound) = em
        .samples
        .par_iter()
        .with_min_len(4096)
        .map(|z| {
            let inside = if rect.contains(*z) { 1.0 } else { 0.0 };
            let w = s.eval(z.re, rect.c1, rect.d1) * s.eval(z.im, rect.c2, rect.d2);
            let k = fejer(l * (z.re - rect.c1)) + fejer(l * (z.re - rect.d1)) + fejer(l * (z.im - rect.c2)) + fejer(l * (z.im - rect.d2));
            (inside, w, k)
        })
        .reduce(|| (0.0, 0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let n = em.samples.len() as f64;
    Ok(BsCrosscheck { plain: plain / n, smoothed: smoothed / n, kernel_bound: bound / n })
}

/// `L = c (log T)^sigma (log log T)^m`.
pub fn smoothing_length(mp: &ModelPoint, t_len: f64, c: f64) -> f64 {
    c * t_len.ln().powf(mp.sigma) * t_len.ln().ln().powi(mp.m as i32)
}
