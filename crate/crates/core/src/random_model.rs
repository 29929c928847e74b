//! The random Dirichlet polynomial `P_{m,Y}(sigma, X)` with `X(p)` i.i.d.
//! uniform on the unit circle: sampling, exact moments and tail frequencies.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;

use crate::arith::PrimePowerTable;
use crate::error::{ensure, Error, Result};
use crate::model::ModelPoint;
use crate::stats::binomial_se;

/// Guard on tuple enumeration: `(#prime powers)^{k+l}`.
pub const MAX_TUPLES: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCSample {
    pub seed: u64,
    pub n_samples: usize,
    pub values: Vec<C64>,
    pub cutoff_y: f64,
}

/// Per-prime coefficients `a_k = 1/(k p^{k sigma} (k log p)^m)` for `p^k <= Y`.
pub(crate) fn prime_coefficients(mp: &ModelPoint, table: &PrimePowerTable) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(table.primes.len());
    let mut index = BTreeMap::new();
    for (i, &p) in table.primes.iter().enumerate() {
        index.insert(p, i);
        out.push(Vec::new());
    }
    // prime powers are sorted by n, so for each p the k come in order
    for pp in &table.prime_powers {
        out[index[&pp.p]].push(mp.coefficient(pp.log_p, pp.k));
    }
    out
}

/// Random generator for draw `draw` under master seed `seed`.
///
/// Each draw owns a ChaCha stream, so results do not depend on how draws
/// are split across threads.
pub fn draw_rng(seed: u64, draw: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw);
    rng
}

fn one_draw(coefs: &[Vec<f64>], seed: u64, draw: u64) -> C64 {
    let mut rng = draw_rng(seed, draw);
    let mut acc = C64::new(0.0, 0.0);
    for a in coefs {
        let theta = rng.random::<f64>() * TAU;
        let x = C64::from_polar(1.0, theta);
        let mut xk = x;
        for (k, &c) in a.iter().enumerate() {
            if k > 0 {
                xk *= x;
            }
            acc += xk * c;
        }
    }
    acc
}

/// `n` independent draws of `P_{m,Y}(sigma, X)`.
pub fn sample_p_my(mp: &ModelPoint, table: &PrimePowerTable, seed: u64, n: usize) -> Result<MCSample> {
    ensure!(n >= 1, Parameter, "need at least one draw");
    let coefs = prime_coefficients(mp, table);
    let values: Vec<C64> = (0..n).into_par_iter().with_min_len(1024).map(|d| one_draw(&coefs, seed, d as u64)).collect();
    Ok(MCSample { seed, n_samples: n, values, cutoff_y: table.cutoff_y })
}

/// `A_k(N) = sum over k-tuples of prime powers with product N of the product
/// of their coefficients`, keyed by the exact integer `N`.
pub(crate) fn product_weights(mp: &ModelPoint, table: &PrimePowerTable, k: u32) -> Result<BTreeMap<u128, f64>> {
    let mut cur: BTreeMap<u128, f64> = BTreeMap::new();
    cur.insert(1, 1.0);
    for _ in 0..k {
        let mut next = BTreeMap::new();
        for (&n, &w) in &cur {
            for pp in &table.prime_powers {
                let prod = n
                    .checked_mul(pp.n as u128)
                    .ok_or_else(|| Error::Capacity("prime-power product exceeds 128 bits".into()))?;
                *next.entry(prod).or_insert(0.0) += w * mp.coefficient(pp.log_p, pp.k);
            }
        }
        cur = next;
    }
    Ok(cur)
}

pub(crate) fn check_tuple_budget(table: &PrimePowerTable, k: u32, l: u32) -> Result<()> {
    let count = (table.prime_powers.len() as f64).powi((k + l) as i32);
    ensure!(
        count <= MAX_TUPLES,
        Capacity,
        "enumerating {}^{} tuples exceeds the budget of {MAX_TUPLES:e}",
        table.prime_powers.len(),
        k + l
    );
    Ok(())
}

/// `E[P^k conj(P)^l]`, exactly: a tuple pair contributes iff the products of
/// its prime powers agree.
pub fn exact_mixed_moment(mp: &ModelPoint, table: &PrimePowerTable, k: u32, l: u32) -> Result<C64> {
    check_tuple_budget(table, k, l)?;
    let a = product_weights(mp, table, k)?;
    let b = if k == l { a.clone() } else { product_weights(mp, table, l)? };
    let s: f64 = a.iter().filter_map(|(n, wa)| b.get(n).map(|wb| wa * wb)).sum();
    Ok(C64::new(s, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub probability: f64,
    pub standard_error: f64,
    pub n: usize,
}

/// Fraction of draws with `Re(e^{-i alpha} value) > tau`.
pub fn mc_tail(sample: &MCSample, alpha: f64, tau: f64) -> TailEstimate {
    let rot = C64::from_polar(1.0, -alpha);
    let hits = sample.values.iter().filter(|v| (rot * **v).re > tau).count();
    let n = sample.values.len();
    let p = hits as f64 / n as f64;
    TailEstimate { probability: p, standard_error: binomial_se(p, n), n }
}

/// Smallest `Y` with `2 |w| / (Y^{sigma - 1/2} (log Y)^m) < tol`, the truncation
/// rule for the characteristic function. May be astronomically large.
pub fn cutoff_for_tolerance(mp: &ModelPoint, w_abs: f64, tol: f64) -> Result<f64> {
    ensure!(tol > 0.0 && w_abs >= 0.0, Parameter, "need tol > 0 and |w| >= 0");
    let expo = mp.sigma - 0.5;
    ensure!(expo > 0.0 || mp.m >= 1, Parameter, "tail bound does not decay for sigma = 1/2, m = 0");
    let bound = |log_y: f64| 2.0 * w_abs * (-expo * log_y).exp() / log_y.powi(mp.m as i32);
    let mut lo = 2f64.ln();
    if bound(lo) < tol {
        return Ok(2.0);
    }
    let mut hi = lo;
    while bound(hi) >= tol {
        hi *= 2.0;
        ensure!(hi < 1e6, Capacity, "no cutoff Y below e^1e6 meets tolerance {tol:e}");
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bound(mid) < tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi.exp())
}
