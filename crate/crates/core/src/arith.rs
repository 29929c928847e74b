//! Primes, prime powers and von Mangoldt weights.

use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{ensure, Result};
use crate::quad;

pub const MAX_SIEVE_LIMIT: u64 = 100_000_000;
const PLAIN_SIEVE_LIMIT: u64 = 1_000_000;
const SEGMENT: usize = 1 << 18;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimePower {
    pub p: u64,
    pub k: u32,
    pub n: u64,
    pub log_p: f64,
    pub log_n: f64,
}

impl PrimePower {
    /// `log n` in double-double, for phase reduction at large heights.
    pub fn log_n_dd(&self) -> Dd {
        Dd::ln_u64(self.n)
    }
}

/// All primes and prime powers up to `cutoff_y`. Immutable once built.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrimePowerTable {
    pub cutoff_y: f64,
    pub primes: Vec<u64>,
    /// Sorted by `n`.
    pub prime_powers: Vec<PrimePower>,
}

fn plain_sieve(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

fn segmented_sieve(limit: u64) -> Vec<u64> {
    let root = (limit as f64).sqrt() as u64 + 1;
    let base = plain_sieve(root);
    let mut out: Vec<u64> = base.iter().copied().filter(|&p| p <= limit).collect();
    let mut low = root + 1;
    let mut seg = vec![false; SEGMENT];
    while low <= limit {
        let high = (low + SEGMENT as u64 - 1).min(limit);
        let len = (high - low + 1) as usize;
        seg[..len].fill(false);
        for &p in &base {
            if p * p > high {
                break;
            }
            let mut j = (low.div_ceil(p) * p).max(p * p);
            while j <= high {
                seg[(j - low) as usize] = true;
                j += p;
            }
        }
        out.extend((0..len).filter(|&i| !seg[i]).map(|i| low + i as u64));
        low = high + 1;
    }
    out
}

/// Primes and prime powers `<= limit`, for `3 <= limit <= 10^8`.
pub fn sieve(limit: u64) -> Result<PrimePowerTable> {
    ensure!(
        (3..=MAX_SIEVE_LIMIT).contains(&limit),
        Parameter,
        "sieve limit {limit} outside [3, {MAX_SIEVE_LIMIT}]"
    );
    let primes = if limit <= PLAIN_SIEVE_LIMIT { plain_sieve(limit) } else { segmented_sieve(limit) };
    let mut prime_powers = Vec::with_capacity(primes.len() + primes.len() / 8);
    for &p in &primes {
        let log_p = (p as f64).ln();
        let mut n = p;
        let mut k = 1u32;
        loop {
            prime_powers.push(PrimePower { p, k, n, log_p, log_n: k as f64 * log_p });
            match n.checked_mul(p) {
                Some(next) if next <= limit => {
                    n = next;
                    k += 1;
                }
                _ => break,
            }
        }
    }
    prime_powers.sort_unstable_by_key(|pp| pp.n);
    Ok(PrimePowerTable { cutoff_y: limit as f64, primes, prime_powers })
}

impl PrimePowerTable {
    /// Table for a real cutoff `y`; below 2 the table is empty.
    pub fn up_to(y: f64) -> Result<Self> {
        ensure!(y.is_finite(), Parameter, "cutoff must be finite");
        if y < 2.0 {
            return Ok(Self { cutoff_y: y, primes: Vec::new(), prime_powers: Vec::new() });
        }
        let limit = y.floor() as u64;
        let mut t = sieve(limit.max(3))?;
        if limit < 3 {
            t.primes.retain(|&p| p <= limit);
            t.prime_powers.retain(|pp| pp.n <= limit);
        }
        t.cutoff_y = y;
        Ok(t)
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Largest prime in the table, or 1 when empty.
    pub fn max_prime(&self) -> u64 {
        self.primes.last().copied().unwrap_or(1)
    }

    /// Chebyshev `psi(Y) = sum_{n <= Y} Lambda(n)` over the table.
    pub fn chebyshev_psi(&self) -> f64 {
        self.prime_powers.iter().map(|pp| pp.log_p).sum()
    }
}

/// `Lambda(n)`: `log p` if `n = p^k`, otherwise 0.
pub fn von_mangoldt(n: u64) -> Result<f64> {
    ensure!(n >= 2, Parameter, "von Mangoldt weight needs n >= 2, got {n}");
    let p = smallest_factor(n);
    let mut r = n;
    while r % p == 0 {
        r /= p;
    }
    Ok(if r == 1 { (p as f64).ln() } else { 0.0 })
}

fn smallest_factor(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return d;
        }
        d += 2;
    }
    n
}

/// `int_y^inf f(x) dx / log x`, the prime-number-theorem approximation to
/// `sum_{p > y} f(p)`. Evaluated in `v = log x`.
pub fn prime_tail_integral<F: Fn(f64) -> f64>(f: F, y: f64, rel_tol: f64) -> Result<f64> {
    let v0 = y.max(2.0).ln();
    let r = quad::integrate_to_inf(
        |v| {
            let x = v.exp();
            if !x.is_finite() {
                return 0.0;
            }
            f(x) * x / v
        },
        v0,
        1e-300,
        rel_tol,
    )?;
    Ok(r.value)
}
