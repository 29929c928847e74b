//! The cumulant-generating function `f(kappa) = log E exp(kappa Y)` of
//! `Y = Re e^{-i alpha} eta_m(sigma, X)` and its first two derivatives.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::local::{tilted_moments, Tilted};
use crate::arith::{prime_tail_integral, PrimePowerTable};
use crate::charfun::{local_coefs, DEFAULT_TABLE_LIMIT};
use crate::error::{ensure, Result};
use crate::model::{ModelPoint, Truncation};
use crate::specfun::RealBessel;

/// Primes with `kappa p^{-2 sigma}` above this get exact quadrature.
const CLOSED_FORM_DELTA: f64 = 0.1;
const MIN_QUAD_PRIME: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantValue {
    pub kappa: f64,
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
    /// Primes up to here are integrated exactly.
    pub quad_cutoff: f64,
    /// Primes up to here are summed explicitly; the rest enter as an integral.
    pub cutoff_y: f64,
    /// Contribution of the primes beyond `cutoff_y` to `f`.
    pub tail_f: f64,
    /// Bound on the neglected second-order terms in `f`.
    pub error_estimate: f64,
}

/// Closed form for primes where `kappa c_2` is small:
/// `log F_p = g(a) + kappa c_2 cos(alpha) R_2(a) + O((kappa c_2)^2 + kappa c_3)`, `a = kappa c_1`.
fn closed_form(kappa: f64, c1: f64, c2: f64, cos_a: f64) -> Tilted {
    let a = kappa * c1;
    let b = RealBessel::new(a);
    let k2 = c2 * cos_a;
    Tilted {
        log_f: b.log_i0 + kappa * k2 * b.r[2],
        mean: c1 * b.g1() + k2 * (b.r[2] + a * b.dr(2)),
        var: c1 * c1 * b.g2() + k2 * c1 * (2.0 * b.dr(2) + a * b.d2r2()),
    }
}

/// Dropped terms: the second order in `kappa c_2` and the first order in `kappa c_3`,
/// which carries `R_3(a) = O(a^3)`.
fn closed_form_error(kappa: f64, c1: f64, c2: f64, c3: f64) -> f64 {
    let r3 = RealBessel::new(kappa * c1).r[3];
    0.25 * (kappa * c2).powi(2) + kappa * c3 * r3 + 0.25 * (kappa * c3).powi(2)
}

pub struct CumulantEngine {
    pub mp: ModelPoint,
    pub table_limit: u64,
    primes: Vec<u64>,
}

impl CumulantEngine {
    pub fn new(mp: &ModelPoint) -> Result<Self> {
        Self::with_table(mp, DEFAULT_TABLE_LIMIT)
    }

    pub fn with_table(mp: &ModelPoint, table_limit: u64) -> Result<Self> {
        ensure!(table_limit >= 1000, Parameter, "the prime table must reach at least 1000");
        ensure!(table_limit <= crate::arith::MAX_SIEVE_LIMIT, Capacity, "prime table {table_limit} exceeds the sieve limit");
        let primes = PrimePowerTable::up_to(table_limit as f64)?.primes;
        Ok(CumulantEngine { mp: *mp, table_limit, primes })
    }

    fn coefs_at(&self, x: f64) -> (f64, f64, f64) {
        let lx = x.ln();
        (self.mp.leading(lx), self.mp.coefficient(lx, 2), self.mp.coefficient(lx, 3))
    }

    /// `f`, `f'`, `f''` at `kappa`; `tol` bounds the closed-form error relative to `max(1, |f|)`.
    pub fn eval(&self, kappa: f64, tol: f64) -> Result<CumulantValue> {
        ensure!(kappa > 0.0 && kappa.is_finite(), Domain, "kappa must be positive, got {kappa}");
        ensure!(tol > 0.0, Parameter, "tolerance must be positive");
        let mp = self.mp;
        let cos_a = mp.alpha.cos();
        let mut delta = CLOSED_FORM_DELTA;
        loop {
            let pq = (kappa / delta).powf(0.5 / mp.sigma).clamp(MIN_QUAD_PRIME, self.table_limit as f64);
            let n_quad = self.primes.partition_point(|&p| (p as f64) <= pq);
            let quad: Vec<Tilted> = self.primes[..n_quad]
                .par_iter()
                .with_min_len(16)
                .map(|&p| tilted_moments(&local_coefs(&mp, p, Truncation::Full), mp.alpha, kappa))
                .collect::<Result<_>>()?;
            let closed: Vec<(Tilted, f64)> = self.primes[n_quad..]
                .par_iter()
                .with_min_len(1024)
                .map(|&p| {
                    let (c1, c2, c3) = self.coefs_at(p as f64);
                    (closed_form(kappa, c1, c2, cos_a), closed_form_error(kappa, c1, c2, c3))
                })
                .collect();
            let y = self.table_limit as f64;
            let tail = |pick: fn(&Tilted) -> f64| {
                prime_tail_integral(
                    |x| {
                        let (c1, c2, _) = self.coefs_at(x);
                        pick(&closed_form(kappa, c1, c2, cos_a))
                    },
                    y,
                    1e-11,
                )
            };
            let tail_t = Tilted { log_f: tail(|t| t.log_f)?, mean: tail(|t| t.mean)?, var: tail(|t| t.var)? };
            let tail_err = prime_tail_integral(
                |x| {
                    let (c1, c2, c3) = self.coefs_at(x);
                    closed_form_error(kappa, c1, c2, c3)
                },
                y,
                1e-6,
            )?;
            let mut total = quad.iter().fold(Tilted::default(), |a, &t| a.add(t));
            let mut err = tail_err + 1e-14 * total.log_f.abs();
            for (t, e) in &closed {
                total = total.add(*t);
                err += e;
            }
            total = total.add(tail_t);
            let value = CumulantValue {
                kappa,
                f: total.log_f,
                f1: total.mean,
                f2: total.var,
                quad_cutoff: pq,
                cutoff_y: y,
                tail_f: tail_t.log_f,
                error_estimate: err,
            };
            if err <= tol * value.f.abs().max(1.0) {
                return Ok(value);
            }
            ensure!(
                n_quad < self.primes.len(),
                Capacity,
                "closed-form error {err:e} exceeds tolerance with every tabulated prime integrated; enlarge the table beyond {}",
                self.table_limit
            );
            delta /= 4.0;
        }
    }
}

/// `(f, f', f'')` at `kappa` with the default prime table.
pub fn cumulant(mp: &ModelPoint, kappa: f64, tol: f64) -> Result<CumulantValue> {
    CumulantEngine::new(mp)?.eval(kappa, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumulant::gn::cumulant_asymptotic;
    use crate::specfun::polylog;
    use num_complex::Complex64 as C64;

    fn engine(s: f64, m: u32, a: f64) -> CumulantEngine {
        CumulantEngine::with_table(&ModelPoint::new(s, m, a).unwrap(), 100_000).unwrap()
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let mp = ModelPoint::new(0.75, 0, 0.4).unwrap();
        let p = 20011u64;
        let coefs = local_coefs(&mp, p, Truncation::Full);
        for &k in &[5.0, 500.0, 2e4] {
            let q = tilted_moments(&coefs, mp.alpha, k).unwrap();
            let c = closed_form(k, coefs[0], coefs[1], mp.alpha.cos());
            let e = closed_form_error(k, coefs[0], coefs[1], coefs[2]);
            assert!((q.log_f - c.log_f).abs() <= e, "{k}: {} {} {e}", q.log_f, c.log_f);
            assert!((q.mean - c.mean).abs() <= 4.0 * e / k + 1e-15, "{k}: {} {}", q.mean, c.mean);
        }
    }

    #[test]
    fn small_kappa_limit() {
        let e = engine(0.8, 1, 0.0);
        let v = e.eval(1e-6, 1e-10).unwrap();
        // f''(0) = sum_p Var Y_p = sum_p Li_{2m+2}(p^{-2 sigma}) / (2 (log p)^{2m})
        let mut want = 0.0;
        for &p in &e.primes {
            let lp = (p as f64).ln();
            let li = polylog(4, C64::new((-1.6 * lp).exp(), 0.0)).unwrap().re;
            want += li / (2.0 * lp * lp);
        }
        assert!(v.f.abs() < 1e-5 && v.f1.abs() < 1e-5);
        // primes above the table contribute a little more
        assert!(v.f2 >= want && v.f2 - want < 1e-4 * want, "{} {want}", v.f2);
    }

    #[test]
    fn derivatives_match_differences_and_convexity() {
        let e = engine(0.75, 0, 0.0);
        for &k in &[10.0, 100.0, 1000.0] {
            let h = 1e-3 * k;
            let v: Vec<CumulantValue> = [k - h, k, k + h].iter().map(|&x| e.eval(x, 1e-8).unwrap()).collect();
            let d1 = (v[2].f - v[0].f) / (2.0 * h);
            let d2 = (v[2].f - 2.0 * v[1].f + v[0].f) / (h * h);
            assert!((d1 - v[1].f1).abs() < 1e-6 * v[1].f1, "{k}: {d1} {}", v[1].f1);
            assert!((d2 - v[1].f2).abs() < 1e-4 * v[1].f2, "{k}: {d2} {}", v[1].f2);
            assert!(d2 > 0.0 && v[1].f2 > 0.0);
        }
    }

    #[test]
    fn kappa_200_near_asymptotic() {
        let mp = ModelPoint::new(0.75, 0, 0.0).unwrap();
        let v = cumulant(&mp, 200.0, 1e-10).unwrap();
        let main = crate::cumulant::gn::cumulant_asymptotic_with(&mp, 0, 200.0, 1.0).unwrap();
        let band = 5.0 / 200f64.ln();
        assert!((v.f / main - 1.0).abs() < band, "{} {main}", v.f);
        assert!(cumulant_asymptotic(&mp, 0, 200.0).is_err());
    }
}
