//! The parameter triple shared by every computation.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// A point `(sigma, m, alpha)` of the model.
///
/// `sigma` is the real part of the vertical line, `m` the number of
/// iterated integrations of `log zeta` and `alpha` the projection angle
/// used by the one-dimensional statistics `Re(e^{-i alpha} z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelPoint {
    pub sigma: f64,
    pub m: u32,
    pub alpha: f64,
}

impl ModelPoint {
    /// Builds a model point, rejecting pairs where the random Euler sum
    /// does not converge: either `sigma > 1/2`, or `sigma >= 1/2` with `m >= 1`.
    pub fn new(sigma: f64, m: u32, alpha: f64) -> Result<Self> {
        ensure!(sigma.is_finite() && alpha.is_finite(), Parameter, "sigma and alpha must be finite");
        ensure!(
            sigma > 0.5 || (sigma >= 0.5 && m >= 1),
            Parameter,
            "(sigma, m) = ({sigma}, {m}) outside the convergence set: need sigma > 1/2, or sigma >= 1/2 with m >= 1"
        );
        ensure!(m <= 16, Parameter, "m = {m} is larger than supported (16)");
        Ok(Self { sigma, m, alpha })
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }

    /// Coefficient of `X(p)^k` in the prime-power expansion:
    /// `1 / (k p^{k sigma} (k log p)^m)`.
    #[inline]
    pub fn coefficient(&self, log_p: f64, k: u32) -> f64 {
        let kf = k as f64;
        let log_n = kf * log_p;
        (-(self.sigma * log_n)).exp() / (kf * log_n.powi(self.m as i32))
    }

    /// Leading coefficient `p^{-sigma} / (log p)^m`, the scale of the prime's contribution.
    #[inline]
    pub fn leading(&self, log_p: f64) -> f64 {
        (-(self.sigma * log_p)).exp() / log_p.powi(self.m as i32)
    }

    /// True in the regime `1/2 < sigma < 1` where the large-deviation formulas apply.
    pub fn in_critical_strip(&self) -> bool {
        self.sigma > 0.5 && self.sigma < 1.0
    }

    /// True where the density is known to have compact support.
    pub fn has_compact_support(&self) -> bool {
        (self.m == 0 && self.sigma > 1.0) || (self.m >= 1 && self.sigma >= 1.0)
    }
}

/// Which part of the prime sum a computation represents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Truncation {
    /// The full random model (all primes), with analytic tails beyond the
    /// tabulated primes.
    Full,
    /// Only prime powers `p^k <= y`, i.e. the random Dirichlet polynomial.
    Cutoff(f64),
}

impl Truncation {
    pub fn cutoff(&self) -> Option<f64> {
        match *self {
            Truncation::Full => None,
            Truncation::Cutoff(y) => Some(y),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissible_set() {
        assert!(ModelPoint::new(0.75, 0, 0.0).is_ok());
        assert!(ModelPoint::new(0.5, 1, 0.0).is_ok());
        assert!(ModelPoint::new(0.5, 0, 0.0).is_err());
        assert!(ModelPoint::new(0.4, 3, 0.0).is_err());
        assert!(ModelPoint::new(f64::NAN, 1, 0.0).is_err());
    }

    #[test]
    fn coefficient_matches_definition() {
        let mp = ModelPoint::new(0.75, 2, 0.0).unwrap();
        let p: f64 = 3.0;
        let k = 2u32;
        let expected = 1.0 / (2.0 * p.powf(2.0 * 0.75) * (2.0 * p.ln()).powi(2));
        assert!((mp.coefficient(p.ln(), k) - expected).abs() < 1e-15);
        assert!((mp.leading(p.ln()) - mp.coefficient(p.ln(), 1)).abs() < 1e-16);
    }
}
