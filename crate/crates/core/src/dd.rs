//! Double-double arithmetic, used to reduce the phases `t log n` modulo
//! `2 pi` without losing the low-order digits for large `t`.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

pub const TWO_PI: Dd = Dd { hi: 6.283_185_307_179_586, lo: 2.449_293_598_294_706_4e-16 };
pub const LN_2: Dd = Dd { hi: 0.693_147_180_559_945_3, lo: 2.319_046_813_846_299_6e-17 };

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Exact product of two doubles.
    #[inline]
    pub fn prod(a: f64, b: f64) -> Self {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }

    pub fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }

    fn ldexp(self, k: i32) -> Dd {
        let s = 2f64.powi(k);
        Dd { hi: self.hi * s, lo: self.lo * s }
    }

    pub fn exp(self) -> Dd {
        if self.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::default();
        }
        let k = (self.hi / LN_2.hi).round();
        let r = self - LN_2.mul_f64(k);
        // exp(r) = (exp(r / 32))^32
        let r = r.ldexp(-5);
        let mut term = Dd::from_f64(1.0);
        let mut sum = Dd::from_f64(1.0);
        for n in 1..=30 {
            term = (term * r).div(Dd::from_f64(n as f64));
            sum = sum + term;
            if term.hi.abs() < 1e-34 {
                break;
            }
        }
        for _ in 0..5 {
            sum = sum * sum;
        }
        sum.ldexp(k as i32)
    }

    /// Natural logarithm by one Newton step on top of the `f64` value.
    pub fn ln(self) -> Dd {
        assert!(self.hi > 0.0, "ln of non-positive double-double");
        let y = Dd::from_f64(self.hi.ln());
        y + self * (-y).exp() - Dd::from_f64(1.0)
    }

    /// `log n` for a positive integer, correct to about 32 digits.
    pub fn ln_u64(n: u64) -> Dd {
        let hi = n as f64;
        let lo = (n - hi as u64) as f64;
        Dd { hi, lo }.ln()
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

/// `x mod 2 pi`, returned in `[-pi, pi)`.
pub fn reduce_two_pi(x: Dd) -> f64 {
    let k = (x.hi / TWO_PI.hi).round();
    let r = x - TWO_PI.mul_f64(k);
    let r = r.to_f64();
    // the rounding of k can leave r just outside the half-open interval
    if r >= std::f64::consts::PI {
        r - TWO_PI.hi
    } else if r < -std::f64::consts::PI {
        r + TWO_PI.hi
    } else {
        r
    }
}

/// Phase `t * log_n mod 2 pi` with `log_n` given in double-double.
#[inline]
pub fn phase(t: f64, log_n: Dd) -> f64 {
    let (p, e) = two_prod(t, log_n.hi);
    let x = Dd { hi: p, lo: 0.0 } + Dd { hi: e + t * log_n.lo, lo: 0.0 };
    reduce_two_pi(x)
}
