//! Polylogarithms `Li_s(z)` of integer order on the closed unit disk.

use num_complex::Complex64 as C64;

use crate::error::{ensure, Result};

const SERIES_RADIUS: f64 = 0.75;
const EPS: f64 = 1e-17;

/// Riemann zeta at an integer `n >= 2`, by Euler-Maclaurin from `N = 10`.
pub fn zeta_int(n: i32) -> f64 {
    assert!(n >= 2);
    if n > 60 {
        return 1.0 + 2f64.powi(-n) + 3f64.powi(-n);
    }
    const B: [f64; 7] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0];
    let s = n as f64;
    let big_n = 10.0f64;
    let mut sum: f64 = (1..10).map(|k| (k as f64).powi(-n)).sum();
    sum += big_n.powf(1.0 - s) / (s - 1.0) + 0.5 * big_n.powf(-s);
    // B_{2j}/(2j)! * s(s+1)...(s+2j-2) * N^{-s-2j+1}
    let mut rising = s;
    let mut fact = 2.0;
    for (j, b) in B.iter().enumerate() {
        let jj = j as f64 + 1.0;
        sum += b / fact * rising * big_n.powf(-s - 2.0 * jj + 1.0);
        rising *= (s + 2.0 * jj - 1.0) * (s + 2.0 * jj);
        fact *= (2.0 * jj + 1.0) * (2.0 * jj + 2.0);
    }
    sum
}

fn direct_series(s: i32, z: C64) -> C64 {
    let r = z.norm();
    // for negative orders k^{-s} grows, so run past the peak of |z|^k k^{-s}
    let k_min = if s < 0 { ((-s) as f64 / -r.ln()).ceil() as usize + 1 } else { 1 };
    let mut sum = C64::new(0.0, 0.0);
    let mut zk = C64::new(1.0, 0.0);
    for k in 1..100_000usize {
        zk *= z;
        let term = zk * (k as f64).powi(-s);
        sum += term;
        if k >= k_min && term.norm() <= EPS * sum.norm().max(1e-300) {
            break;
        }
    }
    sum
}

/// `Li_s(z)` for `s >= 2` near the unit circle, through the expansion in
/// `mu = log z`:
/// `sum_{k != s-1} zeta(s-k) mu^k / k! + mu^{s-1}/(s-1)! (H_{s-1} - log(-mu))`.
fn log_expansion(s: i32, z: C64) -> C64 {
    let mu = z.ln();
    let two_pi = std::f64::consts::TAU;
    let mut sum = C64::new(0.0, 0.0);
    let mut mu_k = C64::new(1.0, 0.0);
    let mut fact = 1.0f64;
    for k in 0..400i32 {
        if k > 0 {
            mu_k *= mu;
            fact *= k as f64;
        }
        let n = s - k;
        let term = if n == 1 {
            let h: f64 = (1..s).map(|i| 1.0 / i as f64).sum();
            mu_k / fact * (C64::new(h, 0.0) - (-mu).ln())
        } else if n >= 2 {
            mu_k * (zeta_int(n) / fact)
        } else if n == 0 {
            mu_k * (-0.5 / fact)
        } else if (-n) % 2 == 0 {
            C64::new(0.0, 0.0)
        } else {
            // zeta(1 - 2j)/k! = (-1)^j 2 zeta(2j) (2j)! / ((2 pi)^{2j} 2j k!)
            let j = (1 - n) / 2;
            let jj = 2 * j;
            let mut ratio = 1.0f64;
            for i in (jj + 1)..=k {
                ratio /= i as f64;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let zeta_2j = if jj > 60 { 1.0 } else { zeta_int(jj) };
            let c = sign * 2.0 * zeta_2j * two_pi.powi(-jj) / jj as f64 * ratio;
            mu_k * c
        };
        sum += term;
        if k > s + 2 && term.norm() != 0.0 && term.norm() <= EPS * sum.norm() {
            break;
        }
    }
    sum
}

/// `Li_s(z) = sum_{k>=1} z^k / k^s` for integer `s >= -2`.
///
/// Accepts `|z| <= 1 - 1e-9` for every order, and the whole closed disk
/// for `s >= 2`.
pub fn polylog(order: i32, z: C64) -> Result<C64> {
    ensure!(order >= -2, Parameter, "polylog order {order} below -2");
    ensure!(z.re.is_finite() && z.im.is_finite(), Domain, "polylog argument must be finite");
    let r = z.norm();
    if order >= 2 {
        ensure!(r <= 1.0 + 1e-15, Domain, "|z| = {r} outside the unit disk for Li_{order}");
    } else {
        ensure!(r <= 1.0 - 1e-9, Domain, "|z| = {r} too close to 1 for Li_{order}");
    }
    if r == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    if r <= SERIES_RADIUS {
        return Ok(direct_series(order, z));
    }
    let one = C64::new(1.0, 0.0);
    Ok(match order {
        1 => -(one - z).ln(),
        0 => z / (one - z),
        -1 => z / ((one - z) * (one - z)),
        -2 => z * (one + z) / ((one - z) * (one - z) * (one - z)),
        s => {
            if (z - one).norm() == 0.0 {
                C64::new(zeta_int(s), 0.0)
            } else {
                log_expansion(s, z)
            }
        }
    })
}

/// The local factor `Li_{m+1}(p^{-sigma} w) / (log p)^m` of the random model.
pub fn eta_local(sigma: f64, m: u32, p: u64, w: C64) -> Result<C64> {
    ensure!(p >= 2, Parameter, "prime must be >= 2, got {p}");
    ensure!(sigma > 0.0, Parameter, "sigma must be positive, got {sigma}");
    let log_p = (p as f64).ln();
    let li = polylog(m as i32 + 1, w * (-sigma * log_p).exp())?;
    Ok(li / log_p.powi(m as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn closed_forms() {
        assert!((polylog(1, c(0.5, 0.0)).unwrap() - c(2f64.ln(), 0.0)).norm() < 1e-15);
        assert_eq!(polylog(3, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        let v = polylog(-1, c(0.3, 0.0)).unwrap();
        assert!((v.re - 0.3 / 0.49).abs() < 1e-15);
        for z in [c(0.9, 0.1), c(-0.2, 0.95), c(0.5, -0.6)] {
            let one = c(1.0, 0.0);
            assert!((polylog(0, z).unwrap() - z / (one - z)).norm() < 1e-13);
            assert!((polylog(-2, z).unwrap() - z * (one + z) / (one - z).powi(3)).norm() < 1e-11 * (one - z).norm().powi(-3));
        }
    }

    #[test]
    fn zeta_values() {
        assert!((zeta_int(2) - PI * PI / 6.0).abs() < 1e-15);
        assert!((zeta_int(4) - PI.powi(4) / 90.0).abs() < 1e-15);
        assert!((zeta_int(3) - 1.202_056_903_159_594_2).abs() < 1e-15);
    }

    #[test]
    fn unit_circle_values() {
        // Li_2(1) = pi^2/6, Li_2(-1) = -pi^2/12, Re Li_2(e^{i t}) = pi^2/6 - t(2 pi - t)/4
        assert!((polylog(2, c(1.0, 0.0)).unwrap().re - PI * PI / 6.0).abs() < 1e-14);
        assert!((polylog(2, c(-1.0, 0.0)).unwrap().re + PI * PI / 12.0).abs() < 1e-14);
        for t in [0.3f64, 1.0, 2.5, 4.0] {
            let v = polylog(2, C64::from_polar(1.0, t)).unwrap();
            let expected = PI * PI / 6.0 - t * (2.0 * PI - t) / 4.0;
            assert!((v.re - expected).abs() < 1e-13, "t = {t}");
        }
        // Re Li_3(e^{it}) has a polynomial Clausen form as well
        let t = 1.3f64;
        let v = polylog(3, C64::from_polar(1.0, t)).unwrap();
        // Im Li_3(e^{i t}) = (pi^2 t)/6 - pi t^2/4 + t^3/12
        let im = PI * PI * t / 6.0 - PI * t * t / 4.0 + t.powi(3) / 12.0;
        assert!((v.im - im).abs() < 1e-13);
    }

    #[test]
    fn expansion_agrees_with_series_in_overlap() {
        for s in [2, 3, 5, 8] {
            for z in [c(0.8, 0.1), c(-0.5, 0.65), c(0.2, -0.8)] {
                let a = log_expansion(s, z);
                let b = direct_series(s, z);
                assert!((a - b).norm() < 1e-13 * b.norm(), "s = {s}, z = {z}");
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(polylog(1, c(1.0, 0.0)).is_err());
        assert!(polylog(2, c(1.1, 0.0)).is_err());
        assert!(polylog(-3, c(0.1, 0.0)).is_err());
    }

    #[test]
    fn eta_local_examples() {
        let v = eta_local(1.0, 0, 2, c(1.0, 0.0)).unwrap();
        assert!((v.re - 2f64.ln()).abs() < 1e-15);
        // direct 200-term series oracle
        let (sigma, p) = (0.75f64, 3f64);
        let w = c(0.0, 1.0);
        let mut oracle = c(0.0, 0.0);
        for k in 1..=200 {
            let kf = k as f64;
            oracle += w.powi(k) / (kf * p.powf(kf * sigma) * (kf * p.ln()));
        }
        let v = eta_local(sigma, 1, 3, w).unwrap();
        assert!((v - oracle).norm() < 1e-14);
        // leading-term limit for a large prime
        let p = 1_000_003u64;
        let lp = (p as f64).ln();
        let v = eta_local(1.0, 2, p, w).unwrap();
        let lead = w * (1.0 / (p as f64 * lp * lp));
        assert!((v - lead).norm() < (p as f64).powi(-2));
    }
}
