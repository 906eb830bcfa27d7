//! Bracketed scalar root finding.
//!
//! Everything downstream needs guaranteed convergence inside a known bracket,
//! so the workhorse is bisection driven to floating-point exhaustion, with an
//! optional Newton polish on top.

use crate::error::{Error, Result};

/// Bisection on a sign-changing bracket, run until the interval collapses to
/// machine spacing or `max_iter` is hit. Returns the midpoint of the final
/// bracket.
pub fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, max_iter: usize) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NotBracketed { lo: a, hi: b });
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break; // interval at machine resolution
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// A few Newton steps, kept inside [lo, hi]; returns the best iterate.
pub fn newton_polish<F, G>(f: &F, df: &G, mut x: f64, lo: f64, hi: f64, iters: usize) -> f64
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    for _ in 0..iters {
        let fx = f(x);
        let dfx = df(x);
        if dfx == 0.0 || !dfx.is_finite() {
            break;
        }
        let xn = x - fx / dfx;
        if !(lo..=hi).contains(&xn) || !xn.is_finite() {
            break;
        }
        x = xn;
    }
    x
}

/// Scan [a, b] on `n` uniform cells and bisect every sign change.
/// Endpoints that are exact zeros are kept once.
pub fn scan_roots<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    let h = (b - a) / n as f64;
    let mut x0 = a;
    let mut f0 = f(x0);
    for i in 1..=n {
        let x1 = a + i as f64 * h;
        let f1 = f(x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0.signum() != f1.signum() && f1 != 0.0 {
            if let Ok(r) = bisect(f, x0, x1, 200) {
                roots.push(r);
            }
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == 0.0 {
        roots.push(x0);
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(&|x| x * x - 2.0, 0.0, 2.0, 200).unwrap();
        assert_relative_eq!(r, 2.0f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn bisect_requires_bracket() {
        assert!(bisect(&|x| x * x + 1.0, -1.0, 1.0, 100).is_err());
    }

    #[test]
    fn scan_finds_all_cos_roots() {
        let roots = scan_roots(&|x: f64| x.cos(), 0.0, 10.0, 400);
        assert_eq!(roots.len(), 3);
        for (i, r) in roots.iter().enumerate() {
            assert_relative_eq!(
                *r,
                (2 * i + 1) as f64 * std::f64::consts::FRAC_PI_2,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn newton_tightens() {
        let f = |x: f64| x * x - 2.0;
        let df = |x: f64| 2.0 * x;
        let x = newton_polish(&f, &df, 1.4, 1.0, 2.0, 4);
        assert_relative_eq!(x, 2.0f64.sqrt(), max_relative = 1e-15);
    }
}
