//! Normalized harmonic-oscillator eigenfunctions h_n(q).
//!
//! Generated by the standard three-term recurrence, which is forward-stable
//! for these L²-normalized functions. For n ≥ 1 they obey the classical
//! uniform bound sup|h_n| ≤ 0.816 ω^{1/4}, used downstream as a sanity check.

use crate::error::{Error, Result};

/// Uniform bound constant for n ≥ 1 at ω = 1.
pub const HERMITE_SUP_BOUND: f64 = 0.816;

/// Evaluate h_0..h_{n_max} at a single point q (frequency ω).
pub fn hermite_values(n_max: usize, omega: f64, q: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n_max + 1);
    let h0 = (omega / std::f64::consts::PI).powf(0.25) * (-0.5 * omega * q * q).exp();
    out.push(h0);
    if n_max == 0 {
        return Ok(out);
    }
    let mut prev = 0.0;
    let mut cur = h0;
    for m in 0..n_max {
        let mf = m as f64;
        let next = ((2.0 * omega / (mf + 1.0)).sqrt() * q) * cur - (mf / (mf + 1.0)).sqrt() * prev;
        if !next.is_finite() {
            return Err(Error::RecurrenceOverflow { order: m + 1 });
        }
        prev = cur;
        cur = next;
        out.push(cur);
    }
    Ok(out)
}

/// Streaming evaluator over n at fixed q; avoids storing a full table.
pub struct HermiteStream {
    omega: f64,
    q: f64,
    m: usize,
    prev: f64,
    cur: f64,
}

impl HermiteStream {
    pub fn new(omega: f64, q: f64) -> Self {
        let h0 = (omega / std::f64::consts::PI).powf(0.25) * (-0.5 * omega * q * q).exp();
        HermiteStream {
            omega,
            q,
            m: 0,
            prev: 0.0,
            cur: h0,
        }
    }
}

impl Iterator for HermiteStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let value = self.cur;
        let mf = self.m as f64;
        let next = ((2.0 * self.omega / (mf + 1.0)).sqrt() * self.q) * self.cur
            - (mf / (mf + 1.0)).sqrt() * self.prev;
        self.prev = self.cur;
        self.cur = next;
        self.m += 1;
        Some(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ground_state_value() {
        let h = hermite_values(0, 1.0, 0.0).unwrap();
        assert_relative_eq!(h[0], std::f64::consts::PI.powf(-0.25), max_relative = 1e-15);
    }

    #[test]
    fn first_excited_matches_closed_form() {
        // h_1(q) = (1/π)^{1/4} √2 q e^{-q²/2} for ω = 1
        for q in [-1.3, 0.2, 2.5] {
            let h = hermite_values(1, 1.0, q).unwrap();
            let expect =
                std::f64::consts::PI.powf(-0.25) * 2.0f64.sqrt() * q * (-0.5 * q * q).exp();
            assert_relative_eq!(h[1], expect, max_relative = 1e-14);
        }
    }

    #[test]
    fn orthonormal_by_quadrature() {
        // trapezoid over a wide window, fine grid
        let n = 6;
        let m = 4001;
        let (a, b) = (-10.0, 10.0);
        let dq = (b - a) / (m - 1) as f64;
        let mut gram = vec![vec![0.0; n + 1]; n + 1];
        for j in 0..m {
            let q = a + j as f64 * dq;
            let h = hermite_values(n, 1.0, q).unwrap();
            let w = if j == 0 || j == m - 1 { 0.5 } else { 1.0 } * dq;
            for r in 0..=n {
                for c in 0..=n {
                    gram[r][c] += w * h[r] * h[c];
                }
            }
        }
        for r in 0..=n {
            for c in 0..=n {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert_relative_eq!(gram[r][c], expect, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn uniform_bound_holds() {
        for omega in [0.5f64, 1.0, 2.0] {
            let scale = omega.powf(0.25);
            for qi in 0..200 {
                let q = -8.0 + qi as f64 * 0.08;
                let h = hermite_values(40, omega, q).unwrap();
                for hm in h.iter().skip(1) {
                    assert!(hm.abs() <= HERMITE_SUP_BOUND * scale + 1e-12);
                }
            }
        }
    }

    #[test]
    fn stream_matches_batch() {
        let vals = hermite_values(25, 1.0, 0.7).unwrap();
        let stream: Vec<f64> = HermiteStream::new(1.0, 0.7).take(26).collect();
        for (a, b) in vals.iter().zip(stream.iter()) {
            assert_relative_eq!(a, b, max_relative = 1e-15);
        }
    }
}
