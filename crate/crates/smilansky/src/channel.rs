//! Per-channel normalized solutions v_n(x, E), their boundary data, and the
//! recursion coefficients h₀, h₁, h₂.
//!
//! Oscillatory channels (2E > (2n+1)ω) carry k_n = √(2E-(2n+1)ω) and
//!     v_n(x) = ρ_n cos(k_n(|x|-π)),   ρ_n = (π + sin(2k_nπ)/(2k_n))^{-1/2}.
//! Evanescent channels replace k_n by χ_n = √((2n+1)ω-2E) and circular by
//! hyperbolic functions. Since ρ_n ~ e^{-χπ} while cosh(χπ) ~ e^{χπ}/2, the
//! hyperbolic pieces are evaluated with e^{χπ} factored out analytically:
//! with t = e^{-2χπ} and D = πt + (1-t²)/(4χ),
//!     v(0) = (1+t)/(2√D),  v'(0+) = -χ(1-t)/(2√D),
//!     v(x) = (e^{-χ|x|} + e^{-χ(2π-|x|)})/(2√D),
//! which stays finite for χ up to ~√(2nω) at n ≈ 10⁵ and beyond. The sign of
//! v'(0+) in the evanescent regime is the analytic continuation in E across
//! the threshold (v'(0+) ∝ 2E-(2n+1)ω near it, continuous through zero).

use crate::error::{Error, Result};
use crate::params::{check_not_exceptional, ModelParams, EXCEPTIONAL_GUARD, THRESHOLD_GUARD};
use crate::scalar::Scalar;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModeKind {
    Oscillatory,
    Evanescent,
}

/// One channel solution v_n(·, E), normalized on the circle.
#[derive(Debug, Clone)]
pub struct ChannelMode {
    pub n: usize,
    pub energy: f64,
    pub kind: ModeKind,
    /// k_n for oscillatory modes, χ_n for evanescent ones.
    pub k_or_chi: f64,
    /// Normalization ρ_n; underflows to 0 for χπ ≳ 745 and is then only
    /// reportable, all evaluation goes through the scaled fields.
    pub rho: f64,
    t: f64,
    sqrt_d: f64,
}

impl ChannelMode {
    /// Build the mode, classifying oscillatory vs evanescent.
    pub fn new(n: usize, energy: f64, p: &ModelParams) -> Result<Self> {
        let disc = 2.0 * energy - (2 * n + 1) as f64 * p.omega;
        if disc.abs() < THRESHOLD_GUARD {
            return Err(Error::ThresholdEnergy { n, energy });
        }
        if disc > 0.0 {
            let k = disc.sqrt();
            let rho = (std::f64::consts::PI + (2.0 * k * std::f64::consts::PI).sin() / (2.0 * k))
                .powf(-0.5);
            Ok(ChannelMode {
                n,
                energy,
                kind: ModeKind::Oscillatory,
                k_or_chi: k,
                rho,
                t: 0.0,
                sqrt_d: 0.0,
            })
        } else {
            let chi = (-disc).sqrt();
            let t = (-2.0 * chi * std::f64::consts::PI).exp();
            let d = std::f64::consts::PI * t + (1.0 - t * t) / (4.0 * chi);
            let sqrt_d = d.sqrt();
            let rho = (-chi * std::f64::consts::PI).exp() / sqrt_d;
            Ok(ChannelMode {
                n,
                energy,
                kind: ModeKind::Evanescent,
                k_or_chi: chi,
                rho,
                t,
                sqrt_d,
            })
        }
    }

    /// Boundary data (v(0), v'(0+)).
    pub fn boundary(&self) -> (f64, f64) {
        match self.kind {
            ModeKind::Oscillatory => {
                let k = self.k_or_chi;
                let kp = k * std::f64::consts::PI;
                (self.rho * kp.cos(), self.rho * k * kp.sin())
            }
            ModeKind::Evanescent => {
                let chi = self.k_or_chi;
                (
                    (1.0 + self.t) / (2.0 * self.sqrt_d),
                    -chi * (1.0 - self.t) / (2.0 * self.sqrt_d),
                )
            }
        }
    }

    /// v(x) for |x| ≤ π; even in x by construction.
    pub fn eval(&self, x: f64) -> f64 {
        let ax = x.abs();
        debug_assert!(ax <= std::f64::consts::PI + 1e-12);
        match self.kind {
            ModeKind::Oscillatory => self.rho * (self.k_or_chi * (ax - std::f64::consts::PI)).cos(),
            ModeKind::Evanescent => {
                let chi = self.k_or_chi;
                ((-chi * ax).exp() + (-chi * (2.0 * std::f64::consts::PI - ax)).exp())
                    / (2.0 * self.sqrt_d)
            }
        }
    }
}

/// L² inner product (v_a, v_b) over the circle, in closed form.
///
/// Only depends on the wavenumbers; serves the delta-kernel partial sums at
/// large n and as the oracle for the quadrature route.
pub fn mode_overlap(a: &ChannelMode, b: &ChannelMode) -> f64 {
    use ModeKind::*;
    let pi = std::f64::consts::PI;
    match (a.kind, b.kind) {
        (Oscillatory, Oscillatory) => {
            let (k1, k2) = (a.k_or_chi, b.k_or_chi);
            let diff = sin_ratio(k1 - k2, pi);
            let sum = sin_ratio(k1 + k2, pi);
            a.rho * b.rho * (diff + sum)
        }
        (Oscillatory, Evanescent) => osc_evan_overlap(a, b),
        (Evanescent, Oscillatory) => osc_evan_overlap(b, a),
        (Evanescent, Evanescent) => {
            let (x1, x2) = (a.k_or_chi, b.k_or_chi);
            let (t1, t2) = (a.t, b.t);
            let sum_term = (1.0 - t1 * t2) / (2.0 * (x1 + x2));
            // (t2 - t1)/(2(χ1-χ2)) without cancellation
            let delta = x1 - x2;
            let diff_term = if delta == 0.0 {
                pi * t1
            } else {
                t2 * (-(-2.0 * pi * delta).exp_m1()) / (2.0 * delta)
            };
            (sum_term + diff_term) / (a.sqrt_d * b.sqrt_d)
        }
    }
}

fn osc_evan_overlap(o: &ChannelMode, e: &ChannelMode) -> f64 {
    let pi = std::f64::consts::PI;
    let k = o.k_or_chi;
    let chi = e.k_or_chi;
    let num = k * (k * pi).sin() * (1.0 + e.t) + chi * (k * pi).cos() * (1.0 - e.t);
    o.rho * num / ((k * k + chi * chi) * e.sqrt_d)
}

/// sin(dπ)/d, stable for small d.
fn sin_ratio(d: f64, pi: f64) -> f64 {
    if d.abs() < 1e-8 {
        let a = d * pi;
        pi * (1.0 - a * a / 6.0)
    } else {
        (d * pi).sin() / d
    }
}

/// Recursion coefficients of the second-order difference equation, n ≥ -1.
///
/// h₂(n) = α√(n+2) v_{n+2}(0), h₁(n) = √(2ω) v'_{n+1}(0+), and for n ≥ 0
/// h₀(n) = α√(n+1) v_n(0). At n = -1 only h₁, h₂ exist and fix C(1)/C(0).
#[derive(Debug, Clone, Copy)]
pub struct CoeffTriple {
    pub n: i64,
    pub h0: Option<f64>,
    pub h1: f64,
    pub h2: f64,
}

/// Coefficients with precondition checks (thresholds, exceptional guard).
pub fn coeff_triple(n: i64, energy: f64, p: &ModelParams) -> Result<CoeffTriple> {
    assert!(n >= -1);
    check_not_exceptional(p.omega, energy, EXCEPTIONAL_GUARD)?;
    let mut ctx = ();
    let (h0, h1, h2) = coeffs_g::<f64>(n, &energy, p.alpha, p.omega, &mut ctx)?;
    Ok(CoeffTriple { n, h0, h1, h2 })
}

/// Generic boundary values (v_n(0), v'_n(0+)) for the scalar backend `T`.
pub(crate) fn boundary_g<T: Scalar>(
    n: usize,
    energy: &T,
    omega: f64,
    ctx: &mut T::Ctx,
) -> Result<(T, T)> {
    let two = T::from_f64(2.0, ctx);
    let level = T::from_f64((2 * n + 1) as f64, ctx).mul(&T::from_f64(omega, ctx), ctx);
    let disc = two.mul(energy, ctx).sub(&level, ctx);
    let disc_f = disc.to_f64();
    if disc_f.abs() < THRESHOLD_GUARD {
        return Err(Error::ThresholdEnergy {
            n,
            energy: energy.to_f64(),
        });
    }
    let pi = T::pi(ctx);
    let half = T::from_f64(0.5, ctx);
    if disc_f > 0.0 {
        let k = disc.sqrt(ctx);
        let kpi = k.mul(&pi, ctx);
        let sin2 = kpi.mul(&two, ctx).sin(ctx);
        let norm2 = pi.add(&sin2.div(&k.mul(&two, ctx), ctx), ctx);
        let rho = T::from_f64(1.0, ctx).div(&norm2.sqrt(ctx), ctx);
        let v0 = rho.mul(&kpi.cos(ctx), ctx);
        let dv0 = rho.mul(&k, ctx).mul(&kpi.sin(ctx), ctx);
        Ok((v0, dv0))
    } else {
        let chi = disc.neg().sqrt(ctx);
        let chipi = chi.mul(&pi, ctx);
        let t = chipi.mul(&two, ctx).neg().exp(ctx);
        let one = T::from_f64(1.0, ctx);
        let d = pi.mul(&t, ctx).add(
            &one.sub(&t.mul(&t, ctx), ctx)
                .div(&chi.mul(&T::from_f64(4.0, ctx), ctx), ctx),
            ctx,
        );
        let inv2sd = half.div(&d.sqrt(ctx), ctx);
        let v0 = one.add(&t, ctx).mul(&inv2sd, ctx);
        let dv0 = chi.neg().mul(&one.sub(&t, ctx), ctx).mul(&inv2sd, ctx);
        Ok((v0, dv0))
    }
}

/// Generic (h₀, h₁, h₂) at index n ≥ -1; h₀ absent at n = -1.
pub(crate) fn coeffs_g<T: Scalar>(
    n: i64,
    energy: &T,
    alpha: f64,
    omega: f64,
    ctx: &mut T::Ctx,
) -> Result<(Option<T>, T, T)> {
    let (v2, _) = boundary_g::<T>((n + 2) as usize, energy, omega, ctx)?;
    let (_, dv1) = boundary_g::<T>((n + 1) as usize, energy, omega, ctx)?;
    let h2 = T::from_f64(alpha * ((n + 2) as f64).sqrt(), ctx).mul(&v2, ctx);
    let h1 = T::from_f64((2.0 * omega).sqrt(), ctx).mul(&dv1, ctx);
    let h0 = if n >= 0 {
        let (v0, _) = boundary_g::<T>(n as usize, energy, omega, ctx)?;
        Some(T::from_f64(alpha * ((n + 1) as f64).sqrt(), ctx).mul(&v0, ctx))
    } else {
        None
    };
    Ok((h0, h1, h2))
}
