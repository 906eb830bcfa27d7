//! Physical parameters, regime classification, scaling, and exceptional energies.
//!
//! The model lives on the circle of circumference 2π (box half-width fixed to π)
//! in the reflection-even sector; the odd sector does not interact and is
//! excluded throughout. All other modules take their constants from
//! [`ModelParams`].

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Half-width of the box; the particle lives on [-π, π] with periodic ends.
pub const BOX_HALF_WIDTH: f64 = std::f64::consts::PI;

/// Default guard distance below which an energy counts as exceptional.
pub const EXCEPTIONAL_GUARD: f64 = 1e-6;

/// Guard for channel thresholds 2E = (2n+1)ω, which are branch points of k_n.
pub const THRESHOLD_GUARD: f64 = 1e-12;

/// Coupling α and oscillator frequency ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub omega: f64,
}

/// Position of α relative to the transition at α = ω.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Subcritical,
    Critical,
    Overcritical,
}

impl ModelParams {
    pub fn new(alpha: f64, omega: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::ConfigInvalid(format!("alpha must be > 0, got {alpha}")));
        }
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::ConfigInvalid(format!("omega must be > 0, got {omega}")));
        }
        Ok(ModelParams { alpha, omega })
    }

    /// Exact comparison, no tolerance: the transition is a sharp threshold.
    pub fn regime(&self) -> Regime {
        if self.alpha < self.omega {
            Regime::Subcritical
        } else if self.alpha == self.omega {
            Regime::Critical
        } else {
            Regime::Overcritical
        }
    }
}

/// Unitary coordinate scaling x → λx, q → λq.
///
/// Maps (α, ω) → (α/λ², ω/λ²) with all energies multiplied by λ²; the ratio
/// α/ω and hence the regime are invariant.
#[derive(Debug, Clone, Copy)]
pub struct ScalingTransform {
    pub lambda: f64,
}

impl ScalingTransform {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::ConfigInvalid(format!("lambda must be > 0, got {lambda}")));
        }
        Ok(ScalingTransform { lambda })
    }

    /// Rescaled parameters and the factor multiplying every energy.
    pub fn apply(&self, p: &ModelParams) -> (ModelParams, f64) {
        let l2 = self.lambda * self.lambda;
        (
            ModelParams {
                alpha: p.alpha / l2,
                omega: p.omega / l2,
            },
            l2,
        )
    }
}

/// Members of the exceptional set 𝓔*_ω inside a closed interval.
///
/// An energy is exceptional when a recursion coefficient h₀ or h₂ vanishes,
/// 2E = (2n+1)ω + (r+1/2)², or when it sits on a channel threshold
/// E = (n+1/2)ω. Both families have finitely many members in any bounded
/// interval.
#[derive(Debug, Clone)]
pub struct ExceptionalSet {
    pub omega: f64,
    pub interval: (f64, f64),
    pub points: Vec<f64>,
}

impl ExceptionalSet {
    /// Nearest member to `energy`, if the set is nonempty.
    pub fn nearest(&self, energy: f64) -> Option<f64> {
        self.points
            .iter()
            .copied()
            .min_by(|a, b| (a - energy).abs().total_cmp(&(b - energy).abs()))
    }

    /// Distance from `energy` to the set (∞ when empty).
    pub fn distance(&self, energy: f64) -> f64 {
        self.nearest(energy)
            .map(|p| (p - energy).abs())
            .unwrap_or(f64::INFINITY)
    }
}

/// All exceptional energies of 𝓔*_ω in `[lo, hi]`, sorted and deduplicated.
pub fn exceptional_energies(omega: f64, lo: f64, hi: f64) -> ExceptionalSet {
    assert!(omega > 0.0 && lo.is_finite() && hi.is_finite() && lo <= hi);
    let mut pts = Vec::new();

    // thresholds E = (n + 1/2)ω
    let mut n = 0usize;
    loop {
        let e = (n as f64 + 0.5) * omega;
        if e > hi {
            break;
        }
        if e >= lo {
            pts.push(e);
        }
        n += 1;
    }

    // 2E = (2n+1)ω + (r+1/2)², r ∈ ℤ; (r+1/2)² covers each value twice over ℤ,
    // so r ≥ 0 suffices.
    let mut n = 0usize;
    loop {
        let base = (2 * n + 1) as f64 * omega;
        if base > 2.0 * hi {
            break;
        }
        let mut r = 0usize;
        loop {
            let half = r as f64 + 0.5;
            let e = 0.5 * (base + half * half);
            if e > hi {
                break;
            }
            if e >= lo {
                pts.push(e);
            }
            r += 1;
        }
        n += 1;
    }

    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * (1.0 + a.abs()));
    ExceptionalSet {
        omega,
        interval: (lo, hi),
        points: pts,
    }
}

/// Convenience guard check against 𝓔*_ω.
///
/// Returns an [`Error::ExceptionalEnergy`] when `energy` is within `guard` of
/// the set; scans a window of ±(guard + 1) around `energy`.
pub fn check_not_exceptional(omega: f64, energy: f64, guard: f64) -> Result<()> {
    let set = exceptional_energies(omega, energy - guard - 1.0, energy + guard + 1.0);
    if let Some(p) = set.nearest(energy) {
        if (p - energy).abs() < guard {
            return Err(Error::ExceptionalEnergy {
                energy,
                nearest: p,
                guard,
            });
        }
    }
    Ok(())
}

/// Tridiagonal table of oscillator position matrix elements ⟨n|q|n'⟩.
///
/// Only the superdiagonal is nonzero: ⟨n|q|n+1⟩ = √((n+1)/(2ω)). Entry `i`
/// of the returned vector is ⟨i|q|i+1⟩, for i = 0..n_max-1.
pub fn oscillator_matrix_elements(n_max: usize, omega: f64) -> Vec<f64> {
    assert!(n_max >= 1 && omega > 0.0);
    (0..n_max)
        .map(|n| ((n + 1) as f64 / (2.0 * omega)).sqrt())
        .collect()
}
