//! Unitary time evolution in the truncated channel representation.
//!
//! States live on the reflection-even sector, represented on the half grid
//! x_j = -π + jΔx, j = 0..m/2 (from x = -π to the interaction point x = 0),
//! which enforces evenness exactly. The Hamiltonian action is the channel
//! Laplacian with level offsets (n+1/2)ω plus the point coupling
//!     α(2ω)^{-1/2} (√(n+1) ψ_{n+1}(0) + √n ψ_{n-1}(0)) · δ-column,
//! discretized as a single-node weight 1/Δx at x = 0. Time stepping is the
//! Cayley (Crank-Nicolson) form, unconditionally norm-conserving; each step
//! solves one tridiagonal system per channel plus one tridiagonal system
//! across channels for the coupling column.

use crate::error::{Error, Result};
use crate::params::ModelParams;
use num_complex::Complex64;
use serde::Serialize;

pub type C64 = Complex64;

/// Uniform circle grid with m points on [-π, π) and a node at x = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    /// Number of points on the full circle (even, so x = 0 is a node).
    pub m: usize,
    pub dx: f64,
}

impl UniformGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m < 8 || m % 2 != 0 {
            return Err(Error::GridMisaligned);
        }
        Ok(UniformGrid {
            m,
            dx: 2.0 * std::f64::consts::PI / m as f64,
        })
    }

    /// Number of half-grid nodes (x = -π .. 0 inclusive).
    pub fn half_len(&self) -> usize {
        self.m / 2 + 1
    }

    /// Half-grid coordinates.
    pub fn half_xs(&self) -> Vec<f64> {
        (0..self.half_len())
            .map(|j| -std::f64::consts::PI + j as f64 * self.dx)
            .collect()
    }

    /// Circle quadrature weight of half-grid node j (ends once, interior twice).
    pub fn weight(&self, j: usize) -> f64 {
        if j == 0 || j == self.m / 2 {
            self.dx
        } else {
            2.0 * self.dx
        }
    }
}

/// Truncated channel state ψ_n(x_j) on the half grid.
#[derive(Debug, Clone)]
pub struct ChannelState {
    pub grid: UniformGrid,
    pub n_channels: usize,
    /// Row-major [n][j], j over the half grid.
    pub psi: Vec<C64>,
    pub time: f64,
}

impl ChannelState {
    pub fn zero(grid: UniformGrid, n_channels: usize) -> Self {
        ChannelState {
            grid,
            n_channels,
            psi: vec![C64::new(0.0, 0.0); n_channels * grid.half_len()],
            time: 0.0,
        }
    }

    #[inline]
    pub fn at(&self, n: usize, j: usize) -> C64 {
        self.psi[n * self.grid.half_len() + j]
    }

    #[inline]
    pub fn at_mut(&mut self, n: usize, j: usize) -> &mut C64 {
        let h = self.grid.half_len();
        &mut self.psi[n * h + j]
    }

    pub fn channel(&self, n: usize) -> &[C64] {
        let h = self.grid.half_len();
        &self.psi[n * h..(n + 1) * h]
    }

    pub fn norm2(&self) -> f64 {
        let h = self.grid.half_len();
        let mut s = 0.0;
        for n in 0..self.n_channels {
            for j in 0..h {
                s += self.grid.weight(j) * self.psi[n * h + j].norm_sqr();
            }
        }
        s
    }

    pub fn channel_norm2(&self, n: usize) -> f64 {
        (0..self.grid.half_len())
            .map(|j| self.grid.weight(j) * self.at(n, j).norm_sqr())
            .sum()
    }

    /// ⟨self, other⟩ with the circle weights.
    pub fn inner(&self, other: &ChannelState) -> C64 {
        assert_eq!(self.grid, other.grid);
        let h = self.grid.half_len();
        let nc = self.n_channels.min(other.n_channels);
        let mut s = C64::new(0.0, 0.0);
        for n in 0..nc {
            for j in 0..h {
                s += self.grid.weight(j) * self.psi[n * h + j].conj() * other.psi[n * h + j];
            }
        }
        s
    }

    /// L² distance, counting channels present in only one of the states.
    pub fn l2_distance(&self, other: &ChannelState) -> f64 {
        assert_eq!(self.grid, other.grid);
        let h = self.grid.half_len();
        let nc = self.n_channels.max(other.n_channels);
        let zero = C64::new(0.0, 0.0);
        let mut s = 0.0;
        for n in 0..nc {
            for j in 0..h {
                let a = if n < self.n_channels {
                    self.psi[n * h + j]
                } else {
                    zero
                };
                let b = if n < other.n_channels {
                    other.psi[n * h + j]
                } else {
                    zero
                };
                s += self.grid.weight(j) * (a - b).norm_sqr();
            }
        }
        s.sqrt()
    }

    /// Mirror onto the full circle grid (for dumps), j = 0..m-1, x_j = -π + jΔx.
    pub fn full_channel(&self, n: usize) -> Vec<C64> {
        let m = self.grid.m;
        let h = self.grid.half_len();
        let mut out = vec![C64::new(0.0, 0.0); m];
        out[..h].copy_from_slice(self.channel(n));
        for j in h..m {
            out[j] = self.at(n, m - j);
        }
        out
    }

    pub fn rescale(&mut self, f: f64) {
        for v in &mut self.psi {
            *v *= f;
        }
    }
}

/// Hamiltonian action descriptor on the half grid.
#[derive(Debug, Clone)]
pub struct HamiltonianAction {
    pub params: ModelParams,
    pub grid: UniformGrid,
    pub n_channels: usize,
    /// α(2ω)^{-1/2}
    coupling: f64,
}

impl HamiltonianAction {
    pub fn new(p: &ModelParams, grid: UniformGrid, n_channels: usize) -> Result<Self> {
        if n_channels < 2 {
            return Err(Error::ConfigInvalid("need at least 2 channels".into()));
        }
        Ok(HamiltonianAction {
            params: *p,
            grid,
            n_channels,
            coupling: p.alpha / (2.0 * p.omega).sqrt(),
        })
    }

    /// Hψ, allocating the output.
    pub fn apply(&self, state: &ChannelState) -> Vec<C64> {
        let h = self.grid.half_len();
        let j0 = h - 1; // x = 0
        let dx2 = self.grid.dx * self.grid.dx;
        let nc = self.n_channels;
        let mut out = vec![C64::new(0.0, 0.0); nc * h];
        for n in 0..nc {
            let level = (n as f64 + 0.5) * self.params.omega;
            let row = &state.psi[n * h..(n + 1) * h];
            let o = &mut out[n * h..(n + 1) * h];
            for (j, oj) in o.iter_mut().enumerate() {
                // folded neighbors at the reflection ends
                let left = if j == 0 { row[1] } else { row[j - 1] };
                let right = if j == h - 1 { row[h - 2] } else { row[j + 1] };
                *oj = -(left - 2.0 * row[j] + right) / (2.0 * dx2) + level * row[j];
            }
            // point coupling at x = 0
            let mut c = C64::new(0.0, 0.0);
            if n > 0 {
                c += (n as f64).sqrt() * state.at(n - 1, j0);
            }
            if n + 1 < nc {
                c += ((n + 1) as f64).sqrt() * state.at(n + 1, j0);
            }
            o[j0] += self.coupling * c / self.grid.dx;
        }
        out
    }

    /// ⟨state, H state⟩ (real up to roundoff).
    pub fn expectation(&self, state: &ChannelState) -> f64 {
        let h = self.grid.half_len();
        let hpsi = self.apply(state);
        let mut s = C64::new(0.0, 0.0);
        for n in 0..self.n_channels {
            for j in 0..h {
                s += self.grid.weight(j) * state.psi[n * h + j].conj() * hpsi[n * h + j];
            }
        }
        s.re
    }

    /// ⟨φ, H ψ⟩ for the symmetry test.
    pub fn matrix_element(&self, phi: &ChannelState, psi: &ChannelState) -> C64 {
        let h = self.grid.half_len();
        let hpsi = self.apply(psi);
        let mut s = C64::new(0.0, 0.0);
        for n in 0..self.n_channels {
            for j in 0..h {
                s += self.grid.weight(j) * phi.psi[n * h + j].conj() * hpsi[n * h + j];
            }
        }
        s
    }
}

/// Time-stepping scheme; only the unitary Cayley form is provided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scheme {
    CrankNicolson,
}

#[derive(Debug, Clone, Copy)]
pub struct PropagatorConfig {
    pub dt: f64,
    pub scheme: Scheme,
    /// Hard-stop threshold on the top-channel mass.
    pub truncation_monitor_threshold: f64,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        PropagatorConfig {
            dt: 5e-3,
            scheme: Scheme::CrankNicolson,
            truncation_monitor_threshold: 1e-6,
        }
    }
}

/// Crank-Nicolson propagator: (1 + i dt/2 H) ψ⁺ = (1 - i dt/2 H) ψ⁻.
///
/// The coupling column is handled by a bordered-system update: per-channel
/// Thomas solves for the decoupled matrices, then one tridiagonal solve
/// across channels for the x = 0 samples.
pub struct CrankNicolson {
    pub h: HamiltonianAction,
    pub cfg: PropagatorConfig,
    mu: f64,
    off: C64,
}

impl CrankNicolson {
    pub fn new(h: HamiltonianAction, cfg: PropagatorConfig) -> Self {
        let mu = 0.5 * cfg.dt;
        let off = C64::new(0.0, -mu / (2.0 * h.grid.dx * h.grid.dx));
        CrankNicolson { h, cfg, mu, off }
    }

    fn diag(&self, n: usize) -> C64 {
        let dx2 = self.h.grid.dx * self.h.grid.dx;
        let level = (n as f64 + 0.5) * self.h.params.omega;
        C64::new(1.0, self.mu * (1.0 / dx2 + level))
    }

    /// Thomas solve of A_n y = rhs (per-channel CN matrix, no coupling).
    /// The folded ends double the off-diagonal in the first and last rows;
    /// the matrix is strictly diagonally dominant.
    fn channel_solve(&self, n: usize, rhs: &[C64], y: &mut [C64], c_prime: &mut [C64]) {
        let h = rhs.len();
        let d = self.diag(n);
        let mut denom = d;
        c_prime[0] = 2.0 * self.off / denom;
        y[0] = rhs[0] / denom;
        for j in 1..h {
            let upper = if j == h - 1 {
                C64::new(0.0, 0.0)
            } else {
                self.off
            };
            let lower = if j == h - 1 { 2.0 * self.off } else { self.off };
            denom = d - lower * c_prime[j - 1];
            c_prime[j] = upper / denom;
            y[j] = (rhs[j] - lower * y[j - 1]) / denom;
        }
        for j in (0..h - 1).rev() {
            let cp = c_prime[j];
            y[j] = y[j] - cp * y[j + 1];
        }
    }

    /// One CN step; linear in the state, norm-conserving.
    pub fn step(&self, state: &ChannelState) -> Result<ChannelState> {
        let h = state.grid.half_len();
        let j0 = h - 1;
        let nc = self.h.n_channels;
        if state.n_channels != nc || state.grid != self.h.grid {
            return Err(Error::SolveFailed("state/propagator shape mismatch".into()));
        }

        // rhs = (1 - iμH) ψ
        let hpsi = self.h.apply(state);
        let mut rhs = state.psi.clone();
        let imu = C64::new(0.0, self.mu);
        for (r, hp) in rhs.iter_mut().zip(hpsi.iter()) {
            *r -= imu * hp;
        }

        // per-channel solves: w = A⁻¹ rhs and the column response A⁻¹ e_{j0}
        let mut w = vec![C64::new(0.0, 0.0); nc * h];
        let mut col = vec![C64::new(0.0, 0.0); nc * h];
        let mut work = vec![C64::new(0.0, 0.0); h];
        let mut e = vec![C64::new(0.0, 0.0); h];
        e[j0] = C64::new(1.0, 0.0);
        for n in 0..nc {
            self.channel_solve(n, &rhs[n * h..(n + 1) * h], &mut w[n * h..(n + 1) * h], &mut work);
            self.channel_solve(n, &e, &mut col[n * h..(n + 1) * h], &mut work);
        }

        // coupling column: (I + c diag(d) T) s = w(j0), c = iμ g/Δx,
        // (T s)_n = √n s_{n-1} + √(n+1) s_{n+1}
        let c = imu * self.h.coupling / self.h.grid.dx;
        let zero = C64::new(0.0, 0.0);
        let mut sub = vec![zero; nc];
        let mut dia = vec![zero; nc];
        let mut sup = vec![zero; nc];
        let mut rhs_s = vec![zero; nc];
        for n in 0..nc {
            let dn = col[n * h + j0];
            dia[n] = C64::new(1.0, 0.0);
            if n > 0 {
                sub[n] = c * dn * (n as f64).sqrt();
            }
            if n + 1 < nc {
                sup[n] = c * dn * ((n + 1) as f64).sqrt();
            }
            rhs_s[n] = w[n * h + j0];
        }
        let s = solve_tridiag_pivot(&sub, &dia, &sup, &rhs_s)
            .ok_or_else(|| Error::SolveFailed("coupling tridiagonal solve".into()))?;

        // u_n = w_n - c (T s)_n · (A⁻¹ e_{j0})_n
        let mut out = ChannelState {
            grid: state.grid,
            n_channels: nc,
            psi: w,
            time: state.time + self.cfg.dt,
        };
        for n in 0..nc {
            let mut ts = zero;
            if n > 0 {
                ts += (n as f64).sqrt() * s[n - 1];
            }
            if n + 1 < nc {
                ts += ((n + 1) as f64).sqrt() * s[n + 1];
            }
            let f = c * ts;
            for j in 0..h {
                out.psi[n * h + j] -= f * col[n * h + j];
            }
        }
        Ok(out)
    }
}

/// Tridiagonal solve with partial pivoting (elimination on the three bands
/// plus one fill-in band). Returns None on exact singularity.
pub fn solve_tridiag_pivot(sub: &[C64], dia: &[C64], sup: &[C64], rhs: &[C64]) -> Option<Vec<C64>> {
    let n = dia.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let zero = C64::new(0.0, 0.0);
    let mut a = sub.to_vec(); // a[i] multiplies x[i-1] in row i
    let mut b = dia.to_vec();
    let mut c = sup.to_vec(); // c[i] multiplies x[i+1] in row i
    let mut d = vec![zero; n]; // fill-in on x[i+2]
    let mut r = rhs.to_vec();

    for i in 0..n - 1 {
        if a[i + 1].norm() > b[i].norm() {
            let (bi, ci, di, ri) = (b[i], c[i], d[i], r[i]);
            b[i] = a[i + 1];
            c[i] = b[i + 1];
            d[i] = c[i + 1];
            r[i] = r[i + 1];
            a[i + 1] = bi;
            b[i + 1] = ci;
            c[i + 1] = di;
            r[i + 1] = ri;
        }
        if b[i].norm() == 0.0 {
            return None;
        }
        let f = a[i + 1] / b[i];
        let (ci, di, ri) = (c[i], d[i], r[i]);
        b[i + 1] -= f * ci;
        c[i + 1] -= f * di;
        r[i + 1] -= f * ri;
        a[i + 1] = zero;
    }
    if b[n - 1].norm() == 0.0 {
        return None;
    }
    let mut x = vec![zero; n];
    x[n - 1] = r[n - 1] / b[n - 1];
    if n >= 2 {
        x[n - 2] = (r[n - 2] - c[n - 2] * x[n - 1]) / b[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (r[i] - c[i] * x[i + 1] - d[i] * x[i + 2]) / b[i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::new(1.3, 1.0).unwrap()
    }

    fn smooth_state(grid: UniformGrid, nc: usize) -> ChannelState {
        let mut st = ChannelState::zero(grid, nc);
        let xs = grid.half_xs();
        for n in 0..3.min(nc) {
            let amp = 1.0 / (1 + n) as f64;
            for (j, &x) in xs.iter().enumerate() {
                *st.at_mut(n, j) = C64::new(amp * (-2.0 * (x + 1.2).powi(2)).exp(), 0.0);
            }
        }
        let n2 = st.norm2();
        st.rescale(1.0 / n2.sqrt());
        st
    }

    #[test]
    fn grid_misaligned_rejected() {
        assert!(UniformGrid::new(15).is_err());
        assert!(UniformGrid::new(64).is_ok());
    }

    #[test]
    fn full_channel_is_even() {
        let grid = UniformGrid::new(32).unwrap();
        let st = smooth_state(grid, 3);
        let full = st.full_channel(0);
        for j in 1..grid.m {
            assert_eq!(full[j], full[grid.m - j]);
        }
    }

    #[test]
    fn hamiltonian_is_symmetric() {
        let grid = UniformGrid::new(64).unwrap();
        let h = HamiltonianAction::new(&params(), grid, 6).unwrap();
        for seed in 0..10u64 {
            let mut phi = ChannelState::zero(grid, 6);
            let mut psi = ChannelState::zero(grid, 6);
            let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            let mut nextf = || {
                s = s
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            };
            for v in &mut phi.psi {
                *v = C64::new(nextf(), nextf());
            }
            for v in &mut psi.psi {
                *v = C64::new(nextf(), nextf());
            }
            let lhs = h.matrix_element(&phi, &psi);
            let rhs = h.matrix_element(&psi, &phi).conj();
            assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
        }
    }

    #[test]
    fn decoupled_channels_at_negligible_alpha() {
        let p = ModelParams::new(1e-14, 1.0).unwrap();
        let grid = UniformGrid::new(64).unwrap();
        let h = HamiltonianAction::new(&p, grid, 4).unwrap();
        let cn = CrankNicolson::new(h, PropagatorConfig::default());
        let mut st = smooth_state(grid, 4);
        let before: Vec<f64> = (0..4).map(|n| st.channel_norm2(n)).collect();
        for _ in 0..100 {
            st = cn.step(&st).unwrap();
        }
        for (n, b) in before.iter().enumerate() {
            assert!((st.channel_norm2(n) - b).abs() < 1e-9);
        }
    }

    #[test]
    fn norm_conserved_and_linear() {
        let grid = UniformGrid::new(64).unwrap();
        let h = HamiltonianAction::new(&params(), grid, 8).unwrap();
        let cn = CrankNicolson::new(h, PropagatorConfig::default());
        let st = smooth_state(grid, 8);
        let mut cur = st.clone();
        let n0 = cur.norm2();
        for _ in 0..200 {
            cur = cn.step(&cur).unwrap();
        }
        assert!((cur.norm2() - n0).abs() < 1e-10 * n0);

        let mut st2 = smooth_state(grid, 8);
        for (k, v) in st2.psi.iter_mut().enumerate() {
            *v *= C64::new(0.3, 0.1 * ((k % 7) as f64));
        }
        let a = C64::new(0.6, -0.2);
        let b = C64::new(-0.9, 0.4);
        let mut combo = st.clone();
        for (k, v) in combo.psi.iter_mut().enumerate() {
            *v = a * st.psi[k] + b * st2.psi[k];
        }
        let lhs = cn.step(&combo).unwrap();
        let r1 = cn.step(&st).unwrap();
        let r2 = cn.step(&st2).unwrap();
        let mut err = 0.0f64;
        for k in 0..lhs.psi.len() {
            err = err.max((lhs.psi[k] - a * r1.psi[k] - b * r2.psi[k]).norm());
        }
        assert!(err < 1e-12);
    }

    #[test]
    fn energy_conserved() {
        let grid = UniformGrid::new(128).unwrap();
        let h = HamiltonianAction::new(&params(), grid, 8).unwrap();
        let cn = CrankNicolson::new(
            h,
            PropagatorConfig {
                dt: 2e-3,
                ..Default::default()
            },
        );
        let mut st = smooth_state(grid, 8);
        let e0 = cn.h.expectation(&st);
        for _ in 0..500 {
            st = cn.step(&st).unwrap();
        }
        let e1 = cn.h.expectation(&st);
        assert!((e1 - e0).abs() < 1e-6 * e0.abs().max(1.0));
    }

    #[test]
    fn tridiag_pivot_solves() {
        let n = 40;
        let sub: Vec<C64> = (0..n)
            .map(|i| C64::new(0.1 * (i as f64).sin(), 0.02))
            .collect();
        let dia: Vec<C64> = (0..n)
            .map(|i| C64::new(2.0 + (i as f64 * 0.7).cos(), 0.4))
            .collect();
        let sup: Vec<C64> = (0..n)
            .map(|i| C64::new(-0.3, 0.05 * (i as f64).cos()))
            .collect();
        let x_true: Vec<C64> = (0..n)
            .map(|i| C64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut rhs = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            rhs[i] = dia[i] * x_true[i];
            if i > 0 {
                rhs[i] += sub[i] * x_true[i - 1];
            }
            if i + 1 < n {
                rhs[i] += sup[i] * x_true[i + 1];
            }
        }
        let x = solve_tridiag_pivot(&sub, &dia, &sup, &rhs).unwrap();
        for i in 0..n {
            assert!((x[i] - x_true[i]).norm() < 1e-12);
        }
    }
}
