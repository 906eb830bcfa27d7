//! Numerical laboratory for the finite-box Smilansky model: a quantum
//! particle on the circle coupled to harmonic oscillators through point
//! interactions.
//!
//! The crate covers, at desk scale, the machinery behind the model's
//! spectral transition at α = ω and the wave-packet collapse above it:
//!
//! - [`channel`]: per-channel solutions v_n(x, E) and the coefficients of
//!   the second-order difference equation they induce;
//! - [`recursion`]: the coefficient recursion C(n, E), its oscillatory
//!   asymptotics (θ, λ, ζ), and characteristic data, in f64 or extended
//!   precision;
//! - [`spectral`]: delta-normalization checks, the spectral synthesis map,
//!   and an exact-in-time spectral propagator;
//! - [`band`] / [`band2`]: Born-Oppenheimer band structure for one and two
//!   oscillators, band potentials, and the spectral-transition scans;
//! - [`dynamics`]: unitary Crank-Nicolson evolution in the truncated channel
//!   representation with collapse observables;
//! - [`banddyn`]: the reduced one-dimensional band dynamics;
//! - [`run`]: reproducible file-producing pipelines behind the CLI.
//!
//! Every runnable capability also has a standalone program under
//! `examples/`.

pub mod band;
pub mod band2;
pub mod banddyn;
pub mod channel;
pub mod dynamics;
pub mod error;
pub mod fit;
pub mod hermite;
pub mod params;
pub mod quadrature;
pub mod recursion;
pub mod roots;
pub mod run;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use params::{ModelParams, Regime};
