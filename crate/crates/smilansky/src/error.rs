//! Error taxonomy shared by all modules.

use thiserror::Error;

/// Everything that can go wrong in the laboratory.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// 2E coincides with a channel threshold (2n+1)ω, where k_n has a branch point.
    #[error("threshold energy: 2E = (2n+1)ω at n = {n}, E = {energy}")]
    ThresholdEnergy { n: usize, energy: f64 },

    /// E lies within the guard distance of the exceptional set 𝓔*_ω.
    #[error("exceptional energy: E = {energy} is within {guard} of 𝓔*_ω point {nearest}")]
    ExceptionalEnergy {
        energy: f64,
        nearest: f64,
        guard: f64,
    },

    /// Running error estimate of the recursion leaves fewer than 10 significant bits.
    #[error("precision loss in recursion at n = {n}: ~{bits_left:.1} significant bits left")]
    PrecisionLoss { n: usize, bits_left: f64 },

    /// Asymptotic fit failed to describe the data.
    #[error("asymptotic fit diverged: residual rms {residual_rms:.3e} > 0.1 × amplitude {amplitude:.3e}")]
    FitDiverged { residual_rms: f64, amplitude: f64 },

    /// Spatial quadrature cannot resolve the requested oscillatory mode.
    #[error("quadrature under-resolved: k·Δx = {k_dx:.3} > 0.5")]
    QuadratureUnderResolved { k_dx: f64 },

    /// Spectral profile support is not contained in the table grid.
    #[error("profile support [{lo}, {hi}] not inside table support [{table_lo}, {table_hi}]")]
    SupportViolation {
        lo: f64,
        hi: f64,
        table_lo: f64,
        table_hi: f64,
    },

    /// n-tail of the channel expansion exceeds the requested tolerance.
    #[error("channel tail not converged: estimated tail mass {tail:.3e} > tol {tol:.3e}")]
    TailNotConverged { tail: f64, tol: f64 },

    /// e^{-iEt} varies too fast for the energy quadrature.
    #[error("propagation phase under-resolved: {phase_per_cell:.3} rad per quadrature cell > 0.5")]
    PhaseUnderResolved { phase_per_cell: f64 },

    /// The spatial grid has no node at the interaction point x = 0.
    #[error("grid misaligned: no node at x = 0 (need an even number of nodes on [-π, π))")]
    GridMisaligned,

    /// Linear solve inside the propagator failed.
    #[error("propagator linear solve failed: {0}")]
    SolveFailed(String),

    /// Mass reached the top retained channel during evolution.
    #[error("truncation leak at t = {time:.4}: top-channel mass {mass:.3e} > {threshold:.3e}")]
    TruncationLeak {
        time: f64,
        mass: f64,
        threshold: f64,
    },

    /// Root finder exceeded its residual target.
    #[error("root not converged: residual {residual:.3e}")]
    RootNotConverged { residual: f64 },

    /// The γ-series in the band potential was truncated too early.
    #[error("band-potential series not converged: last term {last_term:.3e} relative to |V|")]
    SeriesNotConverged { last_term: f64 },

    /// Transition scan bracket does not contain a sign change.
    #[error("transition not bracketed in α ∈ [{lo}, {hi}]")]
    NotBracketed { lo: f64, hi: f64 },

    /// q-grid too coarse to resolve the band projection integrals.
    #[error("q-grid too coarse: doubling the grid moved band populations by {delta:.3e}")]
    QGridTooCoarse { delta: f64 },

    /// Mass reached the boundary of the band-dynamics q-domain.
    #[error("boundary leak at t = {time:.4}: edge mass {mass:.3e}")]
    BoundaryLeak { time: f64, mass: f64 },

    /// Hermite recurrence produced a non-finite value.
    #[error("hermite recurrence overflow at order {order}")]
    RecurrenceOverflow { order: usize },

    /// Run configuration failed validation.
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    /// Computation-level failure surfaced by the CLI.
    #[error("computation failed: {0}")]
    ComputeFailed(String),

    /// I/O error while writing artifacts.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
