use thiserror::Error;

use crate::direct::SimulationResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid medium: {0}")]
    InvalidMedium(String),

    #[error("invalid envelope: {0}")]
    InvalidEnvelope(String),

    #[error("length mismatch: expected {expected} samples, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("degenerate pulse: {0}")]
    DegeneratePulse(String),

    #[error("amplitude norm drifted by {deviation:.3e} at tau = {tau} (tolerance {tol:.1e}); refine the tau grid")]
    NonUnitary { tau: f64, deviation: f64, tol: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("field magnitude {magnitude:.3e} exceeds guard {limit:.3e} at zeta = {zeta}")]
    Blowup {
        zeta: f64,
        magnitude: f64,
        limit: f64,
    },

    #[error("{which} envelope is not quiescent at the window edge ({edge_ratio:.3e} of its peak)")]
    WindowTooSmall {
        which: &'static str,
        edge_ratio: f64,
    },

    #[error("characteristic leaves the time window (needs W = {required:.6e}, window holds {available:.6e})")]
    WindowExceeded { required: f64, available: f64 },

    #[error("characteristics crossed: solution is multivalued at tau = {tau}, zeta = {zeta}")]
    Multivalued { tau: f64, zeta: f64 },

    #[error("no characteristic from inside the window reaches tau = {tau} at zeta = {zeta}")]
    NoRoot { tau: f64, zeta: f64 },

    #[error("target probe is infeasible at tau = {tau}: g^2 = {probe_sq:.6e} >= kappa_p V = {bound:.6e}")]
    Infeasible { tau: f64, probe_sq: f64, bound: f64 },

    #[error("back-propagated characteristics cross near output tau = {tau}; target is unreachable without a shock")]
    CrossedCharacteristics { tau: f64 },

    #[error("refinement did not reduce the error ({coarse:.3e} -> {fine:.3e})")]
    NonConvergent { coarse: f64, fine: f64 },

    #[error("propagation aborted at zeta = {zeta}: {source}")]
    Aborted {
        zeta: f64,
        #[source]
        source: Box<Error>,
        partial: Box<SimulationResult>,
    },
}

impl Error {
    /// Stable machine-readable code for the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "INVALID_GRID",
            Error::InvalidMedium(_) => "INVALID_MEDIUM",
            Error::InvalidEnvelope(_) => "INVALID_ENVELOPE",
            Error::LengthMismatch { .. } => "LENGTH_MISMATCH",
            Error::DegeneratePulse(_) => "DEGENERATE_PULSE",
            Error::NonUnitary { .. } => "NON_UNITARY",
            Error::NonFinite(_) => "NON_FINITE",
            Error::Blowup { .. } => "BLOWUP",
            Error::WindowTooSmall { .. } => "WINDOW_TOO_SMALL",
            Error::WindowExceeded { .. } => "WINDOW_EXCEEDED",
            Error::Multivalued { .. } => "MULTIVALUED",
            Error::NoRoot { .. } => "NO_ROOT",
            Error::Infeasible { .. } => "INFEASIBLE_TARGET",
            Error::CrossedCharacteristics { .. } => "CROSSED_CHARACTERISTICS",
            Error::NonConvergent { .. } => "NON_CONVERGENT",
            Error::Aborted { source, .. } => source.code(),
        }
    }

    /// The underlying error, looking through [`Error::Aborted`].
    pub fn root(&self) -> &Error {
        match self {
            Error::Aborted { source, .. } => source.root(),
            other => other,
        }
    }
}
