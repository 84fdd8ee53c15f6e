//! Coupled probe/coupling pulse propagation through a three-level Λ medium
//! under coherent population trapping.
//!
//! Two solvers share one set of types: [`direct`] integrates the
//! amplitude/field equations numerically, [`adiabatic`] builds the
//! dark-state-following solution from the entry envelopes by the method of
//! characteristics. [`shaping`] holds the built-in scenarios and the inverse
//! design of coupling envelopes; [`diagnostics`] compares and checks runs.

pub mod adiabatic;
pub mod diagnostics;
pub mod direct;
pub mod envelope;
pub mod error;
pub mod grid;
pub mod lambda;
pub mod metrics;
pub mod numeric;
pub mod shaping;

pub use adiabatic::{adiabaticity_ratio, CharacteristicField, Shock};
pub use direct::{
    propagate, LowerLevel, SimulationResult, Snapshot, SnapshotDiagnostics, SolverConfig,
    SolverKind,
};
pub use envelope::{sample_envelope, EnvelopeSpec};
pub use error::{Error, Result};
pub use grid::{TauGrid, ZetaGrid};
pub use lambda::{mixing_angle, photon_invariant, AtomState, FieldState, MediumSpec};
pub use metrics::{pulse_metrics, PulseMetrics};
