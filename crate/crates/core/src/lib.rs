//! Entanglement generation in a weakly populated bosonic Josephson junction.
//!
//! The junction is two coupled nonlinear bosonic modes, each loaded with a
//! weak coherent state. In the weak-pumping limit the state lives on the
//! manifold of at most two quanta, which makes the dynamics a pair of small
//! linear systems. On top of that this crate provides:
//!
//! - [`dynamics`]: the six-amplitude truncated state, its equations of motion,
//!   RK4 and closed-form propagators.
//! - [`entanglement`]: concurrence, reduced density matrix eigenvalues and
//!   entanglement entropy, exact and in the weak-pumping approximation.
//! - [`shortcuts`]: reference adiabatic profiles, implementable counterdiabatic
//!   controls and the phase-matching duration solver.
//! - [`optimal_control`]: bounded piecewise-constant control synthesis that
//!   maximizes the final concurrence.
//! - [`dissipation`]: the non-Hermitian loss model.
//!
//! Units: `hbar = 1` and the maximum reference energy `E0_max = 1`, so times
//! are measured in `1 / E0_max`.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dissipation;
pub mod dynamics;
pub mod entanglement;
mod error;
pub mod numerics;
pub mod optimal_control;
pub mod shortcuts;

pub use error::{Error, Result};

pub use num_complex::Complex64 as C64;

pub use dynamics::{
    ControlSample, ControlSchedule, InitialPreparation, JunctionParams, PrepMode, Trajectory,
    TruncatedState,
};
pub use entanglement::{ConcurrenceValue, EntanglementResult};
pub use optimal_control::{Bounds, ControlVector, OptimizationResult, SweepCurve};
pub use shortcuts::{GaugePhaseRecord, ProfileKind, ReferenceProfile, TwoLevelState};
