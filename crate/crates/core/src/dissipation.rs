//! Losses through the effective non-Hermitian Hamiltonian.
//!
//! Dropping the jump terms of the master equation leaves a pure state evolving
//! under `H - i (kappa/2) sum_j a_j^dag a_j`, which amounts to the complex mode
//! frequency `omega - i kappa / 2` in the truncated equations. One-quantum
//! amplitudes then pick up `exp(-kappa t / 2)`, two-quantum amplitudes
//! `exp(-kappa t)`, and so does the dominant concurrence. States are not
//! renormalized.

use serde::{Deserialize, Serialize};

use crate::dynamics::{self, ControlSchedule, InitialPreparation, JunctionParams, PrepMode};
use crate::entanglement;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub omega_eff: C64,
}

pub fn effective_params(params: &JunctionParams) -> EffectiveParams {
    EffectiveParams {
        omega_eff: C64::new(params.omega, -params.kappa / 2.0),
    }
}

/// Normalized dominant concurrence along one schedule with and without loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissipativeTrace {
    pub kappa: f64,
    pub times: Vec<f64>,
    pub concurrence_lossless: Vec<f64>,
    /// Direct propagation with the complex frequency.
    pub concurrence_lossy: Vec<f64>,
    /// `concurrence_lossless * exp(-kappa t)`.
    pub concurrence_factorized: Vec<f64>,
    pub peak_time: f64,
    pub peak_value: f64,
}

impl DissipativeTrace {
    /// Largest `|lossy - factorized|` over the trace.
    pub fn factorization_error(&self) -> f64 {
        self.concurrence_lossy
            .iter()
            .zip(&self.concurrence_factorized)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn dissipative_trace(
    schedule: &ControlSchedule,
    kappa: f64,
    omega: f64,
    prep: &InitialPreparation,
    steps: usize,
) -> Result<DissipativeTrace> {
    let lossy_params = JunctionParams::new(omega, kappa)?;
    let lossless_params = JunctionParams::new(omega, 0.0)?;
    let alpha = prep.alpha();
    if alpha == 0.0 {
        return Err(Error::param(
            "alpha",
            "normalized concurrence needs alpha > 0",
        ));
    }
    let psi0 = dynamics::initial_state(prep, PrepMode::LeadingOrder);
    let lossless = dynamics::propagate(&psi0, schedule, &lossless_params, steps)?;
    let lossy = dynamics::propagate(&psi0, schedule, &lossy_params, steps)?;
    let norm =
        |s: &dynamics::TruncatedState| entanglement::dominant_concurrence(s) / (alpha * alpha);
    let concurrence_lossless: Vec<f64> = lossless.states.iter().map(norm).collect();
    let concurrence_lossy: Vec<f64> = lossy.states.iter().map(norm).collect();
    let concurrence_factorized: Vec<f64> = lossless
        .times
        .iter()
        .zip(&concurrence_lossless)
        .map(|(t, c)| c * (-kappa * t).exp())
        .collect();
    let (peak_idx, peak_value) = concurrence_lossy.iter().copied().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |best, (k, v)| if v > best.1 { (k, v) } else { best },
    );
    Ok(DissipativeTrace {
        kappa,
        peak_time: lossy.times[peak_idx],
        peak_value,
        times: lossy.times,
        concurrence_lossless,
        concurrence_lossy,
        concurrence_factorized,
    })
}
