//! Truncated two-mode dynamics.
//!
//! The state is restricted to at most two quanta,
//! `c00|00> + c10|10> + c01|01> + c11|11> + c20|20> + c02|02>`, and each
//! fixed-number manifold evolves independently:
//!
//! ```text
//! i d/dt c00 = 0
//! i d/dt (c10, c01) = [[w, -J], [-J, w]] (c10, c01)
//! i d/dt (c20, c11, c02) = [[2(U+w), -sqrt2 J, 0], [-sqrt2 J, 2w, -sqrt2 J], [0, -sqrt2 J, 2(U+w)]] (...)
//! ```
//!
//! Losses enter through the complex frequency `w - i kappa / 2`.

pub mod exact;

use std::f64::consts::SQRT_2;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

pub use exact::SegmentPropagator;

const I: C64 = C64::new(0.0, 1.0);

/// Default cap on the mean number of quanta `alpha^2`.
pub const DEFAULT_ALPHA_SQ_CAP: f64 = 0.1;

/// Default number of RK4 steps per propagation.
pub const DEFAULT_STEPS: usize = 10_000;

pub type Amplitude = C64;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TruncatedState {
    pub c00: Amplitude,
    pub c10: Amplitude,
    pub c01: Amplitude,
    pub c11: Amplitude,
    pub c20: Amplitude,
    pub c02: Amplitude,
}

impl TruncatedState {
    pub fn vacuum() -> Self {
        Self {
            c00: C64::new(1.0, 0.0),
            ..Self::default()
        }
    }

    /// Amplitudes in the order `c00, c10, c01, c11, c20, c02`.
    pub fn to_array(&self) -> [C64; 6] {
        [self.c00, self.c10, self.c01, self.c11, self.c20, self.c02]
    }

    pub fn from_array(a: [C64; 6]) -> Self {
        Self {
            c00: a[0],
            c10: a[1],
            c01: a[2],
            c11: a[3],
            c20: a[4],
            c02: a[5],
        }
    }

    /// `|c10|^2 + |c01|^2`.
    pub fn one_quantum_weight(&self) -> f64 {
        self.c10.norm_sqr() + self.c01.norm_sqr()
    }

    /// `|c20|^2 + |c11|^2 + |c02|^2`.
    pub fn two_quantum_weight(&self) -> f64 {
        self.c20.norm_sqr() + self.c11.norm_sqr() + self.c02.norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c00.norm_sqr() + self.one_quantum_weight() + self.two_quantum_weight()
    }

    pub fn normalized(&self) -> Self {
        *self * (1.0 / self.norm_sqr().sqrt())
    }

    /// `c11 - c10 c01`; twice its modulus is the dominant concurrence.
    pub fn correlation(&self) -> C64 {
        self.c11 - self.c10 * self.c01
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.to_array()
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    fn map(self, f: impl Fn(C64) -> C64) -> Self {
        Self::from_array(self.to_array().map(f))
    }

    fn zip(self, other: Self, f: impl Fn(C64, C64) -> C64) -> Self {
        let a = self.to_array();
        let b = other.to_array();
        Self::from_array(std::array::from_fn(|k| f(a[k], b[k])))
    }
}

impl Add for TruncatedState {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for TruncatedState {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for TruncatedState {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.map(|a| a * rhs)
    }
}

impl Mul<C64> for TruncatedState {
    type Output = Self;
    fn mul(self, rhs: C64) -> Self {
        self.map(|a| a * rhs)
    }
}

/// Frequency `omega` of both modes and loss rate `kappa`, in units of `E0_max`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JunctionParams {
    pub omega: f64,
    pub kappa: f64,
}

impl JunctionParams {
    pub fn new(omega: f64, kappa: f64) -> Result<Self> {
        if !omega.is_finite() {
            return Err(Error::param("omega", "must be finite"));
        }
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::param(
                "kappa",
                format!("must be finite and >= 0, got {kappa}"),
            ));
        }
        Ok(Self { omega, kappa })
    }

    pub fn lossless() -> Self {
        Self::default()
    }
}

/// Coherent amplitudes loaded into the two modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialPreparation {
    pub alpha1: Amplitude,
    pub alpha2: Amplitude,
}

impl InitialPreparation {
    pub fn new(alpha1: Amplitude, alpha2: Amplitude) -> Result<Self> {
        Self::with_cap(alpha1, alpha2, DEFAULT_ALPHA_SQ_CAP)
    }

    pub fn with_cap(alpha1: Amplitude, alpha2: Amplitude, cap: f64) -> Result<Self> {
        let prep = Self { alpha1, alpha2 };
        let alpha_sq = prep.alpha_sq();
        if !alpha_sq.is_finite() {
            return Err(Error::param("alpha", "must be finite"));
        }
        if alpha_sq > cap {
            return Err(Error::WeakPumpingCap { alpha_sq, cap });
        }
        Ok(prep)
    }

    /// In-phase real amplitudes `alpha1 = alpha2 = alpha / sqrt2`.
    pub fn symmetric(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(Error::param("alpha", format!("must be >= 0, got {alpha}")));
        }
        let a = C64::new(alpha / SQRT_2, 0.0);
        Self::new(a, a)
    }

    pub fn alpha_sq(&self) -> f64 {
        self.alpha1.norm_sqr() + self.alpha2.norm_sqr()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha_sq().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrepMode {
    /// Full `exp(-alpha^2 / 2)` coherent-state prefactor.
    Exact,
    /// First-order weak-pumping amplitudes, `c00 = 1 - alpha^2 / 2`.
    #[default]
    LeadingOrder,
}

/// Truncated product of coherent states.
pub fn initial_state(prep: &InitialPreparation, mode: PrepMode) -> TruncatedState {
    let (a1, a2) = (prep.alpha1, prep.alpha2);
    let alpha_sq = prep.alpha_sq();
    let s = TruncatedState {
        c00: C64::new(1.0, 0.0),
        c10: a1,
        c01: a2,
        c11: a1 * a2,
        c20: a1 * a1 / SQRT_2,
        c02: a2 * a2 / SQRT_2,
    };
    match mode {
        PrepMode::Exact => s * (-alpha_sq / 2.0).exp(),
        PrepMode::LeadingOrder => TruncatedState {
            c00: C64::new(1.0 - alpha_sq / 2.0, 0.0),
            ..s
        },
    }
}

/// Time derivative of the truncated state for instantaneous controls.
pub fn rhs(s: &TruncatedState, u: f64, j: f64, params: &JunctionParams) -> TruncatedState {
    let w = crate::dissipation::effective_params(params).omega_eff;
    let sj = SQRT_2 * j;
    // d/dt c = -i H c
    TruncatedState {
        c00: C64::new(0.0, 0.0),
        c10: -I * (w * s.c10 - j * s.c01),
        c01: -I * (w * s.c01 - j * s.c10),
        c20: -I * (2.0 * (u + w) * s.c20 - sj * s.c11),
        c11: -I * (2.0 * w * s.c11 - sj * (s.c20 + s.c02)),
        c02: -I * (2.0 * (u + w) * s.c02 - sj * s.c11),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlSample {
    pub t: f64,
    pub u: f64,
    pub j: f64,
}

/// Time-sampled controls `U(t)`, `J(t)` on `[0, T]`, linearly interpolated
/// between samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    duration: f64,
    samples: Vec<ControlSample>,
}

impl ControlSchedule {
    pub fn new(samples: Vec<ControlSample>) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::InvalidSchedule("no samples".into()))?;
        if first.t != 0.0 {
            return Err(Error::InvalidSchedule(format!(
                "first sample at t = {}, expected 0",
                first.t
            )));
        }
        if samples.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::InvalidSchedule(
                "sample times must be strictly increasing".into(),
            ));
        }
        if let Some(bad) = samples
            .iter()
            .find(|s| !(s.t.is_finite() && s.u.is_finite() && s.j.is_finite()))
        {
            return Err(Error::InvalidSchedule(format!(
                "non-finite sample at t = {}",
                bad.t
            )));
        }
        let duration = samples.last().unwrap().t;
        Ok(Self { duration, samples })
    }

    /// `n >= 2` uniform samples of `f(t) -> (U, J)` over `[0, T]`.
    pub fn from_fn(duration: f64, n: usize, f: impl Fn(f64) -> (f64, f64)) -> Result<Self> {
        if !(duration > 0.0) || n < 2 {
            return Err(Error::InvalidSchedule(
                "need T > 0 and at least two samples".into(),
            ));
        }
        let samples = (0..n)
            .map(|k| {
                let t = if k + 1 == n {
                    duration
                } else {
                    duration * k as f64 / (n - 1) as f64
                };
                let (u, j) = f(t);
                ControlSample { t, u, j }
            })
            .collect();
        Self::new(samples)
    }

    pub fn constant(duration: f64, u: f64, j: f64) -> Result<Self> {
        Self::from_fn(duration, 2, |_| (u, j))
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn samples(&self) -> &[ControlSample] {
        &self.samples
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// Linearly interpolated `(U, J)` at `t`, clamped to `[0, T]`.
    pub fn controls_at(&self, t: f64) -> (f64, f64) {
        let s = &self.samples;
        if s.len() == 1 || t <= 0.0 {
            return (s[0].u, s[0].j);
        }
        if t >= self.duration {
            let last = s.last().unwrap();
            return (last.u, last.j);
        }
        let k = s.partition_point(|p| p.t <= t).clamp(1, s.len() - 1);
        let (a, b) = (&s[k - 1], &s[k]);
        let w = (t - a.t) / (b.t - a.t);
        (a.u + w * (b.u - a.u), a.j + w * (b.j - a.j))
    }

    /// `int_0^T J dt`, exact for the piecewise-linear interpolant.
    pub fn integral_j(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| 0.5 * (w[1].t - w[0].t) * (w[0].j + w[1].j))
            .sum()
    }

    /// `int_0^T U dt`, exact for the piecewise-linear interpolant.
    pub fn integral_u(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| 0.5 * (w[1].t - w[0].t) * (w[0].u + w[1].u))
            .sum()
    }

    /// `int_0^T J dt` of the sampled control: Simpson on a uniform grid,
    /// trapezoid otherwise.
    pub fn quadrature_j(&self) -> f64 {
        let s = &self.samples;
        if s.len() < 3 {
            return self.integral_j();
        }
        let h = s[1].t - s[0].t;
        if s.windows(2)
            .all(|w| ((w[1].t - w[0].t) - h).abs() <= 1e-9 * h)
        {
            let j: Vec<f64> = s.iter().map(|c| c.j).collect();
            crate::numerics::simpson(&j, h)
        } else {
            self.integral_j()
        }
    }
}

/// States on a uniform time grid including both endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<TruncatedState>,
}

impl Trajectory {
    pub fn last(&self) -> &TruncatedState {
        self.states.last().expect("trajectory is never empty")
    }
}

/// Classical fixed-step RK4 over the schedule, `steps` uniform steps.
pub fn propagate(
    state: &TruncatedState,
    schedule: &ControlSchedule,
    params: &JunctionParams,
    steps: usize,
) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::param("steps", "must be >= 1"));
    }
    let duration = schedule.duration();
    let h = duration / steps as f64;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut s = *state;
    times.push(0.0);
    states.push(s);
    for k in 0..steps {
        let t = k as f64 * h;
        let (u0, j0) = schedule.controls_at(t);
        let (um, jm) = schedule.controls_at(t + 0.5 * h);
        let (u1, j1) = schedule.controls_at(t + h);
        let k1 = rhs(&s, u0, j0, params);
        let k2 = rhs(&(s + k1 * (0.5 * h)), um, jm, params);
        let k3 = rhs(&(s + k2 * (0.5 * h)), um, jm, params);
        let k4 = rhs(&(s + k3 * h), u1, j1, params);
        s = s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if !s.is_finite() {
            return Err(Error::NonFinite(format!(
                "state after step {} (t = {})",
                k + 1,
                t + h
            )));
        }
        times.push(if k + 1 == steps {
            duration
        } else {
            (k + 1) as f64 * h
        });
        states.push(s);
    }
    Ok(Trajectory { times, states })
}

/// Closed-form propagation under constant controls over `[0, T]`.
pub fn evolve_constant(
    state: &TruncatedState,
    u: f64,
    j: f64,
    params: &JunctionParams,
    duration: f64,
) -> TruncatedState {
    SegmentPropagator::new(u, j, params, duration).apply(state)
}

/// `c10(T) c01(T)` for the symmetric preparation with `omega = 0`:
/// `(alpha^2 / 2) exp(2 i int_0^T J dt)`.
pub fn product_phase(schedule: &ControlSchedule, alpha: f64) -> C64 {
    let phase = 2.0 * schedule.quadrature_j();
    C64::from_polar(alpha * alpha / 2.0, phase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn vacuum_preparation() {
        let prep = InitialPreparation::new(c(0.0), c(0.0)).unwrap();
        for mode in [PrepMode::Exact, PrepMode::LeadingOrder] {
            assert_eq!(initial_state(&prep, mode), TruncatedState::vacuum());
        }
    }

    #[test]
    fn leading_order_symmetric_preparation() {
        let prep = InitialPreparation::symmetric(0.1).unwrap();
        let s = initial_state(&prep, PrepMode::LeadingOrder);
        let a = 0.1 / SQRT_2;
        assert_relative_eq!(s.c00.re, 0.995, epsilon = 1e-15);
        assert_relative_eq!(s.c10.re, a, epsilon = 1e-15);
        assert_relative_eq!(s.c01.re, a, epsilon = 1e-15);
        assert_relative_eq!(s.c11.re, 0.005, epsilon = 1e-15);
        assert_relative_eq!(s.c20.re, 0.005 / SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(s.c02.re, 0.005 / SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn exact_single_mode_preparation() {
        let prep = InitialPreparation::new(c(0.1), c(0.0)).unwrap();
        let s = initial_state(&prep, PrepMode::Exact);
        assert_eq!(s.c01, c(0.0));
        assert_eq!(s.c11, c(0.0));
        assert_eq!(s.c02, c(0.0));
        assert_relative_eq!(s.c10.re, (-0.005_f64).exp() * 0.1, epsilon = 1e-16);
        assert_relative_eq!(s.c00.re, (-0.005_f64).exp(), epsilon = 1e-16);
    }

    #[test]
    fn weak_pumping_cap_is_enforced() {
        assert!(matches!(
            InitialPreparation::symmetric(0.5),
            Err(Error::WeakPumpingCap { .. })
        ));
        assert!(InitialPreparation::with_cap(c(0.5), c(0.0), 0.3).is_ok());
    }

    #[test]
    fn negative_kappa_rejected() {
        assert!(JunctionParams::new(0.0, -0.1).is_err());
    }

    #[test]
    fn rhs_free_evolution_at_zero_frequency() {
        let s = initial_state(
            &InitialPreparation::symmetric(0.2).unwrap(),
            PrepMode::Exact,
        );
        let d = rhs(&s, 0.0, 0.0, &JunctionParams::lossless());
        assert_eq!(d, TruncatedState::default());
    }

    #[test]
    fn rhs_pair_state_coupling() {
        let s = TruncatedState {
            c11: c(1.0),
            ..Default::default()
        };
        let d = rhs(&s, 0.0, 1.0, &JunctionParams::lossless());
        assert_relative_eq!((d.c20 - C64::new(0.0, SQRT_2)).norm(), 0.0, epsilon = 1e-15);
        assert_relative_eq!((d.c02 - C64::new(0.0, SQRT_2)).norm(), 0.0, epsilon = 1e-15);
        assert_eq!(d.c11, c(0.0));
    }

    #[test]
    fn rhs_loss_rates() {
        let s = TruncatedState {
            c10: c(1.0),
            c11: c(1.0),
            ..Default::default()
        };
        let kappa = 0.3;
        let d = rhs(&s, 0.0, 0.0, &JunctionParams::new(0.0, kappa).unwrap());
        assert_relative_eq!((d.c10 - c(-kappa / 2.0)).norm(), 0.0, epsilon = 1e-15);
        assert_relative_eq!((d.c11 - c(-kappa)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn evolve_constant_identity_at_zero_time() {
        let s = initial_state(
            &InitialPreparation::symmetric(0.2).unwrap(),
            PrepMode::Exact,
        );
        let out = evolve_constant(&s, 0.7, 0.2, &JunctionParams::new(0.4, 0.1).unwrap(), 0.0);
        assert!(out.max_abs_diff(&s) < 1e-15);
    }

    #[test]
    fn evolve_constant_pure_nonlinearity() {
        let s = initial_state(
            &InitialPreparation::new(c(0.2), C64::new(0.1, 0.1)).unwrap(),
            PrepMode::Exact,
        );
        let (u, t) = (0.8, 1.7);
        let out = evolve_constant(&s, u, 0.0, &JunctionParams::lossless(), t);
        let f = (C64::new(0.0, -2.0 * u * t)).exp();
        assert!((out.c20 - s.c20 * f).norm() < 1e-15);
        assert!((out.c02 - s.c02 * f).norm() < 1e-15);
        assert!((out.c11 - s.c11).norm() < 1e-15);
    }

    #[test]
    fn evolve_constant_pure_coupling_eigenmodes() {
        let s = initial_state(
            &InitialPreparation::new(c(0.2), C64::new(0.05, -0.1)).unwrap(),
            PrepMode::Exact,
        );
        let (j, t) = (0.3, 2.9);
        let out = evolve_constant(&s, 0.0, j, &JunctionParams::lossless(), t);
        let plus = (out.c10 + out.c01) / ((s.c10 + s.c01) * C64::new(0.0, j * t).exp());
        let minus = (out.c10 - out.c01) / ((s.c10 - s.c01) * C64::new(0.0, -j * t).exp());
        assert!((plus - 1.0).norm() < 1e-14);
        assert!((minus - 1.0).norm() < 1e-14);
    }

    #[test]
    fn propagate_frozen_without_controls() {
        let s = initial_state(
            &InitialPreparation::symmetric(0.3).unwrap(),
            PrepMode::LeadingOrder,
        );
        let sched = ControlSchedule::constant(12.0, 0.0, 0.0).unwrap();
        let tr = propagate(&s, &sched, &JunctionParams::lossless(), 100).unwrap();
        assert_eq!(tr.states.len(), 101);
        assert_eq!(*tr.last(), s);
        assert_eq!(*tr.times.last().unwrap(), 12.0);
    }

    #[test]
    fn propagate_matches_constant_oracle() {
        let s = initial_state(
            &InitialPreparation::symmetric(0.3).unwrap(),
            PrepMode::LeadingOrder,
        );
        let (u, j, t) = (0.5, 0.25, 6.0);
        let params = JunctionParams::new(0.2, 0.0).unwrap();
        let sched = ControlSchedule::constant(t, u, j).unwrap();
        let tr = propagate(&s, &sched, &params, 10_000).unwrap();
        assert!(
            tr.last()
                .max_abs_diff(&evolve_constant(&s, u, j, &params, t))
                < 1e-9
        );
    }

    #[test]
    fn propagate_rejects_zero_steps() {
        let sched = ControlSchedule::constant(1.0, 0.0, 0.0).unwrap();
        assert!(propagate(
            &TruncatedState::vacuum(),
            &sched,
            &JunctionParams::lossless(),
            0
        )
        .is_err());
    }

    #[test]
    fn propagate_reports_non_finite_state() {
        let sched = ControlSchedule::constant(1.0, 1e300, 1e300).unwrap();
        let s = initial_state(
            &InitialPreparation::symmetric(0.3).unwrap(),
            PrepMode::LeadingOrder,
        );
        assert!(matches!(
            propagate(&s, &sched, &JunctionParams::lossless(), 10),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn schedule_validation() {
        assert!(ControlSchedule::new(vec![]).is_err());
        let bad_start = vec![ControlSample {
            t: 0.1,
            u: 0.0,
            j: 0.0,
        }];
        assert!(ControlSchedule::new(bad_start).is_err());
        let non_monotone = vec![
            ControlSample {
                t: 0.0,
                u: 0.0,
                j: 0.0,
            },
            ControlSample {
                t: 1.0,
                u: 0.0,
                j: 0.0,
            },
            ControlSample {
                t: 1.0,
                u: 0.0,
                j: 0.0,
            },
        ];
        assert!(ControlSchedule::new(non_monotone).is_err());
    }

    #[test]
    fn schedule_interpolates_linearly() {
        let sched = ControlSchedule::from_fn(2.0, 3, |t| (t, 2.0 * t)).unwrap();
        let (u, j) = sched.controls_at(0.75);
        assert_relative_eq!(u, 0.75, epsilon = 1e-15);
        assert_relative_eq!(j, 1.5, epsilon = 1e-15);
    }

    #[test]
    fn product_phase_cases() {
        let alpha = 0.1;
        let zero = ControlSchedule::constant(3.0, 0.4, 0.0).unwrap();
        assert_eq!(
            product_phase(&zero, alpha),
            C64::new(alpha * alpha / 2.0, 0.0)
        );
        // 2 J T = 2 pi
        let wrap = ControlSchedule::constant(PI, 0.0, 1.0).unwrap();
        let p = product_phase(&wrap, alpha);
        assert!((p - C64::new(alpha * alpha / 2.0, 0.0)).norm() < 1e-15);
        let any = ControlSchedule::from_fn(5.0, 101, |t| (0.0, 0.1 * t.sin().abs())).unwrap();
        assert_relative_eq!(
            product_phase(&any, alpha).norm(),
            alpha * alpha / 2.0,
            epsilon = 1e-16
        );
    }
}
