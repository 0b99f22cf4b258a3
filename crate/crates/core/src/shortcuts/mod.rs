//! Counterdiabatic shortcuts from the product state to the maximally
//! entangled state.
//!
//! With the in-phase symmetric preparation the two-quantum block reduces to a
//! two-level system `psi = exp(i int U) (c20 + c02, sqrt2 c11)` driven by
//! `H0 = 2U Sz - 4J Sx`. Parametrizing `U = (E0/2) cos(phi)`,
//! `J = (E0/4) sin(phi)` and rotating the counterdiabatic term `-phi' Sy` away
//! with `B = exp(-i b Sz)`, `tan b = phi' / (E0 sin phi)`, leaves a Hamiltonian
//! of the same form with controls `U_I`, `J_I`. The duration `T` is fixed by
//! requiring the phase of `c11` to trail that of `c10 c01` by `pi`.

mod profile;

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::dynamics::{ControlSample, ControlSchedule};
use crate::numerics;
use crate::{Error, Result, TruncatedState, C64};

pub use profile::{
    coeffs_e_system, coeffs_phi_a_system, coeffs_phi_b_system, solve_coeffs_e, solve_coeffs_phi,
    Knots, ProfileKind, ProfilePoint, ReferenceProfile, COEFF_RESIDUAL_TOL, DEFAULT_KNOTS, E0_MAX,
};

/// Samples per emitted schedule, shared with the phase quadrature.
pub const DEFAULT_SAMPLES: usize = 4001;

/// Quadrature points for the duration integral.
pub const DEFAULT_QUADRATURE_POINTS: usize = 4001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugePhaseRecord {
    pub times: Vec<f64>,
    /// Gauge angle `b(t)`, continuous from `b(0) = 0`.
    pub b: Vec<f64>,
    /// Final phase of `c11`: `int (E0/2)(1 - cos phi) dt`.
    pub theta: f64,
    /// Final phase of `c10 c01`: `2 int J_I dt`.
    pub zeta: f64,
    /// Adiabatic phase of the lower branch `-int E_- dt = int E0/2 dt`.
    pub xi_minus: f64,
}

impl GaugePhaseRecord {
    /// `theta - zeta` wrapped to `(-pi, pi]`.
    pub fn wrapped_difference(&self) -> f64 {
        wrap_angle(self.theta - self.zeta)
    }

    /// Distance of `theta - zeta` from `-pi` modulo `2 pi`.
    pub fn phase_mismatch(&self) -> f64 {
        wrap_angle(self.theta - self.zeta + PI).abs()
    }
}

/// Wrap to `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Instantaneous implementable controls and gauge angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortcutControls {
    pub u: f64,
    pub j: f64,
    pub b: f64,
}

/// `U_I`, `J_I` and `b` at normalized time `s` for duration `T`.
///
/// Where both `E0 sin(phi)` and `phi'` vanish (the final instant) the
/// controls are extended continuously by zero and `b` by `-pi/2`.
pub fn controls_at(profile: &ReferenceProfile, duration: f64, s: f64) -> ShortcutControls {
    // Both the energy and the sweep rate vanish at the end; continuous extension.
    if s >= 1.0 {
        return ShortcutControls {
            u: 0.0,
            j: 0.0,
            b: -PI / 2.0,
        };
    }
    let p = profile.at(s);
    let dphi = p.dphi / duration;
    let ddphi = p.ddphi / (duration * duration);
    let de = p.de / duration;
    let (sin, cos) = p.phi.sin_cos();
    let es = p.e * sin;
    let den = es * es + dphi * dphi;
    if den <= f64::MIN_POSITIVE {
        return ShortcutControls {
            u: 0.0,
            j: 0.0,
            b: 0.0,
        };
    }
    let num = p.e.powi(3) * sin * sin * cos
        + de * dphi * sin
        + p.e * (2.0 * dphi * dphi * cos - ddphi * sin);
    ShortcutControls {
        u: num / (2.0 * den),
        j: den.sqrt() / 4.0,
        b: dphi.atan2(es),
    }
}

/// Unwrap a sampled angle so consecutive samples differ by less than `pi`.
fn unwrap(angles: &mut [f64]) {
    for k in 1..angles.len() {
        let d = angles[k] - angles[k - 1];
        angles[k] -= 2.0 * PI * (d / (2.0 * PI)).round();
    }
}

/// Sample `U_I`, `J_I` on a uniform grid over `[0, T]` and compute the
/// accompanying gauge phases.
pub fn counterdiabatic_controls(
    profile: &ReferenceProfile,
    duration: f64,
    samples: usize,
) -> Result<(ControlSchedule, GaugePhaseRecord)> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::param(
            "T",
            format!("must be positive, got {duration}"),
        ));
    }
    if samples < 2 {
        return Err(Error::param("samples", "need at least two"));
    }
    let mut pts = Vec::with_capacity(samples);
    let mut b = Vec::with_capacity(samples);
    for k in 0..samples {
        let s = k as f64 / (samples - 1) as f64;
        let c = controls_at(profile, duration, s);
        if !(c.u.is_finite() && c.j.is_finite()) {
            return Err(Error::NonFinite(format!("shortcut controls at s = {s}")));
        }
        let t = if k + 1 == samples {
            duration
        } else {
            s * duration
        };
        pts.push(ControlSample { t, u: c.u, j: c.j });
        b.push(c.b);
    }
    unwrap(&mut b);
    let schedule = ControlSchedule::new(pts)?;
    let mut record = phases(profile, duration, &schedule);
    record.b = b;
    Ok((schedule, record))
}

/// `theta`, `zeta` and `xi_-` by composite Simpson over the schedule grid.
///
/// `b` is left empty unless the schedule came from [`counterdiabatic_controls`].
pub fn phases(
    profile: &ReferenceProfile,
    duration: f64,
    schedule: &ControlSchedule,
) -> GaugePhaseRecord {
    let times = schedule.times();
    if times.len() < 2 || duration == 0.0 {
        return GaugePhaseRecord {
            times,
            b: Vec::new(),
            theta: 0.0,
            zeta: 0.0,
            xi_minus: 0.0,
        };
    }
    let uniform = is_uniform(&times);
    let integrate = |vals: &[f64]| -> f64 {
        if uniform {
            numerics::simpson(vals, times[1] - times[0])
        } else {
            numerics::trapezoid(&times, vals)
        }
    };
    let mut theta_density = Vec::with_capacity(times.len());
    let mut half_energy = Vec::with_capacity(times.len());
    for &t in &times {
        let p = profile.at((t / duration).min(1.0));
        theta_density.push(0.5 * p.e * (1.0 - p.phi.cos()));
        half_energy.push(0.5 * p.e);
    }
    let j2: Vec<f64> = schedule.samples().iter().map(|c| 2.0 * c.j).collect();
    GaugePhaseRecord {
        theta: integrate(&theta_density),
        zeta: integrate(&j2),
        xi_minus: integrate(&half_energy),
        times,
        b: Vec::new(),
    }
}

fn is_uniform(times: &[f64]) -> bool {
    let h = times[1] - times[0];
    times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1e-300))
}

/// Integrand of the duration equation at `s`, in the form
/// `(E0/2)(cos phi - 1) + (1/2) sqrt(E0^2 sin^2 phi + phi'^2 / T^2)`, which
/// stays finite where `E0 sin(phi) -> 0`.
pub fn duration_integrand(profile: &ReferenceProfile, duration: f64, s: f64) -> f64 {
    let p = profile.at(s);
    let es = p.e * p.phi.sin();
    let dphi = p.dphi / duration;
    0.5 * p.e * (p.phi.cos() - 1.0) + 0.5 * (es * es + dphi * dphi).sqrt()
}

/// `T int_0^1 (E0/2)(cos phi + sin phi sqrt(1 + phi'^2 / (T E0 sin phi)^2) - 1) ds`.
pub fn duration_lhs(profile: &ReferenceProfile, duration: f64) -> Result<f64> {
    duration_lhs_with(profile, duration, DEFAULT_QUADRATURE_POINTS)
}

pub fn duration_lhs_with(profile: &ReferenceProfile, duration: f64, points: usize) -> Result<f64> {
    if !(duration > 0.0) {
        return Err(Error::param(
            "T",
            format!("must be positive, got {duration}"),
        ));
    }
    if points < 3 {
        return Err(Error::param(
            "points",
            "need at least three quadrature points",
        ));
    }
    let h = 1.0 / (points - 1) as f64;
    let mut vals = Vec::with_capacity(points);
    for k in 0..points {
        let s = if k + 1 == points { 1.0 } else { k as f64 * h };
        let v = duration_integrand(profile, duration, s);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("duration integrand at s = {s}")));
        }
        vals.push(v);
    }
    Ok(duration * numerics::simpson(&vals, h))
}

/// Scan and bisection settings for [`solve_duration`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DurationSearch {
    pub t_min: f64,
    pub t_max: f64,
    pub step: f64,
    pub iterations: usize,
    pub points: usize,
}

impl Default for DurationSearch {
    fn default() -> Self {
        Self {
            t_min: 0.5,
            t_max: 300.0,
            step: 0.5,
            iterations: 60,
            points: DEFAULT_QUADRATURE_POINTS,
        }
    }
}

/// Smallest `T` with `duration_lhs(T) = pi`.
pub fn solve_duration(profile: &ReferenceProfile) -> Result<f64> {
    solve_duration_with(profile, &DurationSearch::default())
}

pub fn solve_duration_with(profile: &ReferenceProfile, search: &DurationSearch) -> Result<f64> {
    let f = |t: f64| duration_lhs_with(profile, t, search.points).map_or(f64::NAN, |v| v - PI);
    numerics::first_root(
        search.t_min,
        search.t_max,
        search.step,
        f,
        search.iterations,
    )
}

/// `2 pi / (sqrt2 - 1)`: the duration if `E0 = E0_max` and `phi = pi/4`
/// throughout, neglecting the `1/T^2` term.
pub fn estimate_min_duration() -> f64 {
    2.0 * PI / (SQRT_2 - 1.0) / E0_MAX
}

/// Reduced two-level vector `exp(i U_phase) (c20 + c02, sqrt2 c11)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelState {
    pub psi1: C64,
    pub psi2: C64,
}

impl TwoLevelState {
    pub fn norm(&self) -> f64 {
        (self.psi1.norm_sqr() + self.psi2.norm_sqr()).sqrt()
    }

    fn rhs(&self, u: f64, j: f64) -> [C64; 2] {
        // i d/dt psi = [[U, -2J], [-2J, -U]] psi
        let i = C64::new(0.0, 1.0);
        [
            -i * (u * self.psi1 - 2.0 * j * self.psi2),
            -i * (-2.0 * j * self.psi1 - u * self.psi2),
        ]
    }
}

pub fn two_level_reduce(state: &TruncatedState, accumulated_u_phase: f64) -> TwoLevelState {
    let f = C64::from_polar(1.0, accumulated_u_phase);
    TwoLevelState {
        psi1: f * (state.c20 + state.c02),
        psi2: f * SQRT_2 * state.c11,
    }
}

/// RK4 propagation of the reduced vector under `H_I = 2U Sz - 4J Sx`.
pub fn propagate_two_level(
    psi: &TwoLevelState,
    schedule: &ControlSchedule,
    steps: usize,
) -> Result<Vec<TwoLevelState>> {
    if steps == 0 {
        return Err(Error::param("steps", "must be >= 1"));
    }
    let h = schedule.duration() / steps as f64;
    let add = |s: &TwoLevelState, k: [C64; 2], w: f64| TwoLevelState {
        psi1: s.psi1 + k[0] * w,
        psi2: s.psi2 + k[1] * w,
    };
    let mut out = Vec::with_capacity(steps + 1);
    let mut s = *psi;
    out.push(s);
    for k in 0..steps {
        let t = k as f64 * h;
        let (u0, j0) = schedule.controls_at(t);
        let (um, jm) = schedule.controls_at(t + 0.5 * h);
        let (u1, j1) = schedule.controls_at(t + h);
        let k1 = s.rhs(u0, j0);
        let k2 = add(&s, k1, 0.5 * h).rhs(um, jm);
        let k3 = add(&s, k2, 0.5 * h).rhs(um, jm);
        let k4 = add(&s, k3, h).rhs(u1, j1);
        s = TwoLevelState {
            psi1: s.psi1 + (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) * (h / 6.0),
            psi2: s.psi2 + (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) * (h / 6.0),
        };
        out.push(s);
    }
    Ok(out)
}

/// Cumulative `int_0^t U dt` on the same `steps + 1` point grid as the RK4
/// propagators, Simpson's rule on each step.
pub fn accumulated_u_phase(schedule: &ControlSchedule, steps: usize) -> Vec<f64> {
    let h = schedule.duration() / steps as f64;
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(0.0);
    for k in 0..steps {
        let t = k as f64 * h;
        let (u0, _) = schedule.controls_at(t);
        let (um, _) = schedule.controls_at(t + 0.5 * h);
        let (u1, _) = schedule.controls_at(t + h);
        acc += h / 6.0 * (u0 + 4.0 * um + u1);
        out.push(acc);
    }
    out
}

/// Profile, solved duration and emitted schedule for one shortcut.
#[derive(Debug, Clone, PartialEq)]
pub struct Shortcut {
    pub profile: ReferenceProfile,
    pub duration: f64,
    pub schedule: ControlSchedule,
    pub phases: GaugePhaseRecord,
}

impl Shortcut {
    /// Solve the duration and sample the controls densely.
    pub fn build(profile: ReferenceProfile) -> Result<Self> {
        let duration = solve_duration(&profile)?;
        Self::with_duration(profile, duration, DEFAULT_SAMPLES)
    }

    pub fn with_duration(profile: ReferenceProfile, duration: f64, samples: usize) -> Result<Self> {
        let (schedule, phases) = counterdiabatic_controls(&profile, duration, samples)?;
        Ok(Self {
            profile,
            duration,
            schedule,
            phases,
        })
    }
}
