//! Bounded-control maximization of the final normalized concurrence.
//!
//! Controls are piecewise constant on `N` equal segments, each segment
//! propagated exactly. The objective `2 |c11 - c10 c01| / alpha^2` at `t = T`
//! is maximized by projected gradient ascent with Armijo backtracking; the
//! gradient comes from a forward/adjoint sweep through the segment
//! propagators.

use std::f64::consts::SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::exact::{self, Mat2, SegmentPropagator};
use crate::dynamics::{initial_state, InitialPreparation, JunctionParams, PrepMode};
use crate::shortcuts::{self, ReferenceProfile, DEFAULT_KNOTS};
use crate::{entanglement, Error, Result, TruncatedState, C64};

const I: C64 = C64::new(0.0, 1.0);

/// Ceiling of the normalized dominant concurrence.
pub const MAX_NORMALIZED_CONCURRENCE: f64 = 1.0 + SQRT_2;

/// `0 <= U <= u_max`, `0 <= J <= j_max`, in units of `E0_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub u_max: f64,
    pub j_max: f64,
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            u_max: 1.0,
            j_max: 0.25,
        }
    }
}

impl Bounds {
    pub fn new(u_max: f64, j_max: f64) -> Result<Self> {
        if !(u_max >= 0.0 && u_max.is_finite()) || !(j_max >= 0.0 && j_max.is_finite()) {
            return Err(Error::param(
                "bounds",
                format!("need finite, non-negative bounds, got ({u_max}, {j_max})"),
            ));
        }
        Ok(Self { u_max, j_max })
    }

    /// Clamp a flattened `[u.., j..]` vector into the box.
    pub fn project(&self, x: &mut [f64]) {
        let n = x.len() / 2;
        for v in &mut x[..n] {
            *v = v.clamp(0.0, self.u_max);
        }
        for v in &mut x[n..] {
            *v = v.clamp(0.0, self.j_max);
        }
    }
}

/// Piecewise-constant controls on `N` equal segments of `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlVector {
    pub duration: f64,
    pub u: Vec<f64>,
    pub j: Vec<f64>,
}

impl ControlVector {
    pub fn new(duration: f64, u: Vec<f64>, j: Vec<f64>) -> Result<Self> {
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(Error::param(
                "T",
                format!("must be finite and >= 0, got {duration}"),
            ));
        }
        if u.is_empty() || u.len() != j.len() {
            return Err(Error::param(
                "controls",
                "need equally many U and J segments, at least one",
            ));
        }
        Ok(Self { duration, u, j })
    }

    pub fn zeros(duration: f64, segments: usize) -> Self {
        Self {
            duration,
            u: vec![0.0; segments],
            j: vec![0.0; segments],
        }
    }

    pub fn segments(&self) -> usize {
        self.u.len()
    }

    pub fn segment_length(&self) -> f64 {
        self.duration / self.segments() as f64
    }

    pub fn check_bounds(&self, bounds: &Bounds) -> Result<()> {
        for (index, &value) in self.u.iter().enumerate() {
            if !(0.0..=bounds.u_max).contains(&value) {
                return Err(Error::ControlOutOfBounds {
                    index,
                    what: "U",
                    value,
                    max: bounds.u_max,
                });
            }
        }
        for (index, &value) in self.j.iter().enumerate() {
            if !(0.0..=bounds.j_max).contains(&value) {
                return Err(Error::ControlOutOfBounds {
                    index,
                    what: "J",
                    value,
                    max: bounds.j_max,
                });
            }
        }
        Ok(())
    }

    /// `[u_0 .. u_{N-1}, j_0 .. j_{N-1}]`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.u.iter().chain(&self.j).copied().collect()
    }

    pub fn from_flat(duration: f64, x: &[f64]) -> Self {
        let n = x.len() / 2;
        Self {
            duration,
            u: x[..n].to_vec(),
            j: x[n..].to_vec(),
        }
    }

    /// Controls at time `t`, zero after `T`.
    pub fn at(&self, t: f64) -> (f64, f64) {
        if !(t >= 0.0) || t >= self.duration {
            return (0.0, 0.0);
        }
        let k = ((t / self.segment_length()) as usize).min(self.segments() - 1);
        (self.u[k], self.j[k])
    }

    /// Sample `f(t) -> (U, J)` at segment midpoints.
    pub fn from_fn(duration: f64, segments: usize, f: impl Fn(f64) -> (f64, f64)) -> Self {
        let h = duration / segments as f64;
        let (u, j) = (0..segments).map(|k| f((k as f64 + 0.5) * h)).unzip();
        Self { duration, u, j }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best: ControlVector,
    /// Final `C(T) / alpha^2`, dominant form.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
    /// Final objective of every start, random starts first, then the
    /// shortcut-seeded start, then warm starts.
    pub start_objectives: Vec<f64>,
}

/// Normalized dominant concurrence at `T` under piecewise-constant controls.
pub fn objective(
    controls: &ControlVector,
    bounds: &Bounds,
    prep: &InitialPreparation,
    params: &JunctionParams,
) -> Result<f64> {
    controls.check_bounds(bounds)?;
    let alpha_sq = prep.alpha_sq();
    if alpha_sq == 0.0 {
        return Err(Error::param(
            "alpha",
            "normalized concurrence needs alpha > 0",
        ));
    }
    let psi = final_state(controls, prep, params);
    Ok(entanglement::dominant_concurrence(&psi) / alpha_sq)
}

/// Final state after chaining the exact segment propagators.
pub fn final_state(
    controls: &ControlVector,
    prep: &InitialPreparation,
    params: &JunctionParams,
) -> TruncatedState {
    let tau = controls.segment_length();
    controls.u.iter().zip(&controls.j).fold(
        initial_state(prep, PrepMode::LeadingOrder),
        |psi, (&u, &j)| SegmentPropagator::new(u, j, params, tau).apply(&psi),
    )
}

/// Propagator and its `bz`, `bx` derivatives for both blocks of a segment.
type SegmentGrads = (Mat2, Mat2, Mat2, Mat2, Mat2, Mat2);

/// Objective restricted to the blocks it depends on: `(c10, c01)` and the
/// symmetric pair `((c20 + c02)/sqrt2, c11)`.
#[derive(Debug, Clone)]
pub struct Problem {
    pub duration: f64,
    pub segments: usize,
    pub bounds: Bounds,
    alpha_sq: f64,
    omega: C64,
    one0: [C64; 2],
    sym0: [C64; 2],
}

impl Problem {
    pub fn new(
        duration: f64,
        segments: usize,
        bounds: Bounds,
        prep: &InitialPreparation,
        params: &JunctionParams,
    ) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::param(
                "T",
                format!("must be positive, got {duration}"),
            ));
        }
        if segments == 0 {
            return Err(Error::param("segments", "must be >= 1"));
        }
        let alpha_sq = prep.alpha_sq();
        if alpha_sq == 0.0 {
            return Err(Error::param(
                "alpha",
                "normalized concurrence needs alpha > 0",
            ));
        }
        let psi = initial_state(prep, PrepMode::LeadingOrder);
        Ok(Self {
            duration,
            segments,
            bounds,
            alpha_sq,
            omega: crate::dissipation::effective_params(params).omega_eff,
            one0: [psi.c10, psi.c01],
            sym0: [(psi.c20 + psi.c02) / SQRT_2, psi.c11],
        })
    }

    fn tau(&self) -> f64 {
        self.duration / self.segments as f64
    }

    fn finish(&self, one: [C64; 2], sym: [C64; 2]) -> (f64, C64) {
        let z = sym[1] - one[0] * one[1];
        (2.0 * z.norm() / self.alpha_sq, z)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let n = self.segments;
        let tau = self.tau();
        let (mut one, mut sym) = (self.one0, self.sym0);
        for k in 0..n {
            let (u, j) = (x[k], x[n + k]);
            let (m1, z1, x1) = exact::one_quantum_block(j, self.omega);
            let (m2, z2, x2) = exact::symmetric_block(u, j, self.omega);
            one = exact::apply(&exact::expm2(m1, z1, x1, tau), one);
            sym = exact::apply(&exact::expm2(m2, z2, x2, tau), sym);
        }
        self.finish(one, sym).0
    }

    /// Objective and its gradient with respect to `[u.., j..]`.
    pub fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let n = self.segments;
        let tau = self.tau();
        let mut props: Vec<SegmentGrads> = Vec::with_capacity(n);
        let mut ones = Vec::with_capacity(n + 1);
        let mut syms = Vec::with_capacity(n + 1);
        let (mut one, mut sym) = (self.one0, self.sym0);
        ones.push(one);
        syms.push(sym);
        for k in 0..n {
            let (u, j) = (x[k], x[n + k]);
            let (m1, z1, x1) = exact::one_quantum_block(j, self.omega);
            let (m2, z2, x2) = exact::symmetric_block(u, j, self.omega);
            let (p1, d1z, d1x) = exact::expm2_with_grad(m1, z1, x1, tau);
            let (p2, d2z, d2x) = exact::expm2_with_grad(m2, z2, x2, tau);
            one = exact::apply(&p1, one);
            sym = exact::apply(&p2, sym);
            ones.push(one);
            syms.push(sym);
            props.push((p1, d1z, d1x, p2, d2z, d2x));
        }
        let (value, z) = self.finish(one, sym);
        let mut grad = vec![0.0; 2 * n];
        let zn = z.norm();
        if zn == 0.0 {
            return (value, grad);
        }
        let unit = z / zn * (2.0 / self.alpha_sq);
        let mut lam1 = [-unit * one[1].conj(), -unit * one[0].conj()];
        let mut lam2 = [C64::new(0.0, 0.0), unit];
        let re_inner =
            |lam: &[C64; 2], v: [C64; 2]| (lam[0].conj() * v[0] + lam[1].conj() * v[1]).re;
        for k in (0..n).rev() {
            let (p1, _d1z, d1x, p2, d2z, d2x) = &props[k];
            let y1 = ones[k];
            let y2 = syms[k];
            // U enters the symmetric block through m = U + 2w and bz = U.
            let dp2_y2 = exact::apply(p2, y2);
            let du = re_inner(&lam2, [-I * tau * dp2_y2[0], -I * tau * dp2_y2[1]])
                + re_inner(&lam2, exact::apply(d2z, y2));
            // J enters through bx = -J (one-quantum) and bx = -2J (symmetric).
            let dj = -re_inner(&lam1, exact::apply(d1x, y1))
                - 2.0 * re_inner(&lam2, exact::apply(d2x, y2));
            grad[k] = du;
            grad[n + k] = dj;
            lam1 = exact::apply_adjoint(p1, lam1);
            lam2 = exact::apply_adjoint(p2, lam2);
        }
        (value, grad)
    }

    /// Central-difference gradient with relative step `rel_step`.
    pub fn gradient_fd(&self, x: &[f64], rel_step: f64) -> Vec<f64> {
        let mut xp = x.to_vec();
        (0..x.len())
            .map(|i| {
                let h = rel_step * x[i].abs().max(1.0);
                let orig = xp[i];
                xp[i] = orig + h;
                let fp = self.value(&xp);
                xp[i] = orig - h;
                let fm = self.value(&xp);
                xp[i] = orig;
                (fp - fm) / (2.0 * h)
            })
            .collect()
    }
}

/// Stopping rule and seeding for [`maximize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximizeOptions {
    pub segments: usize,
    /// Number of random starts.
    pub seeds: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub gradient_tol: f64,
    pub relative_tol: f64,
    pub stall_window: usize,
    /// Add a start from the fast shortcut's controls at the requested `T`.
    pub shortcut_start: bool,
    pub alpha: f64,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        Self {
            segments: 100,
            seeds: 8,
            seed: 0,
            max_iterations: 2000,
            gradient_tol: 1e-6,
            relative_tol: 1e-10,
            stall_window: 20,
            shortcut_start: true,
            alpha: 0.1,
        }
    }
}

#[derive(Debug, Clone)]
struct Run {
    x: Vec<f64>,
    value: f64,
    initial: f64,
    iterations: usize,
    converged: bool,
}

fn ascend(problem: &Problem, mut x: Vec<f64>, opts: &MaximizeOptions) -> Run {
    problem.bounds.project(&mut x);
    let (mut f, mut g) = problem.value_and_gradient(&x);
    let initial = f;
    let mut history = vec![f];
    let mut step = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    let mut trial = x.clone();
    while iterations < opts.max_iterations {
        // projected gradient norm
        trial.copy_from_slice(&x);
        trial.iter_mut().zip(&g).for_each(|(t, gi)| *t += gi);
        problem.bounds.project(&mut trial);
        let pg: f64 = trial
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if pg <= opts.gradient_tol {
            converged = true;
            break;
        }
        let mut accepted = false;
        let mut a = step;
        while a > 1e-16 {
            trial
                .iter_mut()
                .zip(x.iter().zip(&g))
                .for_each(|(t, (xi, gi))| *t = xi + a * gi);
            problem.bounds.project(&mut trial);
            let ascent: f64 = trial
                .iter()
                .zip(x.iter().zip(&g))
                .map(|(t, (xi, gi))| gi * (t - xi))
                .sum();
            let ft = problem.value(&trial);
            if ft >= f + 1e-4 * ascent {
                accepted = true;
                break;
            }
            a *= 0.5;
        }
        iterations += 1;
        if !accepted {
            converged = true;
            break;
        }
        std::mem::swap(&mut x, &mut trial);
        let (fv, gv) = problem.value_and_gradient(&x);
        f = fv;
        g = gv;
        step = (2.0 * a).min(1e6);
        history.push(f);
        if history.len() > opts.stall_window {
            let old = history[history.len() - 1 - opts.stall_window];
            if (f - old).abs() <= opts.relative_tol * f.abs().max(1e-300) {
                converged = true;
                break;
            }
        }
    }
    Run {
        x,
        value: f,
        initial,
        iterations,
        converged,
    }
}

/// Fast-shortcut controls compressed to duration `T`, clipped to the box.
pub fn shortcut_start(duration: f64, segments: usize, bounds: &Bounds) -> Result<ControlVector> {
    let profile = ReferenceProfile::fast(DEFAULT_KNOTS)?;
    Ok(ControlVector::from_fn(duration, segments, |t| {
        let c = shortcuts::controls_at(&profile, duration, (t / duration).min(1.0));
        (c.u.clamp(0.0, bounds.u_max), c.j.clamp(0.0, bounds.j_max))
    }))
}

/// Multistart maximization of `C(T) / alpha^2` at fixed `T`.
pub fn maximize(
    duration: f64,
    bounds: &Bounds,
    params: &JunctionParams,
    opts: &MaximizeOptions,
) -> Result<OptimizationResult> {
    maximize_with_starts(duration, bounds, params, opts, &[])
}

/// [`maximize`] with extra caller-provided starting points.
pub fn maximize_with_starts(
    duration: f64,
    bounds: &Bounds,
    params: &JunctionParams,
    opts: &MaximizeOptions,
    warm_starts: &[ControlVector],
) -> Result<OptimizationResult> {
    if opts.segments < 10 {
        return Err(Error::param(
            "segments",
            format!("need N >= 10, got {}", opts.segments),
        ));
    }
    let prep = InitialPreparation::symmetric(opts.alpha)?;
    let problem = Problem::new(duration, opts.segments, *bounds, &prep, params)?;
    let n = opts.segments;
    let mut starts: Vec<Vec<f64>> = (0..opts.seeds)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(k as u64));
            let mut x: Vec<f64> = (0..n).map(|_| bounds.u_max * rng.random::<f64>()).collect();
            x.extend((0..n).map(|_| bounds.j_max * rng.random::<f64>()));
            x
        })
        .collect();
    if opts.shortcut_start {
        starts.push(shortcut_start(duration, n, bounds)?.to_flat());
    }
    for w in warm_starts {
        let resampled = ControlVector::from_fn(duration, n, |t| w.at(t));
        starts.push(resampled.to_flat());
    }
    if starts.is_empty() {
        return Err(Error::param("seeds", "need at least one start"));
    }
    let runs: Vec<Run> = starts
        .into_par_iter()
        .map(|x0| ascend(&problem, x0, opts))
        .collect();
    let best_idx = runs
        .iter()
        .enumerate()
        .fold(0, |b, (k, r)| if r.value > runs[b].value { k } else { b });
    let best = &runs[best_idx];
    let improved = runs.iter().any(|r| r.value > r.initial + 1e-12);
    Ok(OptimizationResult {
        best: ControlVector::from_flat(duration, &best.x),
        objective: best.value,
        iterations: best.iterations,
        converged: best.converged && improved,
        seed: opts.seed,
        start_objectives: runs.iter().map(|r| r.value).collect(),
    })
}

/// Outcome of the minimum-time search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimumTime {
    /// Smallest duration found feasible.
    pub duration: f64,
    /// Largest duration found infeasible.
    pub infeasible_below: f64,
    pub objective: f64,
    pub target: f64,
    /// Every `(T, objective)` evaluated, in evaluation order.
    pub evaluations: Vec<(f64, f64)>,
    pub controls: ControlVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimumTimeOptions {
    pub maximize: MaximizeOptions,
    pub coarse_start: f64,
    pub coarse_step: f64,
    pub t_max: f64,
    pub resolution: f64,
}

impl Default for MinimumTimeOptions {
    fn default() -> Self {
        Self {
            maximize: MaximizeOptions::default(),
            coarse_start: 1.0,
            coarse_step: 1.0,
            t_max: 30.0,
            resolution: 0.05,
        }
    }
}

/// Smallest `T` whose optimum reaches `(1 + sqrt2)(1 - epsilon)`.
pub fn minimum_time(
    bounds: &Bounds,
    epsilon: f64,
    params: &JunctionParams,
    opts: &MinimumTimeOptions,
) -> Result<MinimumTime> {
    if !(epsilon > 0.0 && epsilon <= 0.05) {
        return Err(Error::param(
            "epsilon",
            format!("must lie in (0, 0.05], got {epsilon}"),
        ));
    }
    let target = MAX_NORMALIZED_CONCURRENCE * (1.0 - epsilon);
    let mut evaluations = Vec::new();
    let mut eval = |t: f64, warm: &[ControlVector]| -> Result<OptimizationResult> {
        let r = maximize_with_starts(t, bounds, params, &opts.maximize, warm)?;
        evaluations.push((t, r.objective));
        Ok(r)
    };
    let mut lo = 0.0;
    let mut prev: Option<ControlVector> = None;
    let mut hi = None;
    let mut t = opts.coarse_start;
    while t <= opts.t_max + 1e-12 {
        let warm: Vec<ControlVector> = prev.iter().cloned().collect();
        let r = eval(t, &warm)?;
        if r.objective >= target {
            hi = Some((t, r));
            break;
        }
        lo = t;
        prev = Some(r.best);
        t += opts.coarse_step;
    }
    let (mut hi_t, mut hi_r) = hi.ok_or(Error::Infeasible { t_max: opts.t_max })?;
    while hi_t - lo > opts.resolution {
        let mid = 0.5 * (lo + hi_t);
        let warm: Vec<ControlVector> = prev
            .iter()
            .cloned()
            .chain(std::iter::once(hi_r.best.clone()))
            .collect();
        let r = eval(mid, &warm)?;
        if r.objective >= target {
            hi_t = mid;
            hi_r = r;
        } else {
            lo = mid;
            prev = Some(r.best);
        }
    }
    Ok(MinimumTime {
        duration: hi_t,
        infeasible_below: lo,
        objective: hi_r.objective,
        target,
        evaluations,
        controls: hi_r.best,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub duration: f64,
    pub objective: f64,
}

/// Lossy curve value at one grid point against direct lossy evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub duration: f64,
    /// Lossless optimum times `exp(-kappa T)`.
    pub factorized: f64,
    /// Lossless optimal controls propagated with losses.
    pub propagated: f64,
    /// Optimum found by maximizing directly with losses.
    pub optimized: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub kappa: f64,
    pub points: Vec<SweepPoint>,
    pub cross_checks: Vec<CrossCheck>,
}

impl SweepCurve {
    /// Duration of the best point (first one on ties).
    pub fn argmax_duration(&self) -> f64 {
        self.points
            .iter()
            .fold(None::<SweepPoint>, |b, p| match b {
                Some(b) if b.objective >= p.objective => Some(b),
                _ => Some(*p),
            })
            .map_or(f64::NAN, |p| p.duration)
    }

    /// Largest drop between consecutive points (zero when non-decreasing).
    pub fn max_decrease(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[0].objective - w[1].objective).max(0.0))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub maximize: MaximizeOptions,
    pub omega: f64,
    /// Also re-optimize with losses at the cross-check points.
    pub cross_check_optimize: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            maximize: MaximizeOptions::default(),
            omega: 0.0,
            cross_check_optimize: true,
        }
    }
}

/// Lossless optimum per duration plus the lossy curves it implies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub curves: Vec<SweepCurve>,
    pub controls: Vec<ControlVector>,
}

/// Optimal normalized concurrence over a duration grid for each loss rate.
///
/// Grid points are solved in order; each point is warm-started from the
/// previous optimum, both idled (zero controls after the previous `T`) and
/// stretched to the new duration.
pub fn sweep(grid: &[f64], bounds: &Bounds, kappas: &[f64], opts: &SweepOptions) -> Result<Sweep> {
    if grid.is_empty() || kappas.is_empty() {
        return Err(Error::param(
            "grid",
            "duration grid and kappa list must be non-empty",
        ));
    }
    if let Some(k) = kappas.iter().find(|k| !(**k >= 0.0)) {
        return Err(Error::param("kappa", format!("must be >= 0, got {k}")));
    }
    let lossless = JunctionParams::new(opts.omega, 0.0)?;
    let mut base = Vec::with_capacity(grid.len());
    let mut controls: Vec<ControlVector> = Vec::with_capacity(grid.len());
    for &t in grid {
        let warm: Vec<ControlVector> = controls
            .last()
            .map(|prev| {
                let stretched = ControlVector {
                    duration: t,
                    u: prev.u.clone(),
                    j: prev.j.clone(),
                };
                vec![prev.clone(), stretched]
            })
            .unwrap_or_default();
        let r = maximize_with_starts(t, bounds, &lossless, &opts.maximize, &warm)?;
        base.push(SweepPoint {
            duration: t,
            objective: r.objective,
        });
        controls.push(r.best);
    }
    let n = grid.len();
    let mut check_idx = vec![n / 6, n / 2, (5 * n) / 6];
    check_idx.iter_mut().for_each(|i| *i = (*i).min(n - 1));
    check_idx.dedup();
    let prep = InitialPreparation::symmetric(opts.maximize.alpha)?;
    let curves = kappas
        .iter()
        .map(|&kappa| -> Result<SweepCurve> {
            let points: Vec<SweepPoint> = base
                .iter()
                .map(|p| SweepPoint {
                    duration: p.duration,
                    objective: p.objective * (-kappa * p.duration).exp(),
                })
                .collect();
            let lossy = JunctionParams::new(opts.omega, kappa)?;
            let mut cross_checks = Vec::new();
            if kappa > 0.0 {
                for &i in &check_idx {
                    let propagated = objective(&controls[i], bounds, &prep, &lossy)?;
                    let optimized = if opts.cross_check_optimize {
                        Some(maximize(grid[i], bounds, &lossy, &opts.maximize)?.objective)
                    } else {
                        None
                    };
                    cross_checks.push(CrossCheck {
                        duration: grid[i],
                        factorized: points[i].objective,
                        propagated,
                        optimized,
                    });
                }
            }
            Ok(SweepCurve {
                kappa,
                points,
                cross_checks,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sweep { curves, controls })
}
