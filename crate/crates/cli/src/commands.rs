//! One function per subcommand; each returns a JSON summary and optionally a
//! CSV table.

use std::f64::consts::SQRT_2;

use bjj_core::dynamics::{initial_state, propagate, DEFAULT_STEPS};
use bjj_core::entanglement::{
    self, concurrence, eigenvalue_approximations, entanglement_exact, entanglement_of_concurrence,
};
use bjj_core::optimal_control::{
    self, Bounds, MaximizeOptions, MinimumTimeOptions, SweepOptions, MAX_NORMALIZED_CONCURRENCE,
};
use bjj_core::shortcuts::{self, DurationSearch, Knots, Shortcut, DEFAULT_SAMPLES};
use bjj_core::{
    ControlSample, ControlSchedule, InitialPreparation, JunctionParams, PrepMode, ReferenceProfile,
    Trajectory, TruncatedState, C64,
};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::output::{self, Meta, Table};
use crate::CliError;

pub struct Output {
    pub summary: Value,
    pub table: Option<Table>,
}

pub struct Ctx {
    name: &'static str,
    cfg: RunConfig,
}

impl Ctx {
    pub fn new(name: &'static str, cfg: RunConfig) -> Self {
        Self { name, cfg }
    }

    fn meta(&self) -> Meta<'_> {
        Meta {
            command: self.name,
            config_hash: self.cfg.hash(self.name),
        }
    }

    pub fn emit(&self, out: Output) -> Result<(), CliError> {
        let meta = self.meta();
        if let (Some(table), Some(path)) = (&out.table, &self.cfg.out) {
            output::write_file(path, &output::render_csv(&meta, table))?;
        }
        let json = output::render_json(&meta, out.summary);
        if let Some(path) = &self.cfg.json {
            output::write_file(path, &json)?;
        }
        print!("{json}");
        Ok(())
    }

    fn alpha(&self) -> Result<f64, CliError> {
        let alpha = self.cfg.alpha.unwrap_or(0.1);
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(CliError::config(format!(
                "alpha must be positive (normalized concurrence divides by alpha^2), got {alpha}"
            )));
        }
        Ok(alpha)
    }

    fn prep(&self) -> Result<InitialPreparation, CliError> {
        Ok(InitialPreparation::symmetric(self.alpha()?)?)
    }

    fn kappas(&self) -> Result<Vec<f64>, CliError> {
        let k = self.cfg.kappa.as_ref().map_or(vec![0.0], |k| k.values());
        if k.is_empty() {
            return Err(CliError::config("kappa list is empty"));
        }
        Ok(k)
    }

    fn kappa(&self) -> Result<f64, CliError> {
        match self.kappas()?[..] {
            [k] => Ok(k),
            _ => Err(CliError::config(format!(
                "{} takes a single kappa",
                self.name
            ))),
        }
    }

    fn params(&self) -> Result<JunctionParams, CliError> {
        Ok(JunctionParams::new(
            self.cfg.omega.unwrap_or(0.0),
            self.kappa()?,
        )?)
    }

    fn profile(&self) -> Result<ReferenceProfile, CliError> {
        match self.cfg.profile.as_deref().unwrap_or("fast") {
            "original" => {
                if self.cfg.knots.is_some() {
                    return Err(CliError::config("knots only apply to the fast profile"));
                }
                Ok(ReferenceProfile::original())
            }
            "fast" => {
                let knots = self
                    .cfg
                    .knots
                    .map_or(Knots::default(), |[s0, s1, s2]| Knots { s0, s1, s2 });
                Ok(ReferenceProfile::fast(knots)?)
            }
            other => Err(CliError::config(format!(
                "unknown profile '{other}' (expected original or fast)"
            ))),
        }
    }

    fn profile_json(&self, p: &ReferenceProfile) -> Value {
        json!({
            "kind": p.kind(),
            "knots": p.knots(),
        })
    }

    fn single_duration(&self) -> Result<Option<f64>, CliError> {
        let Some(spec) = &self.cfg.duration else {
            return Ok(None);
        };
        match spec.grid()?[..] {
            [t] => Ok(Some(t)),
            _ => Err(CliError::config(format!("{} takes a single T", self.name))),
        }
    }

    fn steps(&self) -> Result<usize, CliError> {
        positive(self.cfg.steps.unwrap_or(DEFAULT_STEPS), "steps")
    }

    fn stride(&self) -> Result<usize, CliError> {
        positive(self.cfg.stride.unwrap_or(10), "stride")
    }

    fn bounds(&self) -> Result<Bounds, CliError> {
        let [u, j] = self.cfg.bounds.unwrap_or([1.0, 0.25]);
        Ok(Bounds::new(u, j)?)
    }

    fn maximize_options(&self) -> Result<MaximizeOptions, CliError> {
        Ok(MaximizeOptions {
            segments: self.cfg.segments.unwrap_or(100),
            seeds: self.cfg.seeds.unwrap_or(8),
            seed: self.cfg.seed.unwrap_or(0),
            alpha: self.alpha()?,
            ..Default::default()
        })
    }
}

fn positive(v: usize, what: &str) -> Result<usize, CliError> {
    if v == 0 {
        return Err(CliError::config(format!("{what} must be >= 1")));
    }
    Ok(v)
}

/// Indices `0, stride, 2 stride, ...` plus the last one.
fn strided(len: usize, stride: usize) -> impl Iterator<Item = usize> {
    (0..len).filter(move |k| k % stride == 0 || *k == len - 1)
}

fn state_json(s: &TruncatedState) -> Value {
    let names = ["c00", "c10", "c01", "c11", "c20", "c02"];
    let map: serde_json::Map<String, Value> = names
        .iter()
        .zip(s.to_array())
        .map(|(n, c)| (n.to_string(), json!([c.re, c.im])))
        .collect();
    Value::Object(map)
}

pub fn duration(ctx: &Ctx) -> Result<Output, CliError> {
    let profile = ctx.profile()?;
    let d = DurationSearch::default();
    let search = DurationSearch {
        t_min: ctx.cfg.grid_min.unwrap_or(d.t_min),
        t_max: ctx.cfg.grid_max.unwrap_or(d.t_max),
        step: ctx.cfg.grid_step.unwrap_or(d.step),
        ..d
    };
    if !(search.t_min > 0.0 && search.t_max > search.t_min && search.step > 0.0) {
        return Err(CliError::config(
            "need 0 < grid_min < grid_max and grid_step > 0",
        ));
    }
    let root = shortcuts::solve_duration_with(&profile, &search)?;
    let mut table = Table::new(["T", "lhs"]);
    let n = ((search.t_max - search.t_min) / search.step + 1e-9).floor() as usize;
    for k in 0..=n {
        let t = search.t_min + k as f64 * search.step;
        table.push(vec![
            t,
            shortcuts::duration_lhs_with(&profile, t, search.points)?,
        ]);
    }
    Ok(Output {
        summary: json!({
            "profile": ctx.profile_json(&profile),
            "T": root,
            "lhs_at_root": shortcuts::duration_lhs_with(&profile, root, search.points)?,
            "estimate_min_duration": shortcuts::estimate_min_duration(),
        }),
        table: Some(table),
    })
}

fn trajectory_residuals(traj: &Trajectory) -> (f64, f64, f64) {
    let s0 = traj.states[0];
    traj.states.iter().fold((0.0, 0.0, 0.0), |(a, b, c), s| {
        (
            f64::max(a, (s.c00 - s0.c00).norm()),
            f64::max(b, (s.one_quantum_weight() - s0.one_quantum_weight()).abs()),
            f64::max(c, (s.two_quantum_weight() - s0.two_quantum_weight()).abs()),
        )
    })
}

pub fn shortcut(ctx: &Ctx) -> Result<Output, CliError> {
    let profile = ctx.profile()?;
    let prep = ctx.prep()?;
    let params = ctx.params()?;
    let steps = ctx.steps()?;
    let samples = ctx.cfg.samples.unwrap_or(DEFAULT_SAMPLES);
    let t = match ctx.single_duration()? {
        Some(t) => t,
        None => shortcuts::solve_duration(&profile)?,
    };
    let cut = Shortcut::with_duration(profile, t, samples)?;
    let psi0 = initial_state(&prep, PrepMode::LeadingOrder);
    let traj = propagate(&psi0, &cut.schedule, &params, steps)?;
    let a2 = prep.alpha_sq();
    let s0 = psi0;
    let mut table = Table::new([
        "t", "U_I", "J_I", "re_corr", "im_corr", "C_norm", "res_zero", "res_one", "res_two",
    ]);
    for k in strided(traj.states.len(), ctx.stride()?) {
        let (tk, s) = (traj.times[k], &traj.states[k]);
        let (u, j) = cut.schedule.controls_at(tk);
        let corr = s.correlation() / a2;
        table.push(vec![
            tk,
            u,
            j,
            corr.re,
            corr.im,
            2.0 * corr.norm(),
            (s.c00 - s0.c00).norm(),
            s.one_quantum_weight() - s0.one_quantum_weight(),
            s.two_quantum_weight() - s0.two_quantum_weight(),
        ]);
    }
    let last = traj.last();
    let (r0, r1, r2) = trajectory_residuals(&traj);
    Ok(Output {
        summary: json!({
            "profile": ctx.profile_json(&cut.profile),
            "T": t,
            "alpha": prep.alpha(),
            "kappa": params.kappa,
            "omega": params.omega,
            "steps": steps,
            "final_normalized_concurrence": entanglement::dominant_concurrence(last) / a2,
            "lossless_maximum_times_decay": MAX_NORMALIZED_CONCURRENCE * (-params.kappa * t).exp(),
            "theta": cut.phases.theta,
            "zeta": cut.phases.zeta,
            "phase_mismatch": cut.phases.phase_mismatch(),
            "c20_over_alpha_sq": last.c20.norm() / a2,
            "c02_over_alpha_sq": last.c02.norm() / a2,
            "max_drift": { "zero": r0, "one": r1, "two": r2 },
            "final_state": state_json(last),
        }),
        table: Some(table),
    })
}

fn read_schedule(path: &std::path::Path) -> Result<ControlSchedule, CliError> {
    let bad = |msg: String| CliError::config(format!("schedule {}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let mut samples = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let parsed: Option<Vec<f64>> = record.iter().map(|c| c.parse().ok()).collect();
        match parsed {
            Some(v) if v.len() == 3 => samples.push(ControlSample {
                t: v[0],
                u: v[1],
                j: v[2],
            }),
            None if k == 0 => continue, // header row
            _ => {
                return Err(bad(format!(
                    "record {}: expected three numbers t,U,J",
                    k + 1
                )))
            }
        }
    }
    Ok(ControlSchedule::new(samples)?)
}

pub fn simulate(ctx: &Ctx) -> Result<Output, CliError> {
    let schedule = match (&ctx.cfg.schedule, ctx.cfg.u, ctx.cfg.j) {
        (Some(path), None, None) => read_schedule(path)?,
        (None, Some(u), Some(j)) => {
            let t = ctx
                .single_duration()?
                .ok_or_else(|| CliError::config("constant controls need T"))?;
            ControlSchedule::constant(t, u, j)?
        }
        _ => {
            return Err(CliError::config(
                "give either a schedule file or both u and j (with T)",
            ))
        }
    };
    let prep = ctx.prep()?;
    let params = ctx.params()?;
    let steps = ctx.steps()?;
    let psi0 = initial_state(&prep, PrepMode::LeadingOrder);
    let traj = propagate(&psi0, &schedule, &params, steps)?;
    let a2 = prep.alpha_sq();
    let names = ["c00", "c10", "c01", "c11", "c20", "c02"];
    let mut header = vec!["t".to_string()];
    for n in names {
        header.push(format!("re_{n}"));
        header.push(format!("im_{n}"));
    }
    header.extend(["C_norm".to_string(), "C_full_norm".to_string()]);
    let mut table = Table::new(header);
    for k in strided(traj.states.len(), ctx.stride()?) {
        let s = &traj.states[k];
        let mut row = vec![traj.times[k]];
        for c in s.to_array() {
            row.extend([c.re, c.im]);
        }
        row.push(entanglement::dominant_concurrence(s) / a2);
        row.push(entanglement::full_concurrence(s) / a2);
        table.push(row);
    }
    let last = traj.last();
    let (r0, r1, r2) = trajectory_residuals(&traj);
    Ok(Output {
        summary: json!({
            "T": schedule.duration(),
            "alpha": prep.alpha(),
            "kappa": params.kappa,
            "omega": params.omega,
            "steps": steps,
            "final_normalized_concurrence": entanglement::dominant_concurrence(last) / a2,
            "max_drift": { "zero": r0, "one": r1, "two": r2 },
            "final_state": state_json(last),
        }),
        table: Some(table),
    })
}

fn controls_table(c: &optimal_control::ControlVector) -> Table {
    let mut table = Table::new(["segment", "t_start", "t_end", "U", "J"]);
    let h = c.segment_length();
    for (k, (&u, &j)) in c.u.iter().zip(&c.j).enumerate() {
        table.push(vec![k as f64, k as f64 * h, (k + 1) as f64 * h, u, j]);
    }
    table
}

pub fn optimize(ctx: &Ctx) -> Result<Output, CliError> {
    let t = ctx
        .single_duration()?
        .ok_or_else(|| CliError::config("optimize needs T"))?;
    let bounds = ctx.bounds()?;
    let params = ctx.params()?;
    let opts = ctx.maximize_options()?;
    let r = optimal_control::maximize(t, &bounds, &params, &opts)?;
    Ok(Output {
        summary: json!({
            "T": t,
            "bounds": [bounds.u_max, bounds.j_max],
            "kappa": params.kappa,
            "omega": params.omega,
            "segments": opts.segments,
            "seeds": opts.seeds,
            "seed": r.seed,
            "objective": r.objective,
            "fraction_of_maximum": r.objective / (1.0 + SQRT_2),
            "converged": r.converged,
            "iterations": r.iterations,
            "start_objectives": r.start_objectives,
        }),
        table: Some(controls_table(&r.best)),
    })
}

pub fn mintime(ctx: &Ctx) -> Result<Output, CliError> {
    let bounds = ctx.bounds()?;
    let params = ctx.params()?;
    let d = MinimumTimeOptions::default();
    let opts = MinimumTimeOptions {
        maximize: ctx.maximize_options()?,
        t_max: ctx.cfg.t_max.unwrap_or(d.t_max),
        ..d
    };
    let epsilon = ctx.cfg.epsilon.unwrap_or(0.005);
    let r = optimal_control::minimum_time(&bounds, epsilon, &params, &opts)?;
    Ok(Output {
        summary: json!({
            "bounds": [bounds.u_max, bounds.j_max],
            "epsilon": epsilon,
            "kappa": params.kappa,
            "segments": opts.maximize.segments,
            "T_min": r.duration,
            "infeasible_below": r.infeasible_below,
            "objective": r.objective,
            "target": r.target,
            "evaluations": r.evaluations,
        }),
        table: Some(controls_table(&r.controls)),
    })
}

pub fn sweep(ctx: &Ctx) -> Result<Output, CliError> {
    let grid = match &ctx.cfg.duration {
        Some(spec) => spec.grid()?,
        None => crate::config::parse_grid("1:7:0.1")?,
    };
    if !grid.iter().all(|t| *t > 0.0) {
        return Err(CliError::config("sweep durations must be positive"));
    }
    let kappas = ctx.kappas()?;
    let bounds = ctx.bounds()?;
    let opts = SweepOptions {
        maximize: ctx.maximize_options()?,
        omega: ctx.cfg.omega.unwrap_or(0.0),
        cross_check_optimize: ctx.cfg.reoptimize.unwrap_or(true),
    };
    let sw = optimal_control::sweep(&grid, &bounds, &kappas, &opts)?;
    let mut header = vec!["T".to_string()];
    header.extend(
        kappas
            .iter()
            .map(|k| format!("kappa_{}", output::number(*k))),
    );
    let mut table = Table::new(header);
    for (i, &t) in grid.iter().enumerate() {
        let mut row = vec![t];
        row.extend(sw.curves.iter().map(|c| c.points[i].objective));
        table.push(row);
    }
    let curves: Vec<Value> = sw
        .curves
        .iter()
        .map(|c| {
            json!({
                "kappa": c.kappa,
                "argmax_T": c.argmax_duration(),
                "max_objective": c.points.iter().map(|p| p.objective).fold(f64::NEG_INFINITY, f64::max),
                "max_decrease": c.max_decrease(),
                "cross_checks": c.cross_checks,
            })
        })
        .collect();
    Ok(Output {
        summary: json!({
            "bounds": [bounds.u_max, bounds.j_max],
            "segments": opts.maximize.segments,
            "grid": { "first": grid[0], "last": grid[grid.len() - 1], "points": grid.len() },
            "curves": curves,
        }),
        table: Some(table),
    })
}

pub fn entangle(ctx: &Ctx) -> Result<Output, CliError> {
    let amps = ctx
        .cfg
        .amplitudes
        .as_ref()
        .ok_or_else(|| CliError::config("entangle needs amplitudes (twelve numbers)"))?;
    if amps.len() != 12 || amps.iter().any(|v| !v.is_finite()) {
        return Err(CliError::config(format!(
            "amplitudes: expected twelve finite numbers, got {}",
            amps.len()
        )));
    }
    let s = TruncatedState::from_array(std::array::from_fn(|k| {
        C64::new(amps[2 * k], amps[2 * k + 1])
    }));
    let c = concurrence(&s, ctx.cfg.alpha.unwrap_or(0.0));
    let exact = entanglement_exact(&s);
    let approx = eigenvalue_approximations(&s).ok();
    Ok(Output {
        summary: json!({
            "norm_sqr": s.norm_sqr(),
            "concurrence": c,
            "maximum_for_alpha": ctx.cfg.alpha.map(entanglement::max_concurrence),
            "exact": exact,
            "entropy_of_concurrence": entanglement_of_concurrence(c.full).ok(),
            "approximate_eigenvalues": approx,
        }),
        table: None,
    })
}
