use bjj_core::dynamics::{initial_state, propagate};
use bjj_core::entanglement::dominant_concurrence;
use bjj_core::optimal_control::{
    maximize, minimum_time, objective, shortcut_start, sweep, Bounds, ControlVector,
    MaximizeOptions, MinimumTimeOptions, Problem, SweepOptions, MAX_NORMALIZED_CONCURRENCE,
};
use bjj_core::shortcuts::{counterdiabatic_controls, solve_duration, DEFAULT_KNOTS};
use bjj_core::{
    ControlSchedule, Error, InitialPreparation, JunctionParams, PrepMode, ReferenceProfile,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn prep() -> InitialPreparation {
    InitialPreparation::symmetric(0.1).unwrap()
}

/// Segment-by-segment RK4 with constant controls on each segment.
fn rk4_objective(c: &ControlVector, params: &JunctionParams) -> f64 {
    let tau = c.segment_length();
    let mut psi = initial_state(&prep(), PrepMode::LeadingOrder);
    for (&u, &j) in c.u.iter().zip(&c.j) {
        let sched = ControlSchedule::constant(tau, u, j).unwrap();
        psi = *propagate(&psi, &sched, params, 200).unwrap().last();
    }
    dominant_concurrence(&psi) / prep().alpha_sq()
}

#[test]
fn adjoint_gradient_matches_central_differences() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for trial in 0..20 {
        let t = 1.0 + 9.0 * rng.random::<f64>();
        let kappa = if trial % 2 == 0 {
            0.0
        } else {
            0.1 * rng.random::<f64>()
        };
        let params = JunctionParams::new(rng.random::<f64>() - 0.5, kappa).unwrap();
        let n = 10 + trial;
        let problem = Problem::new(t, n, Bounds::default(), &prep(), &params).unwrap();
        let x: Vec<f64> = (0..2 * n)
            .map(|k| {
                if k < n {
                    rng.random::<f64>()
                } else {
                    0.25 * rng.random::<f64>()
                }
            })
            .collect();
        let (_, g) = problem.value_and_gradient(&x);
        let fd = problem.gradient_fd(&x, 1e-6);
        let norm = fd.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (a, b) in g.iter().zip(&fd) {
            assert!(
                (a - b).abs() <= 1e-4 * norm.max(1e-3),
                "trial {trial}: {a} vs {b}"
            );
        }
    }
}

proptest! {
    #[test]
    fn projection_is_idempotent_and_in_bounds(x in prop::collection::vec(-1.0..2.0f64, 40),
                                              u_max in 0.0..2.0f64, j_max in 0.0..1.0f64) {
        let b = Bounds::new(u_max, j_max).unwrap();
        let mut y = x.clone();
        b.project(&mut y);
        let once = y.clone();
        b.project(&mut y);
        prop_assert_eq!(&y, &once);
        prop_assert!(ControlVector::from_flat(1.0, &once).check_bounds(&b).is_ok());
    }
}

#[test]
fn block_objective_agrees_with_rk4() {
    let opts = MaximizeOptions {
        seeds: 2,
        ..Default::default()
    };
    let params = JunctionParams::lossless();
    let r = maximize(6.0, &Bounds::default(), &params, &opts).unwrap();
    assert!((rk4_objective(&r.best, &params) - r.objective).abs() <= 1e-8);
    let lossy = JunctionParams::new(0.2, 0.05).unwrap();
    let full = objective(&r.best, &Bounds::default(), &prep(), &lossy).unwrap();
    assert!((rk4_objective(&r.best, &lossy) - full).abs() <= 1e-8);
}

#[test]
fn seeded_runs_are_reproducible() {
    let opts = MaximizeOptions {
        seeds: 3,
        seed: 42,
        ..Default::default()
    };
    let params = JunctionParams::lossless();
    let a = maximize(5.0, &Bounds::default(), &params, &opts).unwrap();
    let b = maximize(5.0, &Bounds::default(), &params, &opts).unwrap();
    assert_eq!(a, b);
}

#[test]
fn feasible_and_infeasible_durations() {
    let params = JunctionParams::lossless();
    let opts = MaximizeOptions::default();
    let r7 = maximize(7.0, &Bounds::default(), &params, &opts).unwrap();
    assert!(r7.objective >= 0.995 * MAX_NORMALIZED_CONCURRENCE);
    assert!(r7.objective <= MAX_NORMALIZED_CONCURRENCE + 1e-6);
    assert!(r7.converged);
    r7.best.check_bounds(&Bounds::default()).unwrap();
    let r2 = maximize(2.0, &Bounds::default(), &params, &opts).unwrap();
    assert!(r2.objective < MAX_NORMALIZED_CONCURRENCE - 0.1);
}

#[test]
fn resampled_fast_shortcut_reaches_maximum() {
    let profile = ReferenceProfile::fast(DEFAULT_KNOTS).unwrap();
    let t = 15.665;
    let (sched, _) = counterdiabatic_controls(&profile, t, 4001).unwrap();
    let c = ControlVector::from_fn(t, 1000, |x| sched.controls_at(x));
    let wide = Bounds::new(10.0, 10.0).unwrap();
    let v = objective(&c, &wide, &prep(), &JunctionParams::lossless()).unwrap();
    assert!((v - MAX_NORMALIZED_CONCURRENCE).abs() <= 5e-3, "{v}");
}

#[test]
fn optimizer_dominates_shortcut() {
    let profile = ReferenceProfile::fast(DEFAULT_KNOTS).unwrap();
    let t = solve_duration(&profile).unwrap();
    let bounds = Bounds::default();
    let params = JunctionParams::lossless();
    let seed = shortcut_start(t, 100, &bounds).unwrap();
    let shortcut_value = objective(&seed, &bounds, &prep(), &params).unwrap();
    let r = maximize(
        t,
        &bounds,
        &params,
        &MaximizeOptions {
            seeds: 2,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(r.objective >= shortcut_value - 1e-3);
}

#[test]
fn minimum_time_orderings() {
    let params = JunctionParams::lossless();
    let opts = MinimumTimeOptions::default();
    let base = minimum_time(&Bounds::default(), 0.005, &params, &opts).unwrap();
    assert!((6.3..=7.2).contains(&base.duration), "{}", base.duration);
    assert!(base.duration - base.infeasible_below <= opts.resolution);
    assert!(base.objective >= base.target);
    let loose = minimum_time(&Bounds::new(2.0, 0.5).unwrap(), 0.005, &params, &opts).unwrap();
    assert!(loose.duration < base.duration);
    let relaxed = minimum_time(&Bounds::default(), 0.05, &params, &opts).unwrap();
    assert!(relaxed.duration <= base.duration);
}

#[test]
fn minimum_time_errors() {
    let params = JunctionParams::lossless();
    let opts = MinimumTimeOptions {
        t_max: 3.0,
        ..Default::default()
    };
    assert!(matches!(
        minimum_time(&Bounds::default(), 0.005, &params, &opts),
        Err(Error::Infeasible { .. })
    ));
    assert!(minimum_time(&Bounds::default(), 0.0, &params, &opts).is_err());
    assert!(minimum_time(&Bounds::default(), 0.06, &params, &opts).is_err());
}

#[test]
fn lossy_curves_follow_lossless_curve() {
    let grid: Vec<f64> = (0..=8).map(|k| 3.0 + 0.5 * k as f64).collect();
    let opts = SweepOptions {
        maximize: MaximizeOptions {
            seeds: 4,
            ..Default::default()
        },
        ..Default::default()
    };
    let sw = sweep(&grid, &Bounds::default(), &[0.0, 0.05, 0.1], &opts).unwrap();
    assert_eq!(sw.controls.len(), grid.len());
    let base = &sw.curves[0];
    assert!(base.max_decrease() <= 1e-3);
    for curve in &sw.curves[1..] {
        for (p, q) in curve.points.iter().zip(&base.points) {
            assert!((p.objective - q.objective * (-curve.kappa * q.duration).exp()).abs() <= 1e-8);
        }
        assert_eq!(curve.cross_checks.len(), 3);
        for x in &curve.cross_checks {
            assert!((x.propagated - x.factorized).abs() <= 1e-8);
            assert!((x.optimized.unwrap() - x.factorized).abs() <= 5e-3);
        }
    }
    let argmax: Vec<f64> = sw.curves.iter().map(|c| c.argmax_duration()).collect();
    assert!(argmax.windows(2).all(|w| w[1] <= w[0]), "{argmax:?}");
    assert!(sweep(&[], &Bounds::default(), &[0.0], &opts).is_err());
}
