use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

use bjj_core::dynamics::{initial_state, product_phase, propagate, DEFAULT_STEPS};
use bjj_core::shortcuts::{
    accumulated_u_phase, controls_at, counterdiabatic_controls, duration_integrand, duration_lhs,
    duration_lhs_with, estimate_min_duration, phases, propagate_two_level, solve_coeffs_e,
    solve_coeffs_phi, solve_duration, two_level_reduce, wrap_angle, Knots, Shortcut, DEFAULT_KNOTS,
};
use bjj_core::{ControlSchedule, InitialPreparation, JunctionParams, PrepMode, ReferenceProfile};
use nalgebra::{DMatrix, DVector};

fn profiles() -> [ReferenceProfile; 2] {
    [
        ReferenceProfile::original(),
        ReferenceProfile::fast(DEFAULT_KNOTS).unwrap(),
    ]
}

/// `d^n/ds^n s^k` evaluated at `s`.
fn monomial_derivative(k: usize, n: usize, s: f64) -> f64 {
    if n > k {
        return 0.0;
    }
    let falling: f64 = ((k - n + 1)..=k).map(|v| v as f64).product();
    falling * s.powi((k - n) as i32)
}

fn oracle_solve(rows: Vec<Vec<f64>>, rhs: Vec<f64>) -> Vec<f64> {
    let n = rhs.len();
    let a = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let x = a
        .lu()
        .solve(&DVector::from_vec(rhs))
        .expect("oracle system singular");
    x.iter().copied().collect()
}

fn assert_coeffs_close(got: &[f64], want: &[f64]) {
    let scale = want.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() <= 1e-9 * scale, "{g} vs {w}");
    }
}

#[test]
fn energy_coefficients_match_oracle() {
    for s0 in [0.9, 0.5, 0.75] {
        let rows = vec![
            (0..5).map(|k| monomial_derivative(k, 0, 1.0)).collect(),
            (0..5).map(|k| monomial_derivative(k, 1, 1.0)).collect(),
            (0..5).map(|k| monomial_derivative(k, 0, s0)).collect(),
            (0..5).map(|k| monomial_derivative(k, 1, s0)).collect(),
            (0..5).map(|k| monomial_derivative(k, 2, s0)).collect(),
        ];
        let want = oracle_solve(rows, vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_coeffs_close(&solve_coeffs_e(s0).unwrap(), &want);
    }
}

#[test]
fn phi_coefficients_match_oracle() {
    let (s1, s2) = (0.2, 0.8);
    // phi_a = pi/2 + sum_{k=3..6} a_k s^k
    let rows: Vec<Vec<f64>> = (0..4)
        .map(|n| (3..7).map(|k| monomial_derivative(k, n, s1)).collect())
        .collect();
    let a36 = oracle_solve(rows, vec![FRAC_PI_4 - FRAC_PI_2, 0.0, 0.0, 0.0]);
    let mut rows: Vec<Vec<f64>> = (0..2)
        .map(|n| (0..6).map(|k| monomial_derivative(k, n, 1.0)).collect())
        .collect();
    rows.extend((0..4).map(|n| (0..6).map(|k| monomial_derivative(k, n, s2)).collect()));
    let b05 = oracle_solve(rows, vec![0.0, 0.0, FRAC_PI_4, 0.0, 0.0, 0.0]);
    let (a, b) = solve_coeffs_phi(s1, s2).unwrap();
    assert_eq!(a[0], FRAC_PI_2);
    assert_eq!((a[1], a[2]), (0.0, 0.0));
    assert_coeffs_close(&a[3..], &a36);
    assert_coeffs_close(&b, &b05);
}

#[test]
fn profile_boundary_conditions() {
    for p in profiles() {
        let (start, end) = (p.at(0.0), p.at(1.0));
        assert!((start.phi - FRAC_PI_2).abs() < 1e-12);
        assert!(end.phi.abs() < 1e-9);
        assert!(start.dphi.abs() < 1e-12 && end.dphi.abs() < 1e-8);
        assert!(start.ddphi.abs() < 1e-12);
        assert!((start.e - 1.0).abs() < 1e-12 && end.e.abs() < 1e-9);
    }
}

#[test]
fn fast_profile_plateaus_and_smoothness() {
    let p = ReferenceProfile::fast(DEFAULT_KNOTS).unwrap();
    let mid = p.at(0.5);
    assert!((mid.phi - FRAC_PI_4).abs() < 1e-15 && mid.e == 1.0);
    // each piece evaluated at the shared knot
    let check = |pw: &bjj_core::numerics::Piecewise, derivs: usize| {
        for (k, &knot) in pw.breaks()[1..pw.breaks().len() - 1].iter().enumerate() {
            let l = pw.pieces()[k].eval_derivs::<4>(knot);
            let r = pw.pieces()[k + 1].eval_derivs::<4>(knot);
            for d in 0..derivs {
                assert!(
                    (l[d] - r[d]).abs() <= 1e-10,
                    "derivative {d} at {knot}: {} vs {}",
                    l[d],
                    r[d]
                );
            }
        }
    };
    check(p.phi_pieces(), 4);
    check(p.energy_pieces(), 3);
}

#[test]
fn plateau_controls_are_reference_controls() {
    let p = ReferenceProfile::fast(DEFAULT_KNOTS).unwrap();
    let c = controls_at(&p, 15.665, 0.5);
    assert!((c.u - 0.5 * SQRT_2 / 2.0).abs() <= 1e-12);
    assert!((c.j - 0.25 * SQRT_2 / 2.0).abs() <= 1e-12);
}

#[test]
fn controls_are_nonnegative_and_of_bounded_size() {
    for p in profiles() {
        let t = solve_duration(&p).unwrap();
        let (sched, _) = counterdiabatic_controls(&p, t, 4001).unwrap();
        let (mut umax, mut jmax): (f64, f64) = (0.0, 0.0);
        for c in sched.samples() {
            assert!(c.u >= -1e-9 && c.j >= 0.0, "negative control {c:?}");
            umax = umax.max(c.u);
            jmax = jmax.max(c.j);
        }
        assert!(umax <= 2.0 && jmax <= 0.5, "{umax} {jmax}");
    }
}

#[test]
fn gauge_angle_boundaries() {
    for p in profiles() {
        let t = solve_duration(&p).unwrap();
        let (_, rec) = counterdiabatic_controls(&p, t, 4001).unwrap();
        let n = rec.b.len();
        assert!(rec.b[0].abs() <= 1e-8);
        assert!(
            (rec.b[n - 1] + FRAC_PI_2).abs() <= 1e-8,
            "b(T) = {}",
            rec.b[n - 1]
        );
        // one-sided slopes at both ends, scaled to the sample spacing
        let h = rec.times[1];
        assert!(((rec.b[1] - rec.b[0]) / h).abs() < 1e-2);
        let near_end = controls_at(&p, t, 1.0 - 1e-7).b;
        assert!((wrap_angle(near_end) + FRAC_PI_2).abs() < 1e-3);
    }
}

#[test]
fn duration_lhs_at_reported_durations() {
    let [orig, fast] = profiles();
    assert!((duration_lhs(&orig, 77.724).unwrap() - PI).abs() <= 2e-3);
    assert!((duration_lhs(&fast, 15.665).unwrap() - PI).abs() <= 2e-3);
}

#[test]
fn duration_quadrature_converged() {
    for p in profiles() {
        for t in [10.0, 50.0] {
            let a = duration_lhs_with(&p, t, 4001).unwrap();
            let b = duration_lhs_with(&p, t, 8001).unwrap();
            assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
    }
}

#[test]
fn duration_lhs_grows_linearly() {
    for p in profiles() {
        let a = duration_lhs(&p, 1e3).unwrap();
        let b = duration_lhs(&p, 2e3).unwrap();
        // T * int (E/2)(cos phi + sin phi - 1) ds plus O(1/T)
        let slope: f64 = (0..=4000)
            .map(|k| {
                let q = p.at(k as f64 / 4000.0);
                let w = if k == 0 || k == 4000 { 0.5 } else { 1.0 };
                w * 0.5 * q.e * (q.phi.cos() + q.phi.sin() - 1.0) / 4000.0
            })
            .sum();
        assert!((b / a - 2.0).abs() < 1e-2, "{a} {b}");
        assert!((a / 1e3 - slope).abs() < 1e-3 * slope.abs().max(1e-3));
    }
}

#[test]
fn duration_roots_and_estimate() {
    let [orig, fast] = profiles();
    let t_orig = solve_duration(&orig).unwrap();
    let t_fast = solve_duration(&fast).unwrap();
    assert!((t_orig - 77.724).abs() <= 0.05);
    assert!((t_fast - 15.665).abs() <= 0.05);
    for (p, t) in [(&orig, t_orig), (&fast, t_fast)] {
        assert!((duration_lhs(p, t).unwrap() - PI).abs() <= 1e-8);
    }
    let est = estimate_min_duration();
    assert!(est < t_fast);
    assert!((est - 2.0 * PI * (SQRT_2 + 1.0)).abs() < 1e-12);
}

#[test]
fn constant_profile_integrand_matches_estimate() {
    // phi = pi/4, E = 1: integrand (cos + sin - 1)/2 exactly
    let phi = bjj_core::numerics::Piecewise::single(
        0.0,
        1.0,
        bjj_core::numerics::Polynomial::constant(FRAC_PI_4),
    );
    let e = bjj_core::numerics::Piecewise::single(
        0.0,
        1.0,
        bjj_core::numerics::Polynomial::constant(1.0),
    );
    let p = ReferenceProfile::custom(phi, e);
    let v = duration_integrand(&p, 10.0, 0.3);
    assert!((v - 0.5 * (SQRT_2 - 1.0)).abs() < 1e-15);
    let t = solve_duration(&p).unwrap();
    assert!((t - estimate_min_duration()).abs() < 1e-6);
}

#[test]
fn phases_match_condition_and_product_phase() {
    for p in profiles() {
        let cut = Shortcut::build(p).unwrap();
        assert!(cut.phases.phase_mismatch() <= 1e-6);
        let recomputed = phases(&cut.profile, cut.duration, &cut.schedule);
        assert!((recomputed.theta - cut.phases.theta).abs() < 1e-12);
        let pp = product_phase(&cut.schedule, 0.1);
        assert!(wrap_angle(pp.arg() - cut.phases.zeta).abs() <= 1e-6);
    }
}

#[test]
fn zero_length_schedule_has_no_phase() {
    let sched = ControlSchedule::new(vec![bjj_core::ControlSample {
        t: 0.0,
        u: 0.3,
        j: 0.1,
    }])
    .unwrap();
    let rec = phases(&ReferenceProfile::original(), 0.0, &sched);
    assert_eq!((rec.theta, rec.zeta), (0.0, 0.0));
}

#[test]
fn delivery_through_full_and_reduced_dynamics() {
    let alpha = 0.1;
    let prep = InitialPreparation::symmetric(alpha).unwrap();
    let a2 = alpha * alpha;
    for p in profiles() {
        let cut = Shortcut::build(p).unwrap();
        let psi0 = initial_state(&prep, PrepMode::LeadingOrder);
        let traj = propagate(
            &psi0,
            &cut.schedule,
            &JunctionParams::lossless(),
            DEFAULT_STEPS,
        )
        .unwrap();
        let last = traj.last();
        assert!(last.c20.norm() <= 1e-3 * a2 && last.c02.norm() <= 1e-3 * a2);
        assert!((last.c11.norm() - a2 / SQRT_2).abs() <= 1e-3 * a2);

        let uphase = accumulated_u_phase(&cut.schedule, DEFAULT_STEPS);
        let two0 = two_level_reduce(&psi0, 0.0);
        assert!(
            (two0.psi1.re - a2 / SQRT_2).abs() < 1e-15
                && (two0.psi2.re - a2 / SQRT_2).abs() < 1e-15
        );
        let reduced = propagate_two_level(&two0, &cut.schedule, DEFAULT_STEPS).unwrap();
        for k in (0..=DEFAULT_STEPS).step_by(DEFAULT_STEPS / 100) {
            let from_full = two_level_reduce(&traj.states[k], uphase[k]);
            assert!((reduced[k].norm() - a2).abs() <= 1e-12);
            assert!((from_full.psi1 - reduced[k].psi1).norm() <= 1e-9 * a2);
            assert!((from_full.psi2 - reduced[k].psi2).norm() <= 1e-9 * a2);
        }
        assert!(reduced[DEFAULT_STEPS].psi1.norm() <= 1e-3 * a2);
    }
}

#[test]
fn custom_knots_still_deliver() {
    let knots = Knots {
        s0: 0.85,
        s1: 0.25,
        s2: 0.75,
    };
    let cut = Shortcut::build(ReferenceProfile::fast(knots).unwrap()).unwrap();
    let prep = InitialPreparation::symmetric(0.1).unwrap();
    let psi0 = initial_state(&prep, PrepMode::LeadingOrder);
    let traj = propagate(
        &psi0,
        &cut.schedule,
        &JunctionParams::lossless(),
        DEFAULT_STEPS,
    )
    .unwrap();
    let c = bjj_core::entanglement::dominant_concurrence(traj.last()) / 0.01;
    assert!((c - (1.0 + SQRT_2)).abs() < 1e-3, "{c}");
}
