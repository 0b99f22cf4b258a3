//! Entanglement between the two junction modes.
//!
//! For the truncated pure state the reduced density matrix of mode 1 is 3x3,
//! with characteristic polynomial `-l^3 + tr l^2 - (C^2/4) l + D` where `C` is
//! the concurrence and `D = |c11 c02 c20|^2`. In the weak-pumping limit the
//! concurrence is dominated by `2 |c11 - c10 c01|`, bounded by
//! `(1 + sqrt2) alpha^2`.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, TruncatedState, C64};

pub type Matrix3 = [[C64; 3]; 3];

/// Eigenvalues below this are treated as rounding noise and clipped to zero.
pub const EIGENVALUE_FLOOR: f64 = -1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcurrenceValue {
    pub full: f64,
    pub dominant: f64,
    /// `dominant / alpha^2`; `None` when `alpha = 0`.
    pub normalized: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementResult {
    /// Descending.
    pub eigenvalues: [f64; 3],
    /// Bits.
    pub entropy: f64,
    pub d: f64,
    pub trace: f64,
    /// Largest `|p(l)|` of the characteristic polynomial over the eigenvalues.
    pub cubic_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxEigenvalues {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

/// `rho_1 = Tr_2 |psi><psi|` in the basis `|0>, |1>, |2>` of mode 1.
pub fn reduced_density(s: &TruncatedState) -> Matrix3 {
    let r00 = s.c00.norm_sqr() + s.c01.norm_sqr() + s.c02.norm_sqr();
    let r11 = s.c10.norm_sqr() + s.c11.norm_sqr();
    let r22 = s.c20.norm_sqr();
    let r01 = s.c00 * s.c10.conj() + s.c11.conj() * s.c01;
    let r02 = s.c00 * s.c20.conj();
    let r12 = s.c10 * s.c20.conj();
    [
        [C64::new(r00, 0.0), r01, r02],
        [r01.conj(), C64::new(r11, 0.0), r12],
        [r02.conj(), r12.conj(), C64::new(r22, 0.0)],
    ]
}

/// Six-term concurrence of the truncated state.
pub fn full_concurrence(s: &TruncatedState) -> f64 {
    let sum = (s.c00 * s.c11 - s.c10 * s.c01).norm_sqr()
        + (s.c10 * s.c02).norm_sqr()
        + (s.c01 * s.c20).norm_sqr()
        + (s.c11 * s.c02).norm_sqr()
        + (s.c11 * s.c20).norm_sqr()
        + (s.c02 * s.c20).norm_sqr();
    2.0 * sum.sqrt()
}

/// `2 |c11 - c10 c01|`.
pub fn dominant_concurrence(s: &TruncatedState) -> f64 {
    2.0 * s.correlation().norm()
}

pub fn concurrence(s: &TruncatedState, alpha: f64) -> ConcurrenceValue {
    let dominant = dominant_concurrence(s);
    ConcurrenceValue {
        full: full_concurrence(s),
        dominant,
        normalized: (alpha > 0.0).then(|| dominant / (alpha * alpha)),
    }
}

/// `|c11 c02 c20|^2`, the determinant of `rho_1`.
pub fn triple_product(s: &TruncatedState) -> f64 {
    (s.c11 * s.c02 * s.c20).norm_sqr()
}

/// `-l^3 + trace l^2 - (c^2 / 4) l + d`.
pub fn characteristic_polynomial(lambda: f64, trace: f64, c: f64, d: f64) -> f64 {
    ((-lambda + trace) * lambda - c * c / 4.0) * lambda + d
}

/// Eigenvalues of a Hermitian 3x3 matrix by cyclic complex Jacobi rotations,
/// sorted in descending order.
pub fn hermitian_eigenvalues(m: &Matrix3) -> [f64; 3] {
    let mut a = *m;
    for _sweep in 0..64 {
        let off: f64 = (0..3)
            .flat_map(|p| (p + 1..3).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q].norm_sqr())
            .sum();
        let diag: f64 = (0..3).map(|k| a[k][k].re * a[k][k].re).sum();
        if off <= 1e-34 * diag || off == 0.0 {
            break;
        }
        for p in 0..2 {
            for q in p + 1..3 {
                rotate(&mut a, p, q);
            }
        }
    }
    let mut ev = [a[0][0].re, a[1][1].re, a[2][2].re];
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

fn rotate(a: &mut Matrix3, p: usize, q: usize) {
    let apq = a[p][q];
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    // V = diag(1, e^{-i phi}) on (p, q) makes the pivot real, then a real
    // Jacobi rotation [[c, s], [-s, c]] zeroes it.
    let phase = apq / g;
    let (app, aqq) = (a[p][p].re, a[q][q].re);
    let theta = (aqq - app) / (2.0 * g);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let mut v = [[C64::new(0.0, 0.0); 3]; 3];
    for (k, row) in v.iter_mut().enumerate() {
        row[k] = C64::new(1.0, 0.0);
    }
    v[p][p] = C64::new(c, 0.0);
    v[p][q] = C64::new(s, 0.0);
    v[q][p] = -phase.conj() * s;
    v[q][q] = phase.conj() * c;
    // a <- V^H a V
    let mut av = [[C64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            av[i][j] = (0..3).map(|k| a[i][k] * v[k][j]).sum();
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            a[i][j] = (0..3).map(|k| v[k][i].conj() * av[k][j]).sum();
        }
    }
    a[p][q] = C64::new(0.0, 0.0);
    a[q][p] = C64::new(0.0, 0.0);
    for k in 0..3 {
        a[k][k].im = 0.0;
    }
}

/// `-x log2 x - (1 - x) log2 (1 - x)` with `0 log 0 = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    plogp(x) + plogp(1.0 - x)
}

fn plogp(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// Entropy of entanglement from all three exact eigenvalues of `rho_1`.
pub fn entanglement_exact(s: &TruncatedState) -> EntanglementResult {
    let rho = reduced_density(s);
    let trace = rho[0][0].re + rho[1][1].re + rho[2][2].re;
    let raw = hermitian_eigenvalues(&rho);
    let d = triple_product(s);
    let c = full_concurrence(s);
    let cubic_residual = raw
        .iter()
        .map(|&l| characteristic_polynomial(l, trace, c, d).abs())
        .fold(0.0, f64::max);
    debug_assert!(raw.iter().all(|&l| l >= EIGENVALUE_FLOOR * trace.max(1.0)));
    let eigenvalues = raw.map(|l| l.max(0.0));
    EntanglementResult {
        eigenvalues,
        entropy: eigenvalues.iter().map(|&l| plogp(l)).sum(),
        d,
        trace,
        cubic_residual,
    }
}

/// Rounding slack accepted above `C = 1` before rejecting.
const UNIT_SLACK: f64 = 1e-12;

/// `E(C) = h((1 + sqrt(1 - C^2)) / 2)`.
pub fn entanglement_of_concurrence(c: f64) -> Result<f64> {
    if !(0.0..=1.0 + UNIT_SLACK).contains(&c) {
        return Err(Error::param(
            "concurrence",
            format!("must lie in [0, 1], got {c}"),
        ));
    }
    let c = c.min(1.0);
    Ok(binary_entropy((1.0 + (1.0 - c * c).sqrt()) / 2.0))
}

/// Weak-pumping estimates `l3 = 4D / C^2`, `l12 = (1 +- sqrt(1 - C^2)) / 2`
/// using the full concurrence.
pub fn eigenvalue_approximations(s: &TruncatedState) -> Result<ApproxEigenvalues> {
    let c = full_concurrence(s);
    if c == 0.0 {
        return Err(Error::param(
            "concurrence",
            "eigenvalue estimates need C > 0",
        ));
    }
    if c > 1.0 + UNIT_SLACK {
        return Err(Error::param(
            "concurrence",
            format!("must be <= 1, got {c}"),
        ));
    }
    let c = c.min(1.0);
    let root = (1.0 - c * c).sqrt();
    Ok(ApproxEigenvalues {
        lambda1: (1.0 + root) / 2.0,
        lambda2: (1.0 - root) / 2.0,
        lambda3: 4.0 * triple_product(s) / (c * c),
    })
}

/// `(1 + sqrt2) alpha^2`.
pub fn max_concurrence(alpha: f64) -> f64 {
    (1.0 + SQRT_2) * alpha * alpha
}
