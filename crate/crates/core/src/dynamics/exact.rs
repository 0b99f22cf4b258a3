//! Closed-form propagation for constant controls.
//!
//! Every block of the truncated Hamiltonian is (or reduces to) a 2x2 matrix of
//! the form `m I + bz sz + bx sx` with complex `m` (the loss term enters only
//! through `m`) and real `bz`, `bx`. Its exponential is
//!
//! ```text
//! exp(-i A tau) = exp(-i m tau) [cos(r tau) I - i sin(r tau)/r (bz sz + bx sx)],
//! r = sqrt(bz^2 + bx^2).
//! ```
//!
//! The three-quanta-free two-quantum block splits into the symmetric pair
//! `((c20 + c02)/sqrt2, c11)` and the antisymmetric scalar `(c20 - c02)/sqrt2`.

use std::f64::consts::SQRT_2;

use crate::{JunctionParams, TruncatedState, C64};

pub type Mat2 = [[C64; 2]; 2];

const I: C64 = C64::new(0.0, 1.0);

#[inline]
fn sinc_scaled(r: f64, tau: f64) -> f64 {
    // sin(r tau) / r
    let x = r * tau;
    if x.abs() < 1e-4 {
        tau * (1.0 - x * x / 6.0)
    } else {
        x.sin() / r
    }
}

#[inline]
fn sinc_slope(r: f64, tau: f64) -> f64 {
    // (d/dr [sin(r tau)/r]) / r
    let x = r * tau;
    if x.abs() < 1e-3 {
        tau.powi(3) * (-1.0 / 3.0 + x * x / 30.0)
    } else {
        (x * x.cos() - x.sin()) / (r * r * r)
    }
}

/// `exp(-i (m I + bz sz + bx sx) tau)`.
pub fn expm2(m: C64, bz: f64, bx: f64, tau: f64) -> Mat2 {
    let r = bz.hypot(bx);
    let c = (r * tau).cos();
    let f = sinc_scaled(r, tau);
    let phase = (-I * m * tau).exp();
    [
        [phase * C64::new(c, -f * bz), phase * C64::new(0.0, -f * bx)],
        [phase * C64::new(0.0, -f * bx), phase * C64::new(c, f * bz)],
    ]
}

/// Propagator and its partial derivatives with respect to `bz` and `bx`.
/// The derivative with respect to `m` is `-i tau P`.
pub fn expm2_with_grad(m: C64, bz: f64, bx: f64, tau: f64) -> (Mat2, Mat2, Mat2) {
    let r = bz.hypot(bx);
    let c = (r * tau).cos();
    let f = sinc_scaled(r, tau);
    let g = sinc_slope(r, tau);
    let phase = (-I * m * tau).exp();
    let p = [
        [phase * C64::new(c, -f * bz), phase * C64::new(0.0, -f * bx)],
        [phase * C64::new(0.0, -f * bx), phase * C64::new(c, f * bz)],
    ];
    // d/dbz
    let dc = -tau * f * bz;
    let df = g * bz;
    let dz = [
        [
            phase * C64::new(dc, -(df * bz + f)),
            phase * C64::new(0.0, -df * bx),
        ],
        [
            phase * C64::new(0.0, -df * bx),
            phase * C64::new(dc, df * bz + f),
        ],
    ];
    // d/dbx
    let dc = -tau * f * bx;
    let df = g * bx;
    let dx = [
        [
            phase * C64::new(dc, -df * bz),
            phase * C64::new(0.0, -(df * bx + f)),
        ],
        [
            phase * C64::new(0.0, -(df * bx + f)),
            phase * C64::new(dc, df * bz),
        ],
    ];
    (p, dz, dx)
}

#[inline]
pub fn apply(m: &Mat2, v: [C64; 2]) -> [C64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

/// `m^H v`.
#[inline]
pub fn apply_adjoint(m: &Mat2, v: [C64; 2]) -> [C64; 2] {
    [
        m[0][0].conj() * v[0] + m[1][0].conj() * v[1],
        m[0][1].conj() * v[0] + m[1][1].conj() * v[1],
    ]
}

/// Block coefficients `(m, bz, bx)` of the one-quantum block.
#[inline]
pub fn one_quantum_block(j: f64, omega: C64) -> (C64, f64, f64) {
    (omega, 0.0, -j)
}

/// Block coefficients `(m, bz, bx)` of the symmetric two-quantum pair
/// `((c20 + c02)/sqrt2, c11)`.
#[inline]
pub fn symmetric_block(u: f64, j: f64, omega: C64) -> (C64, f64, f64) {
    (u + 2.0 * omega, u, -2.0 * j)
}

/// Exact propagator of the full truncated system over one interval with
/// constant controls.
#[derive(Debug, Clone, Copy)]
pub struct SegmentPropagator {
    one: Mat2,
    sym: Mat2,
    anti: C64,
}

impl SegmentPropagator {
    pub fn new(u: f64, j: f64, params: &JunctionParams, tau: f64) -> Self {
        let omega = crate::dissipation::effective_params(params).omega_eff;
        let (m1, z1, x1) = one_quantum_block(j, omega);
        let (m2, z2, x2) = symmetric_block(u, j, omega);
        Self {
            one: expm2(m1, z1, x1, tau),
            sym: expm2(m2, z2, x2, tau),
            anti: (-I * (2.0 * u + 2.0 * omega) * tau).exp(),
        }
    }

    pub fn apply(&self, s: &TruncatedState) -> TruncatedState {
        let [c10, c01] = apply(&self.one, [s.c10, s.c01]);
        let sym = (s.c20 + s.c02) / SQRT_2;
        let anti = (s.c20 - s.c02) / SQRT_2 * self.anti;
        let [sym, c11] = apply(&self.sym, [sym, s.c11]);
        TruncatedState {
            c00: s.c00,
            c10,
            c01,
            c11,
            c20: (sym + anti) / SQRT_2,
            c02: (sym - anti) / SQRT_2,
        }
    }
}
