//! Reference adiabatic paths `phi(s)`, `E0(s)` on the normalized time
//! `s = t / T`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::numerics::{self, Piecewise, Polynomial};
use crate::{Error, Result};

/// Maximum reference energy; the unit of energy throughout.
pub const E0_MAX: f64 = 1.0;

/// `(s0, s1, s2)` for the fast profile.
pub const DEFAULT_KNOTS: Knots = Knots {
    s0: 0.9,
    s1: 0.2,
    s2: 0.8,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// Quartic `phi` with a linear energy ramp.
    Original,
    /// Energy plateau up to `s0` and a `phi = pi/4` plateau on `[s1, s2)`.
    Fast,
    Custom,
}

/// Design knots of the fast profile: `E0` stays at its maximum on `[0, s0)`,
/// `phi` stays at `pi/4` on `[s1, s2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Knots {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
}

impl Default for Knots {
    fn default() -> Self {
        DEFAULT_KNOTS
    }
}

impl Knots {
    pub fn validate(&self) -> Result<()> {
        if !(self.s0 > 0.0 && self.s0 < 1.0) {
            return Err(Error::param(
                "s0",
                format!("must lie in (0, 1), got {}", self.s0),
            ));
        }
        if !(self.s1 > 0.0 && self.s1 < self.s2 && self.s2 < 1.0) {
            return Err(Error::param(
                "s1,s2",
                format!(
                    "need 0 < s1 < s2 < 1, got s1 = {}, s2 = {}",
                    self.s1, self.s2
                ),
            ));
        }
        Ok(())
    }
}

/// Value and derivatives with respect to `s` of both reference functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub phi: f64,
    pub dphi: f64,
    pub ddphi: f64,
    pub dddphi: f64,
    pub e: f64,
    pub de: f64,
    pub dde: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceProfile {
    kind: ProfileKind,
    knots: Option<Knots>,
    phi: Piecewise,
    energy: Piecewise,
}

impl ReferenceProfile {
    /// `phi(s) = pi/2 - 2 pi s^3 + (3 pi / 2) s^4`, `E0(s) = E0_max (1 - s)`.
    pub fn original() -> Self {
        let phi = Polynomial::new(vec![PI / 2.0, 0.0, 0.0, -2.0 * PI, 1.5 * PI]);
        let energy = Polynomial::new(vec![E0_MAX, -E0_MAX]);
        Self {
            kind: ProfileKind::Original,
            knots: None,
            phi: Piecewise::single(0.0, 1.0, phi),
            energy: Piecewise::single(0.0, 1.0, energy),
        }
    }

    pub fn fast(knots: Knots) -> Result<Self> {
        knots.validate()?;
        let e = solve_coeffs_e(knots.s0)?;
        let (a, b) = solve_coeffs_phi(knots.s1, knots.s2)?;
        let energy = Piecewise::new(
            vec![0.0, knots.s0, 1.0],
            vec![
                Polynomial::constant(E0_MAX),
                Polynomial::new(e.iter().map(|c| c * E0_MAX).collect()),
            ],
        )?;
        let phi = Piecewise::new(
            vec![0.0, knots.s1, knots.s2, 1.0],
            vec![
                Polynomial::new(a.to_vec()),
                Polynomial::constant(PI / 4.0),
                Polynomial::new(b.to_vec()),
            ],
        )?;
        Ok(Self {
            kind: ProfileKind::Fast,
            knots: Some(knots),
            phi,
            energy,
        })
    }

    /// Arbitrary piecewise-polynomial reference functions on `[0, 1]`.
    pub fn custom(phi: Piecewise, energy: Piecewise) -> Self {
        Self {
            kind: ProfileKind::Custom,
            knots: None,
            phi,
            energy,
        }
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn knots(&self) -> Option<Knots> {
        self.knots
    }

    /// `e0..e4` of the fast energy ramp.
    pub fn coeffs_e(&self) -> Option<&[f64]> {
        self.knots?;
        Some(&self.energy.pieces()[1].coeffs)
    }

    /// `a0..a6` of the fast `phi` on `[0, s1)`.
    pub fn coeffs_phi_a(&self) -> Option<&[f64]> {
        self.knots?;
        Some(&self.phi.pieces()[0].coeffs)
    }

    /// `b0..b5` of the fast `phi` on `[s2, 1]`.
    pub fn coeffs_phi_b(&self) -> Option<&[f64]> {
        self.knots?;
        Some(&self.phi.pieces()[2].coeffs)
    }

    pub fn phi_pieces(&self) -> &Piecewise {
        &self.phi
    }

    pub fn energy_pieces(&self) -> &Piecewise {
        &self.energy
    }

    pub fn at(&self, s: f64) -> ProfilePoint {
        let [phi, dphi, ddphi, dddphi] = self.phi.eval_derivs::<4>(s);
        let [e, de, dde] = self.energy.eval_derivs::<3>(s);
        ProfilePoint {
            phi,
            dphi,
            ddphi,
            dddphi,
            e,
            de,
            dde,
        }
    }
}

fn powers(s: f64) -> [f64; 7] {
    std::array::from_fn(|k| s.powi(k as i32))
}

/// Rows `[d^order/ds^order s^k]_{k < n}` at `s`.
fn derivative_row(s: f64, order: usize, n: usize) -> Vec<f64> {
    let p = powers(s);
    (0..n)
        .map(|k| {
            if k < order {
                0.0
            } else {
                let falling: f64 = (0..order).map(|i| (k - i) as f64).product();
                falling * p[k - order]
            }
        })
        .collect()
}

/// Linear system fixing `e0..e4`: `E(1) = E'(1) = 0`, `E(s0) = 1`,
/// `E'(s0) = E''(s0) = 0` (the last row is divided by two).
pub fn coeffs_e_system(s0: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut second = derivative_row(s0, 2, 5);
    second.iter_mut().for_each(|v| *v /= 2.0);
    (
        vec![
            derivative_row(1.0, 0, 5),
            derivative_row(1.0, 1, 5),
            derivative_row(s0, 0, 5),
            derivative_row(s0, 1, 5),
            second,
        ],
        vec![0.0, 0.0, 1.0, 0.0, 0.0],
    )
}

/// Linear system for `a3..a6`: `phi(s1) = pi/4`, `phi' = phi'' = phi''' = 0`
/// at `s1`, with `a0 = pi/2`, `a1 = a2 = 0` moved to the right-hand side.
pub fn coeffs_phi_a_system(s1: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let scale = [1.0, 1.0, 2.0, 6.0];
    let rows = (0..4)
        .map(|order| {
            derivative_row(s1, order, 7)[3..]
                .iter()
                .map(|v| v / scale[order])
                .collect()
        })
        .collect();
    (rows, vec![-PI / 4.0, 0.0, 0.0, 0.0])
}

/// Linear system for `b0..b5`: `phi(1) = phi'(1) = 0`, `phi(s2) = pi/4`,
/// `phi' = phi'' = phi''' = 0` at `s2`.
pub fn coeffs_phi_b_system(s2: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let scale = [1.0, 1.0, 2.0, 6.0];
    let mut rows = vec![derivative_row(1.0, 0, 6), derivative_row(1.0, 1, 6)];
    for order in 0..4 {
        rows.push(
            derivative_row(s2, order, 6)
                .iter()
                .map(|v| v / scale[order])
                .collect(),
        );
    }
    (rows, vec![0.0, 0.0, PI / 4.0, 0.0, 0.0, 0.0])
}

/// Residual tolerance for the boundary conditions, as a componentwise
/// backward error.
pub const COEFF_RESIDUAL_TOL: f64 = 1e-12;

pub fn solve_coeffs_e(s0: f64) -> Result<[f64; 5]> {
    if !(s0 > 0.0 && s0 < 1.0) {
        return Err(Error::param("s0", format!("must lie in (0, 1), got {s0}")));
    }
    let (a, b) = coeffs_e_system(s0);
    let x = numerics::solve_linear(&a, &b, "energy ramp coefficients")?;
    check_residual(&a, &x, &b, "energy ramp coefficients")?;
    Ok(x.try_into().unwrap())
}

pub fn solve_coeffs_phi(s1: f64, s2: f64) -> Result<([f64; 7], [f64; 6])> {
    if !(s1 > 0.0 && s1 < s2 && s2 < 1.0) {
        return Err(Error::param(
            "s1,s2",
            format!("need 0 < s1 < s2 < 1, got {s1}, {s2}"),
        ));
    }
    let (aa, ab) = coeffs_phi_a_system(s1);
    let tail = numerics::solve_linear(&aa, &ab, "phi rise coefficients")?;
    check_residual(&aa, &tail, &ab, "phi rise coefficients")?;
    let mut a = [0.0; 7];
    a[0] = PI / 2.0;
    a[3..].copy_from_slice(&tail);
    let (ba, bb) = coeffs_phi_b_system(s2);
    let b = numerics::solve_linear(&ba, &bb, "phi fall coefficients")?;
    check_residual(&ba, &b, &bb, "phi fall coefficients")?;
    Ok((a, b.try_into().unwrap()))
}

fn check_residual(a: &[Vec<f64>], x: &[f64], b: &[f64], context: &'static str) -> Result<()> {
    if numerics::relative_residual(a, x, b) > COEFF_RESIDUAL_TOL {
        return Err(Error::SingularSystem { context });
    }
    Ok(())
}
