//! Small numerical kernels: quadrature, dense linear solves, bracketing root
//! search and piecewise polynomials.

use crate::{Error, Result};

/// Composite Simpson rule over uniformly spaced samples.
///
/// With an even number of samples the last interval is integrated with the
/// trapezoid rule.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (values[0] + values[1]),
        _ => {
            let m = if n % 2 == 1 { n } else { n - 1 };
            let mut odd = 0.0;
            let mut even = 0.0;
            for (k, v) in values[1..m - 1].iter().enumerate() {
                if k % 2 == 0 {
                    odd += v;
                } else {
                    even += v;
                }
            }
            let mut acc = h / 3.0 * (values[0] + 4.0 * odd + 2.0 * even + values[m - 1]);
            if m != n {
                acc += 0.5 * h * (values[n - 2] + values[n - 1]);
            }
            acc
        }
    }
}

/// Trapezoid rule over arbitrary (sorted) abscissae.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// Solve the dense system `a x = b` by Gaussian elimination with partial
/// pivoting. `a` is row-major `n x n`.
pub fn solve_linear(a: &[Vec<f64>], b: &[f64], context: &'static str) -> Result<Vec<f64>> {
    let n = b.len();
    assert!(
        a.len() == n && a.iter().all(|r| r.len() == n),
        "shape mismatch"
    );
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::SingularSystem { context });
    }
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[pivot][col].abs() <= 1e-13 * scale {
            return Err(Error::SingularSystem { context });
        }
        m.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                for k in col..=n {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (m[row][n] - s) / m[row][row];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem { context });
    }
    Ok(x)
}

/// Componentwise relative residual `max_i |a x - b|_i / (sum_j |a_ij x_j| + |b_i|)`.
///
/// This is the backward error of `x`; the absolute residual of a monomial
/// system with large coefficients is bounded below by their rounding.
pub fn relative_residual(a: &[Vec<f64>], x: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let r: f64 = row.iter().zip(x).map(|(aij, xj)| aij * xj).sum::<f64>() - rhs;
            let s: f64 = row
                .iter()
                .zip(x)
                .map(|(aij, xj)| (aij * xj).abs())
                .sum::<f64>()
                + rhs.abs();
            if s == 0.0 {
                0.0
            } else {
                r.abs() / s
            }
        })
        .fold(0.0, f64::max)
}

/// Bisection on `[lo, hi]` where `f(lo)` and `f(hi)` have opposite signs.
pub fn bisect<F>(mut lo: f64, mut hi: f64, f: F, iterations: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Scan `[lo, hi]` with a fixed step for the first sign change of `f`, then
/// refine it by bisection.
pub fn first_root<F>(lo: f64, hi: f64, step: f64, f: F, iterations: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(step > 0.0) || !(hi > lo) {
        return Err(Error::param("scan", "need lo < hi and step > 0"));
    }
    let mut a = lo;
    let mut fa = f(a);
    if fa == 0.0 {
        return Ok(a);
    }
    let n = ((hi - lo) / step).round() as usize;
    for k in 1..=n {
        let b = (lo + k as f64 * step).min(hi);
        let fb = f(b);
        if !fb.is_finite() {
            return Err(Error::NonFinite(format!("scan function at {b}")));
        }
        if fb == 0.0 {
            return Ok(b);
        }
        if (fa < 0.0) != (fb < 0.0) {
            return Ok(bisect(a, b, &f, iterations));
        }
        a = b;
        fa = fb;
    }
    Err(Error::NoBracket { lo, hi })
}

/// Polynomial in the monomial basis, `sum_k c[k] x^k`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// Value and the first `K - 1` derivatives at `x`.
    pub fn eval_derivs<const K: usize>(&self, x: f64) -> [f64; K] {
        let mut out = [0.0; K];
        let mut work = self.coeffs.clone();
        for (order, slot) in out.iter_mut().enumerate() {
            if order > 0 {
                work = (1..work.len()).map(|k| work[k] * k as f64).collect();
            }
            *slot = work.iter().rev().fold(0.0, |acc, c| acc * x + c);
        }
        out
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

/// Piecewise polynomial on `[breaks[0], breaks[last]]`; piece `i` covers
/// `[breaks[i], breaks[i + 1])`, the final piece is closed on the right.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Piecewise {
    breaks: Vec<f64>,
    pieces: Vec<Polynomial>,
}

impl Piecewise {
    pub fn new(breaks: Vec<f64>, pieces: Vec<Polynomial>) -> Result<Self> {
        if breaks.len() != pieces.len() + 1 || pieces.is_empty() {
            return Err(Error::param("breaks", "need one more break than pieces"));
        }
        if breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("breaks", "must be strictly increasing"));
        }
        Ok(Self { breaks, pieces })
    }

    pub fn single(lo: f64, hi: f64, poly: Polynomial) -> Self {
        Self {
            breaks: vec![lo, hi],
            pieces: vec![poly],
        }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Polynomial] {
        &self.pieces
    }

    pub fn piece_index(&self, x: f64) -> usize {
        let inner = &self.breaks[1..self.breaks.len() - 1];
        inner.partition_point(|&b| b <= x)
    }

    pub fn eval_derivs<const K: usize>(&self, x: f64) -> [f64; K] {
        self.pieces[self.piece_index(x)].eval_derivs::<K>(x)
    }
}
