//! The explicitly solvable scalar model: `A₀` multiplication by `μ` on
//! `L²(-α, α)`, `A₁ = a₁`, and `B` multiplication by the constant `b`.
//!
//! With `a₁ = 0` the roots of the Schur complement are `z^(±) = ∓iy`, where
//! `y > 0` solves `y = 2b² arctan(α/y)`, and the angular operators are
//! `μ ↦ -b/(μ ± iy)` with norm exactly one.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::Side;
use crate::error::{Error, Result};
use crate::linalg::{c, CMat};
use crate::model::{build_model, Interval, MatrixPolynomial, SpectralModel};
use crate::quadrature::{dyadic_breakpoints, integrate_adaptive, AdaptiveOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FriedrichsParams {
    pub alpha: f64,
    pub a1: f64,
    pub b: f64,
}

impl FriedrichsParams {
    pub fn new(alpha: f64, a1: f64, b: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        if !(a1.abs() < alpha) {
            return Err(Error::InvalidParameter(format!("a1 = {a1} must lie in (-alpha, alpha)")));
        }
        if !(b >= 0.0 && b.is_finite()) {
            return Err(Error::InvalidParameter(format!("b must be non-negative, got {b}")));
        }
        Ok(Self { alpha, a1, b })
    }

    /// The same operator as a generic [`SpectralModel`].
    pub fn model(&self) -> SpectralModel {
        build_model(
            Interval {
                lo: -self.alpha,
                hi: self.alpha,
            },
            CMat::from_element(1, 1, c(self.a1, 0.0)),
            MatrixPolynomial::constant(CMat::from_element(1, 1, c(self.b, 0.0)))
                .expect("scalar coefficient"),
        )
        .expect("validated parameters")
    }
}

/// Unique positive root of `y = 2b² arctan(α/y)`.
///
/// Safeguarded Newton on the increasing function `f(y) = y - 2b² arctan(α/y)`
/// over the bracket `(0, πb²]`.
pub fn solve_y(alpha: f64, b: f64) -> Result<f64> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::InvalidParameter(format!("b must be positive, got {b}")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let b2 = b * b;
    let f = |y: f64| y - 2.0 * b2 * (alpha / y).atan();
    let df = |y: f64| 1.0 + 2.0 * b2 * alpha / (alpha * alpha + y * y);
    let mut lo = 0.0_f64;
    let mut hi = PI * b2;
    let mut y = 0.5 * hi;
    for _ in 0..200 {
        let fy = f(y);
        if fy == 0.0 {
            return Ok(y);
        }
        if fy < 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let newton = y - fy / df(y);
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - y).abs() <= 4.0 * f64::EPSILON * y {
            return Ok(next);
        }
        y = next;
    }
    Ok(y)
}

/// `M₁(z) = a₁ - z + b²(Log(α - z) - Log(-α - z))` off `[-α, α]`.
///
/// The two principal logarithms jump together across `(α, ∞)`, so the
/// difference is continuous there and the only cut is `[-α, α]`.
pub fn closed_m1(params: &FriedrichsParams, z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re.abs() <= params.alpha {
        return Err(Error::OnCut { z });
    }
    let a = params.alpha;
    let logs = (c(a, 0.0) - z).ln() - (c(-a, 0.0) - z).ln();
    Ok(c(params.a1, 0.0) - z + logs * (params.b * params.b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub y: f64,
    /// Root for the upper contour: `-iy`.
    pub z_plus: Complex64,
    /// Root for the lower contour: `+iy`.
    pub z_minus: Complex64,
    pub y_norm: f64,
    /// `1 - b² ∫ dμ/(μ² + y²)` by adaptive quadrature.
    pub m1y1_residual: f64,
    /// `|y - 2b² arctan(α/y)|`.
    pub fixed_point_residual: f64,
    pub closed_m1_residual: f64,
    /// Root counts of `M₁` in rectangles of the upper and lower half-planes.
    pub winding_upper: i64,
    pub winding_lower: i64,
}

impl OracleSolution {
    pub fn root(&self, side: Side) -> Complex64 {
        match side {
            Side::Upper => self.z_plus,
            Side::Lower => self.z_minus,
        }
    }
}

/// `μ ↦ -b/(μ ± iy)` for the upper (`+`) and lower (`-`) roots.
pub fn y_function(b: f64, y: f64, side: Side, mu: f64) -> Complex64 {
    -b / c(mu, side.sign() * y)
}

pub fn oracle_solution(params: &FriedrichsParams) -> Result<OracleSolution> {
    if params.a1 != 0.0 {
        return Err(Error::InvalidParameter(
            "closed-form roots are only available for a1 = 0".into(),
        ));
    }
    let (alpha, b) = (params.alpha, params.b);
    let y = solve_y(alpha, b)?;
    let b2 = b * b;
    let integral = integrate_adaptive(
        |mu: f64| Ok(1.0 / (mu * mu + y * y)),
        -alpha,
        alpha,
        &dyadic_breakpoints(0.0, y, -alpha, alpha),
        AdaptiveOptions {
            rel_tol: 1e-14,
            abs_tol: 0.0,
            max_subintervals: 4000,
        },
    )?
    .value;
    let z_plus = c(0.0, -y);
    let z_minus = c(0.0, y);
    let closed_m1_residual = closed_m1(params, z_plus)?.norm().max(closed_m1(params, z_minus)?.norm());
    let height = (3.0 * alpha).max(2.0 * PI * b2);
    let eps = 1e-6 * alpha;
    let winding_upper = winding_number(params, c(-3.0 * alpha, eps), c(3.0 * alpha, height))?;
    let winding_lower = winding_number(params, c(-3.0 * alpha, -height), c(3.0 * alpha, -eps))?;
    Ok(OracleSolution {
        y,
        z_plus,
        z_minus,
        y_norm: b * integral.sqrt(),
        m1y1_residual: 1.0 - b2 * integral,
        fixed_point_residual: (y - 2.0 * b2 * (alpha / y).atan()).abs(),
        closed_m1_residual,
        winding_upper,
        winding_lower,
    })
}

/// Number of zeros of `closed_m1` inside the axis-aligned rectangle with the
/// given lower-left and upper-right corners, by the argument principle
/// (the function has no poles off the cut).
pub fn winding_number(params: &FriedrichsParams, lower_left: Complex64, upper_right: Complex64) -> Result<i64> {
    let corners = [
        lower_left,
        c(upper_right.re, lower_left.im),
        upper_right,
        c(lower_left.re, upper_right.im),
    ];
    const SAMPLES_PER_SIDE: usize = 2500;
    let mut total = 0.0;
    for k in 0..4 {
        let (p, q) = (corners[k], corners[(k + 1) % 4]);
        let mut prev_z = p;
        let mut prev_f = closed_m1(params, p)?;
        for j in 1..=SAMPLES_PER_SIDE {
            let z = p + (q - p) * (j as f64 / SAMPLES_PER_SIDE as f64);
            let fz = closed_m1(params, z)?;
            total += arg_increment(params, prev_z, prev_f, z, fz, 0)?;
            prev_z = z;
            prev_f = fz;
        }
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

fn arg_increment(
    params: &FriedrichsParams,
    z0: Complex64,
    f0: Complex64,
    z1: Complex64,
    f1: Complex64,
    depth: usize,
) -> Result<f64> {
    let inc = (f1 / f0).arg();
    if inc.abs() <= PI / 4.0 || depth >= 40 {
        return Ok(inc);
    }
    let zm = 0.5 * (z0 + z1);
    let fm = closed_m1(params, zm)?;
    Ok(arg_increment(params, z0, f0, zm, fm, depth + 1)? + arg_increment(params, zm, fm, z1, f1, depth + 1)?)
}
