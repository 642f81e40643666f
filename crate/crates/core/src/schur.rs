//! The Schur complement `M₁(z) = A₁ - z + W₁(z)` on the physical sheet, its
//! boundary values on the cut, and its continuation through the cut.
//!
//! Physical-sheet values use exact Cauchy moments of the polynomial density;
//! continued values use the contour quadrature; inside the lens a second,
//! independent route goes through the residue term `-2πi·l·K′_B(z)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::{Contour, Side};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, ScaleComplex, I};
use crate::model::SpectralModel;

/// Quadrature evaluation of `(μ - z)⁻¹` is refused closer than this many
/// local node spacings to the contour.
pub const NEAR_CONTOUR_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvaluationPath {
    ClosedForm,
    ContourQuadrature,
    SheetsFormula,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchurEvaluation {
    pub z: Complex64,
    pub value: CMat,
    pub path: EvaluationPath,
}

/// `I_k(w) = ∫_{-R}^{R} s^k / (s - w) ds` for `k = 0..=kmax`.
///
/// Forward recurrence `I_k = w I_{k-1} + (R^k - (-R)^k)/k` near the interval,
/// Laurent series in `1/w` far from it.
fn cauchy_moments(radius: f64, w: Complex64, kmax: usize, log_term: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(kmax + 1);
    if w.norm() > 2.0 * radius {
        let moment = |j: usize| -> f64 {
            if j % 2 == 1 {
                0.0
            } else {
                2.0 * radius.powi(j as i32 + 1) / (j as f64 + 1.0)
            }
        };
        let inv = w.inv();
        for k in 0..=kmax {
            let mut sum = c(0.0, 0.0);
            let mut pw = inv;
            for p in 0..400 {
                sum -= pw * moment(k + p);
                let bound = pw.norm() * 2.0 * radius.powi((k + p) as i32 + 1);
                if bound <= 1e-18 * sum.norm() {
                    break;
                }
                pw *= inv;
            }
            out.push(sum);
        }
    } else {
        out.push(log_term);
        for k in 1..=kmax {
            let kk = k as i32;
            let jump = (radius.powi(kk) - (-radius).powi(kk)) / k as f64;
            let prev = out[k - 1];
            out.push(w * prev + jump);
        }
    }
    out
}

fn combine(model: &SpectralModel, moments: &[Complex64]) -> CMat {
    let kc = model.kprime_centered();
    let mut acc = CMat::zeros(kc.rows(), kc.cols());
    for (ck, ik) in kc.coeffs().iter().zip(moments) {
        acc += ck.scale_complex(*ik);
    }
    acc
}

fn on_cut(model: &SpectralModel, z: Complex64) -> bool {
    z.im == 0.0 && model.delta0().contains(z.re)
}

/// `W₁(z) = ∫_{Δ₀} K′_B(μ)(μ - z)⁻¹ dμ` off the cut.
pub fn w1_physical(model: &SpectralModel, z: Complex64) -> Result<CMat> {
    if !z.is_finite() || on_cut(model, z) {
        return Err(Error::OnCut { z });
    }
    let iv = model.delta0();
    let r = iv.half_len();
    let w = z - iv.mid();
    // Single-ratio principal logarithm: its cut is exactly Δ₀.
    let log_term = ((c(r, 0.0) - w) / (c(-r, 0.0) - w)).ln();
    let kmax = model.kprime_centered().degree();
    Ok(combine(model, &cauchy_moments(r, w, kmax, log_term)))
}

pub fn m1_physical(model: &SpectralModel, z: Complex64) -> Result<CMat> {
    let w = w1_physical(model, z)?;
    Ok(model.a1() - linalg::identity(model.dim()).scale_complex(z) + w)
}

/// Boundary value `W₁(λ ± i0)` for `λ` strictly inside the interval:
/// principal value (closed form) `± iπ K′_B(λ)`.
pub fn w1_boundary(model: &SpectralModel, lambda: f64, approach: Side) -> Result<CMat> {
    let iv = model.delta0();
    if !iv.contains_strictly(lambda) {
        return Err(Error::OutsideInterval {
            mu: lambda,
            lo: iv.lo,
            hi: iv.hi,
        });
    }
    let r = iv.half_len();
    let w = lambda - iv.mid();
    let log_term = c(((r - w) / (r + w)).ln(), 0.0);
    let kmax = model.kprime_centered().degree();
    let pv = combine(model, &cauchy_moments(r, c(w, 0.0), kmax, log_term));
    let jump = model.kprime_at(c(lambda, 0.0)).scale_complex(I * (approach.sign() * PI));
    Ok(pv + jump)
}

/// `W₁(z, Γ) = ∫_Γ K′_B(μ)(μ - z)⁻¹ dμ` by the contour rule, without the
/// near-contour guard.
pub fn w1_continued_unchecked(model: &SpectralModel, contour: &Contour, z: Complex64) -> CMat {
    let n = model.dim();
    let mut acc = CMat::zeros(n, n);
    for node in contour.nodes() {
        let k = model.kprime_at(node.point);
        acc += k.scale_complex(node.weight / (node.point - z));
    }
    acc
}

fn check_guard(contour: &Contour, z: Complex64) -> Result<()> {
    let distance = contour.distance_to_nodes(z);
    let guard = NEAR_CONTOUR_FACTOR * contour.local_spacing(z);
    if distance < guard {
        return Err(Error::NearContour { z, distance, guard });
    }
    Ok(())
}

pub fn w1_continued(model: &SpectralModel, contour: &Contour, z: Complex64) -> Result<CMat> {
    check_guard(contour, z)?;
    Ok(w1_continued_unchecked(model, contour, z))
}

/// `M₁(z, Γ) = A₁ - z + W₁(z, Γ)`.
pub fn m1_continued(model: &SpectralModel, contour: &Contour, z: Complex64) -> Result<CMat> {
    let w = w1_continued(model, contour, z)?;
    Ok(model.a1() - linalg::identity(model.dim()).scale_complex(z) + w)
}

/// `M₁(z, Γ^l) = M₁(z) - 2πi·l·K′_B(z)` for `z` inside the lens.
pub fn sheets_value(model: &SpectralModel, contour: &Contour, z: Complex64) -> Result<CMat> {
    if !contour.lens_contains(z) {
        return Err(Error::OutsideLens { z });
    }
    let l = contour.side().sign();
    let m = m1_physical(model, z)?;
    Ok(m - model.kprime_at(z).scale_complex(I * (2.0 * PI * l)))
}

/// `M₁(z, Γ)` by whichever route is accurate at `z`: contour quadrature away
/// from `Γ`, otherwise the closed form (outside the lens) or the sheets
/// formula (inside it).
pub fn m1_on_sheet(model: &SpectralModel, contour: &Contour, z: Complex64) -> Result<SchurEvaluation> {
    if check_guard(contour, z).is_ok() {
        return Ok(SchurEvaluation {
            z,
            value: m1_continued(model, contour, z)?,
            path: EvaluationPath::ContourQuadrature,
        });
    }
    if contour.lens_contains(z) {
        Ok(SchurEvaluation {
            z,
            value: sheets_value(model, contour, z)?,
            path: EvaluationPath::SheetsFormula,
        })
    } else if contour.distance_to(z) > 0.0 {
        Ok(SchurEvaluation {
            z,
            value: m1_physical(model, z)?,
            path: EvaluationPath::ClosedForm,
        })
    } else {
        Err(Error::NearContour {
            z,
            distance: 0.0,
            guard: 0.0,
        })
    }
}
