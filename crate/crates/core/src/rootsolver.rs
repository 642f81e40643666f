//! Operator roots `Z^(l) = A₁ + X^(l)` of the continued Schur complement.
//!
//! `X` is the fixed point of `X = t²·W₁(A₁ + X, Γ^l)` with the transformator
//! `W₁(Z, Γ) = -∫_Γ K′_B(μ)(Z - μ)⁻¹ dμ`. Under `𝒱₀ < d²/4` the map is a
//! contraction on the ball `‖X‖ ≤ r_max`, so plain Picard iteration from
//! `X = 0` converges into the smaller ball `‖X‖ ≤ r_min`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::{admissibility, AdmissibilityReport, Contour, DensityOnContour, Side};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ScaleComplex};
use crate::model::SpectralModel;
use crate::schur;

/// Minimum distance between the spectrum of `Z` and any contour node.
pub const SPECTRUM_NODE_GUARD: f64 = 1e-6;
/// Slack on the `‖X‖ ≤ r_min` containment check.
pub const BALL_SLACK: f64 = 1e-9;
pub const CLUSTER_RADIUS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RootSolution {
    pub side: Side,
    pub x: CMat,
    pub z_op: CMat,
    pub coupling_scale: f64,
    pub iterations: usize,
    pub final_step_norm: f64,
    /// `‖X_{k+1} - X_k‖` for every step taken.
    pub step_norms: Vec<f64>,
    /// `‖X - t²W₁(A₁ + X, Γ)‖` at the returned iterate.
    pub residual: f64,
    /// Admissibility data for the coupling `t·B`.
    pub report: AdmissibilityReport,
    pub r_min: f64,
    pub r_max: f64,
}

impl RootSolution {
    pub fn x_norm(&self) -> f64 {
        linalg::norm2(&self.x)
    }

    pub fn within_min_ball(&self) -> bool {
        self.x_norm() <= self.r_min + BALL_SLACK
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let mut ev = linalg::eigenvalues(&self.z_op);
        linalg::sort_complex(&mut ev);
        ev
    }

    /// `max_λ dist(λ, σ₁) - r_min`; non-positive when the spectrum of `Z`
    /// sits inside the certified neighbourhood of `σ₁`.
    pub fn localization_excess(&self, model: &SpectralModel) -> f64 {
        self.eigenvalues()
            .iter()
            .map(|lam| {
                model
                    .sigma1()
                    .iter()
                    .map(|s| (lam - s).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::NEG_INFINITY, f64::max)
            - self.r_min
    }
}

fn check_spectrum_off_nodes(density: &DensityOnContour, zmat: &CMat) -> Result<()> {
    let ev = linalg::eigenvalues(zmat);
    let distance = density
        .nodes
        .iter()
        .flat_map(|n| ev.iter().map(move |lam| (n.point - lam).norm()))
        .fold(f64::INFINITY, f64::min);
    if distance <= SPECTRUM_NODE_GUARD {
        return Err(Error::SpectrumOnContour { distance });
    }
    Ok(())
}

fn transformator_with(density: &DensityOnContour, zmat: &CMat) -> Result<CMat> {
    check_spectrum_off_nodes(density, zmat)?;
    let n = zmat.nrows();
    let mut acc = CMat::zeros(n, n);
    for (node, k) in density.iter() {
        let res = linalg::resolvent(zmat, node.point)?;
        acc -= (k * res).scale_complex(node.weight);
    }
    Ok(acc)
}

/// `W₁(Z, Γ) = -∫_Γ K′_B(μ)(Z - μ)⁻¹ dμ`.
pub fn transformator(model: &SpectralModel, contour: &Contour, zmat: &CMat) -> Result<CMat> {
    if zmat.shape() != (model.dim(), model.dim()) {
        return Err(Error::Shape(format!(
            "Z must be {}x{}, got {:?}",
            model.dim(),
            model.dim(),
            zmat.shape()
        )));
    }
    transformator_with(&DensityOnContour::new(model, contour), zmat)
}

/// Solves `X = t²W₁(A₁ + X, Γ)` from `X₀ = 0`.
pub fn solve_basic(model: &SpectralModel, contour: &Contour, t: f64, opts: SolverOptions) -> Result<RootSolution> {
    solve_basic_from(model, contour, t, opts, None)
}

/// As [`solve_basic`], starting from `initial` when given (warm start).
pub fn solve_basic_from(
    model: &SpectralModel,
    contour: &Contour,
    t: f64,
    opts: SolverOptions,
    initial: Option<&CMat>,
) -> Result<RootSolution> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!("coupling scale t = {t} outside [0, 1]")));
    }
    let base = admissibility(model, contour);
    let report = base.scaled(t);
    if !report.admissible {
        return Err(report.into_error(t));
    }
    let r_min = report.r_min.expect("admissible report has radii");
    let r_max = report.r_max.expect("admissible report has radii");
    let density = DensityOnContour::new(model, contour);
    let t2 = t * t;
    let n = model.dim();
    let a1 = model.a1();

    let mut x = match initial {
        Some(x0) if x0.shape() == (n, n) && linalg::norm2(x0) < r_max => x0.clone(),
        _ => CMat::zeros(n, n),
    };
    let mut step_norms = Vec::new();
    let mut last_step = f64::INFINITY;
    let mut converged = false;
    for _ in 0..opts.max_iter {
        let next = transformator_with(&density, &(a1 + &x))?.scale(t2);
        let step = linalg::norm2(&(&next - &x));
        let scale = linalg::norm2(&x).max(1.0);
        step_norms.push(step);
        last_step = step;
        x = next;
        let norm = linalg::norm2(&x);
        if norm >= r_max {
            return Err(Error::EscapedBall { norm, r_max });
        }
        if step <= opts.tol * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::MaxIterations {
            iterations: opts.max_iter,
            last_step,
        });
    }
    let z_op = a1 + &x;
    let residual = linalg::norm2(&(&x - transformator_with(&density, &z_op)?.scale(t2)));
    Ok(RootSolution {
        side: contour.side(),
        iterations: step_norms.len(),
        final_step_norm: last_step,
        step_norms,
        residual,
        x,
        z_op,
        coupling_scale: t,
        report,
        r_min,
        r_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumLabel {
    Real,
    Resonance,
    PhysicalComplex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub eigenvalue: Complex64,
    pub multiplicity: usize,
    pub label: SpectrumLabel,
    /// `‖M₁(λ, Γ)u‖` for a unit eigenvector `u` of `Z`.
    pub root_residual: f64,
    /// Smallest singular value of the physical-sheet `M₁(λ)`, for
    /// physical-complex entries.
    pub physical_singular_value: Option<f64>,
    /// Whether a physical-complex entry was confirmed as a root of the
    /// physical-sheet Schur complement.
    pub physical_confirmed: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumClassification {
    pub side: Side,
    pub tau_real: f64,
    pub entries: Vec<SpectrumEntry>,
}

impl SpectrumClassification {
    pub fn count(&self, label: SpectrumLabel) -> usize {
        self.entries
            .iter()
            .filter(|e| e.label == label)
            .map(|e| e.multiplicity)
            .sum()
    }
}

pub fn default_tau_real(model: &SpectralModel) -> f64 {
    1e-8 * (1.0 + linalg::norm2(model.a1()))
}

/// Scale for singular-value and residual tolerances of `M₁`.
fn m1_scale(model: &SpectralModel, lam: Complex64) -> f64 {
    1.0 + linalg::norm2(model.a1()) + lam.norm()
}

/// Labels every eigenvalue of `Z^(l)`: real within `tau_real`, resonance on
/// the `l` side (inside the continuation domain), physical-complex on the
/// opposite side.
pub fn classify(
    model: &SpectralModel,
    contour: &Contour,
    sol: &RootSolution,
    tau_real: f64,
) -> Result<SpectrumClassification> {
    let eigen = linalg::eigenvalues(&sol.z_op);
    let radius = CLUSTER_RADIUS * (1.0 + linalg::norm2(&sol.z_op));
    let mut entries = Vec::new();
    for (lam, multiplicity) in linalg::cluster_eigenvalues(&eigen, radius) {
        let label = label_of(lam, sol.side, tau_real);
        let shifted = &sol.z_op - linalg::identity(model.dim()).scale_complex(lam);
        let (u, _) = linalg::null_vector(&shifted);
        let root_residual = match schur::m1_on_sheet(model, contour, lam) {
            Ok(eval) => (&eval.value * &u).norm(),
            Err(_) => f64::NAN,
        };
        let (physical_singular_value, physical_confirmed) = if label == SpectrumLabel::PhysicalComplex {
            let s = linalg::smallest_singular_value(&schur::m1_physical(model, lam)?);
            (Some(s), Some(s <= 1e-6 * m1_scale(model, lam)))
        } else {
            (None, None)
        };
        entries.push(SpectrumEntry {
            eigenvalue: lam,
            multiplicity,
            label,
            root_residual,
            physical_singular_value,
            physical_confirmed,
        });
    }
    entries.sort_by(|a, b| {
        a.eigenvalue
            .re
            .total_cmp(&b.eigenvalue.re)
            .then(a.eigenvalue.im.total_cmp(&b.eigenvalue.im))
    });
    Ok(SpectrumClassification {
        side: sol.side,
        tau_real,
        entries,
    })
}

#[derive(Debug, Clone)]
pub struct HomotopyPoint {
    pub t: f64,
    pub solution: RootSolution,
    pub classification: SpectrumClassification,
    /// Eigenvalues of `Z_t` indexed by trajectory id.
    pub trajectory_values: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct HomotopyPath {
    pub side: Side,
    pub points: Vec<HomotopyPoint>,
    /// Non-fatal pairing ambiguities and continuity violations.
    pub warnings: Vec<String>,
    pub continuous: bool,
}

impl HomotopyPath {
    /// Eigenvalue trajectory `id` as `(t, λ)` pairs.
    pub fn trajectory(&self, id: usize) -> Vec<(f64, Complex64)> {
        self.points.iter().map(|p| (p.t, p.trajectory_values[id])).collect()
    }

    pub fn trajectory_count(&self) -> usize {
        self.points.first().map_or(0, |p| p.trajectory_values.len())
    }
}

/// Greedy nearest-neighbour matching of `next` onto `prev`; returns `next`
/// reordered so that entry `i` continues trajectory `i`.
fn pair_eigenvalues(prev: &[Complex64], next: &[Complex64]) -> Vec<Complex64> {
    let mut pairs: Vec<(f64, usize, usize)> = prev
        .iter()
        .enumerate()
        .flat_map(|(i, p)| next.iter().enumerate().map(move |(j, q)| ((p - q).norm(), i, j)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut out = vec![None; prev.len()];
    let mut used = vec![false; next.len()];
    for (_, i, j) in pairs {
        if out[i].is_none() && !used[j] {
            out[i] = Some(next[j]);
            used[j] = true;
        }
    }
    out.into_iter().map(|v| v.expect("square pairing")).collect()
}

/// Speed bound for `‖X_t‖` from `r_min(t) = d/2 - √(d²/4 - t²𝒱₀)`.
fn radius_speed(report: &AdmissibilityReport, t: f64) -> f64 {
    let v = report.variation;
    let d = report.distance;
    let root = (0.25 * d * d - t * t * v).max(0.0).sqrt();
    if root == 0.0 {
        f64::INFINITY
    } else {
        t * v / root
    }
}

/// Solves along the coupling homotopy `X = t²W₁(A₁ + X, Γ)` for an
/// increasing grid of `t`, warm-starting each solve and tracking eigenvalue
/// trajectories by nearest-neighbour pairing.
pub fn homotopy_path(
    model: &SpectralModel,
    contour: &Contour,
    t_grid: &[f64],
    opts: SolverOptions,
    tau_real: f64,
) -> Result<HomotopyPath> {
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("t grid must be non-empty and strictly increasing".into()));
    }
    if t_grid[0] < 0.0 || *t_grid.last().expect("non-empty") > 1.0 {
        return Err(Error::InvalidParameter("t grid must lie in [0, 1]".into()));
    }
    let base = admissibility(model, contour);
    if !base.admissible {
        return Err(base.into_error(1.0));
    }
    let cluster = CLUSTER_RADIUS * (1.0 + linalg::norm2(model.a1()));
    let mut points: Vec<HomotopyPoint> = Vec::new();
    let mut warnings = Vec::new();
    let mut continuous = true;
    for &t in t_grid {
        let warm = points.last().map(|p| &p.solution.x);
        let solution = solve_basic_from(model, contour, t, opts, warm)?;
        let classification = classify(model, contour, &solution, tau_real)?;
        let mut ev = linalg::eigenvalues(&solution.z_op);
        let values = match points.last() {
            None => {
                linalg::sort_complex(&mut ev);
                ev
            }
            Some(prev) => {
                for i in 0..ev.len() {
                    for j in i + 1..ev.len() {
                        if (ev[i] - ev[j]).norm() <= cluster {
                            warnings.push(format!(
                                "t = {t}: eigenvalues {} and {} are within the clustering radius; pairing ambiguous",
                                ev[i], ev[j]
                            ));
                        }
                    }
                }
                let paired = pair_eigenvalues(&prev.trajectory_values, &ev);
                let dt = t - prev.t;
                let allowed = 10.0 * dt * radius_speed(&base, t) + cluster;
                for (id, (a, b)) in prev.trajectory_values.iter().zip(&paired).enumerate() {
                    let jump = (a - b).norm();
                    if jump > allowed {
                        continuous = false;
                        warnings.push(format!(
                            "trajectory {id}: jump {jump:e} between t = {} and t = {t} exceeds {allowed:e}",
                            prev.t
                        ));
                    }
                }
                paired
            }
        };
        points.push(HomotopyPoint {
            t,
            solution,
            classification,
            trajectory_values: values,
        });
    }
    Ok(HomotopyPath {
        side: contour.side(),
        points,
        warnings,
        continuous,
    })
}

/// Label of a single eigenvalue under the same rule as [`classify`].
pub fn label_of(lam: Complex64, side: Side, tau_real: f64) -> SpectrumLabel {
    if lam.im.abs() <= tau_real {
        SpectrumLabel::Real
    } else if lam.im.signum() == side.sign() {
        SpectrumLabel::Resonance
    } else {
        SpectrumLabel::PhysicalComplex
    }
}
