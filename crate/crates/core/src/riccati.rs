//! Angular operators `Y^(l)`, the operator `Ω^(l)`, the factor `F₁` and the
//! contour-integral reconstructions of `Z^(l)`.
//!
//! `Y^(l)` is the multiplication-type operator `u₁ ↦ y(μ)u₁` with
//! `y(μ) = b(μ)(Z^(l) - μ)⁻¹`; it is kept as the pair `(b, Z)` and every
//! derived quantity is an integral over `Δ₀` of a rational matrix function.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::{admissibility, Contour, Side};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, ScaleComplex, I};
use crate::model::{Interval, MatrixPolynomial, SpectralModel};
use crate::quadrature::{dyadic_breakpoints, integrate_adaptive, AdaptiveOptions};
use crate::rootsolver::{RootSolution, SPECTRUM_NODE_GUARD};
use crate::schur;

pub const QUAD_REL_TOL: f64 = 1e-11;

#[derive(Debug, Clone)]
pub struct RiccatiSolution {
    pub side: Side,
    b: MatrixPolynomial,
    delta0: Interval,
    pub z_op: CMat,
    /// `G = Y*Y`.
    pub gram: CMat,
    pub y_norm: f64,
    /// `B*Y = ∫ K′_B(μ)(Z - μ)⁻¹ dμ`.
    pub bstar_y: CMat,
    /// `Y*B = ∫ (Z* - μ)⁻¹K′_B(μ) dμ`, computed independently of `bstar_y`.
    pub ystar_b: CMat,
    pub quadrature_error: f64,
    pub evaluations: usize,
}

impl RiccatiSolution {
    /// `y(μ) = b(μ)(Z - μ)⁻¹`, an `m×n` matrix.
    pub fn y_at(&self, mu: f64) -> Result<CMat> {
        let r = linalg::resolvent(&self.z_op, Complex64::new(mu, 0.0))?;
        Ok(self.b.eval(Complex64::new(mu, 0.0)) * r)
    }

    pub fn gram_eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.gram)
    }

    pub fn delta0(&self) -> Interval {
        self.delta0
    }
}

/// Distance from `spec(Z)` to the real segment `Δ₀`.
pub fn spectrum_interval_distance(z_op: &CMat, delta0: Interval) -> f64 {
    linalg::eigenvalues(z_op)
        .into_iter()
        .map(|lam| {
            let dx = if lam.re < delta0.lo {
                delta0.lo - lam.re
            } else if lam.re > delta0.hi {
                lam.re - delta0.hi
            } else {
                0.0
            };
            dx.hypot(lam.im)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Dyadic breakpoints around `Re λ` for every eigenvalue `λ` of `z_op` whose
/// real part lies in `Δ₀`.
fn pole_breakpoints(poles: &[Complex64], delta0: Interval) -> Vec<f64> {
    let mut out: Vec<f64> = poles
        .iter()
        .filter(|p| delta0.contains(p.re))
        .flat_map(|p| dyadic_breakpoints(p.re, p.im.abs().max(1e-12), delta0.lo, delta0.hi))
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

fn options(quad_tol: f64) -> AdaptiveOptions {
    AdaptiveOptions {
        rel_tol: quad_tol,
        ..AdaptiveOptions::default()
    }
}

fn check_hyp_r(z_op: &CMat, delta0: Interval, quad_tol: f64) -> Result<()> {
    let distance = spectrum_interval_distance(z_op, delta0);
    let guard = 10.0 * quad_tol.sqrt();
    if distance <= guard {
        return Err(Error::SpectrumNearInterval { distance, guard });
    }
    Ok(())
}

/// Builds `Y^(l)` from a solved root and integrates `Y*Y`, `B*Y` and `Y*B`.
pub fn compute_y(model: &SpectralModel, sol: &RootSolution, quad_tol: f64) -> Result<RiccatiSolution> {
    let delta0 = model.delta0();
    check_hyp_r(&sol.z_op, delta0, quad_tol)?;
    let n = model.dim();
    let z_op = sol.z_op.clone();
    let breaks = pole_breakpoints(&linalg::eigenvalues(&z_op), delta0);
    // One pass over the stacked integrand [R*K′R | K′R | R*K′].
    let integral = integrate_adaptive(
        |mu| {
            let k = model.kprime_at(Complex64::new(mu, 0.0));
            let r = linalg::resolvent(&z_op, Complex64::new(mu, 0.0))?;
            let ra = r.adjoint();
            let mut out = CMat::zeros(n, 3 * n);
            out.view_mut((0, 0), (n, n)).copy_from(&(&ra * &k * &r));
            out.view_mut((0, n), (n, n)).copy_from(&(&k * &r));
            out.view_mut((0, 2 * n), (n, n)).copy_from(&(&ra * &k));
            Ok(out)
        },
        delta0.lo,
        delta0.hi,
        &breaks,
        options(quad_tol),
    )?;
    let gram = integral.value.columns(0, n).into_owned();
    let bstar_y = integral.value.columns(n, n).into_owned();
    let ystar_b = integral.value.columns(2 * n, n).into_owned();
    let top = linalg::hermitian_eigenvalues(&gram).last().copied().unwrap_or(0.0);
    Ok(RiccatiSolution {
        side: sol.side,
        b: model.b().clone(),
        delta0,
        z_op,
        gram,
        y_norm: top.max(0.0).sqrt(),
        bstar_y,
        ystar_b,
        quadrature_error: integral.error,
        evaluations: integral.evaluations,
    })
}

/// `‖A₁ - B*Y - Z‖`.
pub fn check_zay(model: &SpectralModel, ric: &RiccatiSolution) -> f64 {
    linalg::norm2(&(model.a1() - &ric.bstar_y - &ric.z_op))
}

/// Largest `‖μy(μ) - y(μ)A₁ + y(μ)(B*Y) + b(μ)‖` over the samples.
pub fn riccati_residual(model: &SpectralModel, ric: &RiccatiSolution, samples: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &mu in samples {
        let y = ric.y_at(mu)?;
        let r = y.scale(mu) - &y * model.a1() + &y * &ric.bstar_y + ric.b.eval(Complex64::new(mu, 0.0));
        worst = worst.max(linalg::norm2(&r));
    }
    Ok(worst)
}

/// Kernel form of the adjoint equation for `Ỹ = Y*`:
/// largest `‖y(μ)*μ - A₁y(μ)* + (Y*B)y(μ)* + b(μ)*‖`.
pub fn riccati_adjoint_residual(model: &SpectralModel, ric: &RiccatiSolution, samples: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &mu in samples {
        let ya = ric.y_at(mu)?.adjoint();
        let r = ya.scale(mu) - model.a1() * &ya + &ric.ystar_b * &ya + ric.b.eval(Complex64::new(mu, 0.0)).adjoint();
        worst = worst.max(linalg::norm2(&r));
    }
    Ok(worst)
}

/// `‖Y*Y - (Y*Y)*‖` and the smallest Gram eigenvalue, for the PSD check.
pub fn gram_defects(ric: &RiccatiSolution) -> (f64, f64) {
    let defect = linalg::hermitian_defect(&ric.gram);
    let min = ric.gram_eigenvalues().first().copied().unwrap_or(0.0);
    (defect, min)
}

/// `∫_Δ₀ ‖K′_B(μ)‖‖(Z - μ)⁻¹‖² dμ`, an upper bound for `‖Y‖²`.
pub fn ysn_bound_integral(model: &SpectralModel, sol: &RootSolution, quad_tol: f64) -> Result<f64> {
    let delta0 = model.delta0();
    check_hyp_r(&sol.z_op, delta0, quad_tol)?;
    let breaks = pole_breakpoints(&linalg::eigenvalues(&sol.z_op), delta0);
    let integral = integrate_adaptive(
        |mu| {
            let k = linalg::norm2(&model.kprime_at(Complex64::new(mu, 0.0)));
            let r = linalg::norm2(&linalg::resolvent(&sol.z_op, Complex64::new(mu, 0.0))?);
            Ok(k * r * r)
        },
        delta0.lo,
        delta0.hi,
        &breaks,
        options(quad_tol),
    )?;
    Ok(integral.value)
}

/// An element of `L²(Δ₀; ℂᵐ)` of the form `Σ cₖμᵏ + Σ dⱼ/(μ - pⱼ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalTrial {
    pub poly: Vec<CVec>,
    pub poles: Vec<(Complex64, CVec)>,
}

impl RationalTrial {
    pub fn eval(&self, mu: f64) -> CVec {
        let dim = self
            .poly
            .first()
            .or_else(|| self.poles.first().map(|p| &p.1))
            .map_or(0, |v| v.len());
        let mut out = CVec::zeros(dim);
        let mut power = Complex64::new(1.0, 0.0);
        for c in &self.poly {
            out += c * power;
            power *= mu;
        }
        for (p, d) in &self.poles {
            out += d * (Complex64::new(mu, 0.0) - p).inv();
        }
        out
    }
}

/// A pair `x₀ ∈ L²(Δ₀; ℂᵐ)`, `x₁ ∈ ℂⁿ` for the J-orthogonality test.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialPair {
    pub x0: RationalTrial,
    pub x1: CVec,
}

/// `[Jx, y]` for `x = x₀ ⊕ Y*x₀` and `y = Yx₁ ⊕ x₁`, that is
/// `⟨x₀, Yx₁⟩ - ⟨Y*x₀, x₁⟩`. The two inner products are integrated
/// separately (scalar integrand versus vector `Y*x₀`). Returns the largest
/// `|[Jx, y]| / max(1, |⟨x₀, Yx₁⟩|)`.
pub fn j_orthogonality(ric: &RiccatiSolution, trials: &[TrialPair], quad_tol: f64) -> Result<f64> {
    let delta0 = ric.delta0;
    let mut worst: f64 = 0.0;
    for trial in trials {
        let mut poles = linalg::eigenvalues(&ric.z_op);
        poles.extend(trial.x0.poles.iter().map(|p| p.0));
        let breaks = pole_breakpoints(&poles, delta0);
        let x1 = CMat::from_column_slice(trial.x1.len(), 1, trial.x1.as_slice());
        let lhs = integrate_adaptive(
            |mu| {
                let yx1 = ric.y_at(mu)? * &x1;
                let x0 = trial.x0.eval(mu);
                Ok(yx1.column(0).dotc(&x0))
            },
            delta0.lo,
            delta0.hi,
            &breaks,
            options(quad_tol),
        )?
        .value;
        let ystar_x0 = integrate_adaptive(
            |mu| {
                let x0 = trial.x0.eval(mu);
                let x0 = CMat::from_column_slice(x0.len(), 1, x0.as_slice());
                Ok(ric.y_at(mu)?.adjoint() * x0)
            },
            delta0.lo,
            delta0.hi,
            &breaks,
            options(quad_tol),
        )?
        .value;
        let rhs = x1.column(0).dotc(&ystar_x0.column(0));
        worst = worst.max((lhs - rhs).norm() / lhs.norm().max(1.0));
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneInSpectrum {
    pub gram_eigenvalues: Vec<f64>,
    pub min_gap: f64,
    pub tolerance: f64,
    /// `1 ∈ spec(Y*Y)`; equivalently the graph subspaces of `Y` and `Y*`
    /// intersect nontrivially.
    pub present: bool,
}

pub fn check_one_in_spectrum(ric: &RiccatiSolution, tol: f64) -> OneInSpectrum {
    let gram_eigenvalues = ric.gram_eigenvalues();
    let min_gap = gram_eigenvalues
        .iter()
        .map(|v| (v - 1.0).abs())
        .fold(f64::INFINITY, f64::min);
    OneInSpectrum {
        gram_eigenvalues,
        min_gap,
        tolerance: tol,
        present: min_gap <= tol,
    }
}

#[derive(Debug, Clone)]
pub struct OmegaOperator {
    pub side: Side,
    pub omega: CMat,
    /// `𝒱₀/(d²/4)` for the contour used.
    pub bound: f64,
}

impl OmegaOperator {
    pub fn within_bound(&self) -> bool {
        linalg::norm2(&self.omega) < self.bound
    }
}

fn check_pair(sol_l: &RootSolution, sol_minus_l: &RootSolution) -> Result<()> {
    if sol_minus_l.side != sol_l.side.opposite() {
        return Err(Error::InvalidParameter("Ω needs roots for opposite sides".into()));
    }
    if sol_l.z_op.shape() != sol_minus_l.z_op.shape() {
        return Err(Error::Shape("roots of different dimension".into()));
    }
    Ok(())
}

/// `Ω^(l) = ∫_{Γ^l} (Z^(-l)* - μ)⁻¹K′_B(μ)(Z^(l) - μ)⁻¹ dμ` by the contour rule.
pub fn compute_omega(
    model: &SpectralModel,
    contour: &Contour,
    sol_l: &RootSolution,
    sol_minus_l: &RootSolution,
) -> Result<OmegaOperator> {
    check_pair(sol_l, sol_minus_l)?;
    if contour.side() != sol_l.side {
        return Err(Error::InvalidContour("contour side differs from the root's side".into()));
    }
    let left = sol_minus_l.z_op.adjoint();
    for z in [&left, &sol_l.z_op] {
        for lam in linalg::eigenvalues(z) {
            let distance = contour.distance_to_nodes(lam);
            if distance <= SPECTRUM_NODE_GUARD {
                return Err(Error::SpectrumOnContour { distance });
            }
        }
    }
    let n = model.dim();
    let mut omega = CMat::zeros(n, n);
    for node in contour.nodes() {
        let rl = linalg::resolvent(&left, node.point)?;
        let rr = linalg::resolvent(&sol_l.z_op, node.point)?;
        omega += (rl * model.kprime_at(node.point) * rr).scale_complex(node.weight);
    }
    let report = admissibility(model, contour);
    Ok(OmegaOperator {
        side: sol_l.side,
        omega,
        bound: report.variation / (0.25 * report.distance * report.distance),
    })
}

/// `Ω^(l)` from the same integrand over `Δ₀`, i.e. `Y^(-l)*Y^(l)`.
pub fn omega_via_interval(
    model: &SpectralModel,
    sol_l: &RootSolution,
    sol_minus_l: &RootSolution,
    quad_tol: f64,
) -> Result<CMat> {
    check_pair(sol_l, sol_minus_l)?;
    let delta0 = model.delta0();
    let left = sol_minus_l.z_op.adjoint();
    check_hyp_r(&left, delta0, quad_tol)?;
    check_hyp_r(&sol_l.z_op, delta0, quad_tol)?;
    let mut poles = linalg::eigenvalues(&left);
    poles.extend(linalg::eigenvalues(&sol_l.z_op));
    let breaks = pole_breakpoints(&poles, delta0);
    Ok(integrate_adaptive(
        |mu| {
            let m = Complex64::new(mu, 0.0);
            Ok(linalg::resolvent(&left, m)? * model.kprime_at(m) * linalg::resolvent(&sol_l.z_op, m)?)
        },
        delta0.lo,
        delta0.hi,
        &breaks,
        options(quad_tol),
    )?
    .value)
}

#[derive(Debug, Clone)]
pub struct F1Value {
    pub value: CMat,
    pub condition: f64,
}

/// `F₁(z, Γ) = I + ∫_Γ K′_B(μ)(Z - μ)⁻¹(μ - z)⁻¹ dμ` on the nodes of `Γ`.
pub fn factor_f1(model: &SpectralModel, contour: &Contour, sol: &RootSolution, z: Complex64) -> Result<F1Value> {
    let distance = contour.distance_to_nodes(z);
    let guard = schur::NEAR_CONTOUR_FACTOR * contour.local_spacing(z);
    if distance < guard {
        return Err(Error::NearContour { z, distance, guard });
    }
    let n = model.dim();
    let mut value = linalg::identity(n);
    for node in contour.nodes() {
        let r = linalg::resolvent(&sol.z_op, node.point)?;
        value += (model.kprime_at(node.point) * r).scale_complex(node.weight / (node.point - z));
    }
    let condition = linalg::condition_number(&value);
    Ok(F1Value { value, condition })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Complex64,
    pub radius: f64,
}

impl Circle {
    fn point(&self, theta: f64) -> Complex64 {
        self.center + Complex64::from_polar(self.radius, theta)
    }
}

/// Positively oriented circles whose union of interiors encloses `spec(Z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSpec {
    pub circles: Vec<Circle>,
}

/// One circle per cluster of `spec(Z)`.
///
/// A cluster with centre `c` and extent `e` may grow to
/// `A = d/2 - dist(c, σ₁)`, which keeps the disk inside `O_{d/2}(σ₁)`, and to
/// its share of the gap to each neighbour; the radius is `(e + A)/2`.
/// Clusters that do not fit are merged with their nearest neighbour.
pub fn default_gamma_spec(model: &SpectralModel, sol: &RootSolution) -> Result<GammaSpec> {
    let half_d = 0.5 * sol.report.distance;
    let sigma = model.sigma1();
    let dist_sigma = |z: Complex64| sigma.iter().map(|s| (z - s).norm()).fold(f64::INFINITY, f64::min);
    let mut clusters: Vec<Vec<Complex64>> = linalg::eigenvalues(&sol.z_op).into_iter().map(|l| vec![l]).collect();
    loop {
        let shape: Vec<(Complex64, f64)> = clusters
            .iter()
            .map(|c| {
                let center = c.iter().sum::<Complex64>() / c.len() as f64;
                let extent = c.iter().map(|l| (l - center).norm()).fold(0.0, f64::max);
                (center, extent)
            })
            .collect();
        let mut circles = Vec::with_capacity(shape.len());
        let mut cramped = None;
        for (i, &(center, extent)) in shape.iter().enumerate() {
            let mut allowed = (1.0 - 1e-3) * (half_d - dist_sigma(center));
            let mut nearest: Option<(f64, usize)> = None;
            for (j, &(other, other_extent)) in shape.iter().enumerate() {
                if j != i {
                    let gap = (center - other).norm();
                    allowed = allowed.min(0.5 * (gap + extent - other_extent));
                    if nearest.is_none_or(|(g, _)| gap < g) {
                        nearest = Some((gap, j));
                    }
                }
            }
            if allowed <= extent * (1.0 + 1e-6) + 1e-14 {
                match nearest {
                    Some((_, j)) => {
                        cramped = Some((i, j));
                        break;
                    }
                    None => {
                        return Err(Error::GammaContainment(format!(
                            "spec(Z) has extent {extent:e} about {center}, too wide for the d/2-neighbourhood of σ₁"
                        )))
                    }
                }
            }
            circles.push(Circle {
                center,
                radius: 0.5 * (extent + allowed),
            });
        }
        match cramped {
            None => return Ok(GammaSpec { circles }),
            Some((i, j)) => {
                let (a, b) = (i.min(j), i.max(j));
                let moved = clusters.remove(b);
                clusters[a].extend(moved);
            }
        }
    }
}

const CONTAINMENT_ANGLES: usize = 256;
const CONTAINMENT_RINGS: usize = 8;

/// Checks that the circles are disjoint, that their closed disks lie in
/// `O_{d/2}(σ₁)` (sampled on a polar grid), and that each eigenvalue of `Z`
/// sits strictly inside exactly one of them.
pub fn validate_gamma_spec(model: &SpectralModel, sol: &RootSolution, gamma: &GammaSpec) -> Result<()> {
    if gamma.circles.is_empty() {
        return Err(Error::GammaContainment("no circles given".into()));
    }
    let half_d = 0.5 * sol.report.distance;
    let sigma = model.sigma1();
    for (i, c) in gamma.circles.iter().enumerate() {
        if !(c.radius > 0.0 && c.radius.is_finite() && c.center.is_finite()) {
            return Err(Error::GammaContainment(format!("circle {i} has invalid radius {}", c.radius)));
        }
        for other in &gamma.circles[i + 1..] {
            if (c.center - other.center).norm() <= c.radius + other.radius {
                return Err(Error::GammaContainment(format!("circle {i} overlaps another circle")));
            }
        }
        for ring in 1..=CONTAINMENT_RINGS {
            let r = c.radius * ring as f64 / CONTAINMENT_RINGS as f64;
            for k in 0..CONTAINMENT_ANGLES {
                let theta = 2.0 * PI * k as f64 / CONTAINMENT_ANGLES as f64;
                let z = c.center + Complex64::from_polar(r, theta);
                let dist = sigma.iter().map(|s| (z - s).norm()).fold(f64::INFINITY, f64::min);
                if dist >= half_d {
                    return Err(Error::GammaContainment(format!(
                        "circle {i} leaves the d/2-neighbourhood of σ₁ at {z} (distance {dist:e}, d/2 = {half_d:e})"
                    )));
                }
            }
        }
    }
    for lam in linalg::eigenvalues(&sol.z_op) {
        let inside = gamma
            .circles
            .iter()
            .filter(|c| (lam - c.center).norm() < c.radius * (1.0 - 1e-6))
            .count();
        if inside != 1 {
            return Err(Error::GammaContainment(format!(
                "eigenvalue {lam} is enclosed by {inside} circles"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    /// `-(1/2πi)∮ [M₁(z, Γ)]⁻¹ dz`.
    pub h0: CMat,
    /// `-(1/2πi)∮ z[M₁(z, Γ)]⁻¹ dz`.
    pub h1: CMat,
    pub z_reconstructed: CMat,
    pub nodes_per_circle: usize,
    /// Change between the last two trapezoid refinements.
    pub refinement_change: f64,
}

const TRAPEZOID_START: usize = 64;
const TRAPEZOID_MAX: usize = 8192;
const TRAPEZOID_TOL: f64 = 1e-13;

fn trapezoid_pair(model: &SpectralModel, contour: &Contour, gamma: &GammaSpec, nodes: usize) -> Result<(CMat, CMat)> {
    let n = model.dim();
    let mut h0 = CMat::zeros(n, n);
    let mut h1 = CMat::zeros(n, n);
    for circle in &gamma.circles {
        for k in 0..nodes {
            let theta = 2.0 * PI * k as f64 / nodes as f64;
            let z = circle.point(theta);
            let inv = linalg::inverse(&schur::m1_continued(model, contour, z)?, "M₁(z, Γ) on the spectral circle")?;
            // dz/(2πi) = r e^{iθ} dθ/(2π)
            let w = Complex64::from_polar(circle.radius, theta) / nodes as f64;
            h0 -= inv.scale_complex(w);
            h1 -= inv.scale_complex(w * z);
        }
    }
    Ok((h0, h1))
}

/// Trapezoid rule on the circles of `gamma`, doubled until two successive
/// refinements agree to `1e-13` relative.
pub fn reconstruct_from_contour(
    model: &SpectralModel,
    contour: &Contour,
    sol: &RootSolution,
    gamma: &GammaSpec,
) -> Result<Reconstruction> {
    validate_gamma_spec(model, sol, gamma)?;
    let mut nodes = TRAPEZOID_START;
    let (mut h0, mut h1) = trapezoid_pair(model, contour, gamma, nodes)?;
    loop {
        let next = 2 * nodes;
        let (g0, g1) = trapezoid_pair(model, contour, gamma, next)?;
        let change = linalg::norm2(&(&g0 - &h0)).max(linalg::norm2(&(&g1 - &h1)));
        let scale = 1.0 + linalg::norm2(&g0).max(linalg::norm2(&g1));
        h0 = g0;
        h1 = g1;
        nodes = next;
        if change <= TRAPEZOID_TOL * scale {
            let z_reconstructed = &h1 * linalg::inverse(&h0, "h0")?;
            return Ok(Reconstruction {
                h0,
                h1,
                z_reconstructed,
                nodes_per_circle: nodes,
                refinement_change: change,
            });
        }
        if next >= TRAPEZOID_MAX {
            return Err(Error::Quadrature {
                error: change,
                evaluations: 2 * next * gamma.circles.len(),
            });
        }
    }
}

/// Residuals of the two orderings `(I - Ω)⁻¹Z^(-l)*` and `Z^(l)(I - Ω)⁻¹`,
/// and the largest eigenvalue mismatch of `(I - Ω)⁻¹Z^(-l)*(I - Ω)` against
/// `Z^(l)` under sorted pairing.
#[derive(Debug, Clone, Copy)]
pub struct HadjCheck {
    pub ordering_residual: f64,
    pub similarity_residual: f64,
}

pub fn hadj_check(omega: &OmegaOperator, sol_l: &RootSolution, sol_minus_l: &RootSolution) -> Result<HadjCheck> {
    let n = omega.omega.nrows();
    let i_minus = linalg::identity(n) - &omega.omega;
    let inv = linalg::inverse(&i_minus, "I - Ω")?;
    let zm_star = sol_minus_l.z_op.adjoint();
    let ordering_residual = linalg::norm2(&(&inv * &zm_star - &sol_l.z_op * &inv));
    let mut a = linalg::eigenvalues(&(&inv * &zm_star * &i_minus));
    let mut b = linalg::eigenvalues(&sol_l.z_op);
    linalg::sort_complex(&mut a);
    linalg::sort_complex(&mut b);
    let similarity_residual = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    Ok(HadjCheck {
        ordering_residual,
        similarity_residual,
    })
}

/// `(I - Ω)⁻¹`.
pub fn omega_resolvent(omega: &OmegaOperator) -> Result<CMat> {
    linalg::inverse(&(linalg::identity(omega.omega.nrows()) - &omega.omega), "I - Ω")
}

/// Lens points for the sheets identity: `count` points on a half-ellipse
/// inside the lens of `contour`, at fractions of its depth.
pub fn lens_samples(model: &SpectralModel, contour: &Contour, count: usize) -> Vec<Complex64> {
    let delta0 = model.delta0();
    let l = contour.side().sign();
    (0..count)
        .map(|k| {
            let s = (k as f64 + 0.5) / count as f64;
            let x = delta0.lo + delta0.len() * (0.1 + 0.8 * s);
            let frac = 0.15 + 0.5 * ((7 * k) % count) as f64 / count as f64;
            Complex64::new(x, 0.0) + I * (l * frac * contour.depth() * (1.0 - (2.0 * s - 1.0).powi(2)).sqrt())
        })
        .filter(|z| contour.lens_contains(*z))
        .collect()
}
