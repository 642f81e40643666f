//! The identity suite: every exact relation between `M₁`, `Z^(l)`, `Y^(l)`,
//! `Ω^(l)` and `F₁` evaluated numerically, one row per identity and side.
//!
//! Residuals are relative: each is divided by the scale named in its
//! function before comparison with the tolerance.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::config::{RunConfig, VerifyConfig};
use crate::contour::{Contour, Side};
use crate::error::{Error, Result};
use crate::linalg::{self, CVec, ScaleComplex};
use crate::model::SpectralModel;
use crate::report::{IdentityRow, RiccatiSummary};
use crate::riccati::{self, GammaSpec, OmegaOperator, RationalTrial, TrialPair};
use crate::rootsolver::{self, RootSolution, SpectrumClassification, SpectrumLabel};
use crate::schur;

const TRIAL_SEED: u64 = 0x5eed_0001;

pub const TOL_SHEETS: f64 = 1e-9;
pub const TOL_FACTOR: f64 = 1e-9;
pub const MAX_F1_CONDITION: f64 = 1e12;
pub const TOL_OMEGA_ADJOINT: f64 = 1e-10;
pub const TOL_OMEGA_ROUTES: f64 = 1e-9;
pub const TOL_OMEGA_M: f64 = 1e-8;
pub const TOL_HADJ: f64 = 1e-9;
pub const TOL_SIMILARITY: f64 = 1e-8;
pub const TOL_Z_RECONSTRUCTION: f64 = 1e-8;
pub const TOL_ZAY: f64 = 1e-8;
pub const TOL_RICCATI: f64 = 1e-8;
pub const TOL_J_ORTHOGONALITY: f64 = 1e-10;
pub const TOL_GRAM: f64 = 1e-12;
pub const TOL_NORM: f64 = 1e-8;
pub const TOL_LOCALIZATION: f64 = 1e-9;
pub const TOL_ROOT: f64 = 1e-7;
pub const TOL_BALL: f64 = 1e-9;
pub const TOL_BOUNDARY: f64 = 1e-10;

/// A solved side: its contour, root and spectral labels.
#[derive(Debug, Clone)]
pub struct SolvedSide {
    pub contour: Contour,
    pub solution: RootSolution,
    pub classification: SpectrumClassification,
}

impl SolvedSide {
    pub fn side(&self) -> Side {
        self.solution.side
    }
}

pub fn solve_side(model: &SpectralModel, cfg: &RunConfig, side: Side) -> Result<SolvedSide> {
    let contour = cfg.contour(model, side)?;
    let solution = rootsolver::solve_basic(model, &contour, 1.0, cfg.solver_options())?;
    let classification = rootsolver::classify(model, &contour, &solution, cfg.tau_real(model))?;
    Ok(SolvedSide {
        contour,
        solution,
        classification,
    })
}

/// Shifts the root by `δ·I` and relabels its spectrum; exact identities
/// stop holding for `δ ≠ 0`.
pub fn perturb(model: &SpectralModel, solved: &mut SolvedSide, delta: f64, tau_real: f64) -> Result<()> {
    if delta == 0.0 {
        return Ok(());
    }
    let shift = linalg::identity(model.dim()).scale(delta);
    solved.solution.x += &shift;
    solved.solution.z_op += &shift;
    solved.classification = rootsolver::classify(model, &solved.contour, &solved.solution, tau_real)?;
    Ok(())
}

fn m1_scale(model: &SpectralModel, z: Complex64) -> f64 {
    1.0 + linalg::norm2(model.a1()) + z.norm()
}

/// Bound for `sup ‖b(μ)‖` over `Δ₀`.
fn coupling_scale(model: &SpectralModel) -> f64 {
    let d = model.delta0();
    let reach = d.lo.abs().max(d.hi.abs()).max(1.0);
    model
        .b()
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| linalg::norm2(c) * reach.powi(k as i32))
        .sum()
}

fn row_or_fail(name: &str, side: Option<Side>, tol: f64, r: Result<IdentityRow>) -> IdentityRow {
    r.unwrap_or_else(|e| IdentityRow::failed(name, side, tol, &e))
}

/// Points `σⱼ + ρe^{iθ}` with `ρ ≤ 0.9·d/2`.
pub fn factor_samples(model: &SpectralModel, sol: &RootSolution, count: usize) -> Vec<Complex64> {
    let half_d = 0.5 * sol.report.distance;
    let sigma = model.sigma1();
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    (0..count)
        .map(|k| {
            let s = sigma[k % sigma.len()];
            let rho = 0.9 * half_d * (k as f64 + 1.0) / (count as f64 + 1.0);
            let theta = 2.0 * PI * (k as f64 * golden).fract();
            Complex64::new(s, 0.0) + Complex64::from_polar(rho, theta)
        })
        .collect()
}

/// Interior points of `Δ₀`, midpoints of `count` equal cells.
pub fn interval_samples(model: &SpectralModel, count: usize) -> Vec<f64> {
    let d = model.delta0();
    (0..count).map(|k| d.lo + d.len() * (k as f64 + 0.5) / count as f64).collect()
}

fn random_vector(rng: &mut StdRng, dim: usize) -> CVec {
    CVec::from_fn(dim, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Rational trial pairs: `x₀(μ) = c₀ + c₁μ + d/(μ - p)` with `Im p ≥ 0.2·|Δ₀|`.
pub fn trial_pairs(model: &SpectralModel, count: usize) -> Vec<TrialPair> {
    let mut rng = StdRng::seed_from_u64(TRIAL_SEED);
    let d = model.delta0();
    let (m, n) = (model.multiplicity(), model.dim());
    (0..count)
        .map(|_| {
            let poly = vec![random_vector(&mut rng, m), random_vector(&mut rng, m)];
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let pole = Complex64::new(
                d.lo + d.len() * rng.random_range(0.0..1.0),
                sign * d.len() * rng.random_range(0.2..0.6),
            );
            TrialPair {
                x0: RationalTrial {
                    poly,
                    poles: vec![(pole, random_vector(&mut rng, m))],
                },
                x1: random_vector(&mut rng, n),
            }
        })
        .collect()
}

/// `M₁(z, Γ)` by contour quadrature against the sheets formula, at points
/// inside the lens.
pub fn sheets_row(model: &SpectralModel, solved: &SolvedSide, count: usize) -> IdentityRow {
    let side = Some(solved.side());
    row_or_fail("sheets", side, TOL_SHEETS, (|| {
        let mut worst: f64 = 0.0;
        let points = riccati::lens_samples(model, &solved.contour, count);
        if points.is_empty() {
            return Err(Error::EmptyRegion);
        }
        for z in points {
            let quad = schur::m1_continued(model, &solved.contour, z)?;
            let sheets = schur::sheets_value(model, &solved.contour, z)?;
            worst = worst.max(linalg::norm2(&(quad - sheets)) / m1_scale(model, z));
        }
        Ok(IdentityRow::at_most("sheets", side, worst, TOL_SHEETS))
    })())
}

/// `M₁(z, Γ) = F₁(z, Γ)(Z - z)` and the conditioning of `F₁` in `O_{d/2}(σ₁)`.
pub fn factorization_rows(model: &SpectralModel, solved: &SolvedSide, count: usize) -> Vec<IdentityRow> {
    let side = Some(solved.side());
    let sol = &solved.solution;
    let mut worst: f64 = 0.0;
    let mut cond: f64 = 0.0;
    let n = model.dim();
    for z in factor_samples(model, sol, count) {
        let step = (|| {
            let f1 = riccati::factor_f1(model, &solved.contour, sol, z)?;
            let m1 = schur::m1_continued(model, &solved.contour, z)?;
            let rhs = &f1.value * (&sol.z_op - linalg::identity(n).scale_complex(z));
            Ok::<_, Error>((linalg::norm2(&(m1 - rhs)) / m1_scale(model, z), f1.condition))
        })();
        match step {
            Ok((r, c)) => {
                worst = worst.max(r);
                cond = cond.max(c);
            }
            Err(e) => {
                return vec![
                    IdentityRow::failed("factorization", side, TOL_FACTOR, &e),
                    IdentityRow::failed("f1-condition", side, MAX_F1_CONDITION, &e),
                ]
            }
        }
    }
    vec![
        IdentityRow::at_most("factorization", side, worst, TOL_FACTOR),
        IdentityRow::below("f1-condition", side, cond, MAX_F1_CONDITION),
    ]
}

/// Rows that depend only on one solved side: fixed point, ball, localization,
/// root property.
pub fn root_rows(model: &SpectralModel, solved: &SolvedSide, solver_tol: f64) -> Vec<IdentityRow> {
    let side = Some(solved.side());
    let sol = &solved.solution;
    let mut rows = Vec::new();
    let fp_tol = solver_tol * sol.x_norm().max(1.0);
    rows.push(row_or_fail("fixed-point", side, fp_tol, (|| {
        let w = rootsolver::transformator(model, &solved.contour, &sol.z_op)?.scale(sol.coupling_scale.powi(2));
        Ok(IdentityRow::at_most("fixed-point", side, linalg::norm2(&(&sol.x - w)), fp_tol))
    })()));
    rows.push(IdentityRow::at_most(
        "ball-containment",
        side,
        (sol.x_norm() - sol.r_min).max(0.0),
        TOL_BALL,
    ));
    rows.push(IdentityRow::at_most(
        "localization",
        side,
        sol.localization_excess(model).max(0.0),
        TOL_LOCALIZATION,
    ));
    let root = solved
        .classification
        .entries
        .iter()
        .map(|e| e.root_residual / m1_scale(model, e.eigenvalue))
        .fold(0.0, |a: f64, b| if b.is_nan() { f64::NAN } else { a.max(b) });
    rows.push(if root.is_nan() {
        IdentityRow::failed("root-property", side, TOL_ROOT, &Error::EmptyRegion)
            .with_note("M₁(λ, Γ) could not be evaluated at an eigenvalue")
    } else {
        IdentityRow::at_most("root-property", side, root, TOL_ROOT)
    });
    rows
}

/// `Im W₁(λ ± i0) = ±πK′_B(λ)` at interior points of `Δ₀`.
pub fn boundary_row(model: &SpectralModel, count: usize) -> IdentityRow {
    row_or_fail("boundary-limits", None, TOL_BOUNDARY, (|| {
        let d = model.delta0();
        let mut worst: f64 = 0.0;
        for k in 0..count {
            let lambda = d.lo + d.len() * (k as f64 + 1.0) / (count as f64 + 1.0);
            let k_lambda = model.kprime_at(Complex64::new(lambda, 0.0));
            for side in Side::both() {
                let w = schur::w1_boundary(model, lambda, side)?;
                let im = (&w - w.adjoint()).scale_complex(Complex64::new(0.0, -0.5));
                let want = k_lambda.scale(side.sign() * PI);
                worst = worst.max(linalg::norm2(&(im - want)) / (1.0 + linalg::norm2(&k_lambda)));
            }
        }
        Ok(IdentityRow::at_most("boundary-limits", None, worst, TOL_BOUNDARY))
    })())
}

/// Rows for `Y^(l)`: `ZAY`, both Riccati forms, J-orthogonality, Gram
/// properties and the norm floor and ceiling.
pub fn riccati_rows(
    model: &SpectralModel,
    solved: &SolvedSide,
    opts: &VerifyConfig,
) -> (Vec<IdentityRow>, Option<RiccatiSummary>) {
    let side = Some(solved.side());
    let sol = &solved.solution;
    let names = [
        ("zay", TOL_ZAY),
        ("riccati", TOL_RICCATI),
        ("riccati-adjoint", TOL_RICCATI),
        ("j-orthogonality", TOL_J_ORTHOGONALITY),
        ("gram-hermitian", TOL_GRAM),
        ("gram-psd", TOL_GRAM),
        ("norm-ceiling", TOL_NORM),
    ];
    let ric = match riccati::compute_y(model, sol, opts.quad_tol) {
        Ok(r) => r,
        Err(e) => {
            let rows = names.iter().map(|(n, t)| IdentityRow::failed(n, side, *t, &e)).collect();
            return (rows, None);
        }
    };
    let mut rows = Vec::new();
    let a_scale = 1.0 + linalg::norm2(model.a1());
    rows.push(IdentityRow::at_most("zay", side, riccati::check_zay(model, &ric) / a_scale, TOL_ZAY));
    let samples = interval_samples(model, opts.riccati_samples);
    let r_scale = a_scale + coupling_scale(model);
    rows.push(row_or_fail("riccati", side, TOL_RICCATI, (|| {
        let r = riccati::riccati_residual(model, &ric, &samples)?;
        Ok(IdentityRow::at_most("riccati", side, r / r_scale, TOL_RICCATI))
    })()));
    rows.push(row_or_fail("riccati-adjoint", side, TOL_RICCATI, (|| {
        let r = riccati::riccati_adjoint_residual(model, &ric, &samples)?;
        Ok(IdentityRow::at_most("riccati-adjoint", side, r / r_scale, TOL_RICCATI))
    })()));
    rows.push(row_or_fail("j-orthogonality", side, TOL_J_ORTHOGONALITY, (|| {
        let trials = trial_pairs(model, opts.trial_vectors);
        let r = riccati::j_orthogonality(&ric, &trials, opts.quad_tol)?;
        Ok(IdentityRow::at_most("j-orthogonality", side, r, TOL_J_ORTHOGONALITY))
    })()));
    let g_scale = 1.0 + linalg::norm2(&ric.gram);
    let (defect, min_eig) = riccati::gram_defects(&ric);
    rows.push(IdentityRow::at_most("gram-hermitian", side, defect / g_scale, TOL_GRAM));
    rows.push(IdentityRow::at_most("gram-psd", side, (-min_eig).max(0.0) / g_scale, TOL_GRAM));
    let non_real = solved.classification.entries.iter().any(|e| e.label != SpectrumLabel::Real);
    if non_real {
        rows.push(IdentityRow::at_most(
            "norm-floor",
            side,
            (1.0 - ric.y_norm).max(0.0),
            TOL_NORM,
        ));
    }
    rows.push(row_or_fail("norm-ceiling", side, TOL_NORM, (|| {
        let bound = riccati::ysn_bound_integral(model, sol, opts.quad_tol)?;
        Ok(IdentityRow::at_most(
            "norm-ceiling",
            side,
            (ric.y_norm * ric.y_norm - bound).max(0.0),
            TOL_NORM,
        ))
    })()));
    let summary = RiccatiSummary {
        side: solved.side(),
        y_norm: ric.y_norm,
        gram_eigenvalues: ric.gram_eigenvalues(),
        one_in_spectrum: riccati::check_one_in_spectrum(&ric, opts.one_in_spectrum_tol),
    };
    (rows, Some(summary))
}

/// Rows for `Ω^(l)` and the contour reconstructions.
pub fn omega_rows(
    model: &SpectralModel,
    this: &SolvedSide,
    other: &SolvedSide,
    omega: &Result<OmegaOperator>,
    omega_other: &Result<OmegaOperator>,
    opts: &VerifyConfig,
    gamma: Option<&GammaSpec>,
) -> Vec<IdentityRow> {
    let side = Some(this.side());
    let dependent = [
        ("omega-bound", 1.0),
        ("omega-adjoint", TOL_OMEGA_ADJOINT),
        ("omega-two-routes", TOL_OMEGA_ROUTES),
        ("omega-reconstruction", TOL_OMEGA_M),
        ("z-reconstruction", TOL_Z_RECONSTRUCTION),
        ("hadj-orderings", TOL_HADJ),
        ("hadj-similarity", TOL_SIMILARITY),
    ];
    let om = match omega {
        Ok(o) => o,
        Err(e) => return dependent.iter().map(|(n, t)| IdentityRow::failed(n, side, *t, e)).collect(),
    };
    let mut rows = Vec::new();
    let om_norm = linalg::norm2(&om.omega);
    rows.push(if model.has_zero_coupling() {
        IdentityRow::at_most("omega-bound", side, om_norm, 0.0).with_note("zero coupling: Ω = 0 and 𝒱₀ = 0")
    } else {
        IdentityRow::below("omega-bound", side, om_norm, om.bound.min(1.0))
    });
    rows.push(match omega_other {
        Ok(o) => IdentityRow::at_most(
            "omega-adjoint",
            side,
            linalg::norm2(&(&o.omega - om.omega.adjoint())) / (1.0 + om_norm),
            TOL_OMEGA_ADJOINT,
        ),
        Err(e) => IdentityRow::failed("omega-adjoint", side, TOL_OMEGA_ADJOINT, e),
    });
    rows.push(row_or_fail("omega-two-routes", side, TOL_OMEGA_ROUTES, (|| {
        let via = riccati::omega_via_interval(model, &this.solution, &other.solution, opts.quad_tol)?;
        Ok(IdentityRow::at_most(
            "omega-two-routes",
            side,
            linalg::norm2(&(via - &om.omega)) / (1.0 + om_norm),
            TOL_OMEGA_ROUTES,
        ))
    })()));
    let sol = &this.solution;
    let z_scale = 1.0 + linalg::norm2(&sol.z_op);
    let inv = match riccati::omega_resolvent(om) {
        Ok(v) => v,
        Err(e) => {
            rows.extend(dependent[3..].iter().map(|(n, t)| IdentityRow::failed(n, side, *t, &e)));
            return rows;
        }
    };
    let inv_norm = linalg::norm2(&inv);
    let rec = riccati::default_gamma_spec(model, sol).and_then(|g| {
        let g = gamma.cloned().unwrap_or(g);
        riccati::reconstruct_from_contour(model, &this.contour, sol, &g)
    });
    match rec {
        Ok(rec) => {
            rows.push(IdentityRow::at_most(
                "omega-reconstruction",
                side,
                linalg::norm2(&(&rec.h0 - &inv)) / (1.0 + inv_norm),
                TOL_OMEGA_M,
            ));
            rows.push(IdentityRow::at_most(
                "z-reconstruction",
                side,
                linalg::norm2(&(&rec.z_reconstructed - &sol.z_op)) / z_scale,
                TOL_Z_RECONSTRUCTION,
            ));
        }
        Err(e) => {
            rows.push(IdentityRow::failed("omega-reconstruction", side, TOL_OMEGA_M, &e));
            rows.push(IdentityRow::failed("z-reconstruction", side, TOL_Z_RECONSTRUCTION, &e));
        }
    }
    match riccati::hadj_check(om, sol, &other.solution) {
        Ok(h) => {
            rows.push(IdentityRow::at_most(
                "hadj-orderings",
                side,
                h.ordering_residual / (inv_norm * z_scale),
                TOL_HADJ,
            ));
            rows.push(IdentityRow::at_most(
                "hadj-similarity",
                side,
                h.similarity_residual / z_scale,
                TOL_SIMILARITY,
            ));
        }
        Err(e) => {
            rows.push(IdentityRow::failed("hadj-orderings", side, TOL_HADJ, &e));
            rows.push(IdentityRow::failed("hadj-similarity", side, TOL_SIMILARITY, &e));
        }
    }
    rows
}

/// The whole suite for a solved upper/lower pair.
pub fn identity_suite(
    model: &SpectralModel,
    upper: &SolvedSide,
    lower: &SolvedSide,
    opts: &VerifyConfig,
    solver_tol: f64,
    gamma: Option<&GammaSpec>,
) -> (Vec<IdentityRow>, Vec<RiccatiSummary>) {
    let mut rows = vec![boundary_row(model, opts.boundary_points)];
    let mut summaries = Vec::new();
    let om_upper = riccati::compute_omega(model, &upper.contour, &upper.solution, &lower.solution);
    let om_lower = riccati::compute_omega(model, &lower.contour, &lower.solution, &upper.solution);
    for (this, other, om, om_other) in [
        (upper, lower, &om_upper, &om_lower),
        (lower, upper, &om_lower, &om_upper),
    ] {
        rows.extend(root_rows(model, this, solver_tol));
        rows.push(sheets_row(model, this, opts.lens_points));
        rows.extend(factorization_rows(model, this, opts.factor_points));
        rows.extend(omega_rows(model, this, other, om, om_other, opts, gamma));
        let (r, summary) = riccati_rows(model, this, opts);
        rows.extend(r);
        summaries.extend(summary);
    }
    (rows, summaries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(cfg: &RunConfig) -> Vec<IdentityRow> {
        let model = cfg.build_model().unwrap();
        let tau = cfg.tau_real(&model);
        let mut up = solve_side(&model, cfg, Side::Upper).unwrap();
        let mut lo = solve_side(&model, cfg, Side::Lower).unwrap();
        perturb(&model, &mut up, cfg.verify.z_perturbation, tau).unwrap();
        perturb(&model, &mut lo, cfg.verify.z_perturbation, tau).unwrap();
        identity_suite(&model, &up, &lo, &cfg.verify, cfg.solver.tol, cfg.gamma_spec().as_ref()).0
    }

    #[test]
    fn friedrichs_suite_passes() {
        let rows = run(&RunConfig::friedrichs(1.0, 0.0, 0.2));
        for r in &rows {
            assert!(r.pass, "{r:?}");
        }
        assert!(rows.iter().any(|r| r.name == "norm-floor"));
    }

    #[test]
    fn perturbed_root_breaks_exact_identities() {
        let mut cfg = RunConfig::friedrichs(1.0, 0.0, 0.2);
        cfg.verify.z_perturbation = 0.01;
        let rows = run(&cfg);
        for name in ["factorization", "zay"] {
            assert!(rows.iter().filter(|r| r.name == name).all(|r| !r.pass), "{name}");
        }
        assert!(rows.iter().filter(|r| r.name == "sheets").all(|r| r.pass));
    }

    #[test]
    fn samples_stay_in_their_regions() {
        let cfg = RunConfig::friedrichs(1.0, 0.0, 0.2);
        let model = cfg.build_model().unwrap();
        let s = solve_side(&model, &cfg, Side::Upper).unwrap();
        for z in factor_samples(&model, &s.solution, 30) {
            assert!(z.norm() < 0.5 * s.solution.report.distance);
        }
        assert!(interval_samples(&model, 50).iter().all(|m| m.abs() < 1.0));
        let a = trial_pairs(&model, 3);
        assert_eq!(a, trial_pairs(&model, 3));
        assert!(a.iter().all(|t| t.x0.poles[0].0.im.abs() >= 0.4));
    }
}
