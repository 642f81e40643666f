//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.

mod common;

use std::f64::consts::PI;
use std::process::{Command, ExitCode};

use num_complex::Complex64;
use oproot::config::{RunConfig, VerifyConfig};
use oproot::contour::{admissibility, make_contour, ContourKind, Side};
use oproot::friedrichs::{oracle_solution, FriedrichsParams};
use oproot::linalg;
use oproot::model::SpectralModel;
use oproot::report::IdentityRow;
use oproot::riccati::{check_one_in_spectrum, compute_y, ysn_bound_integral};
use oproot::rootsolver::{classify, default_tau_real, homotopy_path, solve_basic, SolverOptions, SpectrumLabel};
use oproot::verify::{identity_suite, solve_side, SolvedSide};
use rand::rngs::StdRng;
use rand::SeedableRng;

const RANDOM_MODELS: usize = 20;
const REAL_MODELS: usize = 5;
const QUAD_TOL: f64 = 1e-11;

struct Tally {
    failed: usize,
}

impl Tally {
    fn line(&mut self, id: &str, pass: bool, detail: String) {
        if !pass {
            self.failed += 1;
        }
        println!("{} {id}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn solved(model: &SpectralModel, side: Side, kind: ContourKind, depth: f64) -> SolvedSide {
    let contour = make_contour(model, side, kind, depth, 200).unwrap();
    let solution = solve_basic(model, &contour, 1.0, SolverOptions::default()).unwrap();
    let classification = classify(model, &contour, &solution, default_tau_real(model)).unwrap();
    SolvedSide {
        contour,
        solution,
        classification,
    }
}

struct Case {
    name: String,
    model: SpectralModel,
    upper: SolvedSide,
    lower: SolvedSide,
}

impl Case {
    fn new(name: String, model: SpectralModel) -> Self {
        let upper = solved(&model, Side::Upper, ContourKind::Semicircle, 1.0);
        let lower = solved(&model, Side::Lower, ContourKind::Semicircle, 1.0);
        Self {
            name,
            model,
            upper,
            lower,
        }
    }

    fn sides(&self) -> [&SolvedSide; 2] {
        [&self.upper, &self.lower]
    }
}

fn worst(rows: &[IdentityRow], names: &[&str]) -> (bool, f64, usize) {
    let mut pass = true;
    let mut ratio: f64 = 0.0;
    let mut count = 0;
    for r in rows.iter().filter(|r| names.contains(&r.name.as_str())) {
        count += 1;
        pass &= r.pass;
        if let Some(res) = r.residual {
            if r.tolerance > 0.0 {
                ratio = ratio.max(res / r.tolerance);
            }
        }
    }
    (pass, ratio, count)
}

fn main() -> ExitCode {
    let mut t = Tally { failed: 0 };

    // The explicitly solvable scalar model: α = 1, a₁ = 0, b² = 0.04.
    let (alpha, b) = (1.0, 0.2);
    let params = FriedrichsParams::new(alpha, 0.0, b).unwrap();
    let oracle = oracle_solution(&params).unwrap();
    let cfg = RunConfig::friedrichs(alpha, 0.0, b);
    let fmodel = cfg.build_model().unwrap();
    let fcase = Case {
        name: "friedrichs".into(),
        upper: solve_side(&fmodel, &cfg, Side::Upper).unwrap(),
        lower: solve_side(&fmodel, &cfg, Side::Lower).unwrap(),
        model: fmodel,
    };

    {
        let b2 = b * b;
        let r_min_closed = PI * b2 / (0.5 + (0.25 - PI * b2 / alpha).sqrt());
        let r_max_closed = alpha - (PI * b2 * alpha).sqrt();
        let mut dz: f64 = 0.0;
        let mut ball = true;
        let mut dr: f64 = 0.0;
        for s in fcase.sides() {
            let z = s.solution.z_op[(0, 0)];
            dz = dz.max((z - oracle.root(s.side())).norm());
            ball &= s.solution.x_norm() <= s.solution.r_min;
            dr = dr.max((s.solution.r_min - r_min_closed).abs()).max((s.solution.r_max - r_max_closed).abs());
        }
        t.line(
            "1 scalar oracle",
            dz <= 1e-9 && ball && dr <= 1e-12,
            format!("max |dz| = {dz:.2e} (tol 1e-9), |X| <= r_min: {ball}, r_min/r_max error {dr:.2e} (tol 1e-12)"),
        );
    }

    {
        let mut dn: f64 = 0.0;
        let mut present = true;
        for s in fcase.sides() {
            let ric = compute_y(&fcase.model, &s.solution, QUAD_TOL).unwrap();
            dn = dn.max((ric.y_norm - 1.0).abs());
            present &= check_one_in_spectrum(&ric, 1e-8).present;
        }
        t.line(
            "2 angular operator norm",
            dn <= 1e-8 && present,
            format!("max | |Y| - 1 | = {dn:.2e} (tol 1e-8), 1 in spec(Y*Y): {present}"),
        );
    }

    let mut rng = StdRng::seed_from_u64(0xacce_97a1);
    let random: Vec<Case> = (0..RANDOM_MODELS)
        .map(|k| Case::new(format!("random-{k}"), common::random_model(&mut rng, false).1))
        .collect();

    {
        let mut floor: f64 = f64::INFINITY;
        let mut excess: f64 = f64::NEG_INFINITY;
        let mut checked = 0;
        for case in &random {
            for s in case.sides() {
                if s.classification.count(SpectrumLabel::PhysicalComplex) != case.model.dim() {
                    continue;
                }
                checked += 1;
                let ric = compute_y(&case.model, &s.solution, QUAD_TOL).unwrap();
                let bound = ysn_bound_integral(&case.model, &s.solution, QUAD_TOL).unwrap();
                floor = floor.min(ric.y_norm);
                excess = excess.max(ric.y_norm * ric.y_norm - bound);
            }
        }
        t.line(
            "3 norm floor and ceiling",
            checked > 0 && floor >= 1.0 - 1e-8 && excess <= 1e-8,
            format!("{checked} sides, min |Y| = {floor:.10}, max |Y|^2 - bound = {excess:.2e}"),
        );
    }

    {
        let opts = VerifyConfig::default();
        let mut rows = Vec::new();
        for case in std::iter::once(&fcase).chain(&random) {
            let (r, _) = identity_suite(&case.model, &case.upper, &case.lower, &opts, 1e-12, None);
            for row in &r {
                if !row.pass {
                    println!("  {} {:?}: {:?}", case.name, row.side, row);
                }
            }
            rows.extend(r);
        }
        let groups: [(&str, &[&str]); 6] = [
            ("4a sheets", &["sheets"]),
            ("4b factorization", &["factorization", "f1-condition"]),
            ("4c omega bound and adjoint", &["omega-bound", "omega-adjoint", "omega-two-routes"]),
            (
                "4d contour reconstruction",
                &["omega-reconstruction", "z-reconstruction", "hadj-orderings", "hadj-similarity"],
            ),
            ("4e riccati", &["zay", "riccati", "riccati-adjoint"]),
            ("4f boundary limits", &["boundary-limits"]),
        ];
        for (id, names) in groups {
            let (pass, ratio, count) = worst(&rows, names);
            t.line(
                id,
                pass && count > 0,
                format!("{count} rows over {} models, worst residual/tolerance = {ratio:.2e}", RANDOM_MODELS + 1),
            );
        }
    }

    {
        let mut excess: f64 = f64::NEG_INFINITY;
        for case in std::iter::once(&fcase).chain(&random) {
            for s in case.sides() {
                excess = excess.max(s.solution.localization_excess(&case.model));
            }
        }
        t.line(
            "5 spectral localization",
            excess <= 1e-9,
            format!("max distance beyond r_min = {excess:.2e} (slack 1e-9)"),
        );
    }

    {
        let mut bad_labels = 0;
        let mut min_im: f64 = f64::INFINITY;
        let mut band_hits = 0;
        let grid: Vec<f64> = (1..=20).map(|k| k as f64 / 20.0).collect();
        for case in &random {
            let tau = default_tau_real(&case.model);
            for s in case.sides() {
                bad_labels += s.classification.count(SpectrumLabel::Real) + s.classification.count(SpectrumLabel::Resonance);
                let path = homotopy_path(&case.model, &s.contour, &grid, SolverOptions::default(), tau).unwrap();
                for p in &path.points {
                    for z in &p.trajectory_values {
                        min_im = min_im.min(z.im.abs());
                        band_hits += usize::from(z.im.abs() <= tau);
                    }
                }
            }
        }
        t.line(
            "6 feshbach classification",
            bad_labels == 0 && band_hits == 0,
            format!("real/resonance labels = {bad_labels}, points in |Im| <= tau = {band_hits}, min |Im| over t in (0,1] = {min_im:.2e}"),
        );
    }

    {
        let mut diff: f64 = 0.0;
        let mut compared = 0;
        for case in std::iter::once(&fcase).chain(&random) {
            for s in case.sides() {
                let half = case.model.delta0().half_len();
                let Some(depth) = [0.8, 0.6, 1.0, 0.4].into_iter().map(|f| f * half).find(|&h| {
                    let g = make_contour(&case.model, s.side(), ContourKind::Rectangle, h, 200).unwrap();
                    admissibility(&case.model, &g).admissible
                }) else {
                    continue;
                };
                let rect = solved(&case.model, s.side(), ContourKind::Rectangle, depth);
                diff = diff.max(linalg::norm2(&(&rect.solution.x - &s.solution.x)));
                compared += 1;
            }
        }
        t.line(
            "7a contour independence",
            compared > 0 && diff <= 1e-8,
            format!("{compared} semicircle/rectangle pairs, max |X_semi - X_rect| = {diff:.2e} (tol 1e-8)"),
        );

        let mut rng = StdRng::seed_from_u64(0x0c0a_91e7);
        let mut real_cases = vec![&fcase];
        let owned: Vec<Case> = (0..REAL_MODELS)
            .map(|k| Case::new(format!("real-{k}"), common::random_model(&mut rng, true).1))
            .collect();
        real_cases.extend(&owned);
        let mut adjoint: f64 = 0.0;
        let mut entrywise: f64 = 0.0;
        let mut spectra: f64 = 0.0;
        let mut scalar_adjoint: f64 = 0.0;
        for case in &real_cases {
            let (xu, xl) = (&case.upper.solution.x, &case.lower.solution.x);
            let d = linalg::norm2(&(xl - xu.adjoint()));
            if case.model.dim() == 1 {
                scalar_adjoint = scalar_adjoint.max(d);
            }
            adjoint = adjoint.max(d);
            entrywise = entrywise.max(linalg::norm2(&(xl - xu.map(|v| v.conj()))));
            let mut a: Vec<Complex64> = case.upper.solution.eigenvalues().iter().map(|z| z.conj()).collect();
            let mut b = case.lower.solution.eigenvalues();
            linalg::sort_complex(&mut a);
            linalg::sort_complex(&mut b);
            spectra = spectra.max(a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max));
        }
        t.line(
            "7b conjugate symmetry X(-l) = X(l)*",
            adjoint <= 1e-8,
            format!(
                "{} real models, max |X(-l) - X(l)*| = {adjoint:.2e} (tol 1e-8); scalar model alone {scalar_adjoint:.2e}",
                real_cases.len()
            ),
        );
        println!(
            "INFO 7b: entrywise conjugate max |X(-l) - conj(X(l))| = {entrywise:.2e}; conjugate spectra max gap = {spectra:.2e}"
        );
    }

    {
        let b_bad = 0.1f64.sqrt();
        let dir = tempfile::TempDir::new().unwrap();
        let path = dir.path().join("beyond.toml");
        std::fs::write(&path, RunConfig::friedrichs(1.0, 0.0, b_bad).to_toml().unwrap()).unwrap();
        let out = Command::new(env!("CARGO_BIN_EXE_oproot"))
            .args(["solve", "--config", path.to_str().unwrap()])
            .output()
            .unwrap();
        let code = out.status.code();
        let oracle = oracle_solution(&FriedrichsParams::new(1.0, 0.0, b_bad).unwrap()).unwrap();
        t.line(
            "8 beyond contraction",
            code == Some(2) && oracle.closed_m1_residual <= 1e-12,
            format!(
                "solver exit code {code:?} (want 2), oracle y = {:.12}, closed M1 residual = {:.2e} (tol 1e-12)",
                oracle.y, oracle.closed_m1_residual
            ),
        );
    }

    println!("{} criteria failed", t.failed);
    if t.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
