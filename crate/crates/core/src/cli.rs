//! Command-line front end: `solve`, `verify`, `sweep` and `friedrichs`.
//!
//! Exit codes: 0 success, 2 inadmissible input, 3 numerical failure (including
//! a failed identity row), 4 configuration error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::contour::{optimize_r0, ContourFamily, ContourKind, Side};
use crate::error::{Error, Result};
use crate::friedrichs::{oracle_solution, FriedrichsParams};
use crate::report::{write_atomic, Failure, Provenance, Report, SideReport};
use crate::riccati;
use crate::rootsolver::{self, label_of, SpectrumLabel};
use crate::verify::{self, SolvedSide};

#[derive(Debug, Parser)]
#[command(name = "oproot", version, about = "Operator roots of continued Schur complements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for Z on each configured side and classify its spectrum.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Write the JSON report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve both sides and evaluate the identity table.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Follow eigenvalues of Z along the coupling homotopy t ∈ [0, 1].
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Trajectory CSV; falls back to `output.csv` in the config.
        #[arg(long = "out-csv")]
        out_csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form roots of the scalar model on [-α, α].
    Friedrichs {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        a1: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
    },
}

/// What a command produced: text for standard output, a diagnostic for
/// standard error, and the process exit code.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub exit_code: i32,
}

impl Outcome {
    fn error(command: &str, err: &Error) -> Self {
        Self {
            stdout: String::new(),
            stderr: format!("oproot {command}: {err}\n"),
            exit_code: err.exit_class().code(),
        }
    }
}

pub fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Solve { config, out } => with_config("solve", &config, |cfg, hash| {
            let report = cmd_solve(cfg, hash);
            finish_report("solve", report, out.as_deref().or(cfg.output.report.as_deref().map(Path::new)))
        }),
        Command::Verify { config, out } => with_config("verify", &config, |cfg, hash| {
            let report = cmd_verify(cfg, hash);
            finish_report("verify", report, out.as_deref().or(cfg.output.report.as_deref().map(Path::new)))
        }),
        Command::Sweep { config, out_csv, out } => with_config("sweep", &config, |cfg, hash| {
            let Some(csv_path) = out_csv.clone().or_else(|| cfg.output.csv.as_ref().map(PathBuf::from)) else {
                return Outcome::error("sweep", &Error::Config("sweep needs --out-csv or output.csv".into()));
            };
            match cmd_sweep(cfg, hash) {
                Ok((report, csv)) => {
                    if report.failure.is_none() {
                        if let Err(e) = write_atomic(&csv_path, csv.as_bytes()) {
                            return Outcome::error("sweep", &e);
                        }
                    }
                    finish_report("sweep", report, out.as_deref().or(cfg.output.report.as_deref().map(Path::new)))
                }
                Err(e) => Outcome::error("sweep", &e),
            }
        }),
        Command::Friedrichs { alpha, a1, b } => match cmd_friedrichs(alpha, a1, b) {
            Ok(text) => Outcome {
                stdout: text,
                ..Outcome::default()
            },
            Err(e) => Outcome::error("friedrichs", &e),
        },
    }
}

fn with_config(command: &str, path: &Path, f: impl FnOnce(&RunConfig, String) -> Outcome) -> Outcome {
    let loaded = RunConfig::load(path).and_then(|cfg| cfg.hash().map(|h| (cfg, h)));
    match loaded {
        Ok((cfg, hash)) => f(&cfg, hash),
        Err(e) => Outcome::error(command, &e),
    }
}

fn report_exit_code(report: &Report) -> i32 {
    match &report.failure {
        Some(f) => f.exit_code,
        None if !report.all_identities_pass() => 3,
        None => 0,
    }
}

fn finish_report(command: &str, report: Report, out: Option<&Path>) -> Outcome {
    let exit_code = report_exit_code(&report);
    let json = match report.to_json() {
        Ok(j) => j + "\n",
        Err(e) => return Outcome::error(command, &e),
    };
    let mut stderr = String::new();
    if let Some(f) = &report.failure {
        let _ = writeln!(stderr, "oproot {command}: {}", f.message);
    } else if exit_code != 0 {
        let failed: Vec<String> = report
            .identities
            .iter()
            .filter(|r| !r.pass)
            .map(|r| match r.side {
                Some(s) => format!("{}[{}]", r.name, s.sign()),
                None => r.name.clone(),
            })
            .collect();
        let _ = writeln!(stderr, "oproot {command}: identity rows failed: {}", failed.join(", "));
    }
    let stdout = match out {
        Some(path) => match write_atomic(path, json.as_bytes()) {
            Ok(()) => String::new(),
            Err(e) => return Outcome::error(command, &e),
        },
        None => json,
    };
    Outcome {
        stdout,
        stderr,
        exit_code,
    }
}

fn provenance(hash: String, node_counts: Vec<usize>, start: Instant) -> Provenance {
    Provenance {
        config_hash: hash,
        version: env!("CARGO_PKG_VERSION").into(),
        node_counts,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    }
}

/// Smallest `r_min` over rectangles of depth `[0.05, 3]·|Δ₀|/2` and the
/// contour actually used.
fn r0_upper_bound(model: &crate::model::SpectralModel, cfg: &RunConfig, solved: &SolvedSide) -> f64 {
    let half = model.delta0().half_len();
    let family = ContourFamily {
        kind: ContourKind::Rectangle,
        depth_min: 0.05 * half,
        depth_max: 3.0 * half,
        nodes_per_unit: cfg.contour.nodes_per_unit,
    };
    optimize_r0(model, solved.side(), family)
        .map(|s| s.r0)
        .unwrap_or(f64::INFINITY)
        .min(solved.solution.r_min)
}

fn side_report(model: &crate::model::SpectralModel, cfg: &RunConfig, solved: &SolvedSide) -> SideReport {
    SideReport::new(&solved.solution, &solved.classification, r0_upper_bound(model, cfg, solved))
}

pub fn cmd_solve(cfg: &RunConfig, hash: String) -> Report {
    let start = Instant::now();
    let mut nodes = Vec::new();
    let mut sides = Vec::new();
    let result = (|| {
        let model = cfg.build_model()?;
        for &side in &cfg.contour.sides {
            let solved = verify::solve_side(&model, cfg, side)?;
            nodes.push(solved.contour.node_count());
            sides.push(side_report(&model, cfg, &solved));
        }
        Ok::<_, Error>(())
    })();
    let mut report = Report::new("solve", provenance(hash, Vec::new(), start));
    report.sides = sides;
    report.failure = result.err().map(|e| Failure::from_error(&e));
    report.provenance = provenance(report.provenance.config_hash, nodes, start);
    report
}

pub fn cmd_verify(cfg: &RunConfig, hash: String) -> Report {
    let start = Instant::now();
    let mut report = Report::new("verify", provenance(hash, Vec::new(), start));
    let result = (|| {
        let model = cfg.build_model()?;
        let tau = cfg.tau_real(&model);
        let mut upper = verify::solve_side(&model, cfg, Side::Upper)?;
        let mut lower = verify::solve_side(&model, cfg, Side::Lower)?;
        verify::perturb(&model, &mut upper, cfg.verify.z_perturbation, tau)?;
        verify::perturb(&model, &mut lower, cfg.verify.z_perturbation, tau)?;
        report.provenance.node_counts = vec![upper.contour.node_count(), lower.contour.node_count()];
        report.sides = vec![side_report(&model, cfg, &upper), side_report(&model, cfg, &lower)];
        let gamma = cfg.gamma_spec();
        let (rows, summaries) =
            verify::identity_suite(&model, &upper, &lower, &cfg.verify, cfg.solver.tol, gamma.as_ref());
        report.identities = rows;
        report.riccati = summaries;
        Ok::<_, Error>(())
    })();
    report.failure = result.err().map(|e| Failure::from_error(&e));
    report.provenance.wall_time_seconds = start.elapsed().as_secs_f64();
    report
}

fn label_name(label: SpectrumLabel) -> &'static str {
    match label {
        SpectrumLabel::Real => "real",
        SpectrumLabel::Resonance => "resonance",
        SpectrumLabel::PhysicalComplex => "physical-complex",
    }
}

/// Runs the homotopy and returns the report with the CSV text
/// `t,trajectory_id,re,im,label`.
pub fn cmd_sweep(cfg: &RunConfig, hash: String) -> Result<(Report, String)> {
    let start = Instant::now();
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep needs a [sweep] block with t_grid".into()))?;
    let side = sweep.side.unwrap_or(cfg.contour.sides[0]);
    let mut report = Report::new("sweep", provenance(hash, Vec::new(), start));
    let mut csv = String::from("t,trajectory_id,re,im,label\n");
    let result = (|| {
        let model = cfg.build_model()?;
        let contour = cfg.contour(&model, side)?;
        let tau = cfg.tau_real(&model);
        let path = rootsolver::homotopy_path(&model, &contour, &sweep.t_grid, cfg.solver_options(), tau)?;
        for point in &path.points {
            for (id, z) in point.trajectory_values.iter().enumerate() {
                let label = label_name(label_of(*z, side, tau));
                let _ = writeln!(csv, "{},{},{},{},{}", point.t, id, z.re, z.im, label);
            }
        }
        report.warnings = path.warnings.clone();
        if !path.continuous {
            report.warnings.push("trajectory continuity check failed".into());
        }
        report.provenance.node_counts = vec![contour.node_count()];
        if let Some(last) = path.points.last() {
            let solved = SolvedSide {
                contour,
                solution: last.solution.clone(),
                classification: last.classification.clone(),
            };
            report.sides = vec![side_report(&model, cfg, &solved)];
        }
        Ok::<_, Error>(())
    })();
    report.failure = result.err().map(|e| Failure::from_error(&e));
    report.provenance.wall_time_seconds = start.elapsed().as_secs_f64();
    Ok((report, csv))
}

fn fmt_c(z: num_complex::Complex64) -> String {
    format!("[{}, {}]", z.re, z.im)
}

/// Summary of the scalar model. Closed forms for `a₁ = 0`; otherwise the
/// generic solver on the same model.
pub fn cmd_friedrichs(alpha: f64, a1: f64, b: f64) -> Result<String> {
    let params = FriedrichsParams::new(alpha, a1, b)?;
    let mut out = String::new();
    let _ = writeln!(out, "alpha = {alpha}\na1 = {a1}\nb = {b}");
    if a1 == 0.0 {
        let o = oracle_solution(&params)?;
        let _ = writeln!(out, "method = closed-form");
        let _ = writeln!(out, "y = {}", o.y);
        let _ = writeln!(out, "z_plus = {}", fmt_c(o.z_plus));
        let _ = writeln!(out, "z_minus = {}", fmt_c(o.z_minus));
        let _ = writeln!(out, "y_norm = {}", o.y_norm);
        let _ = writeln!(out, "m1y1_residual = {:e}", o.m1y1_residual);
        let _ = writeln!(out, "fixed_point_residual = {:e}", o.fixed_point_residual);
        let _ = writeln!(out, "closed_m1_residual = {:e}", o.closed_m1_residual);
        let _ = writeln!(out, "roots_upper_half_plane = {}", o.winding_upper);
        let _ = writeln!(out, "roots_lower_half_plane = {}", o.winding_lower);
    } else {
        let cfg = RunConfig::friedrichs(alpha, a1, b);
        let model = params.model();
        let _ = writeln!(out, "method = generic");
        for side in Side::both() {
            let solved = verify::solve_side(&model, &cfg, side)?;
            let z = solved.solution.z_op[(0, 0)];
            let name = if side == Side::Upper { "z_plus" } else { "z_minus" };
            let _ = writeln!(out, "{name} = {}", fmt_c(z));
            let ric = riccati::compute_y(&model, &solved.solution, cfg.verify.quad_tol)?;
            let _ = writeln!(out, "{name}_y_norm = {}", ric.y_norm);
        }
    }
    Ok(out)
}
