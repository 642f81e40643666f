//! Run configuration, read from TOML. Complex numbers are `[re, im]` pairs and
//! matrices are lists of rows.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::contour::{make_contour, Contour, ContourKind, Side};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::model::{build_model, Interval, MatrixPolynomial, SpectralModel};
use crate::riccati::{Circle, GammaSpec};
use crate::rootsolver::{default_tau_real, SolverOptions};

pub type ComplexRows = Vec<Vec<Complex64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub contour: ContourConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// `[lo, hi]` of `Δ₀`.
    pub interval: [f64; 2],
    pub a1: ComplexRows,
    /// Coefficients `b₀, b₁, …` of `b(μ)`, each an `m×n` matrix.
    pub coupling: Vec<ComplexRows>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourConfig {
    pub kind: ContourKind,
    pub sides: Vec<Side>,
    /// Defaults to the half-length of `Δ₀` (required for semicircles).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<f64>,
    pub nodes_per_unit: usize,
}

impl Default for ContourConfig {
    fn default() -> Self {
        Self {
            kind: ContourKind::Semicircle,
            sides: vec![Side::Upper, Side::Lower],
            depth: None,
            nodes_per_unit: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_real: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolverOptions::default();
        Self {
            tol: d.tol,
            max_iter: d.max_iter,
            tau_real: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub t_grid: Vec<f64>,
    /// Side to sweep; defaults to the first configured side.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub lens_points: usize,
    pub factor_points: usize,
    pub riccati_samples: usize,
    pub boundary_points: usize,
    pub trial_vectors: usize,
    pub quad_tol: f64,
    /// Tolerance of the `1 ∈ spec(Y*Y)` verdict.
    pub one_in_spectrum_tol: f64,
    /// Circles enclosing `spec(Z)`; one circle per cluster of `σ₁` if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<CircleConfig>>,
    /// Adds `δ·I` to both roots before the checks; a test hook.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub z_perturbation: f64,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            lens_points: 50,
            factor_points: 30,
            riccati_samples: 50,
            boundary_points: 50,
            trial_vectors: 20,
            quad_tol: crate::riccati::QUAD_REL_TOL,
            one_in_spectrum_tol: 1e-8,
            gamma: None,
            z_perturbation: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleConfig {
    pub center: Complex64,
    pub radius: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

fn matrix(rows: &ComplexRows, what: &str) -> Result<CMat> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(Error::Config(format!("{what} must be a non-empty rectangular list of rows")));
    }
    Ok(CMat::from_fn(r, c, |i, j| rows[i][j]))
}

fn finite(v: f64, what: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} is not finite")))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the canonical serialization, as lowercase hex.
    pub fn hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_toml()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    fn validate(&self) -> Result<()> {
        let m = &self.model;
        for v in m.interval {
            finite(v, "model.interval")?;
        }
        let all = m.a1.iter().chain(m.coupling.iter().flatten()).flatten();
        for z in all {
            finite(z.re, "matrix entry")?;
            finite(z.im, "matrix entry")?;
        }
        if m.coupling.is_empty() {
            return Err(Error::Config("model.coupling needs at least one coefficient".into()));
        }
        if self.contour.sides.is_empty() {
            return Err(Error::Config("contour.sides is empty".into()));
        }
        if let Some(d) = self.contour.depth {
            finite(d, "contour.depth")?;
        }
        finite(self.solver.tol, "solver.tol")?;
        if !(self.solver.tol > 0.0) || self.solver.max_iter == 0 {
            return Err(Error::Config("solver.tol and solver.max_iter must be positive".into()));
        }
        if let Some(t) = self.solver.tau_real {
            finite(t, "solver.tau_real")?;
        }
        if let Some(s) = &self.sweep {
            for t in &s.t_grid {
                finite(*t, "sweep.t_grid")?;
            }
        }
        let v = &self.verify;
        finite(v.quad_tol, "verify.quad_tol")?;
        finite(v.one_in_spectrum_tol, "verify.one_in_spectrum_tol")?;
        finite(v.z_perturbation, "verify.z_perturbation")?;
        if !(v.quad_tol > 0.0) {
            return Err(Error::Config("verify.quad_tol must be positive".into()));
        }
        for c in v.gamma.iter().flatten() {
            finite(c.center.re, "verify.gamma center")?;
            finite(c.center.im, "verify.gamma center")?;
            finite(c.radius, "verify.gamma radius")?;
        }
        Ok(())
    }

    pub fn build_model(&self) -> Result<SpectralModel> {
        let [lo, hi] = self.model.interval;
        let interval = Interval::new(lo, hi)?;
        let a1 = matrix(&self.model.a1, "model.a1")?;
        let coeffs = self
            .model
            .coupling
            .iter()
            .enumerate()
            .map(|(k, rows)| matrix(rows, &format!("model.coupling[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        build_model(interval, a1, MatrixPolynomial::new(coeffs)?)
    }

    pub fn depth(&self, model: &SpectralModel) -> f64 {
        self.contour.depth.unwrap_or_else(|| model.delta0().half_len())
    }

    pub fn contour(&self, model: &SpectralModel, side: Side) -> Result<Contour> {
        make_contour(model, side, self.contour.kind, self.depth(model), self.contour.nodes_per_unit)
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
        }
    }

    pub fn tau_real(&self, model: &SpectralModel) -> f64 {
        self.solver.tau_real.unwrap_or_else(|| default_tau_real(model))
    }

    pub fn gamma_spec(&self) -> Option<GammaSpec> {
        self.verify.gamma.as_ref().map(|cs| GammaSpec {
            circles: cs
                .iter()
                .map(|c| Circle {
                    center: c.center,
                    radius: c.radius,
                })
                .collect(),
        })
    }

    /// Scalar model of the explicitly solvable example on `[-α, α]`.
    pub fn friedrichs(alpha: f64, a1: f64, b: f64) -> Self {
        let scalar = |v: f64| vec![vec![Complex64::new(v, 0.0)]];
        Self {
            model: ModelConfig {
                interval: [-alpha, alpha],
                a1: scalar(a1),
                coupling: vec![scalar(b)],
            },
            contour: ContourConfig::default(),
            solver: SolverConfig::default(),
            sweep: None,
            verify: VerifyConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[model]
interval = [-1.0, 1.0]
a1 = [[[-0.35, 0.0], [0.05, 0.0]], [[0.05, 0.0], [0.35, 0.0]]]
coupling = [
  [[[0.12, 0.0], [0.03, 0.0]], [[-0.02, 0.0], [0.1, 0.0]]],
  [[[0.02, 0.0], [0.0, 0.0]], [[0.01, 0.0], [-0.03, 0.0]]],
]

[contour]
kind = "rectangle"
sides = [1, -1]
depth = 0.8
nodes_per_unit = 150

[sweep]
t_grid = [0.0, 0.5, 1.0]

[verify]
lens_points = 10
factor_points = 5
riccati_samples = 7
boundary_points = 9
trial_vectors = 3
quad_tol = 1e-11
one_in_spectrum_tol = 1e-8
gamma = [{ center = [-0.35, 0.0], radius = 0.2 }, { center = [0.35, 0.0], radius = 0.2 }]
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = RunConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(cfg.contour.kind, ContourKind::Rectangle);
        assert_eq!(cfg.contour.sides, vec![Side::Upper, Side::Lower]);
        let model = cfg.build_model().unwrap();
        assert_eq!(model.dim(), 2);
        assert_eq!(model.b().degree(), 1);
        let text = cfg.to_toml().unwrap();
        let again = RunConfig::from_toml(&text).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_toml().unwrap(), text);
        assert_eq!(again.hash().unwrap(), cfg.hash().unwrap());
    }

    #[test]
    fn defaults_fill_optional_blocks() {
        let cfg = RunConfig::from_toml("[model]\ninterval = [-1.0, 1.0]\na1 = [[[0.0, 0.0]]]\ncoupling = [[[[0.2, 0.0]]]]\n").unwrap();
        assert_eq!(cfg, RunConfig::friedrichs(1.0, 0.0, 0.2));
        assert_eq!(cfg.depth(&cfg.build_model().unwrap()), 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "[model]\ninterval = [1.0, -1.0]\na1 = [[[0.0, 0.0]]]\ncoupling = [[[[0.2, 0.0]]]]\n",
            "[model]\ninterval = [-1.0, 1.0]\na1 = [[[0.0, 0.0], [1.0, 0.0]]]\ncoupling = [[[[0.2, 0.0]]]]\n",
            "[model]\ninterval = [-1.0, 1.0]\na1 = [[[0.0, 0.0]]]\ncoupling = []\n",
            "[model]\ninterval = [-1.0, 1.0]\na1 = [[[0.0, 0.0]]]\ncoupling = [[[[0.2, 0.0]]]]\nbogus = 1\n",
            "[model]\ninterval = [-1.0, nan]\na1 = [[[0.0, 0.0]]]\ncoupling = [[[[0.2, 0.0]]]]\n",
            "[model]\ninterval = [-1.0, 1.0]\na1 = [[[0.0, 0.0]]]\ncoupling = [[[[0.2, 0.0]]]]\n[contour]\nkind = \"ellipse\"\nsides = [1]\nnodes_per_unit = 200\n",
        ] {
            let err = RunConfig::from_toml(text).and_then(|c| c.build_model().map(|_| ()));
            assert_eq!(err.unwrap_err().exit_class().code(), 4, "{text}");
        }
    }
}
