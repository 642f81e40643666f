//! Machine-readable run report (JSON) and atomic file output.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::{AdmissibilityReport, Side};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::riccati::OneInSpectrum;
use crate::rootsolver::{RootSolution, SpectrumClassification, SpectrumLabel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub sides: Vec<SideReport>,
    pub identities: Vec<IdentityRow>,
    pub riccati: Vec<RiccatiSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
    pub provenance: Provenance,
}

impl Report {
    pub fn new(command: &str, provenance: Provenance) -> Self {
        Self {
            command: command.into(),
            sides: Vec::new(),
            identities: Vec::new(),
            riccati: Vec::new(),
            warnings: Vec::new(),
            failure: None,
            provenance,
        }
    }

    pub fn all_identities_pass(&self) -> bool {
        self.identities.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideReport {
    pub side: Side,
    pub admissibility: AdmissibilityReport,
    pub r_min: f64,
    pub r_max: f64,
    /// Smallest `r_min` over a rectangle-depth search and the used contour.
    pub r0_upper_bound: f64,
    pub iterations: usize,
    pub fixed_point_residual: f64,
    pub x_norm: f64,
    pub z: Vec<Vec<Complex64>>,
    pub eigenvalues: Vec<EigenvalueReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueReport {
    pub value: Complex64,
    pub multiplicity: usize,
    pub label: SpectrumLabel,
    pub root_residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical_confirmed: Option<bool>,
}

pub fn rows_of(m: &CMat) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

impl SideReport {
    pub fn new(sol: &RootSolution, classification: &SpectrumClassification, r0_upper_bound: f64) -> Self {
        Self {
            side: sol.side,
            admissibility: sol.report,
            r_min: sol.r_min,
            r_max: sol.r_max,
            r0_upper_bound,
            iterations: sol.iterations,
            fixed_point_residual: sol.residual,
            x_norm: sol.x_norm(),
            z: rows_of(&sol.z_op),
            eigenvalues: classification
                .entries
                .iter()
                .map(|e| EigenvalueReport {
                    value: e.eigenvalue,
                    multiplicity: e.multiplicity,
                    label: e.label,
                    root_residual: e.root_residual,
                    physical_confirmed: e.physical_confirmed,
                })
                .collect(),
        }
    }
}

/// One identity check. `residual` is absent when the check could not be
/// evaluated; such a row fails and carries the reason in `note`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityRow {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl IdentityRow {
    /// Passes when `residual ≤ tolerance`.
    pub fn at_most(name: &str, side: Option<Side>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            side,
            residual: Some(residual),
            tolerance,
            pass: residual <= tolerance,
            note: None,
        }
    }

    /// Passes when `residual < tolerance`.
    pub fn below(name: &str, side: Option<Side>, residual: f64, tolerance: f64) -> Self {
        Self {
            pass: residual < tolerance,
            ..Self::at_most(name, side, residual, tolerance)
        }
    }

    pub fn failed(name: &str, side: Option<Side>, tolerance: f64, err: &Error) -> Self {
        Self {
            name: name.into(),
            side,
            residual: None,
            tolerance,
            pass: false,
            note: Some(err.to_string()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiccatiSummary {
    pub side: Side,
    pub y_norm: f64,
    pub gram_eigenvalues: Vec<f64>,
    pub one_in_spectrum: OneInSpectrum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub exit_code: i32,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub admissibility: Option<FailedAdmissibility>,
}

/// The numbers of a failed `𝒱₀ < d²/4` test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailedAdmissibility {
    pub variation: f64,
    pub distance: f64,
    pub quarter_d2: f64,
    pub scale: f64,
}

impl Failure {
    pub fn from_error(err: &Error) -> Self {
        let admissibility = match *err {
            Error::Inadmissible {
                variation,
                distance,
                quarter_d2,
                scale,
            } => Some(FailedAdmissibility {
                variation,
                distance,
                quarter_d2,
                scale,
            }),
            _ => None,
        };
        Self {
            exit_code: err.exit_class().code(),
            message: err.to_string(),
            admissibility,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub version: String,
    /// Quadrature nodes per contour, in side order.
    pub node_counts: Vec<usize>,
    pub wall_time_seconds: f64,
}

/// Writes `contents` to a temporary file beside `path`, then renames it over
/// `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let io = |e: std::io::Error| Error::Config(format!("cannot write {}: {e}", path.display()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result.map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_file() {
        let dir = std::env::temp_dir().join(format!("oproot-report-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("out.json");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"second");
        let leftovers = std::fs::read_dir(&dir).unwrap().count();
        assert_eq!(leftovers, 1);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn failure_carries_admissibility_numbers() {
        let err = Error::Inadmissible {
            variation: 0.3,
            distance: 1.0,
            quarter_d2: 0.25,
            scale: 1.0,
        };
        let f = Failure::from_error(&err);
        assert_eq!(f.exit_code, 2);
        assert_eq!(f.admissibility.unwrap().variation, 0.3);
    }

    #[test]
    fn rows_compare_against_tolerance() {
        assert!(IdentityRow::at_most("x", None, 1.0, 1.0).pass);
        assert!(!IdentityRow::below("x", None, 1.0, 1.0).pass);
        let r = IdentityRow::failed("x", Some(Side::Upper), 1e-8, &Error::EmptyRegion);
        assert!(!r.pass && r.residual.is_none() && r.note.is_some());
    }
}
