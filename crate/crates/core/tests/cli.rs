use std::path::Path;
use std::process::{Command, Output};

use oproot::config::RunConfig;
use oproot::friedrichs::solve_y;
use oproot::report::Report;
use tempfile::TempDir;

fn oproot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oproot")).args(args).output().unwrap()
}

fn write_config(dir: &TempDir, name: &str, cfg: &RunConfig) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, cfg.to_toml().unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

fn report_of(out: &Output) -> Report {
    Report::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap()
}

const FESHBACH: &str = r#"
[model]
interval = [-1.0, 1.0]
a1 = [[[-0.35, 0.0], [0.05, 0.0]], [[0.05, 0.0], [0.35, 0.0]]]
coupling = [
  [[[0.12, 0.0], [0.03, 0.0]], [[-0.02, 0.0], [0.1, 0.0]]],
  [[[0.02, 0.0], [0.0, 0.0]], [[0.01, 0.0], [-0.03, 0.0]]],
]

[sweep]
t_grid = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
"#;

#[test]
fn solve_friedrichs_model() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "f.toml", &RunConfig::friedrichs(1.0, 0.0, 0.2));
    let out = oproot(&["solve", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = report_of(&out);
    let y = solve_y(1.0, 0.2).unwrap();
    assert_eq!(report.sides.len(), 2);
    for s in &report.sides {
        assert_eq!(s.eigenvalues.len(), 1);
        let e = &s.eigenvalues[0];
        assert!((e.value.im + s.side.sign() * y).abs() <= 1e-9);
        assert_eq!(serde_json::to_string(&e.label).unwrap(), "\"physical-complex\"");
        assert!((s.r_min - 0.1474).abs() < 5e-5, "{}", s.r_min);
    }
}

#[test]
fn solve_zero_coupling_returns_sigma1() {
    let dir = TempDir::new().unwrap();
    let text = "[model]\ninterval = [-1.0, 1.0]\na1 = [[[-0.2, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.4, 0.0]]]\ncoupling = [[[[0.0, 0.0], [0.0, 0.0]]]]\n";
    let path = dir.path().join("z.toml");
    std::fs::write(&path, text).unwrap();
    let out = oproot(&["solve", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    for s in report_of(&out).sides {
        let vals: Vec<f64> = s.eigenvalues.iter().map(|e| e.value.re).collect();
        assert_eq!(vals, vec![-0.2, 0.4]);
        assert!(s.eigenvalues.iter().all(|e| e.value.im == 0.0));
        assert!(s.eigenvalues.iter().all(|e| serde_json::to_string(&e.label).unwrap() == "\"real\""));
    }
}

#[test]
fn inadmissible_solve_exits_2_with_numbers() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.toml", &RunConfig::friedrichs(1.0, 0.0, 0.1f64.sqrt()));
    let out_path = dir.path().join("r.json");
    let out = oproot(&["solve", "--config", &cfg, "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not admissible"));
    let report = Report::from_json(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let adm = report.failure.unwrap().admissibility.unwrap();
    assert!((adm.variation - 0.1 * std::f64::consts::PI).abs() < 1e-9);
    assert_eq!(adm.quarter_d2, 0.25);
}

#[test]
fn config_errors_exit_4() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, "[model]\ninterval = [-1.0]\n").unwrap();
    assert_eq!(oproot(&["solve", "--config", path.to_str().unwrap()]).status.code(), Some(4));
    assert_eq!(oproot(&["solve", "--config", "/nonexistent/x.toml"]).status.code(), Some(4));
    assert_eq!(oproot(&["solve"]).status.code(), Some(4));
    let cfg = write_config(&dir, "f.toml", &RunConfig::friedrichs(1.0, 0.0, 0.2));
    let csv = dir.path().join("t.csv");
    let out = oproot(&["sweep", "--config", &cfg, "--out-csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn verify_friedrichs_all_rows_pass() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "f.toml", &RunConfig::friedrichs(1.0, 0.0, 0.2));
    let out = oproot(&["verify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = report_of(&out);
    assert!(report.identities.len() > 30);
    assert!(report.all_identities_pass());
    for r in &report.riccati {
        assert!((r.y_norm - 1.0).abs() <= 1e-8);
        assert!(r.one_in_spectrum.present);
    }
}

#[test]
fn verify_zero_coupling_passes() {
    let dir = TempDir::new().unwrap();
    // Zero coupling leaves σ₁ on Δ₀, so Y is only defined after moving A₁'s
    // spectrum off the interval.
    let text = "[model]\ninterval = [-1.0, 1.0]\na1 = [[[-1.5, 0.0]]]\ncoupling = [[[[0.0, 0.0]]]]\n[verify]\nlens_points = 50\nfactor_points = 30\nriccati_samples = 50\nboundary_points = 50\ntrial_vectors = 5\nquad_tol = 1e-11\none_in_spectrum_tol = 1e-8\n";
    let path = dir.path().join("z.toml");
    std::fs::write(&path, text).unwrap();
    let out = oproot(&["verify", "--config", path.to_str().unwrap()]);
    let report = report_of(&out);
    let failed: Vec<_> = report.identities.iter().filter(|r| !r.pass).collect();
    assert!(failed.is_empty(), "{failed:?}");
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn verify_with_corrupted_root_fails_exact_identities() {
    let dir = TempDir::new().unwrap();
    let mut cfg = RunConfig::friedrichs(1.0, 0.0, 0.2);
    cfg.verify.z_perturbation = 0.01;
    let path = write_config(&dir, "p.toml", &cfg);
    let out = oproot(&["verify", "--config", &path]);
    assert_eq!(out.status.code(), Some(3));
    let report = report_of(&out);
    for name in ["factorization", "zay"] {
        let rows: Vec<_> = report.identities.iter().filter(|r| r.name == name).collect();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| !r.pass), "{name}");
    }
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("factorization") && stderr.contains("zay"));
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn sweep_at_zero_reproduces_sigma1() {
    let dir = TempDir::new().unwrap();
    let mut cfg = RunConfig::from_toml(FESHBACH).unwrap();
    cfg.sweep.as_mut().unwrap().t_grid = vec![0.0];
    let path = write_config(&dir, "s.toml", &cfg);
    let csv = dir.path().join("s.csv");
    let out = oproot(&["sweep", "--config", &path, "--out-csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let rows = read_csv(&csv);
    assert_eq!(rows[0], ["t", "trajectory_id", "re", "im", "label"]);
    assert_eq!(rows.len(), 3);
    let sigma = cfg.build_model().unwrap().sigma1().to_vec();
    for (row, s) in rows[1..].iter().zip(&sigma) {
        assert_eq!(row[0], "0");
        assert!((row[2].parse::<f64>().unwrap() - s).abs() <= 1e-12);
        assert_eq!(row[3].parse::<f64>().unwrap(), 0.0);
        assert_eq!(row[4], "real");
    }
}

#[test]
fn sweep_friedrichs_matches_scaled_oracle() {
    let dir = TempDir::new().unwrap();
    let mut cfg = RunConfig::friedrichs(1.0, 0.0, 0.2);
    cfg.sweep = Some(oproot::config::SweepConfig {
        t_grid: (0..=10).map(|k| k as f64 / 10.0).collect(),
        side: Some(oproot::contour::Side::Upper),
    });
    let path = write_config(&dir, "s.toml", &cfg);
    let csv = dir.path().join("s.csv");
    let out = oproot(&["sweep", "--config", &path, "--out-csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    for row in &read_csv(&csv)[2..] {
        let t: f64 = row[0].parse().unwrap();
        let im: f64 = row[3].parse().unwrap();
        assert!((im.abs() - solve_y(1.0, 0.2 * t).unwrap()).abs() <= 1e-8);
        assert_eq!(row[4], "physical-complex");
    }
}

#[test]
fn sweep_feshbach_never_real_or_resonance() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("s.toml");
    std::fs::write(&path, FESHBACH).unwrap();
    let csv = dir.path().join("s.csv");
    let out = oproot(&["sweep", "--config", path.to_str().unwrap(), "--out-csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let rows = read_csv(&csv);
    assert_eq!(rows.len(), 1 + 2 * 11);
    for row in &rows[1..] {
        if row[0] != "0" {
            assert_eq!(row[4], "physical-complex", "{row:?}");
        }
    }
    assert!(report_of(&out).warnings.is_empty());
}

#[test]
fn friedrichs_command_prints_oracle() {
    let out = oproot(&["friedrichs", "--alpha", "1", "--a1", "0", "--b", "0.2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let y: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("y = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((y - solve_y(1.0, 0.2).unwrap()).abs() < 1e-15);
    assert!(text.contains("y_norm = "));
    assert!(text.contains("m1y1_residual = "));
    let beyond = oproot(&["friedrichs", "--alpha", "1", "--a1", "0", "--b", "0.31622776601683794"]);
    assert_eq!(beyond.status.code(), Some(0));
    let bad = oproot(&["friedrichs", "--alpha", "1", "--a1", "-2", "--b", "0.2"]);
    assert_eq!(bad.status.code(), Some(4));
}

#[test]
fn reports_are_deterministic_modulo_wall_time() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("s.toml");
    std::fs::write(&path, FESHBACH).unwrap();
    let a = report_of(&oproot(&["verify", "--config", path.to_str().unwrap()]));
    let b = report_of(&oproot(&["verify", "--config", path.to_str().unwrap()]));
    let strip = |mut r: Report| {
        r.provenance.wall_time_seconds = 0.0;
        r.to_json().unwrap()
    };
    assert!(a.all_identities_pass(), "{:?}", a.identities.iter().filter(|r| !r.pass).collect::<Vec<_>>());
    assert_eq!(strip(a), strip(b));
}

#[test]
fn config_round_trip_is_fixed_point() {
    let cfg = RunConfig::from_toml(FESHBACH).unwrap();
    let once = cfg.to_toml().unwrap();
    let twice = RunConfig::from_toml(&once).unwrap().to_toml().unwrap();
    assert_eq!(once, twice);
}

#[test]
fn sweep_csv_path_from_config() {
    let dir = TempDir::new().unwrap();
    let mut cfg = RunConfig::from_toml(FESHBACH).unwrap();
    cfg.sweep.as_mut().unwrap().t_grid = vec![0.0, 0.5, 1.0];
    let csv = dir.path().join("from_config.csv");
    cfg.output.csv = Some(csv.to_string_lossy().into_owned());
    let path = write_config(&dir, "s.toml", &cfg);
    let out = oproot(&["sweep", "--config", &path]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read_csv(&csv).len(), 1 + 3 * 2);
}
