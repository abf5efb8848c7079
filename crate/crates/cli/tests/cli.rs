//! End-to-end tests of the binary: shipped job configs, output files,
//! exit codes, and the sampled-path round trip.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_blochsynth")
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

/// Write `job` into `dir`, point its output there, run the binary.
fn run_job(job: &mut Value, dir: &Path) -> Output {
    job["output"]["dir"] = Value::String(dir.join("out").display().to_string());
    let job_file = dir.join("job.json");
    std::fs::write(&job_file, serde_json::to_string_pretty(job).unwrap()).unwrap();
    Command::new(bin())
        .arg(&job_file)
        .output()
        .expect("binary runs")
}

fn load_shipped(name: &str) -> Value {
    let text = std::fs::read_to_string(workspace_root().join("jobs").join(name)).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines
        .next()
        .unwrap()
        .split(',')
        .map(|s| s.to_string())
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn shipped_circle_job_emits_the_rotating_field() {
    let tmp = tempfile::tempdir().unwrap();
    let mut job = load_shipped("circle.json");
    let out = run_job(&mut job, tmp.path());
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let (header, rows) = read_csv(&tmp.path().join("out/hamiltonian.csv"));
    assert_eq!(
        header,
        [
            "t", "h11_re", "h11_im", "h12_re", "h12_im", "h21_re", "h21_im", "h22_re", "h22_im",
            "B0", "Bx", "By", "Bz"
        ]
    );
    assert_eq!(rows.len(), 2001, "one row per grid node");

    // B(t) = omega*sin(theta0) * (-cos(theta0) cos wt, -cos(theta0) sin wt, sin(theta0))
    let (ct0, omega) = (2.0f64 / 3.0, 1.0f64);
    let st0 = (1.0 - ct0 * ct0).sqrt();
    for row in rows.iter().step_by(400) {
        let t = row[0];
        let (b0, bx, by, bz) = (row[9], row[10], row[11], row[12]);
        assert!(b0.abs() < 1e-12);
        assert!((bx - omega * st0 * (-ct0) * (omega * t).cos()).abs() < 1e-12);
        assert!((by - omega * st0 * (-ct0) * (omega * t).sin()).abs() < 1e-12);
        assert!((bz - omega * st0 * st0).abs() < 1e-12);
    }

    // JSON dump carries provenance and per-row hermiticity residuals
    let ham: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/hamiltonian.json")).unwrap())
            .unwrap();
    assert!(ham["provenance"]["path_family"]
        .as_str()
        .unwrap()
        .starts_with("circle"));
    assert_eq!(ham["rows"].as_array().unwrap().len(), 2001);
    for row in ham["rows"].as_array().unwrap().iter().step_by(500) {
        assert!(row["herm_residual"].as_f64().unwrap() <= 1e-12);
    }
}

#[test]
fn shipped_ellipse_job_verifies_clean() {
    let tmp = tempfile::tempdir().unwrap();
    let mut job = load_shipped("ellipse.json");
    let out = run_job(&mut job, tmp.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "stdout: {stdout}");
    assert!(stdout.contains("overall: PASS"));

    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/report.json")).unwrap())
            .unwrap();
    assert_eq!(report["overall_pass"], Value::Bool(true));
    let names: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"realization(combined-propagation)"));
}

#[test]
fn shipped_shrink_job_writes_kick_and_hamiltonian() {
    let tmp = tempfile::tempdir().unwrap();
    let mut job = load_shipped("shrink.json");
    let out = run_job(&mut job, tmp.path());
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let (header, rows) = read_csv(&tmp.path().join("out/kick.csv"));
    assert_eq!(header[0], "t");
    assert_eq!(header[1], "u11_re");
    assert_eq!(header.len(), 33);
    assert_eq!(rows.len(), 1);
    // shrink kick: |00> -> |10> column structure, real entries
    let row = &rows[0];
    assert_eq!(row[0], 0.0);
    let entry = |i: usize, j: usize| (row[1 + 2 * (4 * i + j)], row[2 + 2 * (4 * i + j)]);
    assert_eq!(entry(1, 0), (1.0, 0.0));
    assert_eq!(entry(0, 2), (1.0, 0.0));
    assert_eq!(entry(2, 3), (-1.0, 0.0));
    assert_eq!(entry(3, 1), (1.0, 0.0));

    let (header, rows) = read_csv(&tmp.path().join("out/hamiltonian_ab.csv"));
    assert_eq!(header.len(), 33);
    assert_eq!(rows.len(), 1001);
    // the combined Hamiltonian couples |01> and |10> only
    for row in rows.iter().step_by(100) {
        let (re23, im23) = (row[1 + 2 * 6], row[2 + 2 * 6]);
        assert!(re23.abs() < 1e-8, "coupling is imaginary");
        assert!(im23 < 0.0, "negative radial speed shrinks the vector");
        // diagonal vanishes
        for d in 0..4 {
            assert!(row[1 + 2 * (4 * d + d)].abs() < 1e-8);
        }
    }
}

#[test]
fn geomphase_reports_the_closed_form_value() {
    let tmp = tempfile::tempdir().unwrap();
    let mut job = load_shipped("circle.json");
    job["command"] = Value::String("geomphase".into());
    job["grid"]["n"] = Value::from(10_000);
    let out = run_job(&mut job, tmp.path());
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("gamma ="), "stdout: {stdout}");

    let phase: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/phase.json")).unwrap())
            .unwrap();
    let gamma = phase["gamma"].as_f64().unwrap();
    assert!((gamma - (-0.7137243789)).abs() < 1e-4);
    let cf = phase["closed_form"].as_f64().unwrap();
    assert!((gamma - cf).abs() < 1e-4);
    assert_eq!(phase["grid_n"].as_u64().unwrap(), 10_000);
}

#[test]
fn sampled_round_trip_reproduces_the_hamiltonian() {
    let tmp = tempfile::tempdir().unwrap();

    // dump a circle with the zero gauge
    let mut first = load_shipped("circle.json");
    first["gauge"] = serde_json::json!({});
    let dir1 = tmp.path().join("first");
    std::fs::create_dir_all(&dir1).unwrap();
    let out = run_job(&mut first, &dir1);
    assert!(out.status.success());

    // re-ingest the dumped trajectory as a sampled path
    let mut second = load_shipped("circle.json");
    second["gauge"] = serde_json::json!({});
    second["path"] = serde_json::json!({
        "family": "sampled",
        "csv_path": dir1.join("out/path.csv").display().to_string(),
    });
    let dir2 = tmp.path().join("second");
    std::fs::create_dir_all(&dir2).unwrap();
    let out = run_job(&mut second, &dir2);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let (_, rows1) = read_csv(&dir1.join("out/hamiltonian.csv"));
    let (_, rows2) = read_csv(&dir2.join("out/hamiltonian.csv"));
    assert_eq!(rows1.len(), rows2.len());
    let mut max = 0.0f64;
    for (a, b) in rows1.iter().zip(&rows2) {
        for k in 1..9 {
            max = max.max((a[k] - b[k]).abs());
        }
    }
    assert!(max < 1e-6, "round-trip deviation {max:.3e}");
}

#[test]
fn config_errors_exit_one_with_machine_readable_stderr() {
    let tmp = tempfile::tempdir().unwrap();

    // unknown field
    let mut job = load_shipped("circle.json");
    job["bogus"] = Value::from(1);
    let out = run_job(&mut job, tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    assert_eq!(err["error"]["kind"], "ConfigError");

    // parallel gauge with explicit expressions
    let mut job = load_shipped("circle.json");
    job["gauge"] = serde_json::json!({"parallel": true, "alpha1_expr": "t"});
    let out = run_job(&mut job, tmp.path());
    assert_eq!(out.status.code(), Some(1));

    // alpha expression violating the t = 0 constraint
    let mut job = load_shipped("circle.json");
    job["gauge"] = serde_json::json!({"alpha1_expr": "1 + t"});
    let out = run_job(&mut job, tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "NonzeroAlphaAtZero");

    // missing job file
    let out = Command::new(bin())
        .arg(tmp.path().join("nonexistent.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // synth-unitary on an open path
    let mut job = load_shipped("circle.json");
    job["path"] = serde_json::json!({"family": "ellipse", "omega": 1.0});
    let out = run_job(&mut job, tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verification_failures_exit_two_with_structured_reports() {
    let tmp = tempfile::tempdir().unwrap();

    // maximally mixed start cannot be synthesized unitarily
    let dir1 = tmp.path().join("degenerate");
    std::fs::create_dir_all(&dir1).unwrap();
    let mut job = load_shipped("circle.json");
    job["command"] = Value::String("verify".into());
    job["path"]["r0"] = Value::from(0.0);
    job["grid"]["n"] = Value::from(200);
    let out = run_job(&mut job, &dir1);
    assert_eq!(out.status.code(), Some(2));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir1.join("out/report.json")).unwrap())
            .unwrap();
    assert_eq!(report["overall_pass"], Value::Bool(false));
    assert!(report["checks"][0]["error"]
        .as_str()
        .unwrap()
        .contains("DegenerateInitialState"));

    // pole departure at full speed cannot be dilated
    let dir2 = tmp.path().join("singular");
    std::fs::create_dir_all(&dir2).unwrap();
    let mut job = load_shipped("shrink.json");
    job["command"] = Value::String("verify".into());
    job["path"]["r_expr"] = Value::String("1 - t".into());
    let out = run_job(&mut job, &dir2);
    assert_eq!(out.status.code(), Some(2));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir2.join("out/report.json")).unwrap())
            .unwrap();
    assert_eq!(report["overall_pass"], Value::Bool(false));
    assert!(report["checks"][0]["error"]
        .as_str()
        .unwrap()
        .contains("SingularShrinkStart"));
}

#[test]
fn verify_circle_with_parallel_gauge_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let mut job = load_shipped("circle.json");
    job["command"] = Value::String("verify".into());
    let out = run_job(&mut job, tmp.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "stdout: {stdout}");
    assert!(stdout.contains("parallel-transport(connection): pass"));
    assert!(stdout.contains("phase(circle-closed-form): pass"));
}
