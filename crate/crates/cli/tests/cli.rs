use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cgl(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cgl"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("CGL_THREADS", "1")
        .output()
        .expect("run cgl")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn couple_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = cgl(
        &[
            "couple-verify",
            "--seeds",
            "4",
            "--T",
            "40",
            "--window",
            "120",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let reports = json(&dir.path().join("coupling.json"));
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 4);
    for r in reports {
        assert_eq!(r["violations"].as_array().unwrap().len(), 0);
        assert_eq!(r["T"].as_f64(), Some(40.0));
        assert!(r["events_checked"].as_u64().unwrap() > 0);
    }
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["config"]["T"].as_f64(), Some(40.0));
    assert_eq!(report["report"]["passed"].as_bool(), Some(true));
    let first = fs::read_to_string(dir.path().join("trajectory.jsonl")).unwrap();
    let line: serde_json::Value = serde_json::from_str(first.lines().next().unwrap()).unwrap();
    for key in ["t", "kind", "x", "label_i", "label_j", "X"] {
        assert!(line.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn angle_law_writes_samples() {
    let dir = tempfile::tempdir().unwrap();
    let out = cgl(
        &["angle-law", "--n", "100", "--reps", "30", "--seed", "42"],
        dir.path(),
    );
    assert!(matches!(out.status.code(), Some(0 | 1)));
    let csv = fs::read_to_string(dir.path().join("angles.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("seed,n,theta"));
    assert_eq!(lines.count(), 90);
    assert!(csv.contains("\n42,100,"));
    let report = json(&dir.path().join("report.json"));
    assert!(report["report"]["sets"][2]["ks"].as_f64().unwrap() > 0.0);
}

#[test]
fn same_arguments_give_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "geodesic-stats",
        "--n",
        "60",
        "--reps",
        "5",
        "--seed",
        "9",
        "--out",
        "run",
    ];
    for dir in [&a, &b] {
        let out = Command::new(env!("CARGO_BIN_EXE_cgl"))
            .args(args)
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert!(matches!(out.status.code(), Some(0 | 1)));
    }
    for name in ["deviations.csv", "report.json"] {
        assert_eq!(
            fs::read(a.path().join("run").join(name)).unwrap(),
            fs::read(b.path().join("run").join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn grow_and_interface_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let out = cgl(&["grow", "--n", "5", "--seed", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let grid = fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    assert!(grid.starts_with("i,j,G,parent\n1,1,"));
    assert_eq!(grid.lines().count(), 26);

    let out = cgl(&["interface", "--n", "50", "--seed", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let trace = fs::read_to_string(dir.path().join("trace.jsonl")).unwrap();
    assert_eq!(trace.lines().count(), 51);
    assert!(trace.starts_with("{\"n\":0,\"i\":1,\"j\":1,\"tau\":0.0}"));
}

#[test]
fn json_format_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"n": 40, "reps": 3, "seed": 100, "alpha": 30, "format": "json"}"#,
    )
    .unwrap();
    // the flag overrides the file's n
    let out = cgl(
        &[
            "coalescence-scan",
            "--config",
            cfg.to_str().unwrap(),
            "--n",
            "50",
        ],
        dir.path(),
    );
    assert!(
        matches!(out.status.code(), Some(0 | 1)),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = json(&dir.path().join("coalescence.json"));
    let rows = rows.as_array().unwrap();
    assert_eq!(rows[0]["seed"].as_u64(), Some(100));
    assert_eq!(rows[0]["alpha"].as_f64(), Some(30.0));
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["config"]["n"].as_u64(), Some(50));
}

#[test]
fn usage_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cgl(&["nonsense"], dir.path()).status.code(), Some(2));
    assert_eq!(
        cgl(&["angle-law", "--alpha", "120"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cgl(&["angle-law", "--format", "xml"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cgl(
            &["couple-verify", "--T", "50", "--window", "10"],
            dir.path()
        )
        .status
        .code(),
        Some(1)
    );
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"unknown": 1}"#).unwrap();
    assert_eq!(
        cgl(
            &["shape-check", "--config", cfg.to_str().unwrap()],
            dir.path()
        )
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn r_ladder_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = cgl(
        &[
            "geodesic-stats",
            "--seed",
            "3",
            "--n",
            "60",
            "--reps",
            "2",
            "--r-ladder",
            "10,20",
        ],
        dir.path(),
    );
    assert!(
        matches!(out.status.code(), Some(0 | 1)),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = json(&dir.path().join("report.json"));
    assert_eq!(
        report["config"]["r_ladder"],
        serde_json::json!([10.0, 20.0])
    );
    assert_eq!(
        cgl(&["geodesic-stats", "--r-ladder", "10,-1"], dir.path())
            .status
            .code(),
        Some(2)
    );
}
