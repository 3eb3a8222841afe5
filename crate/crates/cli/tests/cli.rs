use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const TWO_POINT: &str = r#"{"labels":["a","b"],"dist":[[0,1],[1,0]],"weights":[0.5,0.5]}"#;
const BAD_TRIANGLE: &str = r#"{"labels":["a","b","c"],"dist":[[0,1,5],[1,0,1],[5,1,0]],"weights":[0.3,0.3,0.4]}"#;
const PATH3: &str = r#"{"labels":["x","y","z"],"dist":[[0,1,2],[1,0,1],[2,1,0]],"weights":[0.2,0.5,0.3]}"#;

fn dimfree(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dimfree"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("two_point.json"), TWO_POINT).unwrap();
    fs::write(dir.path().join("bad_space.json"), BAD_TRIANGLE).unwrap();
    fs::write(dir.path().join("path3.json"), PATH3).unwrap();
    dir
}

#[test]
fn validate_names_triangle_indices() {
    let dir = workspace();
    let o = dimfree(dir.path(), &["validate", "bad_space.json"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("(0,1,2)"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
    let o = dimfree(dir.path(), &["validate", "two_point.json"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn poincare_two_point_is_two() {
    let dir = workspace();
    let o = dimfree(dir.path(), &["poincare", "two_point.json", "--gradient", "minus"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("lambda = 2\n"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("poincare.json")).unwrap()).unwrap();
    assert_eq!(json["lambda"], 2.0);
    assert_eq!(json["seed"], 0);
    assert_eq!(json["method"], "closed-form");
}

#[test]
fn verify_main_theorem_passes_and_report_replays() {
    let dir = workspace();
    let o = dimfree(dir.path(), &["verify", "main-theorem", "two_point.json", "--max-n", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("PASS"));
    let o = dimfree(dir.path(), &["report", "report.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0 failed"));
}

#[test]
fn verify_rejects_products_beyond_cap() {
    let dir = workspace();
    let o = dimfree(dir.path(), &["verify", "main-theorem", "path3.json", "--max-n", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("27"));
}

#[test]
fn profile_writes_csv_and_witnesses() {
    let dir = workspace();
    let o = dimfree(dir.path(), &["profile", "two_point.json", "--n", "3", "--radii", "0:2:0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert!(csv.starts_with("r,alpha,mode,witness_id,n\n"));
    assert!(csv.contains("1,0.125,exact,w2,3"), "{csv}");
    let w = fs::read_to_string(dir.path().join("witness_w2.txt")).unwrap();
    assert_eq!(w, "0\n1\n2\n4\n");
}

#[test]
fn profile_beyond_cap_points_to_heuristic() {
    let dir = workspace();
    let o = dimfree(dir.path(), &["profile", "path3.json", "--n", "3", "--radii", "0:2:1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--heuristic"));
    let o = dimfree(dir.path(), &["profile", "path3.json", "--n", "3", "--radii", "0:2:1", "--heuristic"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(fs::read_to_string(dir.path().join("profile.csv")).unwrap().contains("heuristic"));
}

#[test]
fn artifacts_are_deterministic_across_worker_counts() {
    let dir = workspace();
    for (w, out) in [("1", "a"), ("4", "b")] {
        let o = dimfree(
            dir.path(),
            &["--workers", w, "qtcheck", "path3.json", "--n", "2", "--count", "100", "--out", out],
        );
        assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
        let o = dimfree(dir.path(), &["--workers", w, "profile", "path3.json", "--n", "2", "--out", out]);
        assert_eq!(o.status.code(), Some(0));
        let o = dimfree(
            dir.path(),
            &["--workers", w, "transport", "path3.json", "--p", "1", "--c", "4", "--seed", "7", "--out", out],
        );
        assert!(stdout(&o).contains("seed = 7"));
    }
    for name in ["qtcheck.json", "profile.csv", "transport.csv"] {
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        let b = fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn transport_violations_exit_one() {
    let dir = workspace();
    let o = dimfree(dir.path(), &["transport", "two_point.json", "--p", "1", "--c", "0.01"]);
    assert_eq!(o.status.code(), Some(1));
    let csv = fs::read_to_string(dir.path().join("transport.csv")).unwrap();
    assert!(csv.starts_with("nu_id,cost,entropy,C,satisfied,margin\n"));
    assert!(csv.contains("false"));
}

#[test]
fn input_errors_exit_two() {
    let dir = workspace();
    for args in [
        &["profile", "two_point.json", "--radii", "0:1:0"][..],
        &["profile", "two_point.json", "--radii", "2:1:0.5"][..],
        &["poincare", "missing.json"][..],
        &["obsdiam", "two_point.json", "--t", "1.5"][..],
        &["report", "two_point.json"][..],
    ] {
        let o = dimfree(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).starts_with("error: "), "{args:?}");
    }
}

#[test]
fn obsdiam_dirac_is_zero() {
    let dir = workspace();
    fs::write(dir.path().join("dirac.json"), r#"{"labels":["o"],"dist":[[0]],"weights":[1]}"#).unwrap();
    let o = dimfree(dir.path(), &["obsdiam", "dirac.json", "--t", "0.1,0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "0.1,0,true\n0.5,0,true\n");
}
