use std::process::{Command, Output};

fn polyvem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyvem"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn patch_test_passes() {
    let o = polyvem(&["patch-test", "--seed", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn solve_writes_mesh_solution_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = polyvem(&["solve", "--case", "poisson", "--nx", "6", "--out-dir", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["mesh.txt", "solution.csv", "errors.csv"] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    let csv = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert!(csv.starts_with("node,x,y,u1\n"));

    // the written mesh reads back and solves as the same case
    let again = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("mesh.txt");
    let o = polyvem(&[
        "solve",
        "--case",
        "poisson",
        "--mesh-file",
        mesh.to_str().unwrap(),
        "--out-dir",
        again.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        std::fs::read(dir.path().join("solution.csv")).unwrap(),
        std::fs::read(again.path().join("solution.csv")).unwrap()
    );
}

#[test]
fn bad_mesh_file_fails_without_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "veamy-mesh 1\nnodes 2\n0 0\n1 oops\n").unwrap();
    let out = dir.path().join("out");
    let o = polyvem(&[
        "solve",
        "--mesh-file",
        bad.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("error[syntax]"), "{}", stderr(&o));
    let written = std::fs::read_dir(&out).map(|d| d.count()).unwrap_or(0);
    assert_eq!(written, 0);
}

#[test]
fn unconstrained_mesh_reports_solve_failure() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("m.txt");
    let o = polyvem(&["mesh", "--case", "patch", "--nx", "3", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    std::fs::rename(dir.path().join("mesh.txt"), &mesh).unwrap();
    let o = polyvem(&["solve", "--mesh-file", mesh.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("error[solve-failure]"), "{}", stderr(&o));
}

#[test]
fn unknown_case_is_rejected() {
    let o = polyvem(&["norms", "--case", "nope"]);
    assert!(!o.status.success());
}
