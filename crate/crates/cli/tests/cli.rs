use std::path::Path;
use std::process::{Command, Output};

fn rcesc(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcesc")).args(args).current_dir(cwd).output().unwrap()
}

#[test]
fn list_shows_builtins() {
    let dir = tempfile::tempdir().unwrap();
    let out = rcesc(&["list"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["example1", "example2", "example3"] {
        assert!(text.contains(name));
    }
}

#[test]
fn run_builtin_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = rcesc(&["run", "example1", "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("res/example1_rcesc.csv")).unwrap();
    assert!(csv.starts_with("t_seconds,u_1,du_1,d_1,J_1,z_1,theta_1,grad_1\n"));
    assert_eq!(csv.lines().count(), 1001);
    assert!(dir.path().join("res/example1_rcesc_summary.txt").exists());
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    assert!(rcesc(&["run", "example2", "--out", "a"], dir.path()).status.success());
    assert!(rcesc(&["run", "example2", "--out", "b"], dir.path()).status.success());
    let a = std::fs::read(dir.path().join("a/example2_rcesc.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/example2_rcesc.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn compare_writes_both_controllers() {
    let dir = tempfile::tempdir().unwrap();
    let out = rcesc(&["run", "example1", "--compare", "--out", "cmp"], dir.path());
    assert!(out.status.success());
    for f in ["example1_esc.csv", "example1_rcesc.csv", "example1_compare_summary.txt"] {
        assert!(dir.path().join("cmp").join(f).exists(), "{f}");
    }
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[example1_esc]") && text.contains("[example1_rcesc]"));
}

#[test]
fn divergence_exits_with_2_and_keeps_partial_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = rcesc(&["run", "example3", "--compare", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let csv = std::fs::read_to_string(dir.path().join("o/example3_esc.csv")).unwrap();
    assert!(csv.lines().last().unwrap().starts_with("# error:"));
}

#[test]
fn validate_reports_field_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.txt");
    let text = "[sim]\nname = s\nsample_time = 1\nhorizon = 10\n\n[plant]\nkind = siso_quadratic\nreference = 1\n\n\
                [controller]\nkind = constant\nvalue = 0.5\n";
    std::fs::write(&good, text).unwrap();
    assert!(rcesc(&["validate", good.to_str().unwrap()], dir.path()).status.success());

    let out = rcesc(&["run", good.to_str().unwrap(), "--out", "g"], dir.path());
    assert!(out.status.success());
    assert!(dir.path().join("g/s_constant.csv").exists());

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, text.replace("horizon = 10", "horizon = 0")).unwrap();
    let out = rcesc(&["validate", bad.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("sim.horizon"));

    let garbled = dir.path().join("garbled.txt");
    std::fs::write(&garbled, "[sim]\nnonsense\n").unwrap();
    let out = rcesc(&["validate", garbled.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 2"));
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(rcesc(&["validate", "nope.txt"], dir.path()).status.code(), Some(3));
    assert_eq!(rcesc(&["run", "no_such_scenario"], dir.path()).status.code(), Some(3));
}
