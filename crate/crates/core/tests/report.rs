use rcesc_core::report::{export_csv, final_window, run_controller, trace_to_csv, write_result, COST_THRESHOLDS};
use rcesc_core::scenario::builtin;
use rcesc_core::{ControllerKind, Error, SummaryReport};

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn example2_columns() {
    let mut s = builtin("example2").unwrap();
    s.horizon = 5;
    let r = run_controller(&s, ControllerKind::RcEsc).unwrap();
    let (header, rows) = parse_csv(&trace_to_csv(&r.trace, None));
    assert_eq!(header[0], "t_seconds");
    for col in ["u_1", "u_2", "du_1", "du_2", "d_1", "d_2", "J_1", "z_1", "grad_1", "grad_2", "theta_20"] {
        assert!(header.iter().any(|h| h == col), "missing {col}");
    }
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.len() == header.len()));
}

#[test]
fn summary_is_recomputable_from_csv() {
    let r = run_controller(&builtin("example1").unwrap(), ControllerKind::RcEsc).unwrap();
    let (header, rows) = parse_csv(&trace_to_csv(&r.trace, None));
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let (t, u, d, j) = (col("t_seconds"), col("u_1"), col("d_1"), col("J_1"));
    let n = rows.len();
    let tail = &rows[final_window(n)];
    let p2p = tail.iter().map(|r| r[u]).fold(f64::NEG_INFINITY, f64::max)
        - tail.iter().map(|r| r[u]).fold(f64::INFINITY, f64::min);
    let first: Vec<Option<f64>> =
        COST_THRESHOLDS.iter().map(|thr| rows.iter().find(|r| r[j] < *thr).map(|r| r[t])).collect();
    let expected = SummaryReport {
        rows: n,
        terminal_cost: rows[n - 1][j],
        first_below: [first[0], first[1]],
        final_peak_to_peak: vec![p2p],
        final_max_dither: tail.iter().map(|r| r[d].abs()).fold(0.0, f64::max),
    };
    assert_eq!(r.summary, expected);
}

#[test]
fn esc_baseline_keeps_oscillating_on_example1() {
    let r = run_controller(&builtin("example1").unwrap(), ControllerKind::Esc).unwrap();
    assert!(r.error.is_none());
    assert_eq!(r.trace.len(), 1000);
    assert!(r.summary.final_peak_to_peak[0] >= 0.2);
    let tail = &r.trace.rows[final_window(r.trace.len())];
    let mean = tail.iter().map(|row| row.output.u[0]).sum::<f64>() / tail.len() as f64;
    assert!((mean - 5.0).abs() < 0.1, "{mean}");
    assert!((r.trace.rows[999].t - 999.0).abs() == 0.0);
}

#[test]
fn divergence_leaves_partial_trace_and_footer() {
    let r = run_controller(&builtin("example3").unwrap(), ControllerKind::Esc).unwrap();
    let err = r.error.as_ref().expect("the fast ESC loop on example3 runs away");
    assert!(matches!(err, Error::Diverged { .. }));
    let text = trace_to_csv(&r.trace, r.error.as_ref());
    assert!(text.lines().last().unwrap().starts_with("# error: simulation diverged"));
}

#[test]
fn written_files_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let s = builtin("example2").unwrap();
    let a = write_result(&run_controller(&s, ControllerKind::RcEsc).unwrap(), &dir.path().join("a")).unwrap();
    let b = write_result(&run_controller(&s, ControllerKind::RcEsc).unwrap(), &dir.path().join("b")).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
    }
}

#[test]
fn unwritable_path_is_an_io_error() {
    let r = run_controller(&builtin("example1").unwrap(), ControllerKind::Constant);
    assert!(matches!(r, Err(Error::Config { .. })));
    let mut s = builtin("example1").unwrap();
    s.horizon = 2;
    let r = run_controller(&s, ControllerKind::RcEsc).unwrap();
    let err = export_csv(&r.trace, None, std::path::Path::new("/nonexistent/dir/x.csv")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
}
