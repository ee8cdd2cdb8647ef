use std::process::{Command, Output};

fn randers(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randers"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key)?.strip_prefix(" = "))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
        .parse()
        .unwrap()
}

const POLAR: [&str; 4] = [
    "--override",
    "metric.b=0.5",
    "--override",
    "metric.theta=polar:pi/2",
];

#[test]
fn measure_prints_circle_values() {
    let o = randers(&[&["measure"], &POLAR[..]].concat());
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!((value(&s, "randers_length") - 3.0 * std::f64::consts::PI).abs() < 1e-10);
    assert!((value(&s, "area.HT") - std::f64::consts::PI).abs() < 1e-10);
    assert!((value(&s, "area.Max") - 1.5f64.powi(3) * std::f64::consts::PI).abs() < 1e-9);
}

#[test]
fn missing_metric_and_unknown_keys_exit_2() {
    assert_eq!(randers(&["measure"]).status.code(), Some(2));
    let o = randers(
        &[
            &["measure"],
            &POLAR[..],
            &["--override", "metric.colour=red"],
        ]
        .concat(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("metric.colour"));
}

#[test]
fn non_simple_curve_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("eight.txt");
    std::fs::write(&path, "2\n0 0 0 1 0\n0 0 0 0 1\n").unwrap();
    let src = format!("curve.source={}", path.display());
    let o = randers(&[
        "measure",
        "--override",
        "metric.b=0.5",
        "--override",
        "metric.theta=constant:0",
        "--override",
        &src,
    ]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn config_file_and_report_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "metric.b = 0.3\nmetric.theta = constant:0.7\nmetric.kind = Min # volume\nverify.variations = 50\n").unwrap();
    let out = dir.path().join("out");
    let args = [
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ];
    let first = randers(&args);
    assert_eq!(first.status.code(), Some(0), "{}", stdout(&first));
    let report = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("overall = pass"));
    assert!(report.contains("volume_kind = Min"));
    assert_eq!(stdout(&randers(&args)), stdout(&first));
}

#[test]
fn verify_rejects_ellipse_with_exit_1() {
    let o = randers(
        &[
            &["verify", "--override", "curve.source=ellipse:2:1"],
            &POLAR[..],
        ]
        .concat(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("lambda_source = least-squares"));
}

#[test]
fn optimize_writes_curve_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = randers(&[
        "optimize",
        "--override",
        "metric.b=0.5",
        "--override",
        "metric.theta=constant:0",
        "--override",
        "curve.source=ellipse:1.5:1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let curve = std::fs::read_to_string(dir.path().join("curve.txt")).unwrap();
    assert!(randers_core::ClosedCurve::from_text(&curve).is_ok());
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.lines().count() > 1);
    assert!((value(&stdout(&o), "area") - 0.75f64.powf(1.5) * std::f64::consts::PI).abs() < 1e-4);
}

#[test]
fn optimize_through_origin_under_polar_field_exits_2() {
    let o = randers(
        &[
            &["optimize", "--override", "curve.source=ellipse:1:1e-4"],
            &POLAR[..],
        ]
        .concat(),
    );
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn volume_table_has_one_row_per_b() {
    let dir = tempfile::tempdir().unwrap();
    let o = randers(&[
        "volume",
        "--override",
        "volume.b_grid=0:0.5:0.25",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert_eq!(s.lines().count(), 4);
    assert!(s.starts_with("b,bh_quadrature,bh_closed"));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("volume.csv")).unwrap(),
        s
    );
}

#[test]
fn jacobi_reports_no_conjugate_points() {
    let o = randers(&[&["jacobi", "--override", "jacobi.rows=8"], &POLAR[..]].concat());
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("# conjugate_points = 0"));
    assert_eq!(s.lines().filter(|l| !l.starts_with('#')).count(), 10);
}
