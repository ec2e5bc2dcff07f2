use std::path::Path;
use std::process::{Command, Output};

fn robinlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robinlab")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_column(text: &str, col: usize) -> Vec<f64> {
    text.lines().skip(1).map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

#[test]
fn neumann_ground_state_is_zero() {
    let o = robinlab(&["solve", "--domain", "unit_square", "--bc", "neumann", "--level", "4", "--count", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("index,eigenvalue,multiplicity,error_estimate\n"));
    assert!(csv_column(&text, 1)[0].abs() < 1e-10);
}

#[test]
fn solve_writes_robin_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eigs.csv");
    let o = robinlab(&[
        "solve",
        "--domain",
        "lshape",
        "--bc",
        "robin:mult:const:-1",
        "--level",
        "3",
        "--count",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let vals = csv_column(&std::fs::read_to_string(&out).unwrap(), 1);
    assert_eq!(vals.len(), 4);
    assert!(vals[0] < 0.0);
    assert!(vals.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn plane_wave_of_negative_constant_is_minus_perimeter() {
    let o = robinlab(&["plane-wave", "--domain", "unit_square", "--theta", "mult:const:-1", "--random", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let vals = csv_column(&stdout(&o), 2);
    assert_eq!(vals.len(), 8);
    assert!(vals.iter().all(|v| (v + 4.0).abs() < 1e-10));
}

#[test]
fn interlace_exit_code_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = robinlab(&[
        "verify",
        "interlace",
        "--domain",
        "unit_square",
        "--theta",
        "zero",
        "--jmax",
        "5",
        "--levels",
        "4,5",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["config"]["theta"], "zero");
    assert_eq!(json["config"]["levels"], serde_json::json!([4, 5]));
    assert_eq!(json["rows"].as_array().unwrap().len(), 5);

    let series = dir.path().join("series.csv");
    let o = robinlab(&["plot-data", "--from", report.to_str().unwrap(), "--out", series.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&series).unwrap();
    assert!(text.starts_with("j,lambda_theta,lambda_dirichlet,margin\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn violated_inequality_exits_3() {
    let o = robinlab(&["verify", "interlace", "--domain", "unit_square", "--theta", "mult:const:50", "--jmax", "3", "--levels", "3,4"]);
    assert_eq!(o.status.code(), Some(3));
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json["conditions"]["preconditions_met"], false);
}

#[test]
fn unmet_hypothesis_exits_2() {
    // a small positive constant keeps every row certified but fails the sign conditions
    let o = robinlab(&["verify", "interlace", "--domain", "unit_square", "--theta", "mult:const:0.1", "--jmax", "2", "--levels", "3,4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn other_campaigns_run() {
    let o = robinlab(&["verify", "counting", "--domain", "unit_square", "--theta", "mult:const:-1", "--jmax", "2", "--levels", "3,4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = robinlab(&["verify", "filonov", "--domain", "unit_square", "--theta", "mult:const:-1", "--jmax", "1", "--levels", "3,4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = robinlab(&[
        "verify",
        "safarov",
        "--domain",
        "unit_square",
        "--theta",
        "mult:const:-1",
        "--j",
        "1",
        "--levels",
        "3,4",
        "--eta",
        "1,0",
        "--eta",
        "0,-1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json["strict_certified"], true);
}

#[test]
fn trace_beta_and_coercivity_print_tables() {
    let o = robinlab(&["trace-beta", "--domain", "unit_square", "--level", "3", "--eps", "0.2,0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let beta = csv_column(&stdout(&o), 1);
    assert!(beta[1] > beta[0]);
    let o = robinlab(&["coercivity", "--domain", "unit_square", "--theta", "zero", "--levels", "2,3"]);
    assert!(csv_column(&stdout(&o), 2).iter().all(|k| (k - 0.5).abs() < 1e-10));
}

#[test]
fn mesh_file_loads_back() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("l.m2d");
    let o = robinlab(&["mesh", "lshape", "--level", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let mesh = robinlab::geometry::m2d::load_m2d(&out).unwrap();
    let direct = robinlab::geometry::mesh_at_level(&robinlab::PolygonalDomain::lshape(), 2).unwrap();
    assert_eq!(mesh.n_nodes(), direct.n_nodes());
    assert_eq!(mesh.triangles, direct.triangles);
    assert!((mesh.area() - robinlab::PolygonalDomain::lshape().area()).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(robinlab(&["solve", "--domain", "unit_square", "--bc", "neumann", "--bogus"]).status.code(), Some(1));
    assert_eq!(robinlab(&["verify", "interlace", "--domain", "unit_square", "--theta", "mult:cosnt:1"]).status.code(), Some(1));
    assert_eq!(robinlab(&["solve", "--domain", "triangle", "--bc", "neumann"]).status.code(), Some(1));
    assert_eq!(robinlab(&["solve", "--domain", "unit_square", "--bc", "periodic"]).status.code(), Some(1));
    assert_eq!(
        robinlab(&["solve", "--domain", "unit_square", "--bc", "dirichlet", "--level", "0", "--count", "50"]).status.code(),
        Some(1)
    );
    let unwritable = Path::new("/nonexistent-dir/out.csv");
    assert_eq!(
        robinlab(&["trace-beta", "--domain", "unit_square", "--level", "2", "--eps", "0.1", "--out", unwritable.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(robinlab(&["--help"]).status.code(), Some(0));
}
