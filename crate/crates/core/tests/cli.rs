use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_qubit-entropy");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("QUBIT_ENTROPY_QUAD_ORDER")
        .output()
        .unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn stdout_rows(out: &Output) -> Vec<Vec<f64>> {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    csv_rows(&String::from_utf8(out.stdout.clone()).unwrap())
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn config_errors_exit_2_and_name_the_field() {
    for (args, field) in [
        (vec!["--t-min", "0"], "t-min"),
        (vec!["--t-min", "0.3", "--t-max", "0.2"], "t-max"),
        (vec!["--t-steps", "1"], "t-steps"),
        (vec!["--q", "0"], "q"),
        (
            vec!["--levels-small", "2", "--levels-big", "2"],
            "levels-big",
        ),
        (vec!["--g", "-1"], "g"),
        (vec!["--lambda", "x"], "--lambda"),
        (vec!["--method", "magic"], "--method"),
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(stderr(&out).contains(field), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn quad_order_from_environment() {
    let base = ["--t-steps", "3", "--q", "1", "--method", "quadrature"];
    let out = Command::new(BIN)
        .args(base)
        .env("QUBIT_ENTROPY_QUAD_ORDER", "8")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("QUBIT_ENTROPY_QUAD_ORDER"));
    let out = Command::new(BIN)
        .args(base)
        .env("QUBIT_ENTROPY_QUAD_ORDER", "32")
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# quad-order = 32"));
}

#[test]
fn unwritable_output_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("no/such/dir/out.csv");
    let out = run(&["--t-steps", "2", "--output", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("out.csv"));
}

#[test]
fn file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.conf");
    std::fs::write(
        &cfg,
        "# test sweep\nlambda = 1.7\nt-steps = 3\nq = 0.5,0.8,2\nformat = json\n",
    )
    .unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "--q", "1.0,2.0"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 3 * 2);
    let qs: Vec<f64> = arr.iter().map(|r| r["q"].as_f64().unwrap()).collect();
    assert_eq!(qs, vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);

    let missing = dir.path().join("absent.conf");
    let out = run(&["--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("absent.conf"));
    std::fs::write(&cfg, "colour = blue\n").unwrap();
    let out = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("colour"));
}

#[test]
fn quadrature_and_closed_form_agree() {
    let closed = stdout_rows(&run(&["--method", "closed-form"]));
    let quad = stdout_rows(&run(&["--method", "quadrature"]));
    assert_eq!(closed.len(), quad.len());
    for (a, b) in closed.iter().zip(&quad) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= 1e-6, "{a:?} vs {b:?}");
        }
    }
}

#[test]
fn uncoupled_sweep_has_no_mutual_information_at_q1() {
    let rows = stdout_rows(&run(&["--g", "0", "--lambda", "2"]));
    for r in rows.iter().filter(|r| r[1] == 1.0) {
        assert!(r[5].abs() <= 1e-10, "{r:?}");
    }
}

#[test]
fn default_sweep_shape() {
    let rows = stdout_rows(&run(&[]));
    assert_eq!(rows.len(), 50 * 5);
    for chunk in rows.chunks(5) {
        // q = 0.5, 0.8, 1, 1.5, 2
        assert!(chunk[0][2] >= chunk[2][2] - 1e-10 && chunk[2][2] >= chunk[4][2] - 1e-10);
        if chunk[0][0] <= 0.2 {
            assert!(chunk.iter().all(|r| r[5] >= -1e-10));
        }
    }
}

#[test]
fn log_scale_and_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log.csv");
    let out = run(&[
        "--t-scale",
        "log",
        "--t-min",
        "0.01",
        "--t-max",
        "1",
        "--t-steps",
        "3",
        "--q",
        "1",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let rows = csv_rows(&std::fs::read_to_string(Path::new(&path)).unwrap());
    let ts: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(ts.len(), 3);
    assert!((ts[1] - 0.1).abs() < 1e-12 && ts[2] == 1.0);
}

#[test]
fn larger_truncation_by_quadrature() {
    let rows = stdout_rows(&run(&[
        "--method",
        "quadrature",
        "--levels-small",
        "3",
        "--levels-big",
        "5",
        "--t-steps",
        "4",
        "--q",
        "1,2",
    ]));
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r[5] >= -1e-10 && r[7] <= 1.0 + 1e-12));
    let out = run(&["--levels-small", "3", "--levels-big", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("levels-small"));
}
