use std::path::Path;
use std::process::{Command, Output};

use nlperim::geometry::{AnalyticShape, GridSet, Vec2};
use nlperim::kernel::{FracParams, QuadratureSpec};
use nlperim::minimizer::MinimizationProblem;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlperim"))
        .args(args)
        .env_remove("NLPERIM_WORKERS")
        .output()
        .unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

/// A `side x side` free block in a 12 x 12 frame below a horizontal half-plane.
fn write_problem(dir: &Path, side: usize) -> String {
    let n = 12;
    let h = 1.0 / n as f64;
    let lo = (n - side) / 2;
    let mut mask = vec![false; n * n];
    for j in lo..lo + side {
        for i in lo..lo + side {
            mask[j * n + i] = true;
        }
    }
    let tail = AnalyticShape::half_space(Vec2::new(0.0, 1.0), 0.5 + 0.3 * h).unwrap();
    let mut ext = GridSet::new(n, n, Vec2::default(), h).unwrap();
    for j in 0..n {
        for i in 0..n {
            if !mask[j * n + i] && tail.contains(ext.center(i, j)) {
                ext.set(i, j, true);
            }
        }
    }
    let p = MinimizationProblem::new(
        mask,
        ext,
        Some(tail),
        FracParams::new(2, 0.5).unwrap(),
        QuadratureSpec::default(),
    )
    .unwrap();
    let path = dir.join(format!("problem{side}.json"));
    std::fs::write(&path, serde_json::to_vec(&p).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn unit_interval_global_perimeter() {
    let v = json(&run(&[
        "perimeter",
        "--set",
        "interval:0,1",
        "--s",
        "0.5",
        "--global",
    ]));
    assert_eq!(v["result"]["total"].as_f64().unwrap(), 8.0);
    assert_eq!(v["config"]["command"]["s"].as_f64().unwrap(), 0.5);
    assert_eq!(v["input_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn malformed_input_exits_one() {
    assert_eq!(
        run(&["perimeter", "--set", "interval:0,1"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["perimeter", "--set", "blob:1", "--s", "0.5", "--global"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&[
            "perimeter",
            "--set",
            "interval:0,1",
            "--s",
            "1.5",
            "--global"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn asymptotics_csv_has_a_row_per_exponent() {
    let o = run(&[
        "asymptotics",
        "--set",
        "interval:0,1",
        "--s-list",
        "0.9,0.95,0.99,0.999",
        "--format",
        "csv",
    ]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines.len(), 5, "{text}");
    assert!(lines[0].starts_with("s,"));
    // (1 - s) P_s of an interval tends to twice the point count
    let last: Vec<f64> = lines[4].split(',').map(|x| x.parse().unwrap()).collect();
    assert!((last[2] - 2.0).abs() < 1e-12);
    assert!((last[1] - 2.0).abs() < 0.01, "{last:?}");
}

#[test]
fn koch_box_counting_dimension() {
    let v = json(&run(&[
        "fractal", "koch", "--k", "7", "--side", "1", "--mode", "boxcount",
    ]));
    let d = v["result"]["fit"]["value"].as_f64().unwrap();
    assert!((d - 4f64.ln() / 3f64.ln()).abs() < 0.05, "{d}");
}

#[test]
fn small_problem_matches_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_problem(dir.path(), 4);
    let v = json(&run(&[
        "minimize",
        "--problem",
        &p,
        "--seeds",
        "4",
        "--method",
        "anneal",
    ]));
    assert_eq!(v["result"]["free_cells"].as_u64().unwrap(), 16);
    assert_eq!(v["result"]["oracle_match"], Value::Bool(true));
    assert_eq!(v["result"]["runs"].as_array().unwrap().len(), 4);
}

#[test]
fn brute_force_over_the_cap_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_problem(dir.path(), 6);
    let o = run(&["minimize", "--problem", &p, "--method", "brute"]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_problem(dir.path(), 6);
    let args = [
        "minimize",
        "--problem",
        p.as_str(),
        "--seeds",
        "3",
        "--seed",
        "7",
    ];
    let a = run(&args);
    let b = run(&args);
    let c = Command::new(env!("CARGO_BIN_EXE_nlperim"))
        .args(args)
        .env("NLPERIM_WORKERS", "1")
        .output()
        .unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let ball = [
        "perimeter",
        "--set",
        "ball:0.2,0,0.5",
        "--omega",
        "ball:0,0,1",
        "--s",
        "0.4",
    ];
    let d = run(&ball);
    let e = Command::new(env!("CARGO_BIN_EXE_nlperim"))
        .args(ball)
        .env("NLPERIM_WORKERS", "2")
        .output()
        .unwrap();
    assert!(d.status.success());
    assert_eq!(d.stdout, e.stdout);
}

#[test]
fn out_file_and_input_hash() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_problem(dir.path(), 3);
    let out = dir.path().join("r.json");
    let o = run(&["minimize", "--problem", &p, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let first: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    // same flags, different file contents
    let q = write_problem(dir.path(), 4);
    std::fs::copy(&q, &p).unwrap();
    let second = json(&run(&["minimize", "--problem", &p]));
    assert_ne!(first["input_sha256"], second["input_sha256"]);
}
