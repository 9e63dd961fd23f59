use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn crossproj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crossproj"))
        .args(args)
        .env_remove("CROSSPROJ_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_f64().unwrap())
        .collect()
}

#[test]
fn project_generic_example() {
    let out = crossproj(&["project", "--x0", "2", "--y0", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["case"], "Generic");
    assert_eq!(floats(&doc["points"][0]["x"]), vec![2.0]);
    assert_eq!(floats(&doc["points"][0]["y"]), vec![0.0]);
    assert_eq!(doc["dist"].as_f64(), Some(1.0));
    assert_eq!(doc["library_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["tolerances"]["deg"].as_f64(), Some(1e-12));
}

#[test]
fn project_orthogonal_and_degenerate_examples() {
    let doc = json(&crossproj(&["project", "--x0", "1,0", "--y0", "0,1"]));
    assert_eq!(doc["case"], "Orthogonal");
    assert_eq!(doc["dist"].as_f64(), Some(0.0));

    let doc = json(&crossproj(&["project", "--x0", "1,1", "--y0", "1,1"]));
    assert_eq!(doc["case"], "DegeneratePlus");
    assert_eq!(doc["set_valued"], true);
    assert_eq!(doc["dist_sq"].as_f64(), Some(2.0));
    let points = doc["points"].as_array().unwrap();
    assert_eq!(points.len(), 2);
    assert_eq!(points[0]["selection"], "keep-y");
    assert_eq!(floats(&points[0]["x"]), vec![0.0, 0.0]);
    assert_eq!(floats(&points[1]["x"]), vec![1.0, 1.0]);
}

#[test]
fn project_accepts_negative_coordinates_and_formats() {
    let out = crossproj(&["project", "--x0", "-3,1", "--y0", "-1,2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("case,lambda,half_dist_sq,dist,x_1,x_2,y_1,y_2\nGeneric,"));
    let out = crossproj(&["project", "--x0", "3", "--y0", "-1", "--format", "plain"]);
    assert!(stdout(&out).starts_with("case: Generic\n"));
}

#[test]
fn project_from_point_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    fs::write(&path, r#"{"dim": 2, "x0": [1, 2], "y0": [3, 1]}"#).unwrap();
    let out = crossproj(&["project", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["case"], "Generic");
}

#[test]
fn parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(
        &path,
        "{\n  \"dim\": 2,\n  \"x0\": [1, 2],\n  \"y0\": [3]\n}",
    )
    .unwrap();
    let out = crossproj(&["project", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));
    assert!(stderr(&out).contains("`y0`"));

    for args in [
        &["project", "--x0", "1,nan", "--y0", "1,2"][..],
        &["project", "--x0", "1,2", "--y0", "1"],
        &["project", "--x0", "1"],
        &["project", "--input", "/nonexistent/p.json"],
        &["project", "--x0", "1", "--y0", "1", "--tol-orth", "-1"],
    ] {
        assert_eq!(crossproj(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn numeric_domain_error_exits_3() {
    let out = crossproj(&["project", "--x0", "1e200,1e200", "--y0", "1e200,0"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn family_examples() {
    let out = crossproj(&[
        "family",
        "--x0",
        "1",
        "--y0",
        "1",
        "--count",
        "3",
        "--mode",
        "injective",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 1 + 2);

    let out = crossproj(&["family", "--x0", "1,1", "--y0", "1,1", "--count", "5"]);
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 5);
    for row in rows {
        let objective: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!((objective - 1.0).abs() <= 1e-10, "{row}");
    }

    let out = crossproj(&["family", "--x0", "1,-2", "--y0", "-1,2", "--count", "1"]);
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with(",,0.0"), "{}", rows[1]);
}

#[test]
fn family_rejects_non_degenerate_input() {
    let out = crossproj(&["family", "--x0", "2", "--y0", "1"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("Generic"));
    let out = crossproj(&["family", "--x0", "1,0", "--y0", "0,1"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("Orthogonal"));
}

#[test]
fn check_acceptance_run_passes() {
    let out = crossproj(&[
        "check", "--dims", "1,2,3,4", "--trials", "1000", "--seed", "0",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("all 4000 trials passed"));
}

#[test]
fn check_catches_the_wrong_root() {
    let out = crossproj(&["check", "--trials", "10", "--inject-fault", "lambda-plus"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    let fail = text.lines().find(|l| l.starts_with("FAIL")).unwrap();
    assert!(fail.contains("lagrangian_optimality"), "{fail}");
    assert!(fail.contains("x0=") && fail.contains("y0="));
}

#[test]
fn check_single_trial_and_seed_env() {
    let out = crossproj(&["check", "--trials", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("all 4 trials passed"));
    assert!(crossproj(&["check", "--trials", "0"]).status.code() == Some(2));

    let flag = crossproj(&["check", "--trials", "3", "--seed", "7"]);
    let env = Command::new(env!("CARGO_BIN_EXE_crossproj"))
        .args(["check", "--trials", "3"])
        .env("CROSSPROJ_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(flag.stdout, env.stdout);
}

#[test]
fn solve_generated_orthant() {
    let out = crossproj(&["solve", "--generate", "orthant,1,0", "--method", "ap"]);
    assert_eq!(out.status.code(), Some(0));
    let summary = json(&out);
    assert_eq!(summary["converged"], true);
    assert!(summary["iterations"].as_u64().unwrap() <= 5);
}

#[test]
fn solve_infeasible_instance_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.json");
    let instance = r#"{
      "problem": {"dim": 1, "constraint": {"kind": "box_pair",
        "x": {"lower": [1.0], "upper": [2.0]},
        "y": {"lower": [1.0], "upper": [2.0]}}},
      "start": {"x": [1.5], "y": [1.5]}
    }"#;
    fs::write(&path, instance).unwrap();
    for method in ["ap", "dr"] {
        let out = crossproj(&[
            "solve",
            "--instance",
            path.to_str().unwrap(),
            "--method",
            method,
            "--max-iter",
            "50",
        ]);
        assert_eq!(out.status.code(), Some(5), "{method}");
        assert!(stderr(&out).contains("final residual"));
        assert_eq!(json(&out)["converged"], false);
    }
}

#[test]
fn solve_traces_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = crossproj(&[
            "solve",
            "--generate",
            "affine,3,4",
            "--method",
            "dr",
            "--max-iter",
            "300",
            "--trace",
            path.to_str().unwrap(),
        ]);
        assert!(matches!(out.status.code(), Some(0 | 5)));
    }
    let first = fs::read(&a).unwrap();
    assert_eq!(first, fs::read(&b).unwrap());
    assert!(first.starts_with(b"iteration,residual_C,residual_B,case_tag\n"));
}

#[test]
fn generate_then_solve_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.json");
    let out = crossproj(&[
        "generate",
        "--kind",
        "box",
        "--dim",
        "3",
        "--seed",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let summary = dir.path().join("summary.json");
    let out = crossproj(&[
        "solve",
        "--instance",
        path.to_str().unwrap(),
        "--method",
        "dr",
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let parsed: Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(parsed["converged"], true);
    assert_eq!(
        crossproj(&["generate", "--kind", "cube", "--dim", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        crossproj(&["solve", "--generate", "orthant,x,1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn bench_shape_and_determinism() {
    let run = || {
        stdout(&crossproj(&[
            "bench",
            "--dims",
            "1,2,3,4,5,6,7,8",
            "--trials",
            "1000",
            "--seed",
            "3",
        ]))
    };
    let first = run();
    let rows: Vec<&str> = first.lines().skip(1).collect();
    assert_eq!(rows.len(), 8);
    let residuals = |text: &str| -> Vec<String> {
        text.lines()
            .skip(1)
            .map(|l| {
                let cols: Vec<&str> = l.split(',').collect();
                format!("{},{},{},{}", cols[0], cols[1], cols[4], cols[5])
            })
            .collect()
    };
    for row in &rows {
        let gap_min: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
        assert!(gap_min >= -1e-9, "{row}");
    }
    assert_eq!(residuals(&first), residuals(&run()));
}
