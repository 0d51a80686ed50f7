use std::process::{Command, Output};

use cmsimple::confmodel::Multigraph;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmsimple"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn rational(v: &Value) -> (String, String) {
    (
        v["num"].as_str().unwrap().to_owned(),
        v["den"].as_str().unwrap().to_owned(),
    )
}

#[test]
fn report_on_k4_sequence_with_exact_values() {
    let doc = run_json(&["report", "--regular", "4", "3", "--exact"]);
    // 1296/10395 in lowest terms.
    assert_eq!(
        rational(&doc["exact"]["p_simple"]),
        ("48".into(), "385".into())
    );
    assert_eq!(doc["exact"]["total_configurations"], "10395");
    assert_eq!(doc["exact"]["simple_configurations"], "1296");
    assert_eq!(doc["exact"]["simple_graphs"], "1");
    let t2a = doc["asymptotic"]["t2a_value"].as_f64().unwrap();
    assert!((t2a - 0.2086).abs() < 1e-4);
    assert!(doc.get("monte_carlo").is_none());
}

#[test]
fn report_schema() {
    let doc = run_json(&[
        "report",
        "--literal",
        "3,2,2,1",
        "--exact",
        "--samples",
        "2000",
    ]);
    for key in ["meta", "degree_stats", "asymptotic", "exact", "monte_carlo"] {
        assert!(doc[key].is_object(), "missing {key}");
    }
    for key in [
        "t2a_value",
        "t2b_value",
        "poisson_value",
        "upper_bound_j1",
        "lower_bound_j2",
        "lambda_big",
        "density_ratio",
        "correction_term",
    ] {
        assert!(doc["asymptotic"][key].is_number(), "asymptotic.{key}");
    }
    for key in [
        "p_hat",
        "ci_low",
        "ci_high",
        "confidence",
        "samples",
        "successes",
        "seed",
    ] {
        assert!(doc["monte_carlo"][key].is_number(), "monte_carlo.{key}");
    }
    assert!(doc["monte_carlo"].get("elapsed_secs").is_none());
    for key in ["p_simple", "e_ytilde", "gap_bound"] {
        rational(&doc["exact"][key]);
    }
    // Defaults are echoed.
    let meta = &doc["meta"];
    assert_eq!(meta["seed"], 1);
    assert_eq!(meta["cap"], 8);
    assert_eq!(meta["confidence"], 0.95);
    assert_eq!(meta["format"], "json");
    assert_eq!(meta["source"]["kind"], "literal");
}

#[test]
fn report_on_all_ones_file_is_certain() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ones.txt");
    std::fs::write(&path, "# a perfect matching\n1\n1  \n\n1\n1\n").unwrap();
    let doc = run_json(&[
        "report",
        "--degrees",
        path.to_str().unwrap(),
        "--exact",
        "--samples",
        "500",
    ]);
    let a = &doc["asymptotic"];
    for key in ["t2a_value", "t2b_value", "poisson_value", "upper_bound_j1"] {
        assert_eq!(a[key].as_f64(), Some(1.0), "{key}");
    }
    // The lower bound is loose here: exp(−(Σd²/4N)²) = exp(−1/4).
    assert!((a["lower_bound_j2"].as_f64().unwrap() - (-0.25f64).exp()).abs() < 1e-15);
    assert_eq!(
        rational(&doc["exact"]["p_simple"]),
        ("1".into(), "1".into())
    );
    assert_eq!(doc["monte_carlo"]["p_hat"].as_f64(), Some(1.0));
}

#[test]
fn input_errors_exit_two_with_one_line() {
    let out = run(&["report", "--regular", "3", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("odd"));
    assert!(out.stdout.is_empty());

    assert_eq!(run(&["report", "--literal", "2,x"]).status.code(), Some(2));
    assert_eq!(
        run(&["report", "--degrees", "/nonexistent/file"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["report"]).status.code(), Some(2));
    assert_eq!(
        run(&["report", "--regular", "4", "2", "--literal", "2,2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["report", "--regular", "4", "2", "--samples", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn cap_exceeded_exits_three() {
    let out = run(&["report", "--regular", "10", "3", "--exact"]);
    assert_eq!(out.status.code(), Some(3));
    // Raising the cap makes the same request succeed.
    assert!(
        run(&["report", "--regular", "6", "3", "--exact", "--cap", "9"])
            .status
            .success()
    );
}

#[test]
fn identical_configs_give_identical_bytes() {
    let args = [
        "report",
        "--regular",
        "30",
        "3",
        "--samples",
        "20000",
        "--seed",
        "9",
        "--dump",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    for format in ["csv", "text"] {
        let mut with_format = args.to_vec();
        with_format.extend(["--format", format]);
        assert_eq!(run(&with_format).stdout, run(&with_format).stdout);
    }
    // The estimate itself does not depend on the worker count.
    let one = run_json(&[&args[..], &["--workers", "1"]].concat());
    let three = run_json(&[&args[..], &["--workers", "3"]].concat());
    assert_eq!(one["monte_carlo"], three["monte_carlo"]);
}

#[test]
fn dump_round_trips() {
    let doc = run_json(&["report", "--literal", "4,3,3,2,2", "--dump", "--seed", "4"]);
    let text = doc["dump"].as_str().unwrap();
    let g = Multigraph::parse_dump(5, text).unwrap();
    assert_eq!(g.degrees(), vec![4, 3, 3, 2, 2]);
    assert_eq!(g.dump(), text);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let out = run(&[
        "report",
        "--regular",
        "4",
        "3",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("field,value\n"));
    assert!(text.contains("asymptotic.t2a_value,0.2086"));
}

#[test]
fn convergence_table() {
    let doc = run_json(&[
        "convergence",
        "--d",
        "3",
        "--sizes",
        "10,100,1000",
        "--samples",
        "40000",
    ]);
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let target = (-2.0f64).exp();
    for r in rows {
        assert!((r["poisson"].as_f64().unwrap() - target).abs() < 1e-12);
    }
    let gap = |i: usize| rows[i]["gap"].as_f64().unwrap();
    assert!(gap(0) > gap(2));
    assert!(gap(2) < 0.01);

    let csv = run(&[
        "convergence",
        "--d",
        "1",
        "--sizes",
        "2,6",
        "--samples",
        "1000",
        "--format",
        "csv",
    ]);
    assert!(csv.status.success());
    let text = String::from_utf8(csv.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("n,p_hat,ci_low,ci_high,poisson,t2a,gap,error")
    );
    for line in lines {
        let f: Vec<_> = line.split(',').collect();
        assert_eq!(
            (f[1], f[4], f[5], f[6]),
            ("1.0", "1.0", "1.0", "0.0"),
            "{line}"
        );
    }
}

#[test]
fn convergence_parity_errors_are_reported_per_row() {
    let out = run(&[
        "convergence",
        "--d",
        "3",
        "--sizes",
        "4,5,6",
        "--samples",
        "1000",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert!(rows[0].get("error").is_none());
    assert!(rows[1]["error"].as_str().unwrap().contains("odd"));
    assert!(rows[2]["p_hat"].is_number());
}

#[test]
fn dichotomy_demo() {
    let doc = run_json(&["dichotomy", "--hubs", "2,8,32", "--samples", "20000"]);
    let p: Vec<f64> = doc["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["p_hat"].as_f64().unwrap())
        .collect();
    assert!(p[0] > p[1] && p[1] > p[2], "{p:?}");
    assert_eq!(doc["meta"]["edges"], 256);

    // k = 1 is a perfect matching, certain to be simple, as enumeration confirms.
    let small = run_json(&[
        "dichotomy",
        "--hubs",
        "1",
        "--edges",
        "4",
        "--samples",
        "1000",
    ]);
    assert_eq!(small["rows"][0]["p_hat"].as_f64(), Some(1.0));
    let exact = run_json(&["report", "--literal", "1,1,1,1,1,1,1,1", "--exact"]);
    assert_eq!(
        rational(&exact["exact"]["p_simple"]),
        ("1".into(), "1".into())
    );

    let empty = run(&["dichotomy", "--hubs"]);
    assert_eq!(empty.status.code(), Some(2));
    assert_eq!(run(&["dichotomy"]).status.code(), Some(2));
}
