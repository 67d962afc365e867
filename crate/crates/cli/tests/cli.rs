//! End-to-end checks of the `billiards` binary: exit codes, report
//! schemas, and byte-level determinism across reruns and thread counts.

use serde_json::Value;
use std::process::{Command, Output};

fn billiards(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_billiards"))
        .args(args)
        .env_remove("BILLIARDS_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> Value {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

#[test]
fn solve_sphere_example_counts_three() {
    let output = billiards(&[
        "solve",
        "--surface",
        "sphere",
        "--m",
        "2",
        "--A",
        "1,0,0",
        "--B",
        "0,1,0",
        "--n",
        "2",
        "--starts",
        "200",
        "--seed",
        "7",
    ]);
    let report = stdout_json(&output);
    assert_eq!(report["count"], 3);
    assert_eq!(report["bound"], 3);
    assert_eq!(report["generic"], true);
    assert_eq!(report["n"], 2);
    assert_eq!(report["surface"]["kind"], "sphere");
    let trajectories = report["trajectories"].as_array().unwrap();
    assert_eq!(trajectories.len(), 3);
    for t in trajectories {
        for key in [
            "points",
            "value",
            "residual",
            "morse_index",
            "degenerate",
            "epsilon_product",
        ] {
            assert!(t.get(key).is_some(), "trajectory missing {key}");
        }
        assert!(t["residual"].as_f64().unwrap() <= 1e-12);
    }
}

#[test]
fn solve_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: Option<&str>| {
        let path = dir.path().join(name);
        let mut command = Command::new(env!("CARGO_BIN_EXE_billiards"));
        command.args([
            "solve",
            "--surface",
            "ellipsoid",
            "--axes",
            "1.0,1.15,0.9",
            "--A",
            "0.9,0.2,-0.3",
            "--B=-0.4,0.8,0.5",
            "--n",
            "2",
            "--starts",
            "80",
            "--seed",
            "3",
            "--out",
            path.to_str().unwrap(),
        ]);
        match threads {
            Some(t) => command.env("BILLIARDS_THREADS", t),
            None => command.env_remove("BILLIARDS_THREADS"),
        };
        let output = command.output().unwrap();
        assert!(output.status.success());
        std::fs::read(path).unwrap()
    };
    let first = run("a.json", None);
    let second = run("b.json", None);
    let serial = run("c.json", Some("1"));
    let wide = run("d.json", Some("4"));
    assert_eq!(first, second, "rerun changed bytes");
    assert_eq!(first, serial, "thread cap changed bytes");
    assert_eq!(first, wide, "thread count changed bytes");
}

#[test]
fn verify_exit_codes_track_verdicts() {
    let ok = billiards(&["verify", "--m", "3", "--n", "3"]);
    assert_eq!(ok.status.code(), Some(0));
    let verdicts: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(verdicts["poincare_ok"], true);
    assert_eq!(verdicts["cuplength_ok"], true);

    // Over GF(2) the factorial in the cup-length certificate vanishes, so
    // the verdict honestly fails and the exit code says so.
    let failing = billiards(&["verify", "--m", "3", "--n", "3", "--field", "f2"]);
    assert_eq!(failing.status.code(), Some(1));
    let verdicts: Value = serde_json::from_slice(&failing.stdout).unwrap();
    assert_eq!(verdicts["poincare_ok"], true);
    assert_eq!(verdicts["cuplength_ok"], false);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["cohomology", "--m", "0", "--n", "2"] as &[&str],
        &["cohomology", "--m", "3", "--n", "2", "--field", "f11"],
        &[
            "solve",
            "--surface",
            "sphere",
            "--A",
            "1,0,0",
            "--B",
            "0,1,0",
            "--n",
            "2",
        ],
        &[
            "solve",
            "--surface",
            "ellipsoid",
            "--m",
            "2",
            "--A",
            "1,0,0",
            "--B",
            "0,1,0",
            "--n",
            "1",
        ],
        &["oracle", "--phi", "4.0", "--n", "2"],
        &["oracle", "--phi", "1.0", "--n", "2", "--bogus"],
    ] {
        let output = billiards(args);
        assert_eq!(output.status.code(), Some(2), "args {args:?}");
    }
}

#[test]
fn cohomology_products_flag_controls_table() {
    let without = stdout_json(&billiards(&["cohomology", "--m", "3", "--n", "3"]));
    assert!(without.get("products").is_none());
    assert_eq!(without["dims"]["4"], 1);
    assert_eq!(without["cup_length"], 3);
    assert_eq!(without["cat_lower_bound"], 4);

    let with = stdout_json(&billiards(&[
        "cohomology",
        "--m",
        "3",
        "--n",
        "3",
        "--products",
    ]));
    let products = with["products"].as_array().unwrap();
    // All pairs 0 <= i <= j <= 3, unit row included.
    assert_eq!(products.len(), 10);
    // sigma_1 * sigma_2 = 3 * sigma_3 in the rational table.
    assert!(products
        .iter()
        .any(|p| p[0] == 1 && p[1] == 2 && p[2] == "3"));
    // Vanishing target groups are null.
    assert!(products
        .iter()
        .any(|p| p[0] == 2 && p[1] == 2 && p[2].is_null()));
}

#[test]
fn oracle_reports_all_branches() {
    let phi_arg = "1.5707963";
    let phi: f64 = phi_arg.parse().unwrap();
    let report = stdout_json(&billiards(&["oracle", "--phi", phi_arg, "--n", "3"]));
    let trajectories = report["trajectories"].as_array().unwrap();
    assert_eq!(trajectories.len(), 4);
    let alpha0 = trajectories[0]["alpha"].as_f64().unwrap();
    assert!((alpha0 - phi / 4.0).abs() < 1e-12);
    for (k, t) in trajectories.iter().enumerate() {
        assert_eq!(t["k"], k as u64);
        assert_eq!(t["points"].as_array().unwrap().len(), 3);
    }
}

#[test]
fn text_format_renders_summaries() {
    let output = billiards(&["--format", "text", "verify", "--m", "2", "--n", "4"]);
    assert_eq!(output.status.code(), Some(0));
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("all_ok=true"), "got: {text}");

    let output = billiards(&[
        "--format",
        "text",
        "solve",
        "--surface",
        "sphere",
        "--m",
        "2",
        "--A",
        "1,0,0",
        "--B",
        "0,1,0",
        "--n",
        "1",
        "--starts",
        "40",
    ]);
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("count=2"), "got: {text}");
    assert!(text.contains("morse_index=0"), "got: {text}");
}

#[test]
fn out_file_is_written_whole() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested").join("report.json");
    // Parent directory must exist; the write is atomic within it.
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    let output = billiards(&[
        "cohomology",
        "--m",
        "4",
        "--n",
        "2",
        "--products",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    let parsed: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(parsed["m"], 4);
    assert_eq!(parsed["field"], "q");
    // No stray temp files left behind.
    let leftovers: Vec<_> = std::fs::read_dir(path.parent().unwrap())
        .unwrap()
        .filter_map(Result::ok)
        .filter(|e| e.path() != path)
        .collect();
    assert!(leftovers.is_empty(), "stray files: {leftovers:?}");
}
