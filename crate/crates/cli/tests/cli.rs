//! End-to-end tests of the `gridroute` binary: exit codes, artifacts, and
//! the routes-file round trip.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gridroute::format::parse_routes;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gridroute"))
}

fn fig1_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/fig1.rt")
}

fn run(args: &[&str]) -> Output {
    binary().args(args).output().expect("binary runs")
}

fn out_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gridroute-cli-{}-{tag}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn route_worked_example_eliminates_violations() {
    let dir = out_dir("fig1");
    let output = run(&[
        "route",
        "--input",
        fig1_path().to_str().unwrap(),
        "--threads",
        "1",
        "--max-iter",
        "1",
        "--width-factor",
        "1.0",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&output.stderr));

    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("total_excess 0"));
    assert!(stdout.contains("repair_eliminated 3"));

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    let repair = json["repair"].as_array().unwrap();
    assert_eq!(repair.len(), 3);
    // Edge 3 is the one between the second column of the two rows; the
    // worked example moves q = 3 nets off it.
    let bf = repair.iter().find(|e| e["edge"] == 3).unwrap();
    assert_eq!(bf["d_before"], 3);
    assert_eq!(bf["q_total"], 3);
    assert_eq!(bf["outcome"], "eliminated");
}

#[test]
fn route_is_deterministic_across_threads() {
    let dir1 = out_dir("det1");
    let dir8 = out_dir("det8");
    for (dir, threads) in [(&dir1, "1"), (&dir8, "8")] {
        let output = run(&[
            "route",
            "--gen",
            "8x8:12:3",
            "--seed",
            "3",
            "--threads",
            threads,
            "--out-dir",
            dir.to_str().unwrap(),
        ]);
        assert!(output.status.code().is_some());
    }
    let a = fs::read(dir1.join("routes.txt")).unwrap();
    let b = fs::read(dir8.join("routes.txt")).unwrap();
    assert_eq!(a, b, "routes bytes must be identical at 1 and 8 threads");
}

#[test]
fn route_generated_instance_writes_artifacts() {
    let dir = out_dir("gen");
    let output = run(&[
        "route",
        "--gen",
        "12x12:30:3",
        "--seed",
        "7",
        "--threads",
        "2",
        "--svg",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    let code = output.status.code().unwrap();
    assert!(code == 0 || code == 2, "unexpected exit {code}");
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert!(json["iterations"].as_u64().unwrap() <= 50);
    assert!(dir.join("routes.txt").exists());
    assert!(dir.join("report.txt").exists());
    assert!(dir.join("solution.svg").exists());
}

#[test]
fn routes_file_round_trips_with_report() {
    let dir = out_dir("roundtrip");
    let output = run(&[
        "route",
        "--gen",
        "6x6:8:3",
        "--seed",
        "11",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(output.status.code().is_some());

    let instance = gridroute::grid::generate_synthetic(6, 6, 8, 3, 11).unwrap();
    let routes_text = fs::read_to_string(dir.join("routes.txt")).unwrap();
    let routes = parse_routes(&instance.graph, &routes_text).unwrap();
    let mut usage = vec![0u32; instance.graph.edge_count()];
    for (_, edges) in &routes.nets {
        for e in edges {
            usage[e.index()] += 1;
        }
    }
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(
        json["metrics"]["total_wire_length"].as_u64().unwrap(),
        usage.iter().map(|&u| u as u64).sum::<u64>()
    );
    assert_eq!(
        json["metrics"]["min_channel_width"].as_u64().unwrap(),
        usage.iter().copied().max().unwrap() as u64
    );
    assert_eq!(
        json["width"]["final"].as_u64().unwrap(),
        routes.width.unwrap() as u64
    );
}

#[test]
fn input_errors_exit_one() {
    let output = run(&["route", "--input", "/nonexistent/file.rt"]);
    assert_eq!(output.status.code(), Some(1));

    let dir = out_dir("badinput");
    let bad = dir.join("bad.rt");
    fs::write(&bad, "grid 3 3\nnet 0 0 0 5 5\n").unwrap();
    let output = run(&["route", "--input", bad.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("line"), "diagnostics carry a line: {stderr}");

    let output = run(&["route"]);
    assert_eq!(output.status.code(), Some(1), "missing input must fail");
}

#[test]
fn residual_violation_exits_two() {
    // Two identical nets across a single edge: no detour exists, so one
    // unit of violation survives repair.
    let dir = out_dir("residual");
    let path = dir.join("stuck.rt");
    fs::write(&path, "grid 1 2\nwidth 1\nnet 0 0 0 0 1\nnet 1 0 0 0 1\n").unwrap();
    let output = run(&[
        "route",
        "--input",
        path.to_str().unwrap(),
        "--width-factor",
        "1.0",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("repair_no_path 1"));
}

#[test]
fn render_marks_violations_before_and_not_after_repair() {
    let dir = out_dir("render");
    // Pre-repair routes: repair disabled leaves the three bold edges over
    // budget.
    let pre = dir.join("pre");
    let output = run(&[
        "route",
        "--input",
        fig1_path().to_str().unwrap(),
        "--max-iter",
        "1",
        "--width-factor",
        "1.0",
        "--repair",
        "off",
        "--out-dir",
        pre.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    let svg_path = dir.join("pre.svg");
    let output = run(&[
        "render",
        "--input",
        fig1_path().to_str().unwrap(),
        "--routes",
        pre.join("routes.txt").to_str().unwrap(),
        "--out",
        svg_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    let svg = fs::read_to_string(&svg_path).unwrap();
    assert_eq!(svg.matches("class=\"violating\"").count(), 3);

    // Post-repair routes: no highlighted edges remain.
    let post = dir.join("post");
    let output = run(&[
        "route",
        "--input",
        fig1_path().to_str().unwrap(),
        "--max-iter",
        "1",
        "--width-factor",
        "1.0",
        "--out-dir",
        post.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    let svg_path = dir.join("post.svg");
    let output = run(&[
        "render",
        "--input",
        fig1_path().to_str().unwrap(),
        "--routes",
        post.join("routes.txt").to_str().unwrap(),
        "--out",
        svg_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    let svg = fs::read_to_string(&svg_path).unwrap();
    assert_eq!(svg.matches("class=\"violating\"").count(), 0);

    // Missing files exit 1.
    let output = run(&[
        "render",
        "--input",
        fig1_path().to_str().unwrap(),
        "--routes",
        "/nonexistent/routes.txt",
        "--out",
        svg_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn bench_runs_and_reports_speedups() {
    let dir = out_dir("bench");
    let path = dir.join("small.rt");
    // Single-net instance: near-unity speedups, but the table and the
    // cross-thread verification still run.
    fs::write(&path, "grid 4 4\nnet 0 0 0 3 3\n").unwrap();
    let output = run(&[
        "bench",
        "--input",
        path.to_str().unwrap(),
        "--max-iter",
        "5",
    ]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("threads"));
    for t in ["1", "2", "4", "8"] {
        assert!(stdout.split_whitespace().any(|w| w == t));
    }
}

#[test]
fn hidden_oracle_subcommand_reports_optima() {
    let dir = out_dir("oracle");
    let path = dir.join("tiny.rt");
    fs::write(&path, "grid 3 3\nwidth 1\nnet 0 0 1 2 1\nnet 1 1 0 1 2\n").unwrap();
    let output = run(&["oracle", "--input", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("optimal_wire_length 4"));
    assert!(stdout.contains("min_channel_width 1"));
}
