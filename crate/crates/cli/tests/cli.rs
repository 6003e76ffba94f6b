use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gift_core::io::write_matrix;
use gift_core::EmbeddingMatrix;
use serde_json::Value;
use tempfile::TempDir;

fn gift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gift"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_json(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr_error(out: &Output) -> Value {
    let v: Value = serde_json::from_slice(&out.stderr).expect("error object on stderr");
    v["error"].clone()
}

fn indices(v: &Value) -> Vec<u64> {
    v["selected_indices"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect()
}

fn line_frames(dir: &Path, n: usize) -> PathBuf {
    let rows: Vec<Vec<f32>> = (0..n).map(|i| vec![1.0, i as f32 * 0.1]).collect();
    write_json(dir, "frames.json", &serde_json::json!(rows))
}

#[test]
fn hand_trace_instance_end_to_end() {
    let dir = TempDir::new().unwrap();
    let frames = write_json(
        dir.path(),
        "f.json",
        &serde_json::json!([[0, 0], [1, 0], [3, 0]]),
    );
    let rel = write_json(dir.path(), "r.json", &serde_json::json!([1.0, 0.4, 0.6]));
    let out = gift(&[
        "select",
        "--frames",
        frames.to_str().unwrap(),
        "--relevance",
        rel.to_str().unwrap(),
        "--no-normalize",
        "--budget",
        "2",
        "--batch-size",
        "1",
        "--trace",
    ]);
    let v = stdout_json(&out);
    assert_eq!(indices(&v), vec![0, 2]);
    assert_eq!(v["scores"], serde_json::json!([9.0, 5.4]));
    assert_eq!(v["trace"][1]["score"], serde_json::json!([1.6, 5.4]));
    assert_eq!(v["trace"][1]["substitute"], serde_json::json!([2, null]));
    assert_eq!(v["config"]["relevance_source"], "file");
}

#[test]
fn uniform_on_eight_frames() {
    let dir = TempDir::new().unwrap();
    let frames = line_frames(dir.path(), 8);
    let out = gift(&[
        "select",
        "--frames",
        frames.to_str().unwrap(),
        "--policy",
        "uniform",
        "--budget",
        "4",
    ]);
    let v = stdout_json(&out);
    assert_eq!(indices(&v), vec![1, 3, 5, 7]);
    assert!(v.get("scores").is_none());
}

#[test]
fn budget_above_pool_has_its_own_exit_code() {
    let dir = TempDir::new().unwrap();
    let frames = line_frames(dir.path(), 4);
    let q = write_json(dir.path(), "q.json", &serde_json::json!([1.0, 0.0]));
    let out = gift(&[
        "select",
        "--frames",
        frames.to_str().unwrap(),
        "--query",
        q.to_str().unwrap(),
        "--budget",
        "9",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(out.stdout.is_empty());
    assert_eq!(stderr_error(&out)["kind"], "budget-exceeds-pool");
}

#[test]
fn error_classes_map_to_distinct_exit_codes() {
    let dir = TempDir::new().unwrap();
    let frames = line_frames(dir.path(), 4);
    let f = frames.to_str().unwrap();
    let q = write_json(dir.path(), "q.json", &serde_json::json!([1.0, 0.0]));
    let q3 = write_json(dir.path(), "q3.json", &serde_json::json!([1.0, 0.0, 0.0]));
    let garbage = dir.path().join("garbage.npy");
    std::fs::write(&garbage, b"not an array").unwrap();
    let missing = dir.path().join("missing.npy");

    let cases: Vec<(Vec<&str>, i32, &str)> = vec![
        (
            vec!["select", "--frames", f, "--budget", "2", "--bogus"],
            2,
            "usage",
        ),
        (vec!["select", "--frames", f, "--budget", "2"], 2, "usage"),
        (
            vec!["select", "--frames", f, "--budget", "2", "--policy", "best"],
            2,
            "usage",
        ),
        (
            vec![
                "select",
                "--frames",
                missing.to_str().unwrap(),
                "--policy",
                "uniform",
                "--budget",
                "2",
            ],
            3,
            "io",
        ),
        (
            vec![
                "select",
                "--frames",
                garbage.to_str().unwrap(),
                "--policy",
                "uniform",
                "--budget",
                "2",
            ],
            3,
            "format",
        ),
        (
            vec![
                "select",
                "--frames",
                f,
                "--query",
                q3.to_str().unwrap(),
                "--budget",
                "2",
            ],
            5,
            "dimension-mismatch",
        ),
        (
            vec![
                "select",
                "--frames",
                f,
                "--query",
                q.to_str().unwrap(),
                "--budget",
                "2",
                "--batch-size",
                "0",
            ],
            5,
            "invalid-input",
        ),
        (
            vec![
                "select",
                "--frames",
                f,
                "--query",
                q.to_str().unwrap(),
                "--budget",
                "2",
                "--policy",
                "mmr",
                "--lambda=-1",
            ],
            5,
            "invalid-input",
        ),
    ];
    for (args, code, kind) in cases {
        let out = gift(&args);
        assert_eq!(out.status.code(), Some(code), "{args:?}");
        let err = stderr_error(&out);
        assert_eq!(err["kind"], kind, "{args:?}");
        assert_eq!(err["exit_code"], code, "{args:?}");
    }
}

#[test]
fn subsampled_indices_are_reported_in_original_frame_space() {
    let dir = TempDir::new().unwrap();
    let n = 300usize;
    let rows: Vec<Vec<f32>> = (0..n)
        .map(|i| {
            let t = i as f32 * 0.05;
            vec![t.cos(), t.sin(), 0.3]
        })
        .collect();
    let frames = dir.path().join("frames.npy");
    write_matrix(&frames, &EmbeddingMatrix::from_rows(&rows).unwrap()).unwrap();
    let f = frames.to_str().unwrap();
    let q = write_json(dir.path(), "q.json", &serde_json::json!([1.0, 0.0, 0.0]));

    let pool = 128usize;
    let map: Vec<u64> = (0..pool)
        .map(|i| (((2 * i + 1) * n) / (2 * pool)) as u64)
        .collect();

    let v = stdout_json(&gift(&[
        "select", "--frames", f, "--policy", "uniform", "--budget", "4",
    ]));
    let expected: Vec<u64> = [16usize, 48, 80, 112].iter().map(|&c| map[c]).collect();
    assert_eq!(indices(&v), expected);
    assert_eq!(v["config"]["subsampled"], true);
    assert_eq!(v["config"]["candidates"], 128);
    assert_eq!(v["config"]["n_frames"], 300);

    let v = stdout_json(&gift(&[
        "select",
        "--frames",
        f,
        "--query",
        q.to_str().unwrap(),
        "--budget",
        "12",
        "--trace",
    ]));
    for i in indices(&v) {
        assert!(map.contains(&i));
    }
    for entry in v["trace"].as_array().unwrap() {
        for c in entry["candidates"].as_array().unwrap() {
            assert!(map.contains(&c.as_u64().unwrap()));
        }
    }
}

#[test]
fn identical_invocations_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let rows: Vec<Vec<f32>> = (0..40)
        .map(|i| vec![(i as f32 * 0.37).sin(), (i as f32 * 0.11).cos(), 0.2])
        .collect();
    let frames = write_json(dir.path(), "f.json", &serde_json::json!(rows));
    let q = write_json(dir.path(), "q.json", &serde_json::json!([0.5, 1.0, 0.0]));
    for policy in ["gift", "uniform", "toprel", "undirected", "mmr"] {
        let args = [
            "select",
            "--frames",
            frames.to_str().unwrap(),
            "--query",
            q.to_str().unwrap(),
            "--budget",
            "7",
            "--batch-size",
            "3",
            "--policy",
            policy,
            "--order",
            "score",
        ];
        let a = gift(&args);
        let b = gift(&args);
        assert!(a.status.success(), "{policy}");
        assert_eq!(a.stdout, b.stdout, "{policy}");
    }
}

#[test]
fn score_order_lists_best_first() {
    let dir = TempDir::new().unwrap();
    let rows: Vec<Vec<f32>> = (0..20)
        .map(|i| vec![(i as f32 * 0.3).cos(), (i as f32 * 0.3).sin()])
        .collect();
    let frames = write_json(dir.path(), "f.json", &serde_json::json!(rows));
    let q = write_json(dir.path(), "q.json", &serde_json::json!([0.0, 1.0]));
    let v = stdout_json(&gift(&[
        "select",
        "--frames",
        frames.to_str().unwrap(),
        "--query",
        q.to_str().unwrap(),
        "--budget",
        "5",
        "--batch-size",
        "5",
        "--order",
        "score",
    ]));
    let scores: Vec<f64> = v["scores"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s.as_f64().unwrap())
        .collect();
    assert!(scores.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn bench_default_flags_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = gift(&[
            "bench",
            "--corpus-seed",
            "11",
            "--format",
            "json",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let v: Value = serde_json::from_slice(&bytes).unwrap();
    let rows = v["rows"].as_array().unwrap();
    // six policies over four budgets, one batch size
    assert_eq!(rows.len(), 24);
    assert!(rows.iter().all(|r| r["videos"] == 50));
}

#[test]
fn bench_batch_sweep_emits_one_gift_row_per_batch_size() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("sweep.csv");
    let out = gift(&[
        "bench",
        "--videos",
        "3",
        "--policies",
        "gift,uniform",
        "--budgets",
        "8",
        "--batch-sizes",
        "6,7,8,9,10,11,12",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("policy,K,B,event_recall,frame_recall,temporal_coverage,noise_rate,redundancy")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let gift_b: Vec<&str> = rows
        .iter()
        .filter(|r| r[0] == "gift")
        .map(|r| r[2])
        .collect();
    assert_eq!(gift_b, ["6", "7", "8", "9", "10", "11", "12"]);
    let uniform: Vec<&Vec<&str>> = rows.iter().filter(|r| r[0] == "uniform").collect();
    assert_eq!(uniform.len(), 1);
    assert_eq!(uniform[0][2], "");
    // summary: header plus one line per cell
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).lines().count(),
        1 + rows.len()
    );
}

#[test]
fn bench_rejects_empty_policy_list() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("r.csv");
    let out = gift(&["bench", "--policies", "", "--out", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_error(&out)["kind"], "usage");
    assert!(!p.exists());
}

#[test]
fn bench_unwritable_output_has_its_own_exit_code() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("no-such-dir").join("r.csv");
    let out = gift(&[
        "bench",
        "--videos",
        "1",
        "--policies",
        "uniform",
        "--budgets",
        "4",
        "--out",
        p.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(6));
    assert_eq!(stderr_error(&out)["kind"], "output");
}
