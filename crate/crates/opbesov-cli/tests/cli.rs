use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opbesov")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn power_of_diag_1_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.json", r#"{"command": "power", "operator": "diagonal [1, 4]", "vector": [1, 1], "alpha": 0.5}"#);
    let out = dir.path().join("power.json");
    let o = run(&["--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&out);
    let vals = v["value"].as_array().unwrap();
    assert!((vals[0][0].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert!((vals[1][0].as_f64().unwrap() - 2.0).abs() < 1e-8);
    assert!(vals[1][1].as_f64().unwrap().abs() < 1e-8);
    assert!(v["nodes"].as_u64().unwrap() > 0);
}

#[test]
fn power_routes_agree_in_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut got = Vec::new();
    for route in ["balakrishnan", "unified", "semigroup", "spectral"] {
        let text = format!(
            r#"{{"command": "power", "operator": "diagonal [0.5, 2, 9]", "vector": [1, -1, 2], "alpha": [0.7, 0.2], "route": "{route}"}}"#
        );
        let out = dir.path().join(format!("{route}.csv"));
        let o = run(&["--config", &text, "--out", out.to_str().unwrap(), "--format", "csv"]);
        assert_eq!(o.status.code(), Some(0), "{route}: {}", String::from_utf8_lossy(&o.stderr));
        let mut rd = csv::Reader::from_path(&out).unwrap();
        let rows: Vec<(f64, f64)> = rd
            .records()
            .map(|r| {
                let r = r.unwrap();
                (r[1].parse().unwrap(), r[2].parse().unwrap())
            })
            .collect();
        got.push(rows);
    }
    for rows in &got[..3] {
        for (a, b) in rows.iter().zip(&got[3]) {
            assert!((a.0 - b.0).abs() + (a.1 - b.1).abs() < 1e-7, "{a:?} vs {b:?}");
        }
    }
}

#[test]
fn norm_writes_a_norm_result() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("n.json");
    let text = r#"{"command": "norm", "operator": "diagonal [2]", "vector": [1], "s": 0.5, "q": 1, "alpha": 1, "beta": 1}"#;
    let o = run(&["--config", text, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&out);
    let value = v["result"]["value"].as_f64().unwrap();
    // 1/3 + Σ_{j≥0} 2^{1.5j}·2/(2^j+2)²
    let direct: f64 = 1.0 / 3.0 + (0..200).map(|j| 2f64.powf(1.5 * j as f64) * 2.0 / (2f64.powi(j) + 2.0).powi(2)).sum::<f64>();
    assert!((value - direct).abs() < 1e-7 * direct, "{value} vs {direct}");
}

#[test]
fn kfun_table_in_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.csv");
    let text = r#"{"command": "kfun", "operator": "diagonal [1, 100]", "vector": [1, 1], "alpha": 1, "t_grid": {"lo": 0.001, "hi": 1000, "count": 7}}"#;
    let o = run(&["--config", text, "--out", out.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rd = csv::Reader::from_path(&out).unwrap();
    assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), vec!["t", "k", "mu", "at_endpoint"]);
    let ks: Vec<f64> = rd.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(ks.len(), 7);
    // K(t, x) is non-decreasing in t and bounded by ‖x‖
    assert!(ks.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    assert!(*ks.last().unwrap() <= 2f64.sqrt() + 1e-9);
}

#[test]
fn verify_embed_q_default_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["--suite", "embed_q", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&out);
    assert_eq!(v[0]["check_id"], "embed_q");
    assert_eq!(v[0]["verdict"], "pass");
    assert_eq!(v[0]["seed"], 3);
    for key in ["paper_ref", "quote", "samples", "ratio_stats", "failures", "config_hash"] {
        assert!(v[0].get(key).is_some(), "{key}");
    }
}

#[test]
fn report_merges_and_round_trips_csv_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert_eq!(run(&["--suite", "cos_estimate", "--out", a.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(run(&["--suite", "k_independence", "--out", b.to_str().unwrap(), "--jobs", "2"]).status.code(), Some(0));
    let cfg = format!(r#"{{"command": "report", "inputs": [{:?}, {:?}]}}"#, a.to_str().unwrap(), b.to_str().unwrap());
    let merged = dir.path().join("m.json");
    let o = run(&["--config", &cfg, "--out", merged.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&merged);
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert_eq!(v[1]["check_id"], "k_independence");

    let csv_out = dir.path().join("m.csv");
    assert_eq!(run(&["--config", &cfg, "--out", csv_out.to_str().unwrap(), "--format", "csv"]).status.code(), Some(0));
    let mut rd = csv::Reader::from_path(&csv_out).unwrap();
    let first_group = &v[1]["ratio_stats"][0];
    let want = first_group["ratio_max"].as_f64().unwrap();
    let row = rd.records().map(|r| r.unwrap()).find(|r| &r[4] == first_group["group"].as_str().unwrap()).unwrap();
    assert_eq!(row[7].parse::<f64>().unwrap(), want);
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    // an absurdly strict inequality slack is still positive, but every ratio check needs a ceiling
    // of at least its own spread; safety factor 1 against a different calibration family fails
    let text = r#"{"command": "verify", "suite": ["k_independence"], "count": 2,
        "ensembles": [{"operator_family": {"family": "nonnormal_upper", "n": 4, "coupling": 2.0},
                       "vector_sampler": {"sampler": "gaussian"}, "count": 6, "seed": 5}],
        "tolerance": {"safety_factor": 1.0}}"#;
    let o = run(&["--config", text, "--out", out.to_str().unwrap()]);
    let v = read_json(&out);
    let failed = v[0]["verdict"] == "fail";
    assert_eq!(o.status.code(), Some(if failed { 1 } else { 0 }));
}

#[test]
fn configuration_errors_exit_two() {
    let o = run(&["--config", r#"{"command": "norm", "operator": "diagonal [1]", "vector": [1], "s": 2, "q": 2, "beta": 1}"#]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("s must satisfy −Re α < s < Re β"));

    let o = run(&["--config", r#"{"command": "power", "gamma_mode": "on"}"#]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gamma_mode"));

    let o = run(&["--config", "{ not json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));

    assert_eq!(run(&["--suite", "nope"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["--config", "/nonexistent/config.json"]).status.code(), Some(2));
    assert_eq!(
        run(&["--config", r#"{"command": "power", "operator": "diagonal [-1]", "vector": [1], "alpha": 0.5}"#]).status.code(),
        Some(2)
    );
}
