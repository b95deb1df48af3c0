use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qaoa_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qaoa-lab"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(code(&qaoa_lab(&["--help"])), 0);
    assert_eq!(code(&qaoa_lab(&["--version"])), 0);
    assert_eq!(code(&qaoa_lab(&["run", "--help"])), 0);
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&qaoa_lab(&[])), 1);
    assert_eq!(code(&qaoa_lab(&["frobnicate"])), 1);
    assert_eq!(code(&qaoa_lab(&["gen-graphs", "--n", "6"])), 1);
    assert_eq!(code(&qaoa_lab(&["--convention", "ising", "report", "--run-dir", "a", "--out-dir", "b"])), 1);
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = arg(dir.path());
    assert_eq!(code(&qaoa_lab(&["gen-graphs", "--n", "30", "--out", d])), 2);
    assert_eq!(code(&qaoa_lab(&["--max-qubits", "6", "gen-graphs", "--n", "8", "--out", d])), 2);
    assert_eq!(code(&qaoa_lab(&["gen-graphs", "--n", "6", "--edge-prob", "0", "--out", d])), 2);
    assert_eq!(code(&qaoa_lab(&["gen-graphs", "--n", "6", "--seeds", "x..3", "--out", d])), 2);

    let dup = dir.path().join("dup.json");
    fs::write(&dup, r#"{"n_nodes": 3, "weighted": false, "edges": [[0, 1, 1.0], [1, 0, 1.0], [1, 2, 1.0]]}"#).unwrap();
    let out = qaoa_lab(&["train-donor", "--graph", arg(&dup), "--p", "1", "--out", d]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("edges[1]"));

    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"p": 5, "learning_rate": 0.1}"#).unwrap();
    assert_eq!(code(&qaoa_lab(&["run", "--config", arg(&cfg), "--out-dir", d])), 2);
    fs::write(&cfg, r#"{"p": 0}"#).unwrap();
    assert_eq!(code(&qaoa_lab(&["run", "--config", arg(&cfg), "--out-dir", d])), 2);
}

#[test]
fn runtime_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let out = qaoa_lab(&["train-donor", "--graph", arg(&missing), "--out", arg(dir.path())]);
    assert_eq!(code(&out), 3);
    assert_eq!(code(&qaoa_lab(&["report", "--run-dir", arg(&missing), "--out-dir", arg(dir.path())])), 3);
}

#[test]
fn graphs_donor_and_grid_search() {
    let dir = tempfile::tempdir().unwrap();
    let graphs = dir.path().join("graphs");
    let out = qaoa_lab(&["--seed-offset", "5", "gen-graphs", "--n", "6", "--seeds", "0..2", "--weighted", "--out", arg(&graphs)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let mut names: Vec<String> = fs::read_dir(&graphs).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["6_5.json", "6_6.json"]);
    let graph = fs::read_to_string(graphs.join("6_5.json")).unwrap();
    assert!(graph.contains("\"weighted\": true") || graph.contains("\"weighted\":true"));

    let donor = dir.path().join("donor.json");
    let g = graphs.join("6_5.json");
    let out = qaoa_lab(&["train-donor", "--graph", arg(&g), "--p", "2", "--init-seed", "3", "--out", arg(&donor)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&donor).unwrap()).unwrap();
    assert_eq!(doc["params"]["gammas"].as_array().unwrap().len(), 2);
    assert!(doc["r_final"].as_f64().unwrap() > doc["r_initial"].as_f64().unwrap());

    let grid = dir.path().join("grid.json");
    let out = qaoa_lab(&[
        "grid-search", "--graph", arg(&g), "--params", arg(&donor), "--layer", "2", "--resolution", "8", "--out",
        arg(&grid),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&grid).unwrap()).unwrap();
    assert_eq!(doc["surface"].as_array().unwrap().len(), 8);
    assert_eq!(doc["layer"], 2);

    // A bare parameter file works too; layer 3 does not exist at p = 2.
    let params = dir.path().join("params.json");
    fs::write(&params, r#"{"p": 2, "gammas": [0.1, 0.2], "betas": [0.3, 0.4]}"#).unwrap();
    let out = qaoa_lab(&["grid-search", "--graph", arg(&g), "--params", arg(&params), "--layer", "3", "--out", arg(&grid)]);
    assert_eq!(code(&out), 2);
    let out = qaoa_lab(&[
        "--convention", "paper-literal", "grid-search", "--graph", arg(&g), "--params", arg(&params), "--layer", "1",
        "--resolution", "4", "--out", arg(&grid),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn run_resume_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{
            "p": 2,
            "donors": [{"n_nodes": 5, "seed": 3, "init_seed": 1}],
            "acceptor": {"node_counts": [6], "seeds": [0, 1, 2]},
            "schemes": [{"kind": "full_transfer"}, {"kind": "k_layer", "free_layers": [2]}, {"kind": "all_layer"}],
            "optimizer": {"max_iterations": 300}
        }"#,
    )
    .unwrap();
    let run = dir.path().join("run");
    let report = dir.path().join("report");
    let out = qaoa_lab(&["run", "--config", arg(&cfg), "--out-dir", arg(&run), "--workers", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("9 records (9 computed"));
    let records = fs::read(run.join("records.jsonl")).unwrap();

    let out = qaoa_lab(&["run", "--config", arg(&cfg), "--out-dir", arg(&run), "--resume"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("0 computed, 9 resumed"));
    assert_eq!(fs::read(run.join("records.jsonl")).unwrap(), records);

    // Resuming under a different convention is a different experiment.
    let out = qaoa_lab(&["--convention", "paper-literal", "run", "--config", arg(&cfg), "--out-dir", arg(&run), "--resume"]);
    assert_ne!(code(&out), 0);

    let out = qaoa_lab(&["report", "--run-dir", arg(&run), "--out-dir", arg(&report)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(report.join("records.csv")).unwrap();
    assert!(csv.starts_with("donor_seed,acceptor_n,acceptor_seed,scheme,free_layers,r_initial,r_final,tau,delta_r,converged\n"));
    assert_eq!(csv.lines().count(), 10);
    for f in ["summary.csv", "sweep_mean_r.svg", "sweep_mean_tau.svg", "sweep_mean_dr_over_tau.svg", "ratio_per_seed_n6_donor3.svg"] {
        assert!(report.join(f).exists(), "{f}");
    }
}
