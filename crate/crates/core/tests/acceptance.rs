//! Acceptance suite: one `[PASS]`/`[FAIL]` line per criterion.

mod common;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qaoa_lab::experiments::{AcceptorSpec, Instance};
use qaoa_lab::graph::load_graph;
use qaoa_lab::reporting::{self, ReportOutput};
use qaoa_lab::{
    analytic_gradient, brute_force_maxcut, expectation_value, finite_diff_gradient, generate_erdos_renyi,
    grid_search_layer, optimize, run_ansatz, run_batch, BatchOptions, Convention, EnergyTable,
    ExperimentConfig, LayerMask, OptimizerConfig, QaoaParams, RunRecord, SchemeKind, SchemeSpec,
};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn rand_params(rng: &mut ChaCha8Rng, p: usize) -> QaoaParams {
    let gammas = (0..p).map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
    let betas = (0..p).map(|_| rng.gen_range(-std::f64::consts::FRAC_PI_2..std::f64::consts::FRAC_PI_2)).collect();
    QaoaParams::new(gammas, betas).unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ac1_gradient() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC1);
    let mut worst = 0.0f64;
    for case in 0..100u64 {
        let n = [4, 6, 8][case as usize % 3];
        let p = [1, 5, 7][(case as usize / 3) % 3];
        let g = generate_erdos_renyi(n, 0.6, case, case % 2 == 1).map_err(|e| e.to_string())?;
        let t = EnergyTable::build(&g, Convention::MaxCut).unwrap();
        let params = rand_params(&mut rng, p);
        let a = analytic_gradient(&t, &params).unwrap();
        let f = finite_diff_gradient(&t, &params, 1e-5).unwrap();
        worst = worst.max(a.max_abs_diff(&f));
    }
    check(worst <= 1e-6, format!("100 cases, max |analytic - fd| = {worst:.2e} (tol 1e-6)"))
}

fn ac2_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC2);
    let mut worst = 0.0f64;
    let mut graphs = 0;
    for n in 2..=4 {
        let all = common::connected_graphs(n);
        let expected = [0, 0, 1, 4, 38][n];
        if all.len() != expected {
            return Err(format!("{} connected graphs on {n} nodes, expected {expected}", all.len()));
        }
        for g in all {
            graphs += 1;
            let t = EnergyTable::build(&g, Convention::MaxCut).unwrap();
            for _ in 0..20 {
                let p = rng.gen_range(1..=3);
                let params = rand_params(&mut rng, p);
                let sv = run_ansatz(&t, &params).unwrap();
                let dense = common::dense_ansatz(&g, 1.0, params.gammas(), params.betas());
                for (a, b) in sv.amplitudes().iter().zip(&dense) {
                    worst = worst.max((a - b).norm());
                }
            }
        }
    }
    let mut table_gap = 0.0f64;
    for i in 0..50u64 {
        let n = 2 + (i as usize % 11);
        let g = generate_erdos_renyi(n, 0.6, 500 + i, i % 2 == 0).unwrap();
        let t = EnergyTable::build(&g, Convention::MaxCut).unwrap();
        let cut = brute_force_maxcut(&g).unwrap();
        table_gap = table_gap.max((t.min_energy() - cut.e_min).abs());
    }
    check(
        worst <= 1e-10 && table_gap <= 1e-9,
        format!(
            "{graphs} graphs x 20 params, max amplitude error {worst:.2e} (tol 1e-10); \
             50 graphs, max |table min - e_min| {table_gap:.2e}"
        ),
    )
}

fn ac3_single_edge() -> Outcome {
    let inst = make_instance_from_edges(2, &[(0, 1)]);
    let grid = grid_search_layer(&inst.table, &QaoaParams::zeros(1), 1, 64).unwrap();
    let init = QaoaParams::new(vec![0.3], vec![-0.2]).unwrap();
    let cfg = OptimizerConfig::default();
    let (params, trace) = optimize(&inst.table, &init, &LayerMask::all(1), &cfg).unwrap();
    let r = inst.ratio(&params).unwrap();
    check(
        grid.min_value <= -0.995 && r >= 0.999 && trace.tau <= 500,
        format!("grid min {:.6} (<= -0.995); r {r:.6} (>= 0.999) after {} iterations (<= 500)", grid.min_value, trace.tau),
    )
}

fn make_instance_from_edges(n: usize, edges: &[(usize, usize)]) -> Instance {
    Instance::new(qaoa_lab::Graph::unweighted(n, edges).unwrap(), Convention::MaxCut).unwrap()
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/three_regular")
}

fn ac4_three_regular() -> Outcome {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixture_dir())
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.len() != 10 {
        return Err(format!("expected 10 fixture graphs, found {}", paths.len()));
    }
    let cfg = OptimizerConfig::default();
    let mut worst = (f64::INFINITY, String::new());
    for path in &paths {
        let g = load_graph(path).map_err(|e| e.to_string())?;
        let regular = (0..g.n_nodes()).all(|v| g.edges().iter().filter(|e| e.u == v || e.v == v).count() == 3);
        if !regular || ![8, 10, 12].contains(&g.n_nodes()) {
            return Err(format!("{} is not a 3-regular graph on 8, 10 or 12 nodes", path.display()));
        }
        let cut = brute_force_maxcut(&g).unwrap();
        let t = EnergyTable::build(&g, Convention::MaxCut).unwrap();
        let grid = grid_search_layer(&t, &QaoaParams::zeros(1), 1, 64).unwrap();
        let init = QaoaParams::new(vec![grid.argmin.0], vec![grid.argmin.1]).unwrap();
        let (params, _) = optimize(&t, &init, &LayerMask::all(1), &cfg).unwrap();
        let energy = expectation_value(&t, &params).unwrap();
        let ratio = (g.total_weight() - energy) / 2.0 / cut.max_cut_value;
        if ratio < worst.0 {
            worst = (ratio, path.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    check(worst.0 >= 0.6874, format!("10 graphs, worst expected cut / max cut {:.4} on {} (>= 0.6874)", worst.0, worst.1))
}

fn batch(config: &ExperimentConfig, dir: &Path, workers: usize) -> Result<ReportOutput, String> {
    let out = run_batch(config, dir, &BatchOptions { workers, resume: false }).map_err(|e| e.to_string())?;
    if !out.failures.is_empty() {
        return Err(format!("{} cells failed: {}", out.failures.len(), out.failures[0].error));
    }
    reporting::report(dir, dir.join("report")).map_err(|e| e.to_string())
}

fn records(dir: &Path) -> Vec<RunRecord> {
    qaoa_lab::experiments::load_records(dir).unwrap()
}

fn select<'a>(recs: &'a [RunRecord], kind: SchemeKind, layers: &[usize], n: usize) -> Vec<&'a RunRecord> {
    recs.iter()
        .filter(|r| r.scheme == kind && r.acceptor_n == n && (kind != SchemeKind::KLayer || r.free_layers == layers))
        .collect()
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn ac5_transfer(root: &Path) -> Outcome {
    let cfg = ExperimentConfig {
        schemes: vec![SchemeSpec::full_transfer(), SchemeSpec::k_layer([2]), SchemeSpec::all_layer()],
        ..ExperimentConfig::default()
    };
    let dir = root.join("ac5");
    batch(&cfg, &dir, 1)?;
    let recs = records(&dir);
    let k2 = select(&recs, SchemeKind::KLayer, &[2], 12);
    let all = select(&recs, SchemeKind::AllLayer, &[], 12);
    if k2.len() != 40 || all.len() != 40 {
        return Err(format!("expected 40 records per scheme, got {} and {}", k2.len(), all.len()));
    }
    let improved = k2.iter().filter(|r| r.delta_r > 0.0).count() as f64 / k2.len() as f64;
    let mean_dr = mean(k2.iter().map(|r| r.delta_r));
    let tau_k2 = mean(k2.iter().map(|r| r.tau as f64));
    let tau_all = mean(all.iter().map(|r| r.tau as f64));
    let r_k2 = mean(k2.iter().map(|r| r.r_final));
    let r_all = mean(all.iter().map(|r| r.r_final));
    check(
        mean_dr > 0.0 && improved >= 0.7 && tau_k2 < tau_all && r_all >= r_k2,
        format!(
            "layer 2: mean dr {mean_dr:.4} (> 0), improved {:.0}% (>= 70%); mean tau {tau_k2:.2} vs all-layer {tau_all:.2}; \
             mean r all-layer {r_all:.4} vs layer 2 {r_k2:.4}",
            100.0 * improved
        ),
    )
}

fn sweep_config(node_counts: Vec<usize>) -> ExperimentConfig {
    ExperimentConfig {
        acceptor: AcceptorSpec { node_counts, ..AcceptorSpec::default() },
        schemes: vec![
            SchemeSpec::full_transfer(),
            SchemeSpec::k_layer([2]),
            SchemeSpec::k_layer([1, 2]),
            SchemeSpec::k_layer([1, 2, 3]),
            SchemeSpec::all_layer(),
        ],
        ..ExperimentConfig::default()
    }
}

fn dr_over_tau(report: &ReportOutput, kind: SchemeKind, layers: &[usize], n: usize) -> Option<f64> {
    report
        .summaries
        .iter()
        .find(|s| s.scheme == kind && s.n_nodes == n && (kind != SchemeKind::KLayer || s.free_layers == layers))
        .and_then(|s| s.mean_dr_over_tau)
}

fn ac6_tradeoff(root: &Path) -> Outcome {
    let dir = root.join("ac6");
    let report = batch(&sweep_config(vec![6, 8, 10, 12]), &dir, 0)?;
    for name in ["sweep_mean_r.svg", "sweep_mean_tau.svg", "sweep_mean_dr_over_tau.svg"] {
        let path = dir.join("report").join(name);
        let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        let doc = roxmltree::Document::parse(&text).map_err(|e| format!("{name}: {e}"))?;
        let series = doc.descendants().filter(|n| n.attribute("class") == Some("series")).count();
        let marks = doc.descendants().filter(|n| n.attribute("class") == Some("mark")).count();
        let expected_series = if name == "sweep_mean_dr_over_tau.svg" { 4 } else { 5 };
        if series != expected_series || marks != 4 * expected_series {
            return Err(format!("{name}: {series} series and {marks} points"));
        }
    }
    let at = |report: &ReportOutput, n| {
        (dr_over_tau(report, SchemeKind::KLayer, &[2], n), dr_over_tau(report, SchemeKind::AllLayer, &[], n))
    };
    let (k2, all) = at(&report, 12);
    let (k2, all) = (k2.ok_or("missing layer-2 row")?, all.ok_or("missing all-layer row")?);
    if k2 > all {
        return Ok(format!("n = 12: mean dr/tau layer 2 {k2:.5} > all-layer {all:.5}; 3 sweep figures written"));
    }
    let dir14 = root.join("ac6_n14");
    let report14 = batch(&sweep_config(vec![14]), &dir14, 0)?;
    let (k2_14, all_14) = at(&report14, 14);
    let (k2_14, all_14) = (k2_14.unwrap_or(f64::NAN), all_14.unwrap_or(f64::NAN));
    check(
        k2_14 > all_14,
        format!("n = 12: layer 2 {k2:.5} <= all-layer {all:.5}; n = 14: layer 2 {k2_14:.5} vs all-layer {all_14:.5}"),
    )
}

fn ac7_determinism(root: &Path) -> Outcome {
    // Same config as the sweep, run again with one worker instead of all.
    let first = root.join("ac6").join("report");
    if !first.join(reporting::RECORDS_CSV).exists() {
        return Err("sweep batch did not produce a report".into());
    }
    let dir = root.join("ac7");
    batch(&sweep_config(vec![6, 8, 10, 12]), &dir, 1)?;
    let mut same = Vec::new();
    for name in [reporting::RECORDS_CSV, reporting::SUMMARY_CSV] {
        let a = std::fs::read(first.join(name)).map_err(|e| e.to_string())?;
        let b = std::fs::read(dir.join("report").join(name)).map_err(|e| e.to_string())?;
        same.push((name, a == b, a.len()));
    }
    check(
        same.iter().all(|s| s.1),
        same.iter().map(|(n, eq, len)| format!("{n} identical: {eq} ({len} bytes)")).collect::<Vec<_>>().join("; "),
    )
}

fn ac8_weighted(root: &Path) -> Outcome {
    let cfg = ExperimentConfig {
        acceptor: AcceptorSpec { node_counts: vec![10], weighted: true, ..AcceptorSpec::default() },
        schemes: vec![
            SchemeSpec::full_transfer(),
            SchemeSpec::k_layer([2]),
            SchemeSpec::k_layer([1, 2]),
            SchemeSpec::all_layer(),
        ],
        ..ExperimentConfig::default()
    };
    let dir = root.join("ac8");
    batch(&cfg, &dir, 0)?;
    let recs = records(&dir);
    let max_r = recs.iter().map(|r| r.r_final).fold(f64::NEG_INFINITY, f64::max);
    let r_k2 = mean(select(&recs, SchemeKind::KLayer, &[2], 10).iter().map(|r| r.r_final));
    let r_all = mean(select(&recs, SchemeKind::AllLayer, &[], 10).iter().map(|r| r.r_final));
    check(
        recs.len() == 160 && max_r <= 1.0 && r_all >= r_k2,
        format!("{} records, max r_final {max_r:.6} (<= 1); mean r all-layer {r_all:.4} vs layer 2 {r_k2:.4}", recs.len()),
    )
}

fn main() -> ExitCode {
    let scratch = tempfile::tempdir().expect("scratch directory");
    let root = scratch.path();
    let criteria: Vec<Criterion> = vec![
        ("AC1 gradient matches central differences", Box::new(ac1_gradient)),
        ("AC2 statevector matches dense reference", Box::new(ac2_oracle)),
        ("AC3 single-edge optimum", Box::new(ac3_single_edge)),
        ("AC4 p=1 ratio on 3-regular graphs", Box::new(ac4_three_regular)),
        ("AC5 layer-selective transfer trends", Box::new(|| ac5_transfer(root))),
        ("AC6 dr/tau trade-off sweep", Box::new(|| ac6_tradeoff(root))),
        ("AC7 batch determinism", Box::new(|| ac7_determinism(root))),
        ("AC8 weighted batch", Box::new(|| ac8_weighted(root))),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
