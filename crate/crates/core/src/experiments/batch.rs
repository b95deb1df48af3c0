//! Seeded batch sweeps over (donor, acceptor, scheme) cells.
//!
//! Run directory layout:
//!
//! ```text
//! <run>/config.json        effective configuration, defaults filled in
//! <run>/graphs/<n>_<seed>.json
//! <run>/donors/<seed>.json donor parameters and training trace
//! <run>/records.jsonl      one RunRecord per line, sorted by key on completion
//! <run>/failures.jsonl     cells that raised an error, if any
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    make_instance, run_scheme, train_donor, DonorOutcome, ExperimentConfig, Instance, RecordKey,
    RunLabels, RunRecord, SchemeSpec,
};
use crate::error::{QaoaError, Result};
use crate::graph::save_graph;
use crate::optimizer::OptimizerConfig;
use crate::simulator::QaoaParams;

pub const RECORDS_FILE: &str = "records.jsonl";
pub const FAILURES_FILE: &str = "failures.jsonl";
pub const CONFIG_FILE: &str = "config.json";

#[derive(Debug, Clone, Default)]
pub struct BatchOptions {
    /// Worker threads for independent cells; 0 uses all cores.
    pub workers: usize,
    /// Keep records already present in the run directory and skip their cells.
    pub resume: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub donor_seed: u64,
    pub acceptor_n: usize,
    pub acceptor_seed: u64,
    pub scheme: SchemeSpec,
    pub error: String,
}

#[derive(Debug)]
pub struct BatchOutcome {
    /// All records in canonical key order, including resumed ones.
    pub records: Vec<RunRecord>,
    pub computed: usize,
    pub skipped: usize,
    pub failures: Vec<RunFailure>,
}

#[derive(Serialize)]
struct DonorFile<'a> {
    n_nodes: usize,
    seed: u64,
    init_seed: u64,
    #[serde(flatten)]
    outcome: &'a DonorOutcome,
}

/// Runs every (donor, acceptor, scheme) cell of `config`, streaming records
/// to `<output_dir>/records.jsonl`. The persisted record set is a pure
/// function of `config`; worker count and completion order do not change it.
pub fn run_batch(
    config: &ExperimentConfig,
    output_dir: impl AsRef<Path>,
    opts: &BatchOptions,
) -> Result<BatchOutcome> {
    run_batch_with(config, output_dir.as_ref(), opts, &run_scheme)
}

type CellRunner =
    dyn Fn(&Instance, &QaoaParams, &SchemeSpec, &OptimizerConfig, RunLabels) -> Result<RunRecord> + Sync;

fn run_batch_with(
    config: &ExperimentConfig,
    output_dir: &Path,
    opts: &BatchOptions,
    runner: &CellRunner,
) -> Result<BatchOutcome> {
    config.validate()?;
    let dir = output_dir;
    for sub in ["", "graphs", "donors"] {
        let path = dir.join(sub);
        fs::create_dir_all(&path).map_err(|e| QaoaError::io(&path, e))?;
    }

    let config_path = dir.join(CONFIG_FILE);
    let config_text = serde_json::to_string_pretty(config).expect("config serializes");
    let records_path = dir.join(RECORDS_FILE);
    let failures_path = dir.join(FAILURES_FILE);

    let mut done: BTreeMap<RecordKey, RunRecord> = BTreeMap::new();
    if opts.resume {
        if config_path.exists() {
            let previous = fs::read_to_string(&config_path).map_err(|e| QaoaError::io(&config_path, e))?;
            let previous: ExperimentConfig = serde_json::from_str(&previous)
                .map_err(|source| QaoaError::Parse { path: config_path.clone(), source })?;
            if &previous != config {
                return Err(QaoaError::InvalidConfig(format!(
                    "{} was produced by a different config",
                    dir.display()
                )));
            }
        }
        if records_path.exists() {
            for rec in load_records(dir)? {
                done.insert(rec.key(), rec);
            }
        }
    } else {
        for path in [&records_path, &failures_path] {
            if path.exists() {
                fs::remove_file(path).map_err(|e| QaoaError::io(path, e))?;
            }
        }
    }
    write_if_changed(&config_path, &config_text)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| QaoaError::InvalidArgument(format!("thread pool: {e}")))?;

    pool.install(|| execute(config, dir, done, runner))
}

fn execute(
    config: &ExperimentConfig,
    dir: &Path,
    mut done: BTreeMap<RecordKey, RunRecord>,
    runner: &CellRunner,
) -> Result<BatchOutcome> {
    let acc = &config.acceptor;

    let donors: Vec<(u64, DonorOutcome)> = config
        .donors
        .par_iter()
        .map(|d| {
            let inst = make_instance(d.n_nodes, acc.edge_prob, d.seed, acc.weighted, config.convention)?;
            save_graph(&inst.graph, dir.join("graphs").join(format!("{}_{}.json", d.n_nodes, d.seed)))?;
            let outcome = train_donor(&inst, config.p, d.init_seed, &config.optimizer)?;
            log::info!(
                "donor seed {}: r {:.4} -> {:.4} in {} iterations",
                d.seed,
                outcome.r_initial,
                outcome.r_final,
                outcome.trace.tau
            );
            let file = DonorFile { n_nodes: d.n_nodes, seed: d.seed, init_seed: d.init_seed, outcome: &outcome };
            let path = dir.join("donors").join(format!("{}.json", d.seed));
            write_if_changed(&path, &serde_json::to_string_pretty(&file).expect("donor serializes"))?;
            Ok((d.seed, outcome))
        })
        .collect::<Result<_>>()?;

    let acceptor_keys: Vec<(usize, u64)> = acc
        .node_counts
        .iter()
        .flat_map(|&n| acc.seeds.iter().map(move |&s| (n, s)))
        .collect();
    let acceptors: HashMap<(usize, u64), Instance> = acceptor_keys
        .par_iter()
        .map(|&(n, seed)| {
            let inst = make_instance(n, acc.edge_prob, seed, acc.weighted, config.convention)?;
            save_graph(&inst.graph, dir.join("graphs").join(format!("{n}_{seed}.json")))?;
            Ok(((n, seed), inst))
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    let mut skipped = 0;
    for (donor_seed, donor) in &donors {
        for &(n, acceptor_seed) in &acceptor_keys {
            for scheme in &config.schemes {
                let key = RecordKey {
                    donor_seed: *donor_seed,
                    acceptor_n: n,
                    acceptor_seed,
                    scheme: scheme.kind,
                    free_layers: scheme.recorded_layers(config.p)?,
                };
                if done.contains_key(&key) {
                    skipped += 1;
                } else {
                    cells.push((*donor_seed, donor, n, acceptor_seed, scheme));
                }
            }
        }
    }
    log::info!("{} cells to run, {} already complete", cells.len(), skipped);

    let records_path = dir.join(RECORDS_FILE);
    let sink = Mutex::new(append_file(&records_path)?);
    let failures_path = dir.join(FAILURES_FILE);
    let failures = Mutex::new(Vec::new());

    let fresh: Vec<RunRecord> = cells
        .par_iter()
        .filter_map(|&(donor_seed, donor, n, acceptor_seed, scheme)| {
            let labels = RunLabels { donor_seed, acceptor_seed };
            let outcome = runner(&acceptors[&(n, acceptor_seed)], &donor.params, scheme, &config.optimizer, labels);
            match outcome {
                Ok(rec) => {
                    let line = serde_json::to_string(&rec).expect("record serializes");
                    let mut file = sink.lock().expect("records sink poisoned");
                    if let Err(e) = writeln!(file, "{line}").and_then(|_| file.flush()) {
                        log::error!("{}: {e}", records_path.display());
                    }
                    Some(rec)
                }
                Err(e) => {
                    log::warn!("cell donor={donor_seed} n={n} seed={acceptor_seed} {}: {e}", scheme.kind);
                    failures.lock().expect("failure list poisoned").push(RunFailure {
                        donor_seed,
                        acceptor_n: n,
                        acceptor_seed,
                        scheme: scheme.clone(),
                        error: e.to_string(),
                    });
                    None
                }
            }
        })
        .collect();
    drop(sink);

    let computed = fresh.len();
    for rec in fresh {
        done.insert(rec.key(), rec);
    }
    let records: Vec<RunRecord> = done.into_values().collect();

    let mut failures = failures.into_inner().expect("failure list poisoned");
    failures.sort_by(|a, b| {
        (a.donor_seed, a.acceptor_n, a.acceptor_seed, a.scheme.kind, &a.scheme.free_layers).cmp(&(
            b.donor_seed,
            b.acceptor_n,
            b.acceptor_seed,
            b.scheme.kind,
            &b.scheme.free_layers,
        ))
    });
    if failures.is_empty() {
        if failures_path.exists() {
            fs::remove_file(&failures_path).map_err(|e| QaoaError::io(&failures_path, e))?;
        }
    } else {
        let text: String = failures
            .iter()
            .map(|f| serde_json::to_string(f).expect("failure serializes") + "\n")
            .collect();
        write_atomic(&failures_path, &text)?;
    }
    let text: String = records
        .iter()
        .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
        .collect();
    if fs::read_to_string(&records_path).map(|old| old != text).unwrap_or(true) {
        write_atomic(&records_path, &text)?;
    }

    Ok(BatchOutcome { records, computed, skipped, failures })
}

/// Reads `<run_dir>/records.jsonl`. A truncated final line, left by an
/// interrupted run, is ignored.
pub fn load_records(run_dir: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    let path = run_dir.as_ref().join(RECORDS_FILE);
    let file = File::open(&path).map_err(|e| QaoaError::io(&path, e))?;
    let lines: Vec<String> = BufReader::new(file)
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| QaoaError::io(&path, e))?;
    let mut records = Vec::with_capacity(lines.len());
    let last = lines.len().saturating_sub(1);
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<RunRecord>(line) {
            Ok(rec) => records.push(rec),
            Err(e) if i == last && e.is_eof() => {
                log::warn!("{}: ignoring truncated final line", path.display());
            }
            Err(source) => return Err(QaoaError::Parse { path: path.clone(), source }),
        }
    }
    Ok(records)
}

fn append_file(path: &Path) -> Result<File> {
    OpenOptions::new().create(true).append(true).open(path).map_err(|e| QaoaError::io(path, e))
}

fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let tmp: PathBuf = path.with_extension("tmp");
    fs::write(&tmp, text).map_err(|e| QaoaError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| QaoaError::io(path, e))
}

fn write_if_changed(path: &Path, text: &str) -> Result<()> {
    if fs::read_to_string(path).map(|old| old == text).unwrap_or(false) {
        return Ok(());
    }
    fs::write(path, text).map_err(|e| QaoaError::io(path, e))
}
