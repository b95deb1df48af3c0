use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use qaoa_lab::experiments::{grid_search_layer, DonorOutcome, Instance};
use qaoa_lab::graph::{generate_erdos_renyi, load_graph, save_graph, Graph};
use qaoa_lab::{
    reporting, run_batch, train_donor, BatchOptions, Convention, ExperimentConfig, OptimizerConfig,
    QaoaError, QaoaParams, MAX_QUBITS,
};

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

/// QAOA Max-Cut lab: donor training, parameter transfer and
/// layer-selective fine-tuning.
#[derive(Parser, Debug)]
#[command(name = "qaoa-lab", version, about)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Added to every graph and initialisation seed taken from the command
    /// line or from a config's acceptor list.
    #[arg(long, global = true, default_value_t = 0)]
    seed_offset: u64,

    /// Cost Hamiltonian sign. Overrides the config file for `run`.
    #[arg(long, global = true, value_enum)]
    convention: Option<ConventionArg>,

    /// Refuse instances with more nodes than this.
    #[arg(long, global = true, default_value_t = MAX_QUBITS)]
    max_qubits: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConventionArg {
    Maxcut,
    PaperLiteral,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Maxcut => Convention::MaxCut,
            ConventionArg::PaperLiteral => Convention::PaperLiteral,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate seeded connected Erdős–Rényi graphs as <out>/<n>_<seed>.json.
    GenGraphs {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.6)]
        edge_prob: f64,
        /// `0..20`, `3,5,8` or a single seed.
        #[arg(long, default_value = "0..20")]
        seeds: String,
        #[arg(long)]
        weighted: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Self-optimise every layer of a graph from random parameters.
    TrainDonor {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 5)]
        p: usize,
        #[arg(long, default_value_t = 0)]
        init_seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        optimizer: OptimizerArgs,
    },
    /// Run a batch described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Skip cells already present in the output directory.
        #[arg(long)]
        resume: bool,
    },
    /// Scan <H_c> over the (gamma, beta) plane of one layer.
    GridSearch {
        #[arg(long)]
        graph: PathBuf,
        /// A parameter file or the output of `train-donor`.
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        layer: usize,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate a run directory into CSV tables and SVG figures.
    Report {
        #[arg(long)]
        run_dir: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Args, Debug)]
struct OptimizerArgs {
    #[arg(long, default_value_t = 0.1)]
    learning_rate: f64,
    #[arg(long, default_value_t = 1000)]
    max_iterations: usize,
}

fn parse_seeds(spec: &str, offset: u64) -> anyhow::Result<Vec<u64>> {
    let spec = spec.trim();
    let seeds: Vec<u64> = if let Some((lo, hi)) = spec.split_once("..") {
        let lo: u64 = lo.trim().parse().with_context(|| format!("bad seed range {spec:?}"))?;
        let hi: u64 = hi.trim().parse().with_context(|| format!("bad seed range {spec:?}"))?;
        (lo..hi).collect()
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<u64>().with_context(|| format!("bad seed {s:?}")))
            .collect::<anyhow::Result<_>>()?
    };
    if seeds.is_empty() {
        bail!(QaoaError::InvalidArgument(format!("seed list {spec:?} is empty")));
    }
    Ok(seeds.into_iter().map(|s| s.wrapping_add(offset)).collect())
}

fn guard(g: &Graph, max_qubits: usize) -> anyhow::Result<()> {
    if g.n_nodes() > max_qubits {
        bail!(QaoaError::SizeLimit { what: "graph", n: g.n_nodes(), max: max_qubits });
    }
    if !g.is_connected() {
        bail!(QaoaError::InvalidGraph { field: "edges".into(), reason: "graph is not connected".into() });
    }
    Ok(())
}

fn load_params(path: &Path) -> anyhow::Result<QaoaParams> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum ParamsOrDonor {
        Params(QaoaParams),
        Donor { params: QaoaParams },
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed: ParamsOrDonor = serde_json::from_str(&text)
        .map_err(|source| QaoaError::Parse { path: path.into(), source })?;
    Ok(match parsed {
        ParamsOrDonor::Params(p) | ParamsOrDonor::Donor { params: p } => p,
    })
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> anyhow::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let g = &cli.global;
    if g.max_qubits == 0 || g.max_qubits > MAX_QUBITS {
        bail!(QaoaError::InvalidArgument(format!("--max-qubits must be in 1..={MAX_QUBITS}")));
    }
    let convention = g.convention.map(Convention::from);

    match cli.command {
        Command::GenGraphs { n, edge_prob, seeds, weighted, out } => {
            if n > g.max_qubits {
                bail!(QaoaError::SizeLimit { what: "graph", n, max: g.max_qubits });
            }
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            for seed in parse_seeds(&seeds, g.seed_offset)? {
                let graph = generate_erdos_renyi(n, edge_prob, seed, weighted)?;
                let path = out.join(format!("{n}_{seed}.json"));
                save_graph(&graph, &path)?;
                log::info!("{}: {} edges", path.display(), graph.edges().len());
            }
        }
        Command::TrainDonor { graph, p, init_seed, out, optimizer } => {
            if p == 0 {
                bail!(QaoaError::InvalidArgument("p must be at least 1".into()));
            }
            let graph = load_graph(&graph)?;
            guard(&graph, g.max_qubits)?;
            let cfg = OptimizerConfig {
                learning_rate: optimizer.learning_rate,
                max_iterations: optimizer.max_iterations,
                ..OptimizerConfig::default()
            };
            let donor = Instance::new(graph, convention.unwrap_or_default())?;
            let outcome: DonorOutcome = train_donor(&donor, p, init_seed.wrapping_add(g.seed_offset), &cfg)?;
            println!(
                "r {:.6} -> {:.6} after {} iterations (converged: {})",
                outcome.r_initial, outcome.r_final, outcome.trace.tau, outcome.trace.converged
            );
            write_json(&out, &outcome)?;
        }
        Command::Run { config, out_dir, workers, resume } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let mut cfg: ExperimentConfig = serde_json::from_str(&text)
                .map_err(|source| QaoaError::Parse { path: config.clone(), source })?;
            if let Some(c) = convention {
                cfg.convention = c;
            }
            cfg.max_qubits = cfg.max_qubits.min(g.max_qubits);
            for s in &mut cfg.acceptor.seeds {
                *s = s.wrapping_add(g.seed_offset);
            }
            let outcome = run_batch(&cfg, &out_dir, &BatchOptions { workers, resume })?;
            println!(
                "{} records ({} computed, {} resumed, {} failed) in {}",
                outcome.records.len(),
                outcome.computed,
                outcome.skipped,
                outcome.failures.len(),
                out_dir.display()
            );
            if !outcome.failures.is_empty() {
                log::warn!("failed cells are listed in {}", out_dir.join("failures.jsonl").display());
            }
        }
        Command::GridSearch { graph, params, layer, resolution, out } => {
            let graph = load_graph(&graph)?;
            guard(&graph, g.max_qubits)?;
            let params = load_params(&params)?;
            let inst = Instance::new(graph, convention.unwrap_or_default())?;
            let res = grid_search_layer(&inst.table, &params, layer, resolution)?;
            println!(
                "layer {layer}: min <H_c> = {:.6} at (gamma, beta) = ({:.6}, {:.6})",
                res.min_value, res.argmin.0, res.argmin.1
            );
            write_json(&out, &res)?;
        }
        Command::Report { run_dir, out_dir } => {
            let out = reporting::report(&run_dir, &out_dir)?;
            println!(
                "{} summary rows, {} figures in {}",
                out.summaries.len(),
                out.figures.len(),
                out_dir.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let validation = e.chain().any(|c| {
                c.downcast_ref::<QaoaError>().is_some_and(QaoaError::is_validation)
                    || c.downcast_ref::<std::num::ParseIntError>().is_some()
            });
            ExitCode::from(if validation { EXIT_VALIDATION } else { EXIT_RUNTIME })
        }
    }
}
