//! Donor training, parameter transfer and layer-selective fine-tuning.
//!
//! A donor instance is optimised from random parameters; its converged
//! parameters are then evaluated on acceptor instances as-is (full transfer)
//! or used as the starting point for optimising a subset of layers.

mod batch;
mod grid;

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use batch::{load_records, run_batch, BatchOptions, BatchOutcome, RunFailure};
pub use grid::{grid_search_layer, GridSearch};

use crate::error::{QaoaError, Result};
use crate::graph::{brute_force_maxcut, generate_erdos_renyi, Graph, MAX_QUBITS};
use crate::optimizer::{optimize, LayerMask, OptTrace, OptimizerConfig};
use crate::rng;
use crate::simulator::{approximation_ratio, expectation_value, Convention, EnergyTable, QaoaParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    /// Donor parameters evaluated without further optimisation.
    FullTransfer,
    /// Donor parameters as the starting point, a subset of layers free.
    KLayer,
    /// Donor parameters as the starting point, every layer free.
    AllLayer,
    /// Random starting point, every layer free.
    SelfOpt,
}

impl SchemeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::FullTransfer => "full_transfer",
            SchemeKind::KLayer => "k_layer",
            SchemeKind::AllLayer => "all_layer",
            SchemeKind::SelfOpt => "self_opt",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSpec {
    pub kind: SchemeKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub free_layers: Vec<usize>,
}

impl SchemeSpec {
    pub fn full_transfer() -> Self {
        SchemeSpec { kind: SchemeKind::FullTransfer, free_layers: vec![] }
    }

    pub fn all_layer() -> Self {
        SchemeSpec { kind: SchemeKind::AllLayer, free_layers: vec![] }
    }

    pub fn self_opt() -> Self {
        SchemeSpec { kind: SchemeKind::SelfOpt, free_layers: vec![] }
    }

    pub fn k_layer(layers: impl IntoIterator<Item = usize>) -> Self {
        SchemeSpec { kind: SchemeKind::KLayer, free_layers: layers.into_iter().collect() }
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if self.kind == SchemeKind::KLayer {
            // A k_layer mask covering every layer is accepted and behaves as all_layer.
            LayerMask::new(self.free_layers.iter().copied(), p)
                .map_err(|e| QaoaError::InvalidScheme(format!("k_layer: {e}")))?;
        }
        Ok(())
    }

    /// Optimisation mask, `None` for full transfer.
    pub fn mask(&self, p: usize) -> Result<Option<LayerMask>> {
        self.validate(p)?;
        Ok(match self.kind {
            SchemeKind::FullTransfer => None,
            SchemeKind::KLayer => Some(LayerMask::new(self.free_layers.iter().copied(), p)?),
            SchemeKind::AllLayer | SchemeKind::SelfOpt => Some(LayerMask::all(p)),
        })
    }

    /// Free layers as recorded: sorted, deduplicated, empty for full transfer.
    pub fn recorded_layers(&self, p: usize) -> Result<Vec<usize>> {
        Ok(self.mask(p)?.map(|m| m.layers().collect()).unwrap_or_default())
    }
}

/// `"1;2;3"`.
pub fn format_layers(layers: &[usize]) -> String {
    layers.iter().map(usize::to_string).collect::<Vec<_>>().join(";")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DonorSpec {
    #[serde(default = "default_donor_nodes")]
    pub n_nodes: usize,
    pub seed: u64,
    pub init_seed: u64,
}

fn default_donor_nodes() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcceptorSpec {
    pub node_counts: Vec<usize>,
    pub seeds: Vec<u64>,
    pub edge_prob: f64,
    pub weighted: bool,
}

impl Default for AcceptorSpec {
    fn default() -> Self {
        AcceptorSpec { node_counts: vec![12], seeds: (0..20).collect(), edge_prob: 0.6, weighted: false }
    }
}

/// A complete batch description. Every field has a default; the defaults
/// describe two 8-node donors at depth 5 transferred to twenty 12-node
/// acceptors, with every single-layer scheme plus full and all-layer runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub p: usize,
    pub donors: Vec<DonorSpec>,
    pub acceptor: AcceptorSpec,
    pub schemes: Vec<SchemeSpec>,
    pub optimizer: OptimizerConfig,
    pub convention: Convention,
    /// Largest acceptor or donor size accepted.
    pub max_qubits: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let mut schemes = vec![SchemeSpec::full_transfer()];
        schemes.extend((1..=5).map(|l| SchemeSpec::k_layer([l])));
        schemes.push(SchemeSpec::all_layer());
        ExperimentConfig {
            p: 5,
            // Init seeds are the best of 0..10 for each donor graph.
            donors: vec![
                DonorSpec { n_nodes: 8, seed: 1001, init_seed: 5 },
                DonorSpec { n_nodes: 8, seed: 1002, init_seed: 5 },
            ],
            acceptor: AcceptorSpec::default(),
            schemes,
            optimizer: OptimizerConfig::default(),
            convention: Convention::MaxCut,
            max_qubits: MAX_QUBITS,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(QaoaError::InvalidConfig(msg));
        if self.p == 0 {
            return bad("p must be at least 1".into());
        }
        if self.max_qubits == 0 || self.max_qubits > MAX_QUBITS {
            return bad(format!("max_qubits must be in 1..={MAX_QUBITS}"));
        }
        if self.donors.is_empty() {
            return bad("at least one donor is required".into());
        }
        let mut seen = std::collections::HashSet::new();
        for d in &self.donors {
            if d.n_nodes < 2 || d.n_nodes > self.max_qubits {
                return bad(format!("donor n_nodes {} outside 2..={}", d.n_nodes, self.max_qubits));
            }
            if !seen.insert(d.seed) {
                return bad(format!("duplicate donor seed {}", d.seed));
            }
        }
        let a = &self.acceptor;
        if a.node_counts.is_empty() || a.seeds.is_empty() {
            return bad("acceptor node_counts and seeds must be non-empty".into());
        }
        if let Some(n) = a.node_counts.iter().find(|&&n| n < 2 || n > self.max_qubits) {
            return bad(format!("acceptor node count {n} outside 2..={}", self.max_qubits));
        }
        if !(a.edge_prob > 0.0 && a.edge_prob <= 1.0) {
            return bad(format!("acceptor edge_prob {} outside (0, 1]", a.edge_prob));
        }
        if self.schemes.is_empty() {
            return bad("at least one scheme is required".into());
        }
        let mut keys = std::collections::HashSet::new();
        for s in &self.schemes {
            s.validate(self.p)?;
            if !keys.insert((s.kind, s.recorded_layers(self.p)?)) {
                return bad(format!("duplicate scheme {} {:?}", s.kind, s.free_layers));
            }
        }
        self.optimizer.validate()
    }
}

/// A graph together with its cost table and ground energy.
#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: Graph,
    pub table: EnergyTable,
    pub e_min: f64,
}

impl Instance {
    pub fn new(graph: Graph, convention: Convention) -> Result<Self> {
        let table = EnergyTable::build(&graph, convention)?;
        let e_min = match convention {
            Convention::MaxCut => brute_force_maxcut(&graph)?.e_min,
            Convention::PaperLiteral => table.min_energy(),
        };
        Ok(Instance { graph, table, e_min })
    }

    pub fn ratio(&self, params: &QaoaParams) -> Result<f64> {
        approximation_ratio(expectation_value(&self.table, params)?, self.e_min)
    }
}

/// Draws `gamma_i ~ U(-pi, pi)` then `beta_i ~ U(-pi/2, pi/2)` from the
/// parameter stream of `seed`.
pub fn random_params(p: usize, seed: u64) -> QaoaParams {
    let mut rng = rng::stream(seed, rng::PARAM_STREAM);
    let gammas = (0..p).map(|_| rng.gen_range(-PI..PI)).collect();
    let betas = (0..p).map(|_| rng.gen_range(-FRAC_PI_2..FRAC_PI_2)).collect();
    QaoaParams::new(gammas, betas).expect("p >= 1 and finite draws")
}

/// Initialisation seed for a self-optimisation run on acceptor `(n, seed)`.
pub fn self_opt_seed(acceptor_n: usize, acceptor_seed: u64) -> u64 {
    acceptor_seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ acceptor_n as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DonorOutcome {
    pub params: QaoaParams,
    pub e_min: f64,
    pub r_initial: f64,
    pub r_final: f64,
    pub trace: OptTrace,
}

/// Self-optimises every layer of `donor` from `random_params(p, init_seed)`.
/// A run that hits `max_iterations` is still returned, with
/// `trace.converged == false`.
pub fn train_donor(
    donor: &Instance,
    p: usize,
    init_seed: u64,
    cfg: &OptimizerConfig,
) -> Result<DonorOutcome> {
    if !donor.graph.is_connected() {
        return Err(QaoaError::graph("donor", "graph is not connected"));
    }
    let init = random_params(p, init_seed);
    let (params, trace) = optimize(&donor.table, &init, &LayerMask::all(p), cfg)?;
    if !trace.converged {
        log::warn!("donor did not converge within {} iterations", cfg.max_iterations);
    }
    Ok(DonorOutcome {
        r_initial: approximation_ratio(trace.initial_cost(), donor.e_min)?,
        r_final: approximation_ratio(trace.final_cost(), donor.e_min)?,
        e_min: donor.e_min,
        params,
        trace,
    })
}

/// One (donor, acceptor, scheme) outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub donor_seed: u64,
    pub acceptor_n: usize,
    pub acceptor_seed: u64,
    pub scheme: SchemeKind,
    pub free_layers: Vec<usize>,
    pub e_min: f64,
    /// Ratio at the transferred parameters.
    pub r_initial: f64,
    pub r_final: f64,
    pub tau: usize,
    pub delta_r: f64,
    pub converged: bool,
    pub wall_time_seconds: f64,
    pub final_params: QaoaParams,
    pub costs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RecordKey {
    pub donor_seed: u64,
    pub acceptor_n: usize,
    pub acceptor_seed: u64,
    pub scheme: SchemeKind,
    pub free_layers: Vec<usize>,
}

impl RunRecord {
    pub fn key(&self) -> RecordKey {
        RecordKey {
            donor_seed: self.donor_seed,
            acceptor_n: self.acceptor_n,
            acceptor_seed: self.acceptor_seed,
            scheme: self.scheme,
            free_layers: self.free_layers.clone(),
        }
    }
}

/// Identifies the run for record bookkeeping.
#[derive(Debug, Clone, Copy)]
pub struct RunLabels {
    pub donor_seed: u64,
    pub acceptor_seed: u64,
}

/// Evaluates `scheme` on `acceptor` starting from the donor's parameters.
pub fn run_scheme(
    acceptor: &Instance,
    donor_params: &QaoaParams,
    scheme: &SchemeSpec,
    cfg: &OptimizerConfig,
    labels: RunLabels,
) -> Result<RunRecord> {
    let p = donor_params.p();
    let mask = scheme.mask(p)?;
    let start = Instant::now();
    let n = acceptor.graph.n_nodes();
    let transfer_cost = expectation_value(&acceptor.table, donor_params)?;
    let r_initial = approximation_ratio(transfer_cost, acceptor.e_min)?;

    let (final_params, trace) = match (&scheme.kind, mask) {
        (SchemeKind::FullTransfer, _) | (_, None) => (
            donor_params.clone(),
            OptTrace { costs: vec![transfer_cost], tau: 0, converged: true },
        ),
        (SchemeKind::SelfOpt, Some(mask)) => {
            let init = random_params(p, self_opt_seed(n, labels.acceptor_seed));
            optimize(&acceptor.table, &init, &mask, cfg)?
        }
        (_, Some(mask)) => optimize(&acceptor.table, donor_params, &mask, cfg)?,
    };
    let r_final = approximation_ratio(trace.final_cost(), acceptor.e_min)?;

    Ok(RunRecord {
        donor_seed: labels.donor_seed,
        acceptor_n: n,
        acceptor_seed: labels.acceptor_seed,
        scheme: scheme.kind,
        free_layers: scheme.recorded_layers(p)?,
        e_min: acceptor.e_min,
        r_initial,
        r_final,
        tau: trace.tau,
        delta_r: r_final - r_initial,
        converged: trace.converged,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        final_params,
        costs: trace.costs,
    })
}

/// Generates the graph for a donor or acceptor with the shared edge probability.
pub fn make_instance(
    n: usize,
    edge_prob: f64,
    seed: u64,
    weighted: bool,
    convention: Convention,
) -> Result<Instance> {
    Instance::new(generate_erdos_renyi(n, edge_prob, seed, weighted)?, convention)
}
