//! Statevector simulation of QAOA for Max-Cut, with donor-to-acceptor
//! parameter transfer and layer-selective fine-tuning.
//!
//! Module map:
//!
//! - [`graph`]: instances, seeded Erdős–Rényi generation, exact Max-Cut.
//! - [`simulator`]: energy tables, the ansatz, expectations.
//! - [`diff`]: adjoint gradients and the finite-difference check.
//! - [`optimizer`]: masked Adagrad and the plateau stopping rule.
//! - [`experiments`]: donor training, transfer schemes, grid search, batches.
//! - [`reporting`]: summaries, CSV tables, SVG figures.
//!
//! Node `i` maps to bit `i` of a basis index throughout. The cost
//! Hamiltonian is `H_c = Σ J_ij Z_i Z_j` unless [`Convention::PaperLiteral`]
//! is selected, so its ground energy is `total_weight - 2 * max_cut`.

pub mod diff;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod optimizer;
pub mod reporting;
pub mod rng;
pub mod simulator;

pub use diff::{analytic_gradient, finite_diff_gradient, value_and_gradient, GradientVector};
pub use error::{QaoaError, Result};
pub use experiments::{
    grid_search_layer, random_params, run_batch, run_scheme, train_donor, BatchOptions, ExperimentConfig,
    GridSearch, Instance, RunRecord, SchemeKind, SchemeSpec,
};
pub use graph::{brute_force_maxcut, generate_erdos_renyi, is_connected, CutResult, Graph, MAX_QUBITS};
pub use optimizer::{check_convergence, optimize, LayerMask, OptTrace, OptimizerConfig};
pub use reporting::{aggregate, SchemeSummary};
pub use simulator::{
    approximation_ratio, expectation_value, run_ansatz, Convention, EnergyTable, QaoaParams, Statevector,
};
