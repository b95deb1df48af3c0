//! Layer-maskable Adagrad with a plateau stopping rule.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::diff::{value_and_gradient, GradientVector};
use crate::error::{QaoaError, Result};
use crate::simulator::{EnergyTable, QaoaParams};

/// 1-based indices of the layers whose `(gamma, beta)` may change.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LayerMask(BTreeSet<usize>);

impl LayerMask {
    pub fn new(layers: impl IntoIterator<Item = usize>, p: usize) -> Result<Self> {
        let set: BTreeSet<usize> = layers.into_iter().collect();
        if set.is_empty() {
            return Err(QaoaError::InvalidArgument("layer mask is empty".into()));
        }
        if let Some(&bad) = set.iter().find(|&&l| l == 0 || l > p) {
            return Err(QaoaError::InvalidArgument(format!("layer {bad} outside 1..={p}")));
        }
        Ok(LayerMask(set))
    }

    pub fn all(p: usize) -> Self {
        LayerMask((1..=p).collect())
    }

    pub fn contains(&self, layer: usize) -> bool {
        self.0.contains(&layer)
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn layers(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn max_layer(&self) -> usize {
        self.0.last().copied().unwrap_or(0)
    }

    pub fn is_full(&self, p: usize) -> bool {
        self.k() == p && self.max_layer() == p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub epsilon: f64,
    /// Absolute change in raw cost below which an iteration counts as flat.
    pub convergence_threshold: f64,
    /// Number of consecutive flat iterations that stops the run.
    pub convergence_window: usize,
    pub max_iterations: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            learning_rate: 0.1,
            epsilon: 1e-8,
            convergence_threshold: 1e-4,
            convergence_window: 3,
            max_iterations: 1000,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(QaoaError::InvalidConfig(format!("optimizer.{name} must be positive, got {x}")))
            }
        };
        positive("learning_rate", self.learning_rate)?;
        positive("epsilon", self.epsilon)?;
        positive("convergence_threshold", self.convergence_threshold)?;
        if self.convergence_window == 0 {
            return Err(QaoaError::InvalidConfig("optimizer.convergence_window must be >= 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(QaoaError::InvalidConfig("optimizer.max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptTrace {
    /// `costs[0]` is the cost at the initial parameters, then one per update.
    pub costs: Vec<f64>,
    pub tau: usize,
    pub converged: bool,
}

impl OptTrace {
    pub fn initial_cost(&self) -> f64 {
        self.costs[0]
    }

    pub fn final_cost(&self) -> f64 {
        *self.costs.last().expect("trace always holds the initial cost")
    }

    pub fn min_cost(&self) -> f64 {
        self.costs.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Per-parameter sums of squared gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct Accumulator {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl Accumulator {
    pub fn zeros(p: usize) -> Self {
        Accumulator { gammas: vec![0.0; p], betas: vec![0.0; p] }
    }
}

/// One Adagrad update of the free layers; frozen layers are left untouched,
/// accumulators included.
pub fn adagrad_step(
    params: &mut QaoaParams,
    grad: &GradientVector,
    acc: &mut Accumulator,
    mask: &LayerMask,
    cfg: &OptimizerConfig,
) {
    let update = |theta: &mut f64, g: f64, a: &mut f64| {
        *a += g * g;
        *theta -= cfg.learning_rate * g / (a.sqrt() + cfg.epsilon);
    };
    for layer in mask.layers() {
        let i = layer - 1;
        update(&mut params.gammas_mut()[i], grad.d_gammas[i], &mut acc.gammas[i]);
        update(&mut params.betas_mut()[i], grad.d_betas[i], &mut acc.betas[i]);
    }
}

/// True once the last `convergence_window` successive cost changes are all
/// below `convergence_threshold` in absolute value.
pub fn check_convergence(costs: &[f64], cfg: &OptimizerConfig) -> bool {
    let w = cfg.convergence_window;
    if costs.len() < w + 1 {
        return false;
    }
    costs[costs.len() - w - 1..]
        .windows(2)
        .all(|pair| (pair[1] - pair[0]).abs() < cfg.convergence_threshold)
}

/// Runs masked Adagrad from `init` until the plateau rule fires or
/// `max_iterations` updates have been made.
pub fn optimize(
    table: &EnergyTable,
    init: &QaoaParams,
    mask: &LayerMask,
    cfg: &OptimizerConfig,
) -> Result<(QaoaParams, OptTrace)> {
    cfg.validate()?;
    if mask.max_layer() > init.p() {
        return Err(QaoaError::InvalidArgument(format!(
            "mask references layer {} but p = {}",
            mask.max_layer(),
            init.p()
        )));
    }

    let mut params = init.clone();
    let mut acc = Accumulator::zeros(init.p());
    let (mut cost, mut grad) = value_and_gradient(table, &params)?;
    check_finite(cost, &grad, 0)?;
    let mut costs = vec![cost];
    let mut converged = false;

    for iteration in 1..=cfg.max_iterations {
        adagrad_step(&mut params, &grad, &mut acc, mask, cfg);
        (cost, grad) = value_and_gradient(table, &params)?;
        check_finite(cost, &grad, iteration)?;
        costs.push(cost);
        if check_convergence(&costs, cfg) {
            converged = true;
            break;
        }
    }

    let tau = costs.len() - 1;
    Ok((params, OptTrace { costs, tau, converged }))
}

fn check_finite(cost: f64, grad: &GradientVector, iteration: usize) -> Result<()> {
    if !cost.is_finite() {
        return Err(QaoaError::NonFinite { what: "cost", iteration });
    }
    if !grad.is_finite() {
        return Err(QaoaError::NonFinite { what: "gradient", iteration });
    }
    Ok(())
}
