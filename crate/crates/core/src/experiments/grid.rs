use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{QaoaError, Result};
use crate::simulator::{EnergyTable, QaoaParams, Statevector};

/// `<H_c>` over the `(gamma_i, beta_i)` plane of one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearch {
    pub layer: usize,
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    /// `surface[a][b]` is the expectation at `(gammas[a], betas[b])`.
    pub surface: Vec<Vec<f64>>,
    pub argmin: (f64, f64),
    pub min_value: f64,
}

/// Scans `gamma` over `[-pi, pi)` and `beta` over `[-pi/2, pi/2)` on a
/// `resolution x resolution` grid, every other layer held at `params`.
/// Ties resolve to the first grid point in row-major order.
pub fn grid_search_layer(
    table: &EnergyTable,
    params: &QaoaParams,
    layer: usize,
    resolution: usize,
) -> Result<GridSearch> {
    let p = params.p();
    if layer == 0 || layer > p {
        return Err(QaoaError::InvalidArgument(format!("layer {layer} outside 1..={p}")));
    }
    if resolution == 0 {
        return Err(QaoaError::InvalidArgument("resolution must be positive".into()));
    }
    let axis = |lo: f64, span: f64| -> Vec<f64> {
        (0..resolution).map(|i| lo + span * i as f64 / resolution as f64).collect()
    };
    let gammas = axis(-PI, 2.0 * PI);
    let betas = axis(-FRAC_PI_2, PI);

    // Layers before `layer` do not depend on the scanned pair.
    let mut prefix = Statevector::plus_state(table.n_qubits())?;
    for l in 1..layer {
        let (g, b) = params.layer(l);
        prefix.apply_cost_layer(table, g)?;
        prefix.apply_mixer_layer(b);
    }

    let mut surface = Vec::with_capacity(resolution);
    let mut best = (f64::INFINITY, (gammas[0], betas[0]));
    for &gamma in &gammas {
        let mut after_cost = prefix.clone();
        after_cost.apply_cost_layer(table, gamma)?;
        let mut row = Vec::with_capacity(resolution);
        for &beta in &betas {
            let mut state = after_cost.clone();
            state.apply_mixer_layer(beta);
            for l in (layer + 1)..=p {
                let (g, b) = params.layer(l);
                state.apply_cost_layer(table, g)?;
                state.apply_mixer_layer(b);
            }
            let value = state.expectation(table)?;
            if value < best.0 {
                best = (value, (gamma, beta));
            }
            row.push(value);
        }
        surface.push(row);
    }

    Ok(GridSearch { layer, gammas, betas, surface, argmin: best.1, min_value: best.0 })
}
