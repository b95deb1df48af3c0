//! Gradients of `<H_c>` with respect to every `gamma_i` and `beta_i`.
//!
//! [`value_and_gradient`] runs the ansatz forward once, seeds a co-state
//! `lambda = H_c |psi>`, then walks the layers backwards undoing each unitary
//! on both vectors. For a gate `exp(-i theta G)` the derivative is
//! `2 Im <lambda | G | phi>` evaluated right after the gate.
//! [`finite_diff_gradient`] is the independent check.

use serde::{Deserialize, Serialize};

use crate::error::{QaoaError, Result};
use crate::simulator::{expectation_value, run_ansatz, EnergyTable, QaoaParams, Statevector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientVector {
    pub d_gammas: Vec<f64>,
    pub d_betas: Vec<f64>,
}

impl GradientVector {
    pub fn p(&self) -> usize {
        self.d_gammas.len()
    }

    pub fn is_finite(&self) -> bool {
        self.d_gammas.iter().chain(&self.d_betas).all(|g| g.is_finite())
    }

    /// Largest absolute component-wise difference.
    pub fn max_abs_diff(&self, other: &GradientVector) -> f64 {
        self.d_gammas
            .iter()
            .zip(&other.d_gammas)
            .chain(self.d_betas.iter().zip(&other.d_betas))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn analytic_gradient(table: &EnergyTable, params: &QaoaParams) -> Result<GradientVector> {
    value_and_gradient(table, params).map(|(_, g)| g)
}

/// `(<H_c>, grad <H_c>)` from one forward and one backward sweep.
pub fn value_and_gradient(
    table: &EnergyTable,
    params: &QaoaParams,
) -> Result<(f64, GradientVector)> {
    let p = params.p();
    let mut phi = run_ansatz(table, params)?;
    let energies = table.energies();
    let mut lambda = Statevector::from_amplitudes(
        phi.amplitudes().iter().zip(energies).map(|(a, &e)| a * e).collect(),
    )?;
    // Same summation as `expectation_value`, so transferred costs match it bit for bit.
    let value = phi.expectation(table)?;

    let mut d_gammas = vec![0.0; p];
    let mut d_betas = vec![0.0; p];
    for layer in (0..p).rev() {
        d_betas[layer] = 2.0 * mixer_overlap_im(&lambda, &phi);
        phi.apply_mixer_layer(-params.betas()[layer]);
        lambda.apply_mixer_layer(-params.betas()[layer]);

        d_gammas[layer] = 2.0 * cost_overlap_im(&lambda, &phi, energies);
        if layer > 0 {
            phi.apply_cost_layer(table, -params.gammas()[layer])?;
            lambda.apply_cost_layer(table, -params.gammas()[layer])?;
        }
    }
    Ok((value, GradientVector { d_gammas, d_betas }))
}

/// `Im <lambda | Σ_q X_q | phi>`.
fn mixer_overlap_im(lambda: &Statevector, phi: &Statevector) -> f64 {
    let (l, f) = (lambda.amplitudes(), phi.amplitudes());
    let mut acc = 0.0;
    for q in 0..phi.n_qubits() {
        let bit = 1usize << q;
        acc += l.iter().enumerate().map(|(z, lz)| (lz.conj() * f[z ^ bit]).im).sum::<f64>();
    }
    acc
}

/// `Im <lambda | H_c | phi>`.
fn cost_overlap_im(lambda: &Statevector, phi: &Statevector, energies: &[f64]) -> f64 {
    lambda
        .amplitudes()
        .iter()
        .zip(phi.amplitudes())
        .zip(energies)
        .map(|((l, f), &e)| e * (l.conj() * f).im)
        .sum()
}

/// Central differences with step `h`, `4p` ansatz evaluations.
pub fn finite_diff_gradient(
    table: &EnergyTable,
    params: &QaoaParams,
    h: f64,
) -> Result<GradientVector> {
    if !(1e-7..=1e-3).contains(&h) {
        return Err(QaoaError::InvalidArgument(format!("step {h} outside [1e-7, 1e-3]")));
    }
    let p = params.p();
    let central = |shift: &dyn Fn(&mut QaoaParams, f64)| -> Result<f64> {
        let mut plus = params.clone();
        shift(&mut plus, h);
        let mut minus = params.clone();
        shift(&mut minus, -h);
        Ok((expectation_value(table, &plus)? - expectation_value(table, &minus)?) / (2.0 * h))
    };
    let mut d_gammas = Vec::with_capacity(p);
    let mut d_betas = Vec::with_capacity(p);
    for i in 0..p {
        d_gammas.push(central(&|q: &mut QaoaParams, d| q.gammas_mut()[i] += d)?);
        d_betas.push(central(&|q: &mut QaoaParams, d| q.betas_mut()[i] += d)?);
    }
    Ok(GradientVector { d_gammas, d_betas })
}
