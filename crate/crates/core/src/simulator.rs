//! Exact statevector simulation of the QAOA ansatz.
//!
//! The cost operator is diagonal in the computational basis, so it is stored
//! as an [`EnergyTable`] of per-bitstring energies and applied as a phase
//! multiply. The transverse-field mixer is never materialised; it is applied
//! as one `exp(-i beta X)` rotation sweep per qubit.
//!
//! Basis index `z` encodes node `i` in bit `i` (little-endian). Bit value 0
//! is spin `s = +1`, bit value 1 is spin `s = -1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QaoaError, Result};
use crate::graph::{Graph, MAX_QUBITS};

/// Sign of the cost Hamiltonian.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Convention {
    /// `H_c = +Σ J_ij Z_i Z_j`; the ground state is the maximum cut.
    #[default]
    #[serde(rename = "maxcut")]
    MaxCut,
    /// `H_c = -Σ J_ij Z_i Z_j`, taken literally; the ground state is the
    /// uncut configuration with energy `-total_weight`.
    #[serde(rename = "paper-literal")]
    PaperLiteral,
}

impl Convention {
    pub fn sign(self) -> f64 {
        match self {
            Convention::MaxCut => 1.0,
            Convention::PaperLiteral => -1.0,
        }
    }
}

/// Diagonal of the cost Hamiltonian, one energy per basis state.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTable {
    n_qubits: usize,
    energies: Vec<f64>,
    /// Set when every energy is an integer in `min_level..=max_level`, which
    /// lets the cost layer look phases up instead of evaluating `cis` per entry.
    levels: Option<(i64, i64)>,
}

impl EnergyTable {
    pub fn build(g: &Graph, convention: Convention) -> Result<Self> {
        let n = g.n_nodes();
        if n > MAX_QUBITS {
            return Err(QaoaError::SizeLimit { what: "energy table", n, max: MAX_QUBITS });
        }
        let sign = convention.sign();
        let mut energies = vec![0.0; 1 << n];
        for e in g.edges() {
            let w = sign * e.weight;
            for (z, energy) in energies.iter_mut().enumerate() {
                if ((z >> e.u) ^ (z >> e.v)) & 1 == 0 {
                    *energy += w;
                } else {
                    *energy -= w;
                }
            }
        }
        Ok(Self::from_energies(energies).expect("table length is a power of two"))
    }

    /// Table for an arbitrary diagonal operator.
    pub fn from_energies(energies: Vec<f64>) -> Result<Self> {
        let n_qubits = qubits_for_len(energies.len())?;
        let levels = integral_levels(&energies);
        Ok(EnergyTable { n_qubits, energies, levels })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn min_energy(&self) -> f64 {
        self.energies.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.energies.len() {
            return Err(QaoaError::DimensionMismatch { expected: self.energies.len(), found: len });
        }
        Ok(())
    }
}

fn integral_levels(energies: &[f64]) -> Option<(i64, i64)> {
    const MAX_LEVELS: i64 = 1 << 16;
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for &e in energies {
        if e.fract() != 0.0 || e.abs() > MAX_LEVELS as f64 {
            return None;
        }
        lo = lo.min(e as i64);
        hi = hi.max(e as i64);
    }
    (hi - lo <= MAX_LEVELS).then_some((lo, hi))
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if !len.is_power_of_two() {
        return Err(QaoaError::InvalidArgument(format!("length {len} is not a power of two")));
    }
    let n = len.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(QaoaError::SizeLimit { what: "state", n, max: MAX_QUBITS });
    }
    Ok(n)
}

/// Durations `(gamma_1..gamma_p, beta_1..beta_p)` of a depth-`p` ansatz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsFile", into = "ParamsFile")]
pub struct QaoaParams {
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    p: usize,
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

impl TryFrom<ParamsFile> for QaoaParams {
    type Error = QaoaError;

    fn try_from(f: ParamsFile) -> Result<Self> {
        let params = QaoaParams::new(f.gammas, f.betas)?;
        if params.p() != f.p {
            return Err(QaoaError::InvalidParams(format!(
                "p = {} but {} layers supplied",
                f.p,
                params.p()
            )));
        }
        Ok(params)
    }
}

impl From<QaoaParams> for ParamsFile {
    fn from(q: QaoaParams) -> Self {
        ParamsFile { p: q.p(), gammas: q.gammas, betas: q.betas }
    }
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() {
            return Err(QaoaError::InvalidParams("p must be at least 1".into()));
        }
        if gammas.len() != betas.len() {
            return Err(QaoaError::InvalidParams(format!(
                "{} gammas but {} betas",
                gammas.len(),
                betas.len()
            )));
        }
        if let Some(bad) = gammas.iter().chain(&betas).find(|x| !x.is_finite()) {
            return Err(QaoaError::InvalidParams(format!("non-finite value {bad}")));
        }
        Ok(QaoaParams { gammas, betas })
    }

    pub fn zeros(p: usize) -> Self {
        assert!(p >= 1, "p must be at least 1");
        QaoaParams { gammas: vec![0.0; p], betas: vec![0.0; p] }
    }

    pub fn p(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn gammas_mut(&mut self) -> &mut [f64] {
        &mut self.gammas
    }

    pub fn betas_mut(&mut self) -> &mut [f64] {
        &mut self.betas
    }

    /// `(gamma, beta)` of 1-based layer `layer`.
    pub fn layer(&self, layer: usize) -> (f64, f64) {
        (self.gammas[layer - 1], self.betas[layer - 1])
    }

    pub fn set_layer(&mut self, layer: usize, gamma: f64, beta: f64) {
        self.gammas[layer - 1] = gamma;
        self.betas[layer - 1] = beta;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// `|+>^n`.
    pub fn plus_state(n: usize) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(QaoaError::SizeLimit { what: "state", n, max: MAX_QUBITS });
        }
        let dim = 1usize << n;
        let amp = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(Statevector { n_qubits: n, amplitudes: vec![amp; dim] })
    }

    pub fn basis_state(n: usize, z: usize) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(QaoaError::SizeLimit { what: "state", n, max: MAX_QUBITS });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        let slot = amplitudes
            .get_mut(z)
            .ok_or_else(|| QaoaError::InvalidArgument(format!("basis index {z} out of range")))?;
        *slot = Complex64::new(1.0, 0.0);
        Ok(Statevector { n_qubits: n, amplitudes })
    }

    /// Wraps raw amplitudes; the caller is responsible for normalisation.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n_qubits = qubits_for_len(amplitudes.len())?;
        Ok(Statevector { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `a_z <- a_z * exp(-i gamma E(z))`.
    pub fn apply_cost_layer(&mut self, table: &EnergyTable, gamma: f64) -> Result<()> {
        table.check_dim(self.amplitudes.len())?;
        match table.levels {
            Some((lo, hi)) => {
                let phases: Vec<Complex64> =
                    (lo..=hi).map(|level| Complex64::cis(-gamma * level as f64)).collect();
                for (a, &e) in self.amplitudes.iter_mut().zip(&table.energies) {
                    *a *= phases[(e as i64 - lo) as usize];
                }
            }
            None => {
                for (a, &e) in self.amplitudes.iter_mut().zip(&table.energies) {
                    *a *= Complex64::cis(-gamma * e);
                }
            }
        }
        Ok(())
    }

    /// `exp(-i beta Σ_q X_q)`, as the rotation `[[cos, -i sin], [-i sin, cos]]`
    /// applied to every qubit in turn.
    pub fn apply_mixer_layer(&mut self, beta: f64) {
        let (s, c) = beta.sin_cos();
        for q in 0..self.n_qubits {
            let half = 1usize << q;
            for block in self.amplitudes.chunks_exact_mut(2 * half) {
                let (lo, hi) = block.split_at_mut(half);
                for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (x, y) = (*a, *b);
                    // -i s * v == (s v.im, -s v.re)
                    *a = Complex64::new(c * x.re + s * y.im, c * x.im - s * y.re);
                    *b = Complex64::new(c * y.re + s * x.im, c * y.im - s * x.re);
                }
            }
        }
    }

    /// `<psi| H_c |psi>`.
    pub fn expectation(&self, table: &EnergyTable) -> Result<f64> {
        table.check_dim(self.amplitudes.len())?;
        Ok(self.amplitudes.iter().zip(&table.energies).map(|(a, &e)| a.norm_sqr() * e).sum())
    }
}

/// Prepares `|+>^n` and applies cost then mixer for layers `1..=p`.
pub fn run_ansatz(table: &EnergyTable, params: &QaoaParams) -> Result<Statevector> {
    let mut state = Statevector::plus_state(table.n_qubits())?;
    for (&gamma, &beta) in params.gammas().iter().zip(params.betas()) {
        state.apply_cost_layer(table, gamma)?;
        state.apply_mixer_layer(beta);
    }
    Ok(state)
}

/// `<H_c>` at `params`.
pub fn expectation_value(table: &EnergyTable, params: &QaoaParams) -> Result<f64> {
    run_ansatz(table, params)?.expectation(table)
}

/// `energy / e_min`. Requires `e_min < 0`.
pub fn approximation_ratio(energy: f64, e_min: f64) -> Result<f64> {
    // NaN fails too.
    if e_min.partial_cmp(&0.0) != Some(std::cmp::Ordering::Less) {
        return Err(QaoaError::InvalidArgument(format!(
            "approximation ratio needs a negative ground energy, got {e_min}"
        )));
    }
    Ok(energy / e_min)
}
