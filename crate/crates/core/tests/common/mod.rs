//! Dense-matrix reference for small circuits. Everything here is built from
//! explicit operator matrices and a generic matrix exponential, sharing no
//! code with the statevector kernels.

#![allow(dead_code)]

use num_complex::Complex64 as C;
use qaoa_lab::Graph;

pub type Matrix = Vec<Vec<C>>;

pub fn zeros(d: usize) -> Matrix {
    vec![vec![C::new(0.0, 0.0); d]; d]
}

pub fn identity(d: usize) -> Matrix {
    let mut m = zeros(d);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = C::new(1.0, 0.0);
    }
    m
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let d = a.len();
    let mut out = zeros(d);
    for i in 0..d {
        for k in 0..d {
            let aik = a[i][k];
            if aik == C::new(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn matvec(a: &Matrix, v: &[C]) -> Vec<C> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

fn add_scaled(acc: &mut Matrix, m: &Matrix, s: C) {
    for (ra, rm) in acc.iter_mut().zip(m) {
        for (x, y) in ra.iter_mut().zip(rm) {
            *x += s * y;
        }
    }
}

/// Single-qubit operator `op` acting on qubit `q` of an `n`-qubit register,
/// qubit `q` being bit `q` of the basis index.
pub fn embed(op: [[C; 2]; 2], q: usize, n: usize) -> Matrix {
    let d = 1usize << n;
    let mut m = zeros(d);
    for (r, row) in m.iter_mut().enumerate() {
        for (c, x) in row.iter_mut().enumerate() {
            if (r ^ c) & !(1 << q) == 0 {
                *x = op[(r >> q) & 1][(c >> q) & 1];
            }
        }
    }
    m
}

pub fn pauli_x() -> [[C; 2]; 2] {
    let (o, l) = (C::new(0.0, 0.0), C::new(1.0, 0.0));
    [[o, l], [l, o]]
}

pub fn pauli_z() -> [[C; 2]; 2] {
    let (o, l) = (C::new(0.0, 0.0), C::new(1.0, 0.0));
    [[l, o], [o, -l]]
}

/// `sign * Σ w_uv Z_u Z_v` as a dense matrix.
pub fn cost_hamiltonian(g: &Graph, sign: f64) -> Matrix {
    let n = g.n_nodes();
    let mut h = zeros(1 << n);
    for e in g.edges() {
        let zz = matmul(&embed(pauli_z(), e.u, n), &embed(pauli_z(), e.v, n));
        add_scaled(&mut h, &zz, C::new(sign * e.weight, 0.0));
    }
    h
}

pub fn mixer_hamiltonian(n: usize) -> Matrix {
    let mut b = zeros(1 << n);
    for q in 0..n {
        add_scaled(&mut b, &embed(pauli_x(), q, n), C::new(1.0, 0.0));
    }
    b
}

/// `exp(a)` by scaling and squaring with a degree-30 Taylor series.
pub fn expm(a: &Matrix) -> Matrix {
    let d = a.len();
    let norm = a.iter().map(|r| r.iter().map(|x| x.norm()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scale = C::new(0.5f64.powi(squarings as i32), 0.0);
    let scaled: Matrix = a.iter().map(|r| r.iter().map(|x| x * scale).collect()).collect();
    let mut sum = identity(d);
    let mut term = identity(d);
    for k in 1..=30 {
        term = matmul(&term, &scaled);
        let inv = C::new(1.0 / k as f64, 0.0);
        term.iter_mut().flatten().for_each(|x| *x *= inv);
        add_scaled(&mut sum, &term, C::new(1.0, 0.0));
    }
    for _ in 0..squarings {
        sum = matmul(&sum, &sum);
    }
    sum
}

/// `prod_l exp(-i beta_l B) exp(-i gamma_l H) |+>^n` with dense operators.
pub fn dense_ansatz(g: &Graph, sign: f64, gammas: &[f64], betas: &[f64]) -> Vec<C> {
    let n = g.n_nodes();
    let d = 1usize << n;
    let h = cost_hamiltonian(g, sign);
    let b = mixer_hamiltonian(n);
    let mut state = vec![C::new(1.0 / (d as f64).sqrt(), 0.0); d];
    for (&gamma, &beta) in gammas.iter().zip(betas) {
        let uc: Matrix = h.iter().map(|r| r.iter().map(|x| x * C::new(0.0, -gamma)).collect()).collect();
        let um: Matrix = b.iter().map(|r| r.iter().map(|x| x * C::new(0.0, -beta)).collect()).collect();
        state = matvec(&expm(&uc), &state);
        state = matvec(&expm(&um), &state);
    }
    state
}

pub fn dense_expectation(h: &Matrix, state: &[C]) -> f64 {
    let hv = matvec(h, state);
    state.iter().zip(&hv).map(|(a, b)| (a.conj() * b).re).sum()
}

/// Every connected labelled simple graph on `n` nodes, unit weights.
pub fn connected_graphs(n: usize) -> Vec<Graph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v))).collect();
    (1u32..(1 << pairs.len()))
        .filter_map(|mask| {
            let edges: Vec<(usize, usize)> =
                pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
            Graph::unweighted(n, &edges).ok().filter(Graph::is_connected)
        })
        .collect()
}
