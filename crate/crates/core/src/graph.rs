//! Max-Cut instances: generation, validation, persistence and the exact
//! enumeration oracle.
//!
//! Node `i` corresponds to bit `i` of a basis-state index (little-endian),
//! and the same mapping is used by [`crate::simulator`].

use std::collections::{HashSet, VecDeque};
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QaoaError, Result};
use crate::rng;

/// Largest instance the simulator and the oracle accept.
pub const MAX_QUBITS: usize = 24;

/// Resample budget for [`generate_erdos_renyi`].
pub const MAX_RESAMPLE_ATTEMPTS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// An undirected, positively weighted Max-Cut instance.
///
/// Construction validates every invariant, so a `Graph` value is always
/// well-formed: `u < v < n_nodes`, no repeated pairs, unweighted graphs carry
/// weight exactly 1.0 and weighted graphs carry weights in `(0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct Graph {
    n_nodes: usize,
    weighted: bool,
    edges: Vec<Edge>,
}

/// On-disk layout: `{"n_nodes": int, "weighted": bool, "edges": [[u, v, w], ...]}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    n_nodes: usize,
    weighted: bool,
    edges: Vec<(usize, usize, f64)>,
}

impl TryFrom<GraphFile> for Graph {
    type Error = QaoaError;

    fn try_from(file: GraphFile) -> Result<Self> {
        Graph::new(file.n_nodes, file.edges, file.weighted)
    }
}

impl From<Graph> for GraphFile {
    fn from(g: Graph) -> Self {
        GraphFile {
            n_nodes: g.n_nodes,
            weighted: g.weighted,
            edges: g.edges.iter().map(|e| (e.u, e.v, e.weight)).collect(),
        }
    }
}

impl Graph {
    pub fn new(
        n_nodes: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
        weighted: bool,
    ) -> Result<Self> {
        if n_nodes == 0 {
            return Err(QaoaError::graph("n_nodes", "must be positive"));
        }
        if n_nodes > MAX_QUBITS {
            return Err(QaoaError::graph(
                "n_nodes",
                format!("{n_nodes} exceeds the limit of {MAX_QUBITS}"),
            ));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (idx, (u, v, weight)) in edges.into_iter().enumerate() {
            let field = format!("edges[{idx}]");
            if u == v {
                return Err(QaoaError::graph(field, format!("self-loop on node {u}")));
            }
            if u > v {
                return Err(QaoaError::graph(field, format!("expected u < v, got ({u}, {v})")));
            }
            if v >= n_nodes {
                return Err(QaoaError::graph(
                    field,
                    format!("node {v} out of range for {n_nodes} nodes"),
                ));
            }
            if !seen.insert((u, v)) {
                return Err(QaoaError::graph(field, format!("duplicate edge ({u}, {v})")));
            }
            if weighted {
                if !(weight > 0.0 && weight <= 1.0) {
                    return Err(QaoaError::graph(
                        field,
                        format!("weight {weight} outside (0, 1]"),
                    ));
                }
            } else if weight != 1.0 {
                return Err(QaoaError::graph(
                    field,
                    format!("unweighted graph has weight {weight}, expected 1.0"),
                ));
            }
            out.push(Edge { u, v, weight });
        }
        Ok(Graph { n_nodes, weighted, edges: out })
    }

    /// Unweighted graph from an edge list.
    pub fn unweighted(n_nodes: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Graph::new(n_nodes, edges.iter().map(|&(u, v)| (u, v, 1.0)), false)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn weighted(&self) -> bool {
        self.weighted
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn is_connected(&self) -> bool {
        is_connected(self)
    }

    /// Weight of the edges crossing the partition encoded by `assignment`
    /// (bit `i` = side of node `i`).
    pub fn cut_value(&self, assignment: u64) -> f64 {
        self.edges
            .iter()
            .filter(|e| ((assignment >> e.u) ^ (assignment >> e.v)) & 1 == 1)
            .map(|e| e.weight)
            .sum()
    }

    /// Relabel node `i` as `perm[i]`. Edge order is preserved, endpoints are
    /// re-sorted so that `u < v` still holds.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n_nodes {
            return Err(QaoaError::DimensionMismatch { expected: self.n_nodes, found: perm.len() });
        }
        let mut hit = vec![false; self.n_nodes];
        for &p in perm {
            if p >= self.n_nodes || std::mem::replace(&mut hit[p], true) {
                return Err(QaoaError::InvalidArgument("not a permutation".into()));
            }
        }
        let edges = self.edges.iter().map(|e| {
            let (a, b) = (perm[e.u], perm[e.v]);
            (a.min(b), a.max(b), e.weight)
        });
        Graph::new(self.n_nodes, edges, self.weighted)
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_nodes];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        adj
    }
}

/// BFS from node 0.
pub fn is_connected(g: &Graph) -> bool {
    let adj = g.adjacency();
    let mut visited = vec![false; g.n_nodes];
    let mut queue = VecDeque::from([0]);
    visited[0] = true;
    let mut reached = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !visited[v] {
                visited[v] = true;
                reached += 1;
                queue.push_back(v);
            }
        }
    }
    reached == g.n_nodes
}

/// Seeded G(n, p) sample, conditioned on connectivity by rejection.
///
/// Attempt `k` draws the topology from the ChaCha topology stream of
/// `seed + 2^32 * k`. Weights, when requested, come from the weight stream
/// of the original `seed`, one uniform draw in `(0, 1]` per edge in edge
/// order, so a weighted graph has the same topology as its unweighted twin.
pub fn generate_erdos_renyi(n: usize, edge_prob: f64, seed: u64, weighted: bool) -> Result<Graph> {
    if n < 2 {
        return Err(QaoaError::InvalidArgument(format!("need at least 2 nodes, got {n}")));
    }
    if n > MAX_QUBITS {
        return Err(QaoaError::SizeLimit { what: "graph", n, max: MAX_QUBITS });
    }
    if !(edge_prob > 0.0 && edge_prob <= 1.0) {
        return Err(QaoaError::InvalidArgument(format!("edge_prob {edge_prob} outside (0, 1]")));
    }

    for attempt in 0..MAX_RESAMPLE_ATTEMPTS {
        let sub_seed = seed.wrapping_add(attempt << 32);
        let mut topo = rng::stream(sub_seed, rng::TOPOLOGY_STREAM);
        let mut pairs = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if topo.gen::<f64>() < edge_prob {
                    pairs.push((u, v));
                }
            }
        }
        let candidate = Graph::unweighted(n, &pairs)?;
        if !candidate.is_connected() {
            continue;
        }
        if !weighted {
            return Ok(candidate);
        }
        let mut wrng = rng::stream(seed, rng::WEIGHT_STREAM);
        // gen::<f64>() is in [0, 1), so 1 - x is in (0, 1].
        let edges = pairs.into_iter().map(|(u, v)| (u, v, 1.0 - wrng.gen::<f64>()));
        return Graph::new(n, edges, true);
    }
    Err(QaoaError::Disconnected { n, edge_prob, attempts: MAX_RESAMPLE_ATTEMPTS })
}

/// Exact Max-Cut solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutResult {
    /// Character `i` is the side of node `i`.
    pub best_assignment: String,
    pub max_cut_value: f64,
    /// Ground energy of `H_c = Σ J_ij Z_i Z_j`, equal to `total_weight - 2 * max_cut_value`.
    pub e_min: f64,
    pub total_weight: f64,
}

impl CutResult {
    /// The assignment as a basis-state index (bit `i` = node `i`).
    pub fn assignment_bits(&self) -> u64 {
        self.best_assignment
            .bytes()
            .enumerate()
            .fold(0, |acc, (i, b)| acc | (u64::from(b == b'1') << i))
    }
}

/// Enumerates the `2^(n-1)` partitions with node 0 pinned to side 0.
/// Ties go to the lexicographically smallest assignment string.
pub fn brute_force_maxcut(g: &Graph) -> Result<CutResult> {
    let n = g.n_nodes();
    if n > MAX_QUBITS {
        return Err(QaoaError::SizeLimit { what: "graph", n, max: MAX_QUBITS });
    }
    let edges: Vec<(u32, u32, f64)> =
        g.edges().iter().map(|e| (e.u as u32, e.v as u32, e.weight)).collect();
    // Reversing the low n bits turns string order into integer order.
    let lex_key = |z: u64| z.reverse_bits() >> (64 - n);

    let mut best_z = 0u64;
    let mut best_cut = f64::NEG_INFINITY;
    for half in 0..(1u64 << (n - 1)) {
        let z = half << 1;
        let mut cut = 0.0;
        for &(u, v, w) in &edges {
            if ((z >> u) ^ (z >> v)) & 1 == 1 {
                cut += w;
            }
        }
        if cut > best_cut || (cut == best_cut && lex_key(z) < lex_key(best_z)) {
            best_cut = cut;
            best_z = z;
        }
    }

    let total_weight = g.total_weight();
    let best_assignment = (0..n).map(|i| if (best_z >> i) & 1 == 1 { '1' } else { '0' }).collect();
    Ok(CutResult {
        best_assignment,
        max_cut_value: best_cut,
        e_min: total_weight - 2.0 * best_cut,
        total_weight,
    })
}

pub fn save_graph(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string(g).expect("graph serialization is infallible");
    fs::write(path, text).map_err(|e| QaoaError::io(path, e))
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| QaoaError::io(path, e))?;
    parse_graph(&text).map_err(|e| match e {
        QaoaError::Parse { source, .. } => QaoaError::Parse { path: path.into(), source },
        other => other,
    })
}

/// Parses and validates a graph JSON document.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let file: GraphFile = serde_json::from_str(text)
        .map_err(|source| QaoaError::Parse { path: "<graph>".into(), source })?;
    Graph::try_from(file)
}
