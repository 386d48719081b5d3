//! Pairwise correlation weights over qubits, the inter-block cut objective,
//! and partition search: exact maximum-weight perfect matching (subset DP),
//! the greedy fallback with minimal edge augmentation and 2-opt refinement,
//! and the k-set agglomeration used for blocks larger than two qubits.

use nalgebra::SymmetricEigen;
use nalgebra::{DMatrix, Matrix4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{C64, ZERO};
use crate::statevec::{pair_marginal, single_marginals, QubitSet, StateError, StateVector};

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("pairing requires an even qubit count, got {0}")]
    OddQubitCount(usize),
    #[error("edge augmentation could not complete a pairing")]
    InfeasibleConstraint,
    #[error("block size {0} is invalid (need 2 <= k <= n)")]
    InvalidBlockSize(usize),
    #[error("partition does not cover the graph's qubits")]
    PartitionMismatch,
    #[error(transparent)]
    State(#[from] StateError),
}

/// Which pairwise correlation proxy fills the edge weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WeightMetric {
    /// Mutual information S(rho_i) + S(rho_j) − S(rho_ij), in bits.
    MutualInformation,
    /// Frobenius distance ‖rho_ij − rho_i ⊗ rho_j‖_F. The default: no
    /// eigenvalue computation per pair and numerically robust.
    #[default]
    FrobeniusDistance,
}

/// Symmetric nonnegative pairwise weights over qubits, plus the admissible
/// edge set the partition search is allowed to use.
#[derive(Debug, Clone)]
pub struct CorrelationGraph {
    n: usize,
    weights: Vec<f64>, // row-major n x n, symmetric, zero diagonal
    metric: WeightMetric,
    edges: Vec<(usize, usize)>, // admissible edges, i < j, sorted
}

impl CorrelationGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn metric(&self) -> WeightMetric {
        self.metric
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    /// Admissible edges (i < j), sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        let mut t = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                t += self.weight(i, j);
            }
        }
        t
    }

    /// Build a graph directly from a weight matrix (tests and tooling).
    pub fn from_weights(
        n: usize,
        weights: Vec<f64>,
        metric: WeightMetric,
        edge_set: Option<Vec<(usize, usize)>>,
    ) -> Self {
        assert_eq!(weights.len(), n * n);
        let edges = normalize_edges(n, edge_set);
        Self {
            n,
            weights,
            metric,
            edges,
        }
    }

    /// Add uniform noise in [0, magnitude) to every admissible edge weight,
    /// keeping symmetry. Exposed as a stall remedy; off by default.
    pub fn perturb<R: rand::Rng + ?Sized>(&mut self, magnitude: f64, rng: &mut R) {
        if magnitude <= 0.0 {
            return;
        }
        for &(i, j) in &self.edges.clone() {
            let noise: f64 = rng.gen_range(0.0..magnitude);
            self.weights[i * self.n + j] += noise;
            self.weights[j * self.n + i] += noise;
        }
    }
}

fn normalize_edges(n: usize, edge_set: Option<Vec<(usize, usize)>>) -> Vec<(usize, usize)> {
    let mut edges = match edge_set {
        Some(list) => {
            let mut e: Vec<(usize, usize)> = list
                .into_iter()
                .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
                .collect();
            e.sort_unstable();
            e.dedup();
            e
        }
        None => {
            let mut e = Vec::with_capacity(n * (n - 1) / 2);
            for i in 0..n {
                for j in (i + 1)..n {
                    e.push((i, j));
                }
            }
            e
        }
    };
    edges.retain(|&(a, b)| a != b && b < n);
    edges
}

// ---------------------------------------------------------------------------
// Weight construction
// ---------------------------------------------------------------------------

fn entropy_of_eigs(eigs: &[f64]) -> f64 {
    let mut s = 0.0;
    for &lam in eigs {
        if lam > 1e-12 {
            s -= lam * lam.log2();
        }
    }
    s
}

fn hermitian_eigs_2(rho: &[C64; 4]) -> [f64; 2] {
    // Closed form for a 2x2 Hermitian matrix.
    let a = rho[0].re;
    let d = rho[3].re;
    let b = rho[1];
    let tr = a + d;
    let det = a * d - b.norm_sqr();
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    [tr / 2.0 + disc, tr / 2.0 - disc]
}

fn hermitian_eigs_4(rho: &[C64; 16]) -> Vec<f64> {
    let m = Matrix4::from_fn(|i, j| rho[i * 4 + j]);
    SymmetricEigen::new(m).eigenvalues.iter().cloned().collect()
}

/// Compute the correlation graph of `state` under `metric`.
///
/// All one-qubit marginals are built first (their entropies are cached for
/// the mutual-information metric); each requested pair marginal is one axis
/// move plus a 4x(2^(n-2)) Gram product, so the whole build is O(2^n · n^2)
/// time and O(2^n) extra memory. Weights of unrequested edges stay zero.
pub fn pair_weights(
    state: &StateVector,
    metric: WeightMetric,
    edge_set: Option<Vec<(usize, usize)>>,
) -> Result<CorrelationGraph, GraphError> {
    let n = state.n();
    if let Some(ref list) = edge_set {
        for &(a, b) in list {
            if a >= n || b >= n || a == b {
                return Err(GraphError::State(StateError::DimensionMismatch(format!(
                    "edge ({a},{b}) invalid for {n} qubits"
                ))));
            }
        }
    }
    let edges = normalize_edges(n, edge_set);
    let singles = single_marginals(state);
    let single_entropies: Vec<f64> = match metric {
        WeightMetric::MutualInformation => singles
            .iter()
            .map(|rho| entropy_of_eigs(&hermitian_eigs_2(rho)))
            .collect(),
        WeightMetric::FrobeniusDistance => Vec::new(),
    };

    let mut weights = vec![0.0f64; n * n];
    let mut scratch = vec![ZERO; state.dim()];
    for &(i, j) in &edges {
        let rho_ij = pair_marginal(state, i, j, &mut scratch);
        let w = match metric {
            WeightMetric::MutualInformation => {
                let s_ij = entropy_of_eigs(&hermitian_eigs_4(&rho_ij));
                (single_entropies[i] + single_entropies[j] - s_ij).max(0.0)
            }
            WeightMetric::FrobeniusDistance => {
                let ri = &singles[i];
                let rj = &singles[j];
                let mut acc = 0.0f64;
                for a in 0..2 {
                    for b in 0..2 {
                        for c in 0..2 {
                            for d in 0..2 {
                                let prod = ri[a * 2 + b] * rj[c * 2 + d];
                                let diff = rho_ij[(a * 2 + c) * 4 + (b * 2 + d)] - prod;
                                acc += diff.norm_sqr();
                            }
                        }
                    }
                }
                acc.sqrt()
            }
        };
        weights[i * n + j] = w;
        weights[j * n + i] = w;
    }
    Ok(CorrelationGraph {
        n,
        weights,
        metric,
        edges,
    })
}

// ---------------------------------------------------------------------------
// Partition
// ---------------------------------------------------------------------------

/// Disjoint qubit blocks covering the register, each of size at most
/// `block_size_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<QubitSet>,
    block_size_max: usize,
    n: usize,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<usize>>, n: usize) -> Result<Self, GraphError> {
        let mut covered = vec![false; n];
        let mut sets = Vec::with_capacity(blocks.len());
        let mut kmax = 0;
        for b in blocks {
            let set = QubitSet::new(b, n)?;
            for &q in set.members() {
                if covered[q] {
                    return Err(GraphError::PartitionMismatch);
                }
                covered[q] = true;
            }
            kmax = kmax.max(set.len());
            sets.push(set);
        }
        if covered.iter().any(|&c| !c) {
            return Err(GraphError::PartitionMismatch);
        }
        Ok(Self {
            blocks: sets,
            block_size_max: kmax,
            n,
        })
    }

    pub fn blocks(&self) -> &[QubitSet] {
        &self.blocks
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_size_max(&self) -> usize {
        self.block_size_max
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Blocks as plain index lists (serialization and display).
    pub fn to_lists(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(|b| b.members().to_vec()).collect()
    }

    /// Index of the block containing each qubit.
    pub fn block_of(&self) -> Vec<usize> {
        let mut owner = vec![usize::MAX; self.n];
        for (bi, b) in self.blocks.iter().enumerate() {
            for &q in b.members() {
                owner[q] = bi;
            }
        }
        owner
    }
}

/// Sum of weights across block boundaries (the objective the search
/// minimizes; grouping strongly correlated qubits together drives it down).
pub fn cut_value(graph: &CorrelationGraph, partition: &Partition) -> Result<f64, GraphError> {
    if partition.n() != graph.n {
        return Err(GraphError::PartitionMismatch);
    }
    let owner = partition.block_of();
    let mut phi = 0.0;
    for i in 0..graph.n {
        for j in (i + 1)..graph.n {
            if owner[i] != owner[j] {
                phi += graph.weight(i, j);
            }
        }
    }
    Ok(phi)
}

/// Sum of weights inside blocks. `cut_value + intra_value` equals the total
/// weight exactly.
pub fn intra_value(graph: &CorrelationGraph, partition: &Partition) -> Result<f64, GraphError> {
    if partition.n() != graph.n {
        return Err(GraphError::PartitionMismatch);
    }
    let owner = partition.block_of();
    let mut v = 0.0;
    for i in 0..graph.n {
        for j in (i + 1)..graph.n {
            if owner[i] == owner[j] {
                v += graph.weight(i, j);
            }
        }
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// Pair partition: exact matching with greedy + 2-opt fallback
// ---------------------------------------------------------------------------

/// Exact maximum-weight perfect matching over the admissible edges by
/// dynamic programming over qubit subsets: O(n^2 · 2^n), exact for the desk
/// scale this crate targets (n <= 20), where it is dwarfed by the weight
/// build itself. Returns None when no perfect matching exists on the edges.
fn matching_dp(n: usize, weight: impl Fn(usize, usize) -> Option<f64>) -> Option<Vec<(usize, usize)>> {
    let full = (1usize << n) - 1;
    let mut best = vec![f64::NEG_INFINITY; full + 1];
    let mut choice: Vec<u32> = vec![u32::MAX; full + 1];
    best[0] = 0.0;
    for mask in 1..=full {
        if (mask.count_ones() & 1) == 1 {
            continue;
        }
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let mut b = f64::NEG_INFINITY;
        let mut ch = u32::MAX;
        let mut sub = rest;
        while sub != 0 {
            let j = sub.trailing_zeros() as usize;
            sub &= sub - 1;
            if let Some(w) = weight(i, j) {
                let prev = best[mask & !(1 << i) & !(1 << j)];
                if prev > f64::NEG_INFINITY {
                    let cand = prev + w;
                    // Strict improvement keeps the lexicographically smallest
                    // partner on ties (j ascends through the loop).
                    if cand > b {
                        b = cand;
                        ch = j as u32;
                    }
                }
            }
        }
        best[mask] = b;
        choice[mask] = ch;
    }
    if best[full] == f64::NEG_INFINITY {
        return None;
    }
    let mut pairs = Vec::with_capacity(n / 2);
    let mut mask = full;
    while mask != 0 {
        let i = mask.trailing_zeros() as usize;
        let j = choice[mask] as usize;
        pairs.push((i, j));
        mask &= !(1 << i);
        mask &= !(1 << j);
    }
    pairs.sort_unstable();
    Some(pairs)
}

fn matched_weight(graph: &CorrelationGraph, pairs: &[(usize, usize)]) -> f64 {
    pairs.iter().map(|&(i, j)| graph.weight(i, j)).sum()
}

/// Greedy pairing on the admissible edges; when stuck, augment with the two
/// highest-weight missing edges per stuck vertex and retry.
fn greedy_pairing(
    graph: &CorrelationGraph,
    mut admissible: Vec<(usize, usize)>,
) -> Result<Vec<(usize, usize)>, GraphError> {
    let n = graph.n;
    let mut unmatched: Vec<bool> = vec![true; n];
    let mut remaining = n;
    let mut pairs = Vec::with_capacity(n / 2);
    let mut guard = 0usize;
    while remaining > 0 {
        guard += 1;
        if guard > 2 * n * n {
            return Err(GraphError::InfeasibleConstraint);
        }
        let mut best: Option<(usize, usize)> = None;
        let mut best_w = f64::NEG_INFINITY;
        for &(i, j) in &admissible {
            if unmatched[i] && unmatched[j] {
                let w = graph.weight(i, j);
                if w > best_w {
                    best_w = w;
                    best = Some((i, j));
                }
            }
        }
        match best {
            Some((i, j)) => {
                pairs.push((i, j));
                unmatched[i] = false;
                unmatched[j] = false;
                remaining -= 2;
            }
            None => {
                // Augment: for each stuck vertex add its top-2 missing edges.
                let stuck: Vec<usize> = (0..n).filter(|&q| unmatched[q]).collect();
                let mut added = false;
                for &u in &stuck {
                    let mut candidates: Vec<(usize, usize)> = stuck
                        .iter()
                        .filter(|&&v| v != u)
                        .map(|&v| if u < v { (u, v) } else { (v, u) })
                        .filter(|e| !admissible.contains(e))
                        .collect();
                    candidates.sort_by(|a, b| {
                        graph
                            .weight(b.0, b.1)
                            .partial_cmp(&graph.weight(a.0, a.1))
                            .unwrap()
                            .then(a.cmp(b))
                    });
                    for e in candidates.into_iter().take(2) {
                        admissible.push(e);
                        added = true;
                    }
                }
                if !added {
                    return Err(GraphError::InfeasibleConstraint);
                }
                admissible.sort_unstable();
                admissible.dedup();
            }
        }
    }
    pairs.sort_unstable();
    Ok(pairs)
}

/// Local 2-opt refinement: for every two pairs test the two rearrangements
/// and apply the best strictly-improving one, until fixed point. The matched
/// weight never decreases.
fn two_opt_pairs(graph: &CorrelationGraph, pairs: &mut Vec<(usize, usize)>) {
    loop {
        let mut best_gain = 0.0f64;
        let mut best_swap: Option<(usize, usize, [(usize, usize); 2])> = None;
        for a in 0..pairs.len() {
            for b in (a + 1)..pairs.len() {
                let (i, k) = pairs[a];
                let (j, l) = pairs[b];
                let cur = graph.weight(i, k) + graph.weight(j, l);
                for (p, q) in [
                    ((i, j), (k, l)),
                    ((i, l), (k, j)),
                ] {
                    let cand = graph.weight(p.0, p.1) + graph.weight(q.0, q.1);
                    let gain = cand - cur;
                    if gain > best_gain + 1e-15 {
                        best_gain = gain;
                        let np = |x: (usize, usize)| if x.0 < x.1 { x } else { (x.1, x.0) };
                        best_swap = Some((a, b, [np(p), np(q)]));
                    }
                }
            }
        }
        match best_swap {
            Some((a, b, [p, q])) => {
                pairs[a] = p;
                pairs[b] = q;
                pairs.sort_unstable();
            }
            None => break,
        }
    }
}

/// Pair partition: exact maximum-weight perfect matching on the admissible
/// edges when one exists (subset DP), else greedy + minimal edge
/// augmentation + 2-opt.
pub fn partition_pairs(
    graph: &CorrelationGraph,
    constraint: Option<Vec<(usize, usize)>>,
) -> Result<Partition, GraphError> {
    let n = graph.n;
    if n % 2 != 0 {
        return Err(GraphError::OddQubitCount(n));
    }
    let admissible = match constraint {
        Some(c) => normalize_edges(n, Some(c)),
        None => graph.edges.clone(),
    };
    let pairs = if n <= 20 {
        let edge_ok: std::collections::HashSet<(usize, usize)> = admissible.iter().copied().collect();
        let dp = matching_dp(n, |i, j| {
            let key = if i < j { (i, j) } else { (j, i) };
            edge_ok.contains(&key).then(|| graph.weight(i, j))
        });
        match dp {
            Some(p) => p,
            None => {
                let mut p = greedy_pairing(graph, admissible)?;
                two_opt_pairs(graph, &mut p);
                p
            }
        }
    } else {
        let mut p = greedy_pairing(graph, admissible)?;
        two_opt_pairs(graph, &mut p);
        p
    };
    Partition::new(pairs.into_iter().map(|(i, j)| vec![i, j]).collect(), n)
}

// ---------------------------------------------------------------------------
// k-set partition: greedy agglomeration + single-element exchanges
// ---------------------------------------------------------------------------

/// Partition into blocks of at most `k` qubits: greedy agglomeration
/// (repeatedly merge the two groups joined by the highest total inter-group
/// weight, subject to the size cap), then single-element 2-opt exchanges
/// until no swap increases the total intra-block weight. For k = 2 on an
/// even register this routes through the exact matcher.
pub fn partition_blocks(graph: &CorrelationGraph, k: usize) -> Result<Partition, GraphError> {
    let n = graph.n;
    if k < 2 || k > n {
        return Err(GraphError::InvalidBlockSize(k));
    }
    if k == 2 && n % 2 == 0 {
        return partition_pairs(graph, None);
    }
    if k == n {
        return Partition::new(vec![(0..n).collect()], n);
    }

    let mut groups: Vec<Vec<usize>> = (0..n).map(|q| vec![q]).collect();
    loop {
        let mut best: Option<(usize, usize)> = None;
        let mut best_w = f64::NEG_INFINITY;
        for a in 0..groups.len() {
            for b in (a + 1)..groups.len() {
                if groups[a].len() + groups[b].len() > k {
                    continue;
                }
                let mut w = 0.0;
                for &i in &groups[a] {
                    for &j in &groups[b] {
                        w += graph.weight(i, j);
                    }
                }
                if w > best_w + 1e-15 {
                    best_w = w;
                    best = Some((a, b));
                }
            }
        }
        match best {
            Some((a, b)) => {
                let merged = groups.remove(b);
                groups[a].extend(merged);
                groups[a].sort_unstable();
                groups.sort();
            }
            None => break,
        }
    }

    // Single-element exchanges between blocks.
    loop {
        let mut best_gain = 0.0f64;
        let mut best_move: Option<(usize, usize, usize, usize)> = None;
        for a in 0..groups.len() {
            for b in (a + 1)..groups.len() {
                for ia in 0..groups[a].len() {
                    for ib in 0..groups[b].len() {
                        let qa = groups[a][ia];
                        let qb = groups[b][ib];
                        let mut gain = 0.0;
                        for &x in &groups[a] {
                            if x != qa {
                                gain += graph.weight(qb, x) - graph.weight(qa, x);
                            }
                        }
                        for &x in &groups[b] {
                            if x != qb {
                                gain += graph.weight(qa, x) - graph.weight(qb, x);
                            }
                        }
                        if gain > best_gain + 1e-15 {
                            best_gain = gain;
                            best_move = Some((a, ia, b, ib));
                        }
                    }
                }
            }
        }
        match best_move {
            Some((a, ia, b, ib)) => {
                let qa = groups[a][ia];
                let qb = groups[b][ib];
                groups[a][ia] = qb;
                groups[b][ib] = qa;
                groups[a].sort_unstable();
                groups[b].sort_unstable();
                groups.sort();
            }
            None => break,
        }
    }

    Partition::new(groups, n)
}
