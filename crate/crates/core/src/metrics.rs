//! Monadic network measures.
//!
//! Edge weights are similarities in `(0, 1]`. Path-based measures turn them
//! into lengths with a [`DistanceTransform`]; eigenvector centrality and
//! clustering use the weights directly.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::graph::WeightedGraph;
use crate::{Error, Result};

/// How a similarity weight becomes a path length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceTransform {
    /// `1 / w`
    #[default]
    InverseWeight,
    /// `1 - w`
    OneMinusWeight,
}

impl DistanceTransform {
    pub fn length(self, w: f64) -> f64 {
        match self {
            DistanceTransform::InverseWeight => 1.0 / w,
            DistanceTransform::OneMinusWeight => (1.0 - w).max(0.0),
        }
    }
}

/// Relative tolerance under which two path lengths count as equal.
pub const PATH_TIE_TOLERANCE: f64 = 1e-12;

pub(crate) fn same_length(a: f64, b: f64) -> bool {
    (a - b).abs() <= PATH_TIE_TOLERANCE * (1.0 + a.abs().max(b.abs()))
}

/// Unweighted degree over `n - 1`. A single node scores 0.
pub fn degree_centrality(g: &WeightedGraph) -> Vec<f64> {
    let n = g.node_count();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n).map(|v| g.degree(v) as f64 / (n - 1) as f64).collect()
}

pub fn strengths(g: &WeightedGraph) -> Vec<f64> {
    (0..g.node_count()).map(|v| g.strength(v)).collect()
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    node: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then node index
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths with path counts.
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    pub dist: Vec<f64>,
    pub sigma: Vec<f64>,
    pub preds: Vec<Vec<usize>>,
    /// Settled nodes in nondecreasing distance order.
    pub order: Vec<usize>,
}

/// Dijkstra from `source`, counting shortest paths.
pub fn shortest_paths(g: &WeightedGraph, transform: DistanceTransform, source: usize) -> ShortestPaths {
    let n = g.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut sigma = vec![0.0; n];
    let mut preds = vec![Vec::new(); n];
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    sigma[source] = 1.0;
    heap.push(HeapItem { dist: 0.0, node: source });
    while let Some(HeapItem { dist: d, node: v }) = heap.pop() {
        if done[v] || d > dist[v] {
            continue;
        }
        done[v] = true;
        order.push(v);
        for &(w, weight) in g.neighbors(v) {
            if done[w] {
                continue;
            }
            let alt = d + transform.length(weight);
            if dist[w].is_infinite() || (alt < dist[w] && !same_length(alt, dist[w])) {
                dist[w] = alt;
                sigma[w] = sigma[v];
                preds[w].clear();
                preds[w].push(v);
                heap.push(HeapItem { dist: alt, node: w });
            } else if same_length(alt, dist[w]) {
                sigma[w] += sigma[v];
                preds[w].push(v);
            }
        }
    }
    ShortestPaths { dist, sigma, preds, order }
}

/// Closeness values and whether the harmonic form was used.
#[derive(Debug, Clone, PartialEq)]
pub struct Closeness {
    pub values: Vec<f64>,
    pub harmonic: bool,
}

/// Closeness of `source`: `(n - 1) / sum of distances`, or the harmonic
/// mean `sum(1 / d) / (n - 1)` when `harmonic` is set.
pub fn source_closeness(g: &WeightedGraph, transform: DistanceTransform, source: usize, harmonic: bool) -> f64 {
    let n = g.node_count();
    if n < 2 {
        return 0.0;
    }
    let sp = shortest_paths(g, transform, source);
    if harmonic {
        let s: f64 = sp
            .dist
            .iter()
            .enumerate()
            .filter(|&(v, d)| v != source && d.is_finite() && *d > 0.0)
            .map(|(_, d)| 1.0 / d)
            .sum();
        s / (n - 1) as f64
    } else {
        let total: f64 = sp.dist.iter().sum();
        if total > 0.0 {
            (n - 1) as f64 / total
        } else {
            0.0
        }
    }
}

fn require_connected(g: &WeightedGraph, allow_disconnected: bool) -> Result<bool> {
    if g.is_connected() {
        return Ok(false);
    }
    if allow_disconnected {
        Ok(true)
    } else {
        Err(Error::Disconnected { components: g.components() })
    }
}

/// Closeness centrality. A disconnected graph is an error unless
/// `harmonic_fallback` is set, in which case harmonic closeness is returned
/// for every node and flagged.
pub fn closeness(g: &WeightedGraph, transform: DistanceTransform, harmonic_fallback: bool) -> Result<Closeness> {
    let harmonic = require_connected(g, harmonic_fallback)?;
    let values = (0..g.node_count()).map(|s| source_closeness(g, transform, s, harmonic)).collect();
    Ok(Closeness { values, harmonic })
}

/// Dependencies of `source` on every node (Brandes accumulation).
pub fn source_dependencies(g: &WeightedGraph, transform: DistanceTransform, source: usize) -> Vec<f64> {
    let sp = shortest_paths(g, transform, source);
    let mut delta = vec![0.0; g.node_count()];
    for &w in sp.order.iter().rev() {
        for &v in &sp.preds[w] {
            delta[v] += sp.sigma[v] / sp.sigma[w] * (1.0 + delta[w]);
        }
    }
    delta[source] = 0.0;
    delta
}

/// Converts summed per-source dependencies into normalized betweenness.
///
/// Each unordered pair is visited from both ends, hence the halving before
/// dividing by `(n - 1)(n - 2) / 2`.
pub fn normalize_betweenness(mut summed: Vec<f64>) -> Vec<f64> {
    let n = summed.len();
    let scale = if n > 2 { 1.0 / ((n - 1) as f64 * (n - 2) as f64) } else { 0.0 };
    for x in &mut summed {
        *x *= scale;
    }
    summed
}

/// Betweenness centrality on weighted shortest paths, normalized to `[0, 1]`.
pub fn betweenness(g: &WeightedGraph, transform: DistanceTransform, allow_disconnected: bool) -> Result<Vec<f64>> {
    require_connected(g, allow_disconnected)?;
    let n = g.node_count();
    let mut sum = vec![0.0; n];
    for s in 0..n {
        for (acc, d) in sum.iter_mut().zip(source_dependencies(g, transform, s)) {
            *acc += d;
        }
    }
    Ok(normalize_betweenness(sum))
}

/// Principal eigenvector of the weighted adjacency matrix.
///
/// Power iteration on `A + I` (same eigenvectors, and no oscillation on
/// bipartite graphs) from the uniform vector, stopping when the L2 change
/// between successive unit iterates drops below `tol`.
pub fn eigenvector(g: &WeightedGraph, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let n = g.node_count();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut x = vec![1.0 / libm::sqrt(n as f64); n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        for v in 0..n {
            next[v] = x[v] + g.neighbors(v).iter().map(|&(u, w)| w * x[u]).sum::<f64>();
        }
        let norm = libm::sqrt(next.iter().map(|y| y * y).sum::<f64>());
        if norm == 0.0 {
            return Err(Error::NoConvergence { iterations: 0, residual: f64::NAN });
        }
        residual = 0.0;
        for v in 0..n {
            next[v] /= norm;
            residual += (next[v] - x[v]) * (next[v] - x[v]);
        }
        residual = libm::sqrt(residual);
        core::mem::swap(&mut x, &mut next);
        if residual < tol {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, residual })
}

/// Geometric-mean weighted clustering:
/// `C_i = sum over ordered neighbor pairs (w_ij w_jk w_ik)^(1/3) / (k_i (k_i - 1))`.
pub fn clustering(g: &WeightedGraph) -> Vec<f64> {
    (0..g.node_count())
        .map(|i| {
            let nb = g.neighbors(i);
            let k = nb.len();
            if k < 2 {
                return 0.0;
            }
            let mut sum = 0.0;
            for (x, &(j, wij)) in nb.iter().enumerate() {
                for &(l, wil) in &nb[x + 1..] {
                    if let Some(wjl) = g.weight(j, l) {
                        sum += 2.0 * libm::cbrt(wij * wjl * wil);
                    }
                }
            }
            sum / (k * (k - 1)) as f64
        })
        .collect()
}

/// Every per-node measure, index-aligned with the graph's nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMetrics {
    pub degree: Vec<f64>,
    pub strength: Vec<f64>,
    pub closeness: Vec<f64>,
    pub betweenness: Vec<f64>,
    pub eigenvector: Vec<f64>,
    pub clustering: Vec<f64>,
    /// Closeness fell back to the harmonic form.
    pub harmonic_closeness: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricOptions {
    pub distance: DistanceTransform,
    pub eigen_tol: f64,
    pub eigen_max_iter: usize,
    /// Accept disconnected graphs, using harmonic closeness.
    pub harmonic_fallback: bool,
}

impl Default for MetricOptions {
    fn default() -> Self {
        Self { distance: DistanceTransform::InverseWeight, eigen_tol: 1e-10, eigen_max_iter: 100_000, harmonic_fallback: false }
    }
}

/// Computes all measures sequentially. `clustering_graph` supplies the
/// weights for clustering when they differ from `g` (e.g. raw-weight
/// centralities with normalized-weight clustering).
pub fn node_metrics(g: &WeightedGraph, clustering_graph: Option<&WeightedGraph>, opts: &MetricOptions) -> Result<NodeMetrics> {
    let close = closeness(g, opts.distance, opts.harmonic_fallback)?;
    Ok(NodeMetrics {
        degree: degree_centrality(g),
        strength: strengths(g),
        betweenness: betweenness(g, opts.distance, opts.harmonic_fallback)?,
        eigenvector: eigenvector(g, opts.eigen_tol, opts.eigen_max_iter)?,
        clustering: clustering(clustering_graph.unwrap_or(g)),
        closeness: close.values,
        harmonic_closeness: close.harmonic,
    })
}

pub const MEASURES: [&str; 5] = ["degree", "closeness", "betweenness", "eigenvector", "clustering"];

impl NodeMetrics {
    /// The five correlated measures, in [`MEASURES`] order.
    pub fn measures(&self) -> [&[f64]; 5] {
        [&self.degree, &self.closeness, &self.betweenness, &self.eigenvector, &self.clustering]
    }
}

/// Pearson correlation; `None` when either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    let scale = mx.abs().max(my.abs()).max(1.0);
    if sxx <= 1e-24 * scale * scale * n as f64 || syy <= 1e-24 * scale * scale * n as f64 {
        return None;
    }
    Some((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Symmetric correlation matrix over named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub names: Vec<&'static str>,
    /// `None` where a column has zero variance.
    pub values: Vec<Vec<Option<f64>>>,
}

pub fn correlation_matrix(names: &[&'static str], columns: &[&[f64]]) -> Result<CorrelationMatrix> {
    let n = columns.first().map_or(0, |c| c.len());
    if n < 3 {
        return Err(Error::InvalidInput("correlation report needs at least 3 nodes".into()));
    }
    let k = columns.len();
    let mut values = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i..k {
            let r = if i == j { pearson(columns[i], columns[i]).map(|_| 1.0) } else { pearson(columns[i], columns[j]) };
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix { names: names.to_vec(), values })
}

/// Pairwise Pearson correlations of the five measures.
pub fn centrality_correlation_report(m: &NodeMetrics) -> Result<CorrelationMatrix> {
    correlation_matrix(&MEASURES, &m.measures())
}
