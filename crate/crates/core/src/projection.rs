//! One-mode projection of the follower→institution bipartite graph.
//!
//! A follower is *qualified* when it follows at least `threshold`
//! institutions. Two institutions share an edge iff they have a qualified
//! follower in common, and the raw weight is the number of such followers.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use log::warn;

use crate::data_model::FollowerDataset;
use crate::graph::{UnionFind, WeightedGraph};
use crate::{Error, Result};

/// Default qualification threshold.
pub const DEFAULT_THRESHOLD: usize = 3;

/// Followers that follow at least `threshold` institutions.
#[derive(Debug, Clone, PartialEq)]
pub struct QualifiedFollowerIndex {
    /// Follower indices into the dataset, ascending.
    pub members: Vec<u32>,
    pub threshold: usize,
    /// Followers that did not qualify.
    pub excluded: usize,
}

impl QualifiedFollowerIndex {
    pub fn contains(&self, q: u32) -> bool {
        self.members.binary_search(&q).is_ok()
    }
}

pub fn qualify(dataset: &FollowerDataset, threshold: usize) -> Result<QualifiedFollowerIndex> {
    if threshold == 0 {
        return Err(Error::InvalidInput("qualification threshold must be at least 1".into()));
    }
    let members: Vec<u32> = (0..dataset.follower_count())
        .filter(|&q| dataset.inverse(q).len() >= threshold)
        .map(|q| q as u32)
        .collect();
    Ok(QualifiedFollowerIndex { excluded: dataset.follower_count() - members.len(), members, threshold })
}

/// An edge of the co-follower graph, `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoEdge {
    pub a: usize,
    pub b: usize,
    pub raw: u64,
    pub norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Shared over union of qualified followers.
    Jaccard,
    /// Raw weight over the maximum raw weight.
    MaxScale,
}

/// Weighted co-follower graph.
#[derive(Debug, Clone, PartialEq)]
pub struct CoFollowerGraph {
    pub nodes: Vec<String>,
    /// Sorted by `(a, b)`.
    pub edges: Vec<CoEdge>,
    /// Number of qualified followers per node.
    pub qualified_counts: Vec<u64>,
    /// Method used for `norm` weights; `None` until normalized.
    pub normalization: Option<Normalization>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    Raw,
    Normalized,
}

impl CoFollowerGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == id)
    }

    /// The graph as a [`WeightedGraph`] carrying raw or normalized weights.
    pub fn weighted(&self, kind: WeightKind) -> Result<WeightedGraph> {
        if kind == WeightKind::Normalized && self.normalization.is_none() && !self.edges.is_empty() {
            return Err(Error::InvalidInput("graph weights have not been normalized".into()));
        }
        WeightedGraph::from_edges(
            self.nodes.len(),
            self.edges.iter().map(|e| {
                let w = match kind {
                    WeightKind::Raw => e.raw as f64,
                    WeightKind::Normalized => e.norm,
                };
                (e.a, e.b, w)
            }),
        )
    }

    /// Connected components via union-find, each sorted.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.nodes.len());
        for e in &self.edges {
            uf.union(e.a, e.b);
        }
        uf.groups()
    }
}

/// Builds the co-follower graph.
///
/// Every qualified follower contributes one unit to each pair of the
/// institutions it follows. Pair counts are accumulated in a dense
/// upper-triangular array, which is compact for institution counts in the
/// low thousands.
pub fn build_graph(dataset: &FollowerDataset, index: &QualifiedFollowerIndex) -> CoFollowerGraph {
    let n = dataset.institution_count();
    let mut qualified_counts = vec![0u64; n];
    let mut counts = vec![0u64; n * n.saturating_sub(1) / 2];
    for &q in &index.members {
        let insts = dataset.inverse(q as usize);
        for (x, &i) in insts.iter().enumerate() {
            qualified_counts[i as usize] += 1;
            for &j in &insts[x + 1..] {
                counts[tri_index(n, i as usize, j as usize)] += 1;
            }
        }
    }
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let raw = counts[tri_index(n, a, b)];
            if raw > 0 {
                edges.push(CoEdge { a, b, raw, norm: 0.0 });
            }
        }
    }
    CoFollowerGraph { nodes: dataset.institutions().to_vec(), edges, qualified_counts, normalization: None }
}

fn tri_index(n: usize, a: usize, b: usize) -> usize {
    debug_assert!(a < b && b < n);
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

/// Maps raw weights into `(0, 1]`.
pub fn normalize_weights(mut graph: CoFollowerGraph, method: Normalization) -> CoFollowerGraph {
    if graph.edges.is_empty() {
        warn!("normalize_weights: graph has no edges");
        graph.normalization = Some(method);
        return graph;
    }
    match method {
        Normalization::Jaccard => {
            for e in &mut graph.edges {
                let union = graph.qualified_counts[e.a] + graph.qualified_counts[e.b] - e.raw;
                e.norm = e.raw as f64 / union as f64;
            }
        }
        Normalization::MaxScale => {
            let max = graph.edges.iter().map(|e| e.raw).max().unwrap_or(1) as f64;
            for e in &mut graph.edges {
                e.norm = e.raw as f64 / max;
            }
        }
    }
    graph.normalization = Some(method);
    graph
}

/// Mean-weight bias caused by truncating follower lists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationEstimate {
    /// Mean follower count before truncation.
    pub mean_followers: f64,
    pub truncation_limit: usize,
    /// Fraction of lists not longer than the limit.
    pub p: f64,
    /// Expected observed/true mean weight ratio, at most 1.
    pub attenuation: f64,
    /// True/observed ratio, `1 / attenuation`.
    pub correction: f64,
}

impl TruncationEstimate {
    /// Evaluates `(((F - T) p + T) / F)^2`, clamped to 1 when `F <= T`.
    ///
    /// The squared term is the observed/true ratio under the uniform-position
    /// assumption; its reciprocal is the factor by which observed weights
    /// understate the true ones.
    pub fn new(mean_followers: f64, truncation_limit: usize, p: f64) -> Result<Self> {
        if !(mean_followers > 0.0 && mean_followers.is_finite()) {
            return Err(Error::InvalidInput(format!("mean follower count must be positive, got {mean_followers}")));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidInput(format!("p must lie in [0, 1], got {p}")));
        }
        if truncation_limit == 0 {
            return Err(Error::InvalidInput("truncation limit must be positive".into()));
        }
        let t = truncation_limit as f64;
        let attenuation = if mean_followers <= t {
            1.0
        } else {
            let ratio = ((mean_followers - t) * p + t) / mean_followers;
            (ratio * ratio).min(1.0)
        };
        Ok(Self { mean_followers, truncation_limit, p, attenuation, correction: 1.0 / attenuation })
    }
}

/// Estimates truncation bias for a dataset.
///
/// `p` comes from the pre-truncation list lengths. The mean follower count
/// is `true_mean` when given, otherwise the mean pre-truncation length.
pub fn truncation_estimate(dataset: &FollowerDataset, true_mean: Option<f64>) -> Result<TruncationEstimate> {
    let lengths = dataset.original_lengths();
    if lengths.is_empty() {
        return Err(Error::InvalidInput("dataset has no institutions".into()));
    }
    let t = dataset.truncation_limit();
    let p = lengths.iter().filter(|&&l| l <= t).count() as f64 / lengths.len() as f64;
    let mean = true_mean.unwrap_or_else(|| lengths.iter().sum::<usize>() as f64 / lengths.len() as f64);
    TruncationEstimate::new(mean, t, p)
}

/// `2|E| / (n (n - 1))`.
pub fn density(nodes: usize, edges: usize) -> Result<f64> {
    if nodes < 2 {
        return Err(Error::InvalidInput(format!("density needs at least 2 nodes, got {nodes}")));
    }
    Ok(2.0 * edges as f64 / (nodes as f64 * (nodes as f64 - 1.0)))
}

impl CoFollowerGraph {
    pub fn density(&self) -> Result<f64> {
        density(self.node_count(), self.edge_count())
    }
}
