//! Louvain communities, modularity and the induced cluster graph.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data_model::InstitutionTable;
use crate::graph::WeightedGraph;
use crate::{Error, Result};

pub const DEFAULT_RESOLUTION: f64 = 0.8;

/// Stop refining a level once a full pass gains less than this.
pub const MIN_PASS_GAIN: f64 = 1e-9;

/// Smallest modularity gain accepted for a single move.
const MIN_MOVE_GAIN: f64 = 1e-13;

/// Node → cluster assignment with dense cluster ids `0..k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub assignment: Vec<usize>,
    pub resolution: f64,
    pub seed: u64,
    /// Modularity at resolution 1; `None` for a graph without edges.
    pub modularity_at_1: Option<f64>,
}

impl Partition {
    /// Relabels `labels` to dense ids in order of first appearance.
    pub fn from_labels(labels: &[usize], resolution: f64, seed: u64, g: &WeightedGraph) -> Self {
        let assignment = densify(labels);
        let modularity_at_1 = modularity(g, &assignment, 1.0).ok();
        Self { assignment, resolution, seed, modularity_at_1 }
    }

    pub fn cluster_count(&self) -> usize {
        self.assignment.iter().max().map_or(0, |&m| m + 1)
    }

    /// Members of each cluster, ascending.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.cluster_count()];
        for (v, &c) in self.assignment.iter().enumerate() {
            out[c].push(v);
        }
        out
    }
}

fn densify(labels: &[usize]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// `Q = (1/2m) sum_ij [A_ij - gamma s_i s_j / 2m] delta(c_i, c_j)`.
pub fn modularity(g: &WeightedGraph, assignment: &[usize], gamma: f64) -> Result<f64> {
    if assignment.len() != g.node_count() {
        return Err(Error::InvalidInput(format!(
            "partition covers {} nodes, graph has {}",
            assignment.len(),
            g.node_count()
        )));
    }
    let m = g.total_weight();
    if m <= 0.0 {
        return Err(Error::ZeroWeight);
    }
    let k = assignment.iter().max().map_or(0, |&c| c + 1);
    let mut internal = vec![0.0; k];
    let mut tot = vec![0.0; k];
    for &(a, b, w) in g.edges() {
        if assignment[a] == assignment[b] {
            internal[assignment[a]] += w;
        }
        tot[assignment[a]] += w;
        tot[assignment[b]] += w;
    }
    Ok(internal
        .iter()
        .zip(&tot)
        .map(|(&inner, &s)| inner / m - gamma * (s / (2.0 * m)) * (s / (2.0 * m)))
        .sum())
}

/// Working graph of one Louvain level: adjacency without self-loops plus a
/// separate self-loop weight per node.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    self_w: Vec<f64>,
}

impl Level {
    fn strength(&self, v: usize) -> f64 {
        self.adj[v].iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * self.self_w[v]
    }
}

/// Record of a Louvain run: the modularity gain of every accepted move.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LouvainTrace {
    pub move_gains: Vec<f64>,
    pub levels: usize,
}

/// Louvain community detection at resolution `gamma`.
///
/// Each level visits nodes in a seeded shuffled order and moves a node to
/// the neighboring cluster of largest gain (smallest id on ties) when that
/// strictly improves modularity; passes repeat until a pass gains less than
/// [`MIN_PASS_GAIN`]. Clusters are then collapsed into nodes and the
/// process repeats until a level makes no move.
pub fn louvain(g: &WeightedGraph, gamma: f64, seed: u64) -> Result<Partition> {
    louvain_traced(g, gamma, seed).map(|(p, _)| p)
}

pub fn louvain_traced(g: &WeightedGraph, gamma: f64, seed: u64) -> Result<(Partition, LouvainTrace)> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::InvalidInput("louvain needs a nonempty graph".into()));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidInput(format!("resolution must be positive, got {gamma}")));
    }
    let mut trace = LouvainTrace::default();
    let m = g.total_weight();
    let mut membership: Vec<usize> = (0..n).collect();
    if m <= 0.0 {
        return Ok((Partition::from_labels(&membership, gamma, seed, g), trace));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = Level {
        adj: (0..n).map(|v| g.neighbors(v).to_vec()).collect(),
        self_w: vec![0.0; n],
    };
    loop {
        let (comm, moved) = local_moves(&level, m, gamma, &mut rng, &mut trace.move_gains);
        trace.levels += 1;
        if !moved {
            break;
        }
        let dense = densify(&comm);
        for c in membership.iter_mut() {
            *c = dense[*c];
        }
        level = aggregate(&level, &dense);
        if level.adj.len() == 1 {
            break;
        }
    }
    Ok((Partition::from_labels(&membership, gamma, seed, g), trace))
}

fn local_moves(level: &Level, m: f64, gamma: f64, rng: &mut ChaCha8Rng, gains: &mut Vec<f64>) -> (Vec<usize>, bool) {
    let n = level.adj.len();
    let strength: Vec<f64> = (0..n).map(|v| level.strength(v)).collect();
    let mut comm: Vec<usize> = (0..n).collect();
    let mut tot = strength.clone();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut links = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut moved_any = false;
    loop {
        let mut pass_gain = 0.0;
        for &v in &order {
            let cv = comm[v];
            let kv = strength[v];
            for &(u, w) in &level.adj[v] {
                let cu = comm[u];
                if links[cu] == 0.0 {
                    touched.push(cu);
                }
                links[cu] += w;
            }
            tot[cv] -= kv;
            let gain = |c: usize, links: &[f64]| links[c] - gamma * tot[c] * kv / (2.0 * m);
            let stay = gain(cv, &links);
            touched.sort_unstable();
            let mut best = cv;
            let mut best_gain = stay;
            for &c in &touched {
                let gc = gain(c, &links);
                if gc > best_gain {
                    best = c;
                    best_gain = gc;
                }
            }
            let delta_q = (best_gain - stay) / m;
            if best != cv && delta_q > MIN_MOVE_GAIN {
                debug_assert!(delta_q > 0.0);
                comm[v] = best;
                tot[best] += kv;
                gains.push(delta_q);
                pass_gain += delta_q;
                moved_any = true;
            } else {
                tot[cv] += kv;
            }
            for &c in &touched {
                links[c] = 0.0;
            }
            touched.clear();
        }
        if pass_gain < MIN_PASS_GAIN {
            break;
        }
    }
    (comm, moved_any)
}

fn aggregate(level: &Level, dense: &[usize]) -> Level {
    let k = dense.iter().max().map_or(0, |&c| c + 1);
    let mut self_w = vec![0.0; k];
    let mut maps: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); k];
    for v in 0..level.adj.len() {
        let cv = dense[v];
        self_w[cv] += level.self_w[v];
        for &(u, w) in &level.adj[v] {
            let cu = dense[u];
            if cu == cv {
                // each internal edge is seen from both ends
                self_w[cv] += w / 2.0;
            } else {
                *maps[cv].entry(cu).or_insert(0.0) += w;
            }
        }
    }
    Level { adj: maps.into_iter().map(|m| m.into_iter().collect()).collect(), self_w }
}

/// Cluster-level graph: one node per cluster, edge weights counting the
/// original edges between clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedGraph {
    pub sizes: Vec<usize>,
    pub names: Vec<String>,
    /// `(a, b, count)` with `a < b`, sorted.
    pub edges: Vec<(usize, usize, u64)>,
    /// Original edges with both ends in the cluster.
    pub intra: Vec<u64>,
}

impl InducedGraph {
    pub fn total_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.2).sum::<u64>() + self.intra.iter().sum::<u64>()
    }
}

pub fn induce(g: &WeightedGraph, partition: &Partition) -> Result<InducedGraph> {
    if partition.assignment.len() != g.node_count() {
        return Err(Error::InvalidInput("partition does not cover the graph".into()));
    }
    let k = partition.cluster_count();
    let mut sizes = vec![0; k];
    for &c in &partition.assignment {
        sizes[c] += 1;
    }
    let mut intra = vec![0u64; k];
    let mut cross: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for &(a, b, _) in g.edges() {
        let (ca, cb) = (partition.assignment[a], partition.assignment[b]);
        if ca == cb {
            intra[ca] += 1;
        } else {
            *cross.entry((ca.min(cb), ca.max(cb))).or_insert(0) += 1;
        }
    }
    Ok(InducedGraph {
        sizes,
        names: (0..k).map(|c| format!("cluster-{c}")).collect(),
        edges: cross.into_iter().map(|((a, b), w)| (a, b, w)).collect(),
        intra,
    })
}

/// Names each cluster after the handle of its highest-enrollment member,
/// lexicographically smallest handle on ties, `cluster-<id>` when no member
/// has enrollment data. `node_ids[v]` is the institution id of node `v`.
pub fn name_clusters(partition: &Partition, node_ids: &[String], institutions: &InstitutionTable) -> Vec<String> {
    partition
        .clusters()
        .iter()
        .enumerate()
        .map(|(c, members)| {
            let mut best: Option<(u64, &str)> = None;
            for &v in members {
                let Some(rec) = node_ids.get(v).and_then(|id| institutions.get(id)) else { continue };
                let Some(e) = rec.enrollment else { continue };
                let better = match best {
                    None => true,
                    Some((be, bh)) => e > be || (e == be && rec.handle.as_str() < bh),
                };
                if better {
                    best = Some((e, rec.handle.as_str()));
                }
            }
            best.map_or_else(|| format!("cluster-{c}"), |(_, h)| String::from(h))
        })
        .collect()
}
