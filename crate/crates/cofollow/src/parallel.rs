//! Multi-threaded versions of the per-source graph measures and the topic
//! corpus pass. Per-source results are collected in source order and summed
//! sequentially, so output does not depend on the thread count.

use std::collections::BTreeSet;

use cofollow_core::graph::WeightedGraph;
use cofollow_core::metrics::{
    clustering, degree_centrality, eigenvector, normalize_betweenness, source_closeness, source_dependencies, strengths,
    MetricOptions, NodeMetrics,
};
use cofollow_core::topics::{FollowerDoc, PairCounts, SemanticNetwork, TextRules};
use cofollow_core::Error;
use rayon::prelude::*;

use crate::error::Result;

/// Runs `f` on a pool of `workers` threads (0 = one per core).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(e) => {
            log::warn!("could not build a thread pool ({e}); running on the global pool");
            f()
        }
    }
}

/// Same values as the sequential `node_metrics`.
pub fn node_metrics(g: &WeightedGraph, clustering_graph: Option<&WeightedGraph>, opts: &MetricOptions) -> Result<NodeMetrics> {
    let harmonic = if g.is_connected() {
        false
    } else if opts.harmonic_fallback {
        log::warn!("graph is disconnected; using harmonic closeness");
        true
    } else {
        return Err(Error::Disconnected { components: g.components() }.into());
    };
    let n = g.node_count();
    let per_source: Vec<(f64, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|s| (source_closeness(g, opts.distance, s, harmonic), source_dependencies(g, opts.distance, s)))
        .collect();
    let mut summed = vec![0.0; n];
    let mut closeness = Vec::with_capacity(n);
    for (c, deps) in per_source {
        closeness.push(c);
        for (acc, d) in summed.iter_mut().zip(deps) {
            *acc += d;
        }
    }
    Ok(NodeMetrics {
        degree: degree_centrality(g),
        strength: strengths(g),
        closeness,
        betweenness: normalize_betweenness(summed),
        eigenvector: eigenvector(g, opts.eigen_tol, opts.eigen_max_iter)?,
        clustering: clustering(clustering_graph.unwrap_or(g)),
        harmonic_closeness: harmonic,
    })
}

/// Normalizes descriptions in parallel, keeping input order.
pub fn follower_docs(
    raw: &[(String, String)],
    stopwords: &BTreeSet<String>,
    rules: &TextRules,
    institution_accounts: &BTreeSet<String>,
) -> Vec<FollowerDoc> {
    raw.par_iter()
        .map(|(id, text)| FollowerDoc::new(id.clone(), text.clone(), stopwords, rules, institution_accounts))
        .collect()
}

/// Counts co-occurrences per chunk and merges the chunks in order.
pub fn semantic_network(docs: &[FollowerDoc], min_cooccurrence: u64) -> Result<SemanticNetwork> {
    let chunks: Vec<PairCounts> = docs
        .par_chunks(256)
        .map(|chunk| {
            let mut c = PairCounts::default();
            for d in chunk.iter().filter(|d| d.usable() && !d.tokens.is_empty()) {
                c.add(&d.tokens);
            }
            c
        })
        .collect();
    let mut total = PairCounts::default();
    for c in chunks {
        total.merge(c);
    }
    Ok(SemanticNetwork::from_counts(&total, min_cooccurrence)?)
}
