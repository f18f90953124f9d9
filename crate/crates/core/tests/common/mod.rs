//! Brute-force reference implementations and random instance generators.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet};

use cofollow_core::graph::WeightedGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random bipartite instance: institution id and its follower ids.
pub fn random_bipartite(r: &mut ChaCha8Rng, max_inst: usize, max_followers: usize) -> Vec<(String, Vec<String>)> {
    let ni = r.random_range(1..=max_inst);
    let nf = r.random_range(1..=max_followers);
    let density: f64 = r.random_range(0.05..0.6);
    (0..ni)
        .map(|i| {
            let list = (0..nf).filter(|_| r.random_bool(density)).map(|f| format!("f{f}")).collect();
            (format!("i{i}"), list)
        })
        .collect()
}

/// Shared-qualified-follower counts by triple loop over institution pairs
/// and followers.
pub fn projection_oracle(lists: &[(String, Vec<String>)], threshold: usize) -> BTreeMap<(String, String), u64> {
    let sets: Vec<BTreeSet<&String>> = lists.iter().map(|(_, l)| l.iter().collect()).collect();
    let all: BTreeSet<&String> = sets.iter().flatten().copied().collect();
    let mut out = BTreeMap::new();
    for a in 0..lists.len() {
        for b in a + 1..lists.len() {
            let mut w = 0;
            for q in &all {
                let followed = sets.iter().filter(|s| s.contains(q)).count();
                if followed >= threshold && sets[a].contains(q) && sets[b].contains(q) {
                    w += 1;
                }
            }
            if w > 0 {
                let (x, y) = (lists[a].0.clone(), lists[b].0.clone());
                let key = if x < y { (x, y) } else { (y, x) };
                out.insert(key, w);
            }
        }
    }
    out
}

/// Random connected weighted graph. With `coarse`, weights come from
/// {0.25, 0.5, 1} so that many shortest paths tie exactly.
pub fn random_connected(r: &mut ChaCha8Rng, n: usize, p: f64, coarse: bool) -> WeightedGraph {
    let w = |r: &mut ChaCha8Rng| {
        if coarse {
            [0.25, 0.5, 1.0][r.random_range(0..3)]
        } else {
            r.random_range(0.05..1.0)
        }
    };
    let mut edges = BTreeMap::new();
    // random spanning tree first
    for v in 1..n {
        let u = r.random_range(0..v);
        edges.insert((u, v), w(r));
    }
    for a in 0..n {
        for b in a + 1..n {
            if !edges.contains_key(&(a, b)) && r.random_bool(p) {
                edges.insert((a, b), w(r));
            }
        }
    }
    WeightedGraph::from_edges(n, edges.into_iter().map(|((a, b), w)| (a, b, w))).unwrap()
}

pub fn random_graph(r: &mut ChaCha8Rng, n: usize, p: f64) -> WeightedGraph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if r.random_bool(p) {
                edges.push((a, b, r.random_range(0.05..1.0)));
            }
        }
    }
    WeightedGraph::from_edges(n, edges).unwrap()
}

pub fn dense(g: &WeightedGraph) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut m = vec![vec![0.0; n]; n];
    for &(a, b, w) in g.edges() {
        m[a][b] = w;
        m[b][a] = w;
    }
    m
}

/// Every simple path from `s` to `t`, as node sequences.
pub fn simple_paths(adj: &[Vec<f64>], s: usize, t: usize) -> Vec<Vec<usize>> {
    fn go(adj: &[Vec<f64>], path: &mut Vec<usize>, seen: &mut [bool], t: usize, out: &mut Vec<Vec<usize>>) {
        let v = *path.last().unwrap();
        if v == t {
            out.push(path.clone());
            return;
        }
        for u in 0..adj.len() {
            if adj[v][u] > 0.0 && !seen[u] {
                seen[u] = true;
                path.push(u);
                go(adj, path, seen, t, out);
                path.pop();
                seen[u] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut seen = vec![false; adj.len()];
    seen[s] = true;
    go(adj, &mut vec![s], &mut seen, t, &mut out);
    out
}

/// Closeness and normalized betweenness from full path enumeration, with
/// edge length `len(w)`.
pub fn path_oracle(g: &WeightedGraph, len: impl Fn(f64) -> f64) -> (Vec<f64>, Vec<f64>) {
    let adj = dense(g);
    let n = adj.len();
    let mut dist_sum = vec![0.0; n];
    let mut between = vec![0.0; n];
    for s in 0..n {
        for t in 0..n {
            if s == t {
                continue;
            }
            let paths = simple_paths(&adj, s, t);
            let lengths: Vec<f64> = paths.iter().map(|p| p.windows(2).map(|e| len(adj[e[0]][e[1]])).sum()).collect();
            let best = lengths.iter().copied().fold(f64::INFINITY, f64::min);
            dist_sum[s] += best;
            if s < t {
                let shortest: Vec<&Vec<usize>> =
                    paths.iter().zip(&lengths).filter(|(_, &l)| l <= best * (1.0 + 1e-12)).map(|(p, _)| p).collect();
                let total = shortest.len() as f64;
                for p in &shortest {
                    for &v in &p[1..p.len() - 1] {
                        between[v] += 1.0 / total;
                    }
                }
            }
        }
    }
    let close = dist_sum.iter().map(|&d| if d > 0.0 { (n - 1) as f64 / d } else { 0.0 }).collect();
    let pairs = if n > 2 { ((n - 1) * (n - 2)) as f64 / 2.0 } else { 1.0 };
    let bet = between.iter().map(|b| if n > 2 { b / pairs } else { 0.0 }).collect();
    (close, bet)
}

/// Symmetric eigen-decomposition by cyclic Jacobi rotations; returns
/// eigenvalues and eigenvectors as columns.
pub fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let values = (0..n).map(|i| a[i][i]).collect();
    (values, v)
}

/// Unit principal eigenvector with nonnegative orientation.
pub fn principal_eigenvector(g: &WeightedGraph) -> Vec<f64> {
    let (values, vectors) = jacobi_eigen(dense(g));
    let top = (0..values.len()).max_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    let mut x: Vec<f64> = vectors.iter().map(|row| row[top]).collect();
    let norm = x.iter().map(|y| y * y).sum::<f64>().sqrt();
    let sign = if x.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    for y in &mut x {
        *y *= sign / norm;
    }
    x
}

/// Triangle enumeration in ascending neighbor order.
pub fn clustering_oracle(g: &WeightedGraph) -> Vec<f64> {
    let a = dense(g);
    let n = a.len();
    (0..n)
        .map(|i| {
            let k = (0..n).filter(|&j| a[i][j] > 0.0).count();
            if k < 2 {
                return 0.0;
            }
            let mut sum = 0.0;
            for j in 0..n {
                for l in j + 1..n {
                    if a[i][j] > 0.0 && a[i][l] > 0.0 && a[j][l] > 0.0 {
                        sum += 2.0 * (a[i][j] * a[j][l] * a[i][l]).cbrt();
                    }
                }
            }
            sum / (k * (k - 1)) as f64
        })
        .collect()
}

/// Modularity straight from the pairwise definition.
pub fn modularity_oracle(g: &WeightedGraph, labels: &[usize], gamma: f64) -> f64 {
    let a = dense(g);
    let n = a.len();
    let k: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += a[i][j] - gamma * k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Best partition over all set partitions (restricted growth strings).
pub fn exhaustive_best_partition(g: &WeightedGraph, gamma: f64) -> (Vec<usize>, f64) {
    let n = g.node_count();
    let mut labels = vec![0usize; n];
    let mut best = (labels.clone(), f64::NEG_INFINITY);
    fn rec(i: usize, max: usize, labels: &mut Vec<usize>, g: &WeightedGraph, gamma: f64, best: &mut (Vec<usize>, f64)) {
        if i == labels.len() {
            let q = modularity_oracle(g, labels, gamma);
            if q > best.1 + 1e-12 {
                *best = (labels.clone(), q);
            }
            return;
        }
        for c in 0..=max + 1 {
            labels[i] = c;
            rec(i + 1, max.max(c), labels, g, gamma, best);
        }
    }
    if n > 0 {
        rec(1, 0, &mut labels, g, gamma, &mut best);
    }
    best
}

/// Same-cluster relation, for comparing partitions up to relabeling.
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len() && (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
}

/// Two `k`-cliques joined by the single edge `(k - 1, k)`.
pub fn bridged_cliques(k: usize) -> WeightedGraph {
    let mut edges = Vec::new();
    for base in [0, k] {
        for a in 0..k {
            for b in a + 1..k {
                edges.push((base + a, base + b, 1.0));
            }
        }
    }
    edges.push((k - 1, k, 1.0));
    WeightedGraph::from_edges(2 * k, edges).unwrap()
}

/// Planted two-block graph with unit weights.
pub fn planted_blocks(r: &mut ChaCha8Rng, size: usize, p_in: f64, p_out: f64) -> WeightedGraph {
    let n = 2 * size;
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let p = if (a < size) == (b < size) { p_in } else { p_out };
            if r.random_bool(p) {
                edges.push((a, b, 1.0));
            }
        }
    }
    WeightedGraph::from_edges(n, edges).unwrap()
}

/// Pearson correlation computed in two passes.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Corpus from two disjoint vocabularies: each document draws several
/// distinct words from one pool.
pub fn two_pool_corpus(r: &mut ChaCha8Rng, docs_per_pool: [usize; 2]) -> (Vec<(String, String)>, [Vec<&'static str>; 2]) {
    let pools: [Vec<&'static str>; 2] = [
        vec!["teacher", "coach", "student", "school", "education", "learning"],
        vec!["football", "soccer", "fan", "team", "game", "sport"],
    ];
    let mut docs = Vec::new();
    for (p, &count) in docs_per_pool.iter().enumerate() {
        for d in 0..count {
            let mut words: Vec<&str> = pools[p].iter().copied().filter(|_| r.random_bool(0.7)).collect();
            if words.len() < 2 {
                words = pools[p][..3].to_vec();
            }
            docs.push((format!("p{p}d{d}"), words.join(" ")));
        }
    }
    (docs, pools)
}
