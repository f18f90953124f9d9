//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed; exits non-zero on any FAIL.

#[path = "../../core/tests/common/mod.rs"]
mod oracles;

#[path = "common/mod.rs"]
mod fixture;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use cofollow::io::load_stopwords;
use cofollow::{Pipeline, Step};
use cofollow_core::community::{induce, louvain, modularity, Partition};
use cofollow_core::data_model::FollowerDataset;
use cofollow_core::graph::WeightedGraph;
use cofollow_core::metrics::{betweenness, closeness, clustering, degree_centrality, eigenvector, DistanceTransform};
use cofollow_core::projection::{build_graph, density, CoEdge, CoFollowerGraph, normalize_weights, qualify, Normalization, TruncationEstimate, WeightKind};
use cofollow_core::stats::{logistic_fit, ols_fit, ColumnMeta, Design};
use cofollow_core::topics::{assign_topics, build_semantic_network, extract_topics, AssignMode, FollowerDoc, TextRules};
use oracles::*;
use rand::Rng;
use rand_distr::{Distribution, Normal};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed < limit, format!("took {elapsed:?}, limit {limit:?}"))
}

fn truncation_correction() -> Outcome {
    let (f, t, p) = (21_123.0, 10_000, 0.685);
    let start = Instant::now();
    let e = TruncationEstimate::new(f, t, p).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    // closed form, evaluated independently
    let attenuation = (((f - t as f64) * p + t as f64) / f).powi(2);
    check((e.attenuation - attenuation).abs() < 1e-12, format!("attenuation {} vs closed form {attenuation}", e.attenuation))?;
    check((e.correction - 1.437).abs() <= 0.002, format!("correction {}", e.correction))?;
    check((e.attenuation - 0.696).abs() <= 0.002, format!("attenuation {}", e.attenuation))?;
    check((e.correction * e.attenuation - 1.0).abs() < 1e-12, "correction is not the reciprocal of attenuation")?;
    within(elapsed, Duration::from_millis(1))?;
    Ok(format!("correction={:.4} attenuation={:.4} ({elapsed:?})", e.correction, e.attenuation))
}

fn density_check() -> Outcome {
    let (n, m) = (1450usize, 928_476usize);
    // mock graph: the first m pairs of the complete graph in (a, b) order
    let edges: Vec<CoEdge> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| CoEdge { a, b, raw: 1, norm: 1.0 }))
        .take(m)
        .collect();
    let g = CoFollowerGraph {
        nodes: (0..n).map(|i| format!("n{i}")).collect(),
        edges,
        qualified_counts: vec![1; n],
        normalization: None,
    };
    check(g.edge_count() == m, "mock graph has the wrong edge count")?;
    let start = Instant::now();
    let d = g.density().map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check((d - 0.8838).abs() <= 0.0005, format!("density {d}"))?;
    check((d - 2.0 * m as f64 / (n * (n - 1)) as f64).abs() < 1e-15, "density differs from 2m/(n(n-1))")?;
    check(density(n, m) == Ok(d), "free function disagrees with the graph method")?;
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("density={d:.4} ({elapsed:?})"))
}

fn projection_oracle_check() -> Outcome {
    let start = Instant::now();
    let mut r = rng(3001);
    for case in 0..200 {
        let lists = random_bipartite(&mut r, 12, 60);
        let threshold = 1 + case % 3;
        let ds = FollowerDataset::from_lists(lists.clone(), 10_000).map_err(|e| e.to_string())?;
        let g = build_graph(&ds, &qualify(&ds, threshold).map_err(|e| e.to_string())?);
        let got: BTreeMap<(String, String), u64> = g
            .edges
            .iter()
            .map(|e| {
                let (x, y) = (g.nodes[e.a].clone(), g.nodes[e.b].clone());
                (if x < y { (x, y) } else { (y, x) }, e.raw)
            })
            .collect();
        check(got == projection_oracle(&lists, threshold), format!("case {case} differs from the triple loop"))?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(10))?;
    Ok(format!("200 instances exact ({elapsed:?})"))
}

fn centrality_oracle_check() -> Outcome {
    let start = Instant::now();
    let mut r = rng(3002);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let n = r.random_range(3..=8);
        let g = random_connected(&mut r, n, 0.4, case % 2 == 0);
        let t = DistanceTransform::InverseWeight;
        let (c_ref, b_ref) = path_oracle(&g, |w| t.length(w));
        let c = closeness(&g, t, false).map_err(|e| e.to_string())?.values;
        let b = betweenness(&g, t, false).map_err(|e| e.to_string())?;
        let e = eigenvector(&g, 1e-10, 100_000).map_err(|e| e.to_string())?;
        let e_ref = principal_eigenvector(&g);
        for v in 0..n {
            worst = worst.max((c[v] - c_ref[v]).abs()).max((b[v] - b_ref[v]).abs()).max((e[v] - e_ref[v]).abs());
        }
        check(worst < 1e-8, format!("case {case}: deviation {worst:e}"))?;
        check(clustering(&g) == clustering_oracle(&g), format!("case {case}: clustering not exact"))?;
        let deg = degree_centrality(&g);
        check(
            (0..n).all(|v| deg[v] == g.degree(v) as f64 / (n - 1) as f64),
            format!("case {case}: degree not exact"),
        )?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!("100 graphs, max deviation {worst:.1e} ({elapsed:?})"))
}

fn clique_edges(base: usize, k: usize) -> Vec<(usize, usize, f64)> {
    (0..k).flat_map(|a| (a + 1..k).map(move |b| (base + a, base + b, 1.0))).collect()
}

fn modularity_check() -> Outcome {
    let start = Instant::now();
    let g = bridged_cliques(5);
    let q_one = modularity(&g, &[0; 10], 1.0).map_err(|e| e.to_string())?;
    check(q_one == 0.0, format!("Q(one cluster) = {q_one:e}"))?;

    let mut edges = clique_edges(0, 4);
    edges.extend(clique_edges(4, 4));
    let two = WeightedGraph::from_edges(8, edges).map_err(|e| e.to_string())?;
    let labels: Vec<usize> = (0..8).map(|v| v / 4).collect();
    let q_two = modularity(&two, &labels, 1.0).map_err(|e| e.to_string())?;
    check(q_two == 0.5, format!("Q(two cliques) = {q_two}"))?;
    check(modularity_oracle(&two, &labels, 1.0) == 0.5, "pairwise oracle disagrees on the two cliques")?;

    let (best, q_best) = exhaustive_best_partition(&g, 1.0);
    let p = louvain(&g, 1.0, 42).map_err(|e| e.to_string())?;
    check(same_partition(&p.assignment, &best), "Louvain missed the exhaustive optimum")?;
    check(same_partition(&best, &(0..10).map(|v| v / 5).collect::<Vec<_>>()), "optimum is not the two cliques")?;

    let mut r = rng(3003);
    let truth: Vec<usize> = (0..40).map(|v| v / 20).collect();
    let mut recovered = 0;
    for seed in 0..50 {
        let g = planted_blocks(&mut r, 20, 0.9, 0.05);
        let p = louvain(&g, 1.0, seed).map_err(|e| e.to_string())?;
        if same_partition(&p.assignment, &truth) {
            recovered += 1;
        }
    }
    check(recovered >= 45, format!("planted blocks recovered in {recovered}/50"))?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(60))?;
    Ok(format!("Q1=0 Q2=0.5 Qopt={q_best:.4} planted {recovered}/50 ({elapsed:?})"))
}

fn induced_conservation() -> Outcome {
    let start = Instant::now();
    let mut r = rng(3004);
    for case in 0..100 {
        let n = r.random_range(1..40);
        let k = r.random_range(1..6);
        let g = random_graph(&mut r, n, 0.3);
        let labels: Vec<usize> = (0..n).map(|_| r.random_range(0..k)).collect();
        let p = Partition::from_labels(&labels, 1.0, 0, &g);
        let ind = induce(&g, &p).map_err(|e| e.to_string())?;
        // count by hand from the edge list
        let mut cross: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        let mut intra = vec![0u64; p.cluster_count()];
        for &(a, b, _) in g.edges() {
            let (ca, cb) = (p.assignment[a], p.assignment[b]);
            if ca == cb {
                intra[ca] += 1;
            } else {
                *cross.entry((ca.min(cb), ca.max(cb))).or_default() += 1;
            }
        }
        let got: BTreeMap<(usize, usize), u64> = ind.edges.iter().map(|&(a, b, w)| ((a, b), w)).collect();
        check(got == cross && ind.intra == intra, format!("case {case}: induced counts differ"))?;
        let total: u64 = ind.edges.iter().map(|e| e.2).sum::<u64>() + ind.intra.iter().sum::<u64>();
        check(total == g.edge_count() as u64, format!("case {case}: {total} != {}", g.edge_count()))?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!("100 pairs exact ({elapsed:?})"))
}

fn design_from(xs: &[Vec<f64>]) -> Design {
    let p = xs[0].len();
    let mut columns = vec![ColumnMeta::intercept()];
    columns.extend((0..p).map(|j| ColumnMeta::new(format!("x{j}"), format!("x{j}"), false)));
    let rows = xs.iter().map(|x| std::iter::once(1.0).chain(x.iter().copied()).collect()).collect();
    Design::new(columns, rows).unwrap()
}

fn regression_check() -> Outcome {
    let start = Instant::now();
    let mut r = rng(3005);
    let std_normal = Normal::new(0.0, 1.0).unwrap();

    let beta = [0.7, 1.5, -2.0, 0.25];
    let n = 10_000;
    let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| std_normal.sample(&mut r)).collect()).collect();
    let y: Vec<f64> = xs
        .iter()
        .map(|x| beta[0] + beta[1] * x[0] + beta[2] * x[1] + beta[3] * x[2] + 0.01 * std_normal.sample(&mut r))
        .collect();
    let d = design_from(&xs);
    let fit = ols_fit(&d, &y).map_err(|e| e.to_string())?;
    let err = fit.coefficients.iter().zip(&beta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    check(err <= 0.01, format!("OLS coefficient error {err}"))?;
    let resid: Vec<f64> = d
        .rows
        .iter()
        .zip(&y)
        .map(|(row, yi)| yi - row.iter().zip(&fit.coefficients).map(|(x, b)| x * b).sum::<f64>())
        .collect();
    let ortho = (0..d.ncols())
        .map(|j| d.rows.iter().zip(&resid).map(|(row, e)| row[j] * e).sum::<f64>().abs())
        .fold(0.0, f64::max);
    check(ortho < 1e-8, format!("max |X'e| = {ortho:e}"))?;

    let mut rejections = 0;
    for _ in 0..1000 {
        let xs: Vec<Vec<f64>> = (0..50).map(|_| vec![std_normal.sample(&mut r)]).collect();
        let y: Vec<f64> = (0..50).map(|_| std_normal.sample(&mut r)).collect();
        let fit = ols_fit(&design_from(&xs), &y).map_err(|e| e.to_string())?;
        if fit.p_values[1] <= 0.05 {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / 1000.0;
    check((rate - 0.05).abs() <= 0.02, format!("null rejection rate {rate}"))?;

    let n = 50_000;
    let xs: Vec<Vec<f64>> = (0..n).map(|_| vec![std_normal.sample(&mut r)]).collect();
    let y: Vec<f64> = xs
        .iter()
        .map(|x| {
            let p = 1.0 / (1.0 + (-(-1.0 + 2.0 * x[0])).exp());
            if r.random_bool(p) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let logit = logistic_fit(&design_from(&xs), &y).map_err(|e| e.to_string())?;
    let lerr = (logit.coefficients[0] + 1.0).abs().max((logit.coefficients[1] - 2.0).abs());
    check(lerr <= 0.05, format!("logit coefficient error {lerr}"))?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(120))?;
    Ok(format!(
        "OLS err {err:.1e}, |X'e| {ortho:.1e}, null rate {rate:.3}, logit err {lerr:.3} ({elapsed:?})"
    ))
}

fn eigen_scale_invariance() -> Outcome {
    let mut r = rng(3006);
    let mut graphs = 0;
    let mut worst: f64 = 1.0;
    let mut attempts = 0;
    while graphs < 50 {
        attempts += 1;
        check(attempts < 5000, "could not draw 50 connected projections")?;
        let lists = random_bipartite(&mut r, 12, 60);
        let ds = FollowerDataset::from_lists(lists, 10_000).map_err(|e| e.to_string())?;
        let g = normalize_weights(build_graph(&ds, &qualify(&ds, 1).map_err(|e| e.to_string())?), Normalization::MaxScale);
        let raw = g.weighted(WeightKind::Raw).map_err(|e| e.to_string())?;
        if g.node_count() < 3 || !raw.is_connected() {
            continue;
        }
        let scaled = g.weighted(WeightKind::Normalized).map_err(|e| e.to_string())?;
        let a = eigenvector(&raw, 1e-10, 100_000).map_err(|e| e.to_string())?;
        let b = eigenvector(&scaled, 1e-10, 100_000).map_err(|e| e.to_string())?;
        let rho = if a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12) { 1.0 } else { pearson(&a, &b) };
        worst = worst.min(rho);
        graphs += 1;
    }
    check(worst >= 1.0 - 1e-9, format!("minimum correlation {worst}"))?;
    Ok(format!("50 graphs, minimum correlation 1-{:.1e}", 1.0 - worst))
}

fn topic_check() -> Outcome {
    let start = Instant::now();
    let stop = load_stopwords(None).map_err(|e| e.to_string())?;
    let rules = TextRules::default();
    let none = BTreeSet::new();
    let mut r = rng(3007);
    let (raw, pools) = two_pool_corpus(&mut r, [60, 40]);
    let docs: Vec<FollowerDoc> =
        raw.iter().map(|(id, t)| FollowerDoc::new(id.clone(), t.clone(), &stop, &rules, &none)).collect();
    let net = build_semantic_network(&docs, 10).map_err(|e| e.to_string())?;
    let topics = extract_topics(&net, 1.0, 42).map_err(|e| e.to_string())?;
    check(topics.len() == 2, format!("{} topics", topics.len()))?;
    for (pi, pool) in pools.iter().enumerate() {
        let want: BTreeSet<&str> = pool.iter().copied().collect();
        let holder = topics
            .iter()
            .find(|t| t.tokens.iter().any(|w| want.contains(w.as_str())))
            .ok_or(format!("pool {pi} has no topic"))?;
        let got: BTreeSet<&str> = holder.tokens.iter().map(String::as_str).collect();
        check(got == want, format!("pool {pi}: topic tokens {got:?}"))?;
    }
    let assignment = assign_topics(&docs, &topics, AssignMode::ContainsAny).map_err(|e| e.to_string())?;
    let mut counts = assignment.counts.clone();
    counts.sort_unstable();
    check(counts == [40, 60], format!("assignment counts {:?}", assignment.counts))?;

    // a pair in exactly 9 documents stays out, in 10 it enters
    for (copies, expect) in [(9usize, false), (10, true)] {
        let docs: Vec<FollowerDoc> = (0..copies)
            .map(|i| FollowerDoc::new(format!("d{i}"), "kayak canoe", &stop, &rules, &none))
            .chain((0..30).map(|i| FollowerDoc::new(format!("e{i}"), "river", &stop, &rules, &none)))
            .collect();
        let has = build_semantic_network(&docs, 10).map(|n| n.weight("canoe", "kayak").is_some()).unwrap_or(false);
        check(has == expect, format!("pair with {copies} co-occurrences: edge present = {has}"))?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(10))?;
    Ok(format!("2 topics exact, counts {counts:?}, boundary 9/10 ({elapsed:?})"))
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let dirs: Vec<tempfile::TempDir> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for d in &dirs[..2] {
        Pipeline::new(fixture::fixture_config(d.path())).run().map_err(|e| e.to_string())?;
    }
    let staged = Pipeline::new(fixture::fixture_config(dirs[2].path()));
    for step in Step::ALL {
        staged.step(step).map_err(|e| e.to_string())?;
    }
    staged.write_manifest().map_err(|e| e.to_string())?;
    let snaps: Vec<_> = dirs.iter().map(|d| fixture::snapshot(d.path())).collect();
    check(snaps[0] == snaps[1], "two runs with the same seed differ")?;
    check(snaps[0] == snaps[2], "stagewise run differs from the monolithic run")?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!("{} files byte-identical ({elapsed:?})", snaps[0].len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("truncation correction", truncation_correction),
        ("density", density_check),
        ("projection oracle", projection_oracle_check),
        ("centrality oracle", centrality_oracle_check),
        ("modularity and Louvain", modularity_check),
        ("induced-graph conservation", induced_conservation),
        ("OLS and logistic regression", regression_check),
        ("eigenvector scale invariance", eigen_scale_invariance),
        ("topics", topic_check),
        ("end-to-end determinism", end_to_end),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2}. {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
