//! Artifact writers and the readers used to resume from earlier stages.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading
//! an artifact back yields bit-identical values.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use cofollow_core::community::{InducedGraph, Partition};
use cofollow_core::metrics::{CorrelationMatrix, NodeMetrics};
use cofollow_core::projection::{CoEdge, CoFollowerGraph, Normalization};
use cofollow_core::stats::{ClusterFits, RegressionFit};
use cofollow_core::topics::{Topic, TopicAssignment};

use crate::error::{Error, Result};

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(f)))
}

fn finish(mut w: csv::Writer<BufWriter<File>>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn rows<I, R>(path: &Path, header: &[&str], records: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = writer(path)?;
    let err = |e: csv::Error| Error::parse(path, e);
    w.write_record(header).map_err(err)?;
    for r in records {
        w.write_record(r).map_err(err)?;
    }
    finish(w, path)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Reader::from_reader(f))
}

fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<(u64, Vec<String>)>> {
    let mut r = reader(path)?;
    let got = r.headers().map_err(|e| Error::line(path, 1, e))?;
    if got.iter().collect::<Vec<_>>() != header {
        return Err(Error::line(path, 1, format!("expected header `{}`", header.join(","))));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::line(path, e.position().map_or(0, |p| p.line()), e))?;
        let line = rec.position().map_or(0, |p| p.line());
        out.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(path: &Path, line: u64, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse().map_err(|e| Error::line(path, line, format!("cannot parse `{v}`: {e}")))
}

pub const EDGE_HEADER: [&str; 4] = ["src", "dst", "raw_weight", "norm_weight"];
pub const NODE_HEADER: [&str; 3] = ["id", "qualified_followers", "degree"];

pub fn write_edges(path: &Path, g: &CoFollowerGraph) -> Result<()> {
    rows(
        path,
        &EDGE_HEADER,
        g.edges.iter().map(|e| [g.nodes[e.a].clone(), g.nodes[e.b].clone(), e.raw.to_string(), e.norm.to_string()]),
    )
}

pub fn write_nodes(path: &Path, g: &CoFollowerGraph) -> Result<()> {
    let mut degree = vec![0usize; g.node_count()];
    for e in &g.edges {
        degree[e.a] += 1;
        degree[e.b] += 1;
    }
    rows(
        path,
        &NODE_HEADER,
        g.nodes.iter().enumerate().map(|(i, id)| [id.clone(), g.qualified_counts[i].to_string(), degree[i].to_string()]),
    )
}

/// Rebuilds the projected graph from `nodes.csv` and `edges.csv`.
pub fn read_graph(nodes_path: &Path, edges_path: &Path, normalization: Normalization) -> Result<CoFollowerGraph> {
    let mut nodes = Vec::new();
    let mut qualified_counts = Vec::new();
    for (line, r) in read_rows(nodes_path, &NODE_HEADER)? {
        nodes.push(r[0].clone());
        qualified_counts.push(field(nodes_path, line, &r[1])?);
    }
    let index: std::collections::HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut edges = Vec::new();
    for (line, r) in read_rows(edges_path, &EDGE_HEADER)? {
        let endpoint = |s: &str| {
            index.get(s).copied().ok_or_else(|| Error::line(edges_path, line, format!("unknown node `{s}`")))
        };
        edges.push(CoEdge {
            a: endpoint(&r[0])?,
            b: endpoint(&r[1])?,
            raw: field(edges_path, line, &r[2])?,
            norm: field(edges_path, line, &r[3])?,
        });
    }
    Ok(CoFollowerGraph { nodes, edges, qualified_counts, normalization: Some(normalization) })
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn write_graphml(path: &Path, g: &CoFollowerGraph) -> Result<()> {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    s.push_str("  <key id=\"qualified\" for=\"node\" attr.name=\"qualified_followers\" attr.type=\"long\"/>\n");
    s.push_str("  <key id=\"raw\" for=\"edge\" attr.name=\"raw_weight\" attr.type=\"long\"/>\n");
    s.push_str("  <key id=\"norm\" for=\"edge\" attr.name=\"norm_weight\" attr.type=\"double\"/>\n");
    s.push_str("  <graph id=\"cofollow\" edgedefault=\"undirected\">\n");
    for (i, id) in g.nodes.iter().enumerate() {
        let _ = writeln!(
            s,
            "    <node id=\"{}\"><data key=\"qualified\">{}</data></node>",
            xml_escape(id),
            g.qualified_counts[i]
        );
    }
    for e in &g.edges {
        let _ = writeln!(
            s,
            "    <edge source=\"{}\" target=\"{}\"><data key=\"raw\">{}</data><data key=\"norm\">{}</data></edge>",
            xml_escape(&g.nodes[e.a]),
            xml_escape(&g.nodes[e.b]),
            e.raw,
            e.norm
        );
    }
    s.push_str("  </graph>\n</graphml>\n");
    write_text(path, &s)
}

pub const METRIC_HEADER: [&str; 7] = ["id", "degree", "strength", "closeness", "betweenness", "eigenvector", "clustering"];

pub fn write_metrics(path: &Path, ids: &[String], m: &NodeMetrics) -> Result<()> {
    rows(
        path,
        &METRIC_HEADER,
        ids.iter().enumerate().map(|(i, id)| {
            [
                id.clone(),
                m.degree[i].to_string(),
                m.strength[i].to_string(),
                m.closeness[i].to_string(),
                m.betweenness[i].to_string(),
                m.eigenvector[i].to_string(),
                m.clustering[i].to_string(),
            ]
        }),
    )
}

/// Reads `metrics.csv`, checking that rows follow `ids`.
pub fn read_metrics(path: &Path, ids: &[String], harmonic: bool) -> Result<NodeMetrics> {
    let mut m = NodeMetrics {
        degree: Vec::new(),
        strength: Vec::new(),
        closeness: Vec::new(),
        betweenness: Vec::new(),
        eigenvector: Vec::new(),
        clustering: Vec::new(),
        harmonic_closeness: harmonic,
    };
    let records = read_rows(path, &METRIC_HEADER)?;
    if records.len() != ids.len() {
        return Err(Error::parse(path, format!("{} rows for {} nodes", records.len(), ids.len())));
    }
    for ((line, r), id) in records.into_iter().zip(ids) {
        if &r[0] != id {
            return Err(Error::line(path, line, format!("expected node `{id}`, found `{}`", r[0])));
        }
        m.degree.push(field(path, line, &r[1])?);
        m.strength.push(field(path, line, &r[2])?);
        m.closeness.push(field(path, line, &r[3])?);
        m.betweenness.push(field(path, line, &r[4])?);
        m.eigenvector.push(field(path, line, &r[5])?);
        m.clustering.push(field(path, line, &r[6])?);
    }
    Ok(m)
}

pub fn write_correlations(path: &Path, c: &CorrelationMatrix) -> Result<()> {
    let mut header = vec!["measure"];
    header.extend(c.names.iter().copied());
    rows(
        path,
        &header,
        c.names.iter().zip(&c.values).map(|(name, row)| {
            let mut rec = vec![name.to_string()];
            rec.extend(row.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
            rec
        }),
    )
}

pub fn write_partition(path: &Path, ids: &[String], p: &Partition) -> Result<()> {
    rows(path, &["node", "cluster"], ids.iter().zip(&p.assignment).map(|(id, c)| [id.clone(), c.to_string()]))
}

/// Cluster labels in node order.
pub fn read_partition(path: &Path, ids: &[String]) -> Result<Vec<usize>> {
    let records = read_rows(path, &["node", "cluster"])?;
    if records.len() != ids.len() {
        return Err(Error::parse(path, format!("{} rows for {} nodes", records.len(), ids.len())));
    }
    records
        .into_iter()
        .zip(ids)
        .map(|((line, r), id)| {
            if &r[0] != id {
                return Err(Error::line(path, line, format!("expected node `{id}`, found `{}`", r[0])));
            }
            field(path, line, &r[1])
        })
        .collect()
}

pub fn write_clusters(path: &Path, induced: &InducedGraph) -> Result<()> {
    rows(
        path,
        &["cluster", "name", "size", "intra_edges"],
        (0..induced.sizes.len()).map(|c| {
            [c.to_string(), induced.names[c].clone(), induced.sizes[c].to_string(), induced.intra[c].to_string()]
        }),
    )
}

pub fn write_induced(path: &Path, induced: &InducedGraph) -> Result<()> {
    rows(path, &["src", "dst", "weight"], induced.edges.iter().map(|&(a, b, w)| [a.to_string(), b.to_string(), w.to_string()]))
}

/// Reads `clusters.csv` and `induced.csv` back into an induced graph.
pub fn read_induced(clusters_path: &Path, induced_path: &Path) -> Result<InducedGraph> {
    let mut g = InducedGraph { sizes: Vec::new(), names: Vec::new(), edges: Vec::new(), intra: Vec::new() };
    for (line, r) in read_rows(clusters_path, &["cluster", "name", "size", "intra_edges"])? {
        g.names.push(r[1].clone());
        g.sizes.push(field(clusters_path, line, &r[2])?);
        g.intra.push(field(clusters_path, line, &r[3])?);
    }
    for (line, r) in read_rows(induced_path, &["src", "dst", "weight"])? {
        g.edges.push((field(induced_path, line, &r[0])?, field(induced_path, line, &r[1])?, field(induced_path, line, &r[2])?));
    }
    Ok(g)
}

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Cluster graph for Graphviz: node `size` is the cluster cardinality and
/// `width` grows with its square root; edge `weight` is the cross-edge
/// count and `penwidth` scales it to `[1, 10]`.
pub fn induced_dot(induced: &InducedGraph) -> String {
    let max_size = induced.sizes.iter().copied().max().unwrap_or(1).max(1) as f64;
    let max_w = induced.edges.iter().map(|e| e.2).max().unwrap_or(1).max(1) as f64;
    let mut s = String::from("graph clusters {\n  node [shape=circle, fixedsize=true];\n");
    for (c, name) in induced.names.iter().enumerate() {
        let width = 0.5 + 2.0 * (induced.sizes[c] as f64 / max_size).sqrt();
        let _ = writeln!(
            s,
            "  c{c} [label={}, size={}, width={:.3}];",
            dot_id(&format!("{name} ({})", induced.sizes[c])),
            induced.sizes[c],
            width
        );
    }
    for &(a, b, w) in &induced.edges {
        let pen = 1.0 + 9.0 * w as f64 / max_w;
        let _ = writeln!(s, "  c{a} -- c{b} [weight={w}, penwidth={pen:.3}];");
    }
    s.push_str("}\n");
    s
}

pub const FIT_HEADER: [&str; 9] =
    ["model", "term", "label", "coefficient", "std_error", "statistic", "p_value", "n", "fit_statistic"];

/// Long-format coefficient table; `fit_statistic` holds R² (OLS) or the
/// log-likelihood (logistic).
pub fn write_fits(path: &Path, fits: &[(String, &RegressionFit)]) -> Result<()> {
    let mut records = Vec::new();
    for (name, fit) in fits {
        let stat = fit.r_squared.or(fit.log_likelihood).map(|v| v.to_string()).unwrap_or_default();
        for (j, col) in fit.columns.iter().enumerate() {
            records.push([
                name.clone(),
                col.name.clone(),
                col.label.clone(),
                fit.coefficients[j].to_string(),
                fit.std_errors[j].to_string(),
                fit.statistics[j].to_string(),
                fit.p_values[j].to_string(),
                fit.n_samples.to_string(),
                stat.clone(),
            ]);
        }
    }
    rows(path, &FIT_HEADER, records)
}

pub fn write_cluster_skips(path: &Path, fits: &ClusterFits, names: &[String]) -> Result<()> {
    rows(
        path,
        &["cluster", "name", "reason"],
        fits.skipped.iter().map(|(c, reason)| {
            [c.to_string(), names.get(*c).cloned().unwrap_or_default(), reason.to_string()]
        }),
    )
}

pub fn write_topics(path: &Path, topics: &[Topic], assignment: &TopicAssignment) -> Result<()> {
    rows(
        path,
        &["id", "top_terms", "count", "tokens"],
        topics.iter().map(|t| {
            [t.id.to_string(), t.top_terms().join(" "), assignment.counts[t.id].to_string(), t.tokens.len().to_string()]
        }),
    )
}

pub fn write_topic_assignments(path: &Path, a: &TopicAssignment) -> Result<()> {
    rows(
        path,
        &["follower", "topics"],
        a.per_doc.iter().map(|(id, ts)| [id.clone(), ts.iter().map(usize::to_string).collect::<Vec<_>>().join(";")]),
    )
}

pub fn write_semantic_edges(path: &Path, net: &cofollow_core::topics::SemanticNetwork) -> Result<()> {
    rows(
        path,
        &["src", "dst", "count"],
        net.edges.iter().map(|&(a, b, c)| [net.nodes[a].0.clone(), net.nodes[b].0.clone(), c.to_string()]),
    )
}

/// Flushes a pretty-printed JSON document with a trailing newline.
pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::parse(path, e))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json(path: &Path) -> Result<serde_json::Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e))
}
