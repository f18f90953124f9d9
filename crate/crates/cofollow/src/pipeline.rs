//! Pipeline steps over an output directory.
//!
//! Each step reads the artifacts of the steps it depends on, writes its own,
//! and records a key in `.stamps/<step>`. The key hashes the configuration
//! values the step uses, its input files, and the keys of its dependencies,
//! so a missing or outdated upstream artifact is detected before any work is
//! done. `run` executes every step in order through the same code path.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use cofollow_core::community::{induce, louvain, modularity, name_clusters, Partition};
use cofollow_core::data_model::{build_features, FeatureConfig, FeatureTable, FollowerDataset, InstitutionTable};
use cofollow_core::metrics::{centrality_correlation_report, MetricOptions};
use cofollow_core::projection::{
    build_graph, normalize_weights, qualify, CoFollowerGraph, TruncationEstimate, WeightKind,
};
use cofollow_core::stats::{
    cluster_membership_fits, dyadic_design, monadic_design, monadic_fits, ols_fit, significance_table, DyadicOptions,
    MembershipOptions, RegressionFit,
};
use cofollow_core::topics::{assign_topics, extract_topics, select_top_followers, top_follower_threshold, TextRules};
use serde_json::{json, Value};

use crate::config::{hash_pairs, sha256_bytes, PipelineConfig};
use crate::error::{Error, Result};
use crate::formats::*;
use crate::io::{load_descriptions, load_followers, load_institutions, load_stopwords, write_followers, write_institutions, Schema};
use crate::parallel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Step {
    Ingest,
    Graph,
    Metrics,
    Communities,
    RegressMonadic,
    RegressDyadic,
    RegressClusters,
    Topics,
    ExportDot,
    Report,
}

impl Step {
    pub const ALL: [Step; 10] = [
        Step::Ingest,
        Step::Graph,
        Step::Metrics,
        Step::Communities,
        Step::RegressMonadic,
        Step::RegressDyadic,
        Step::RegressClusters,
        Step::Topics,
        Step::ExportDot,
        Step::Report,
    ];

    /// Subcommand name.
    pub fn command(self) -> &'static str {
        match self {
            Step::Ingest => "ingest",
            Step::Graph => "graph",
            Step::Metrics => "metrics",
            Step::Communities => "communities",
            Step::RegressMonadic => "regress-monadic",
            Step::RegressDyadic => "regress-dyadic",
            Step::RegressClusters => "regress-clusters",
            Step::Topics => "topics",
            Step::ExportDot => "export-dot",
            Step::Report => "report",
        }
    }

    /// Stage name used to prefix errors.
    pub fn stage(self) -> &'static str {
        match self {
            Step::Ingest => "ingest",
            Step::Graph => "projection",
            Step::Metrics => "metrics",
            Step::Communities => "communities",
            Step::RegressMonadic | Step::RegressDyadic | Step::RegressClusters => "regressions",
            Step::Topics => "topics",
            Step::ExportDot => "export",
            Step::Report => "report",
        }
    }

    pub fn deps(self) -> &'static [Step] {
        match self {
            Step::Ingest => &[],
            Step::Graph => &[Step::Ingest],
            Step::Metrics => &[Step::Graph],
            Step::Communities => &[Step::Ingest, Step::Graph],
            Step::RegressMonadic => &[Step::Ingest, Step::Graph, Step::Metrics],
            Step::RegressDyadic => &[Step::Ingest, Step::Graph],
            Step::RegressClusters => &[Step::Ingest, Step::Graph, Step::Communities],
            Step::Topics => &[Step::Ingest, Step::Graph],
            Step::ExportDot => &[Step::Communities],
            Step::Report => &[Step::Ingest, Step::Graph, Step::Metrics, Step::Communities],
        }
    }

    /// Configuration keys whose values change this step's output.
    fn keys(self) -> &'static [&'static str] {
        match self {
            Step::Ingest => &["schema"],
            Step::Graph => &["truncation", "threshold", "normalization"],
            Step::Metrics => &["distance", "centrality_weights", "harmonic_fallback", "eigen_tol", "eigen_max_iter"],
            Step::Communities => &["resolution", "seed"],
            Step::RegressMonadic => &["z_score", "combine_type_religious", "log_counters", "alpha"],
            Step::RegressDyadic => &["dyadic_coding", "dyadic_response", "alpha"],
            Step::RegressClusters => &["z_score", "combine_type_religious", "cluster_model", "cluster_min_size", "alpha"],
            Step::Topics => &["top_fraction", "min_cooccurrence", "topic_resolution", "seed", "assign_mode"],
            Step::ExportDot => &[],
            Step::Report => &[],
        }
    }
}

pub const MANIFEST: &str = "manifest.json";
pub const INCOMPLETE: &str = "INCOMPLETE";
const STAMPS: &str = ".stamps";

pub struct Pipeline {
    pub config: PipelineConfig,
}

fn file_hash(path: &Path) -> Result<String> {
    Ok(sha256_bytes(&fs::read(path).map_err(|e| Error::io(path, e))?))
}

fn required<'a>(p: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    p.as_deref().ok_or_else(|| Error::Usage(format!("no `{key}` input configured")))
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Self {
        Self { config }
    }

    pub fn out(&self) -> &Path {
        &self.config.output
    }

    fn path(&self, name: &str) -> PathBuf {
        self.config.output.join(name)
    }

    /// Key identifying the inputs and settings behind a step's artifacts.
    pub fn key(&self, step: Step) -> Result<String> {
        let mut pairs: Vec<(String, String)> = vec![("step".into(), step.command().into())];
        for k in step.keys() {
            pairs.push((k.to_string(), self.config.get(k).unwrap_or_default()));
        }
        match step {
            Step::Ingest => {
                pairs.push(("institutions".into(), file_hash(required(&self.config.institutions, "institutions")?)?));
            }
            Step::Graph => {
                pairs.push(("followers".into(), file_hash(required(&self.config.followers, "followers")?)?));
            }
            Step::Topics => {
                pairs.push(("descriptions".into(), file_hash(required(&self.config.descriptions, "descriptions")?)?));
                if let Some(s) = &self.config.stopwords {
                    pairs.push(("stopwords".into(), file_hash(s)?));
                }
            }
            _ => {}
        }
        for &d in step.deps() {
            pairs.push((d.command().into(), self.key(d)?));
        }
        Ok(hash_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str()))))
    }

    fn stamp_path(&self, step: Step) -> PathBuf {
        self.path(STAMPS).join(step.command())
    }

    fn check_deps(&self, step: Step) -> Result<()> {
        for &d in step.deps() {
            let expected = self.key(d)?;
            match fs::read_to_string(self.stamp_path(d)) {
                Err(_) => {
                    return Err(Error::Stale(format!(
                        "output of `{}` is missing in {}; run `cofollow {}` first",
                        d.command(),
                        self.out().display(),
                        d.command()
                    )))
                }
                Ok(found) if found.trim() != expected => {
                    return Err(Error::Stale(format!(
                        "output of `{}` is stale for this configuration; rerun `cofollow {}`",
                        d.command(),
                        d.command()
                    )))
                }
                Ok(_) => {}
            }
        }
        Ok(())
    }

    /// Runs one step: dependency check, work, stamp. Failures leave an
    /// `INCOMPLETE` marker naming the stage.
    pub fn step(&self, step: Step) -> Result<()> {
        let result = self.check_deps(step).and_then(|_| self.execute(step)).and_then(|_| {
            let key = self.key(step)?;
            write_text(&self.stamp_path(step), &format!("{key}\n"))
        });
        match result {
            Ok(()) => {
                let marker = self.path(INCOMPLETE);
                if let Ok(text) = fs::read_to_string(&marker) {
                    if text.starts_with(&format!("{}:", step.command())) {
                        let _ = fs::remove_file(&marker);
                    }
                }
                Ok(())
            }
            Err(e) => {
                let e = e.in_stage(step.stage());
                let _ = fs::create_dir_all(self.out());
                let _ = fs::write(self.path(INCOMPLETE), format!("{}: {e}\n", step.command()));
                Err(e)
            }
        }
    }

    /// Every step in order, then the manifest. Topics are skipped when no
    /// descriptions file is configured.
    pub fn run(&self) -> Result<()> {
        for step in Step::ALL {
            if step == Step::Topics && self.config.descriptions.is_none() {
                log::info!("no descriptions configured; skipping topics");
                continue;
            }
            log::info!("running {}", step.command());
            self.step(step)?;
        }
        self.write_manifest()
    }

    fn execute(&self, step: Step) -> Result<()> {
        match step {
            Step::Ingest => self.ingest(),
            Step::Graph => self.graph(),
            Step::Metrics => self.metrics(),
            Step::Communities => self.communities(),
            Step::RegressMonadic => self.regress_monadic(),
            Step::RegressDyadic => self.regress_dyadic(),
            Step::RegressClusters => self.regress_clusters(),
            Step::Topics => self.topics(),
            Step::ExportDot => self.export_dot(),
            Step::Report => self.report(),
        }
    }

    fn institutions(&self) -> Result<InstitutionTable> {
        load_institutions(&self.path("ingest/institutions.csv"), &Schema::default())
    }

    fn dataset(&self) -> Result<FollowerDataset> {
        let lists = load_followers(&self.path("followers.jsonl"))?;
        Ok(FollowerDataset::from_lists(lists, self.config.truncation)?)
    }

    fn graph_artifact(&self) -> Result<CoFollowerGraph> {
        read_graph(&self.path("nodes.csv"), &self.path("edges.csv"), self.config.normalization)
    }

    fn features(&self, table: &InstitutionTable) -> Result<FeatureTable> {
        let cfg = FeatureConfig {
            z_score: self.config.z_score,
            combine_type_religious: self.config.combine_type_religious,
            design_variables: None,
        };
        Ok(build_features(table, &cfg)?)
    }

    fn ingest(&self) -> Result<()> {
        let schema = Schema::parse(&self.config.schema)?;
        let table = load_institutions(required(&self.config.institutions, "institutions")?, &schema)?;
        let features = self.features(&table)?;
        let flagged: Vec<Value> = features
            .ids
            .iter()
            .zip(&features.missing)
            .filter(|(_, m)| !m.is_empty())
            .map(|(id, m)| json!({"id": id, "missing": m}))
            .collect();
        write_institutions(&self.path("ingest/institutions.csv"), &table)?;
        write_json(&self.path("ingest.json"), &json!({"institutions": table.len(), "flagged_rows": flagged}))
    }

    fn graph(&self) -> Result<()> {
        let table = self.institutions()?;
        let lists = load_followers(required(&self.config.followers, "followers")?)?;
        let original: Vec<usize> = lists.iter().map(|l| l.1.len()).collect();
        let t = self.config.truncation;
        let truncated: Vec<(String, Vec<String>)> =
            lists.into_iter().map(|(id, l)| (id, l.into_iter().take(t).collect())).collect();
        let ds = FollowerDataset::from_lists(truncated.clone(), t)?;

        let listed: BTreeSet<&str> = ds.institutions().iter().map(String::as_str).collect();
        let without_attributes: Vec<&str> =
            ds.institutions().iter().map(String::as_str).filter(|id| table.get(id).is_none()).collect();
        let without_lists: Vec<&str> =
            table.records().iter().map(|r| r.id.as_str()).filter(|id| !listed.contains(id)).collect();
        if !without_attributes.is_empty() {
            log::warn!("{} institutions have follower lists but no attributes", without_attributes.len());
        }

        // prefer the account follower counters when present: the lists
        // themselves may already be capped by the collection limit
        let counters: Vec<u64> =
            ds.institutions().iter().filter_map(|id| table.get(id)).map(|r| r.followers_count).collect();
        let (lengths, source): (Vec<f64>, &str) = if !counters.is_empty() && counters.iter().all(|&c| c > 0) {
            (counters.iter().map(|&c| c as f64).collect(), "followers_count")
        } else {
            (original.iter().map(|&c| c as f64).collect(), "list_length")
        };
        let truncation = if lengths.is_empty() {
            Value::Null
        } else {
            let mean = lengths.iter().sum::<f64>() / lengths.len() as f64;
            let p = lengths.iter().filter(|&&l| l <= t as f64).count() as f64 / lengths.len() as f64;
            match TruncationEstimate::new(mean, t, p) {
                Ok(e) => json!({
                    "source": source,
                    "mean_followers": e.mean_followers,
                    "truncation_limit": e.truncation_limit,
                    "p": e.p,
                    "attenuation": e.attenuation,
                    "correction": e.correction,
                }),
                Err(_) => Value::Null,
            }
        };

        let index = qualify(&ds, self.config.threshold)?;
        let g = normalize_weights(build_graph(&ds, &index), self.config.normalization);
        let components = g.components();
        if components.len() > 1 {
            log::warn!("co-follower graph has {} components", components.len());
        }
        write_followers(&self.path("followers.jsonl"), &truncated)?;
        write_edges(&self.path("edges.csv"), &g)?;
        write_nodes(&self.path("nodes.csv"), &g)?;
        write_graphml(&self.path("graph.graphml"), &g)?;
        let density = g.density().ok();
        write_json(
            &self.path("projection.json"),
            &json!({
                "nodes": g.node_count(),
                "edges": g.edge_count(),
                "density": density,
                "components": components.len(),
                "component_sizes": components.iter().map(Vec::len).collect::<Vec<_>>(),
                "threshold": index.threshold,
                "qualified_followers": index.members.len(),
                "excluded_followers": index.excluded,
                "followers": ds.follower_count(),
                "truncated_lists": original.iter().filter(|&&l| l > t).count(),
                "without_attributes": without_attributes,
                "without_follower_lists": without_lists,
                "normalization": self.config.get("normalization"),
                "truncation_estimate": truncation,
            }),
        )
    }

    fn metric_options(&self) -> MetricOptions {
        MetricOptions {
            distance: self.config.distance,
            eigen_tol: self.config.eigen_tol,
            eigen_max_iter: self.config.eigen_max_iter,
            harmonic_fallback: self.config.harmonic_fallback,
        }
    }

    fn metrics(&self) -> Result<()> {
        let g = self.graph_artifact()?;
        let main = g.weighted(self.config.centrality_weights)?;
        let norm = g.weighted(WeightKind::Normalized)?;
        let clustering_graph = (self.config.centrality_weights == WeightKind::Raw).then_some(&norm);
        let opts = self.metric_options();
        let m = parallel::with_workers(self.config.workers, || parallel::node_metrics(&main, clustering_graph, &opts))?;
        let corr = centrality_correlation_report(&m)?;
        write_metrics(&self.path("metrics.csv"), &g.nodes, &m)?;
        write_correlations(&self.path("correlations.csv"), &corr)?;
        write_json(
            &self.path("metrics.json"),
            &json!({
                "nodes": g.node_count(),
                "harmonic_closeness": m.harmonic_closeness,
                "distance": self.config.get("distance"),
                "centrality_weights": self.config.get("centrality_weights"),
            }),
        )
    }

    fn communities(&self) -> Result<()> {
        let g = self.graph_artifact()?;
        let w = g.weighted(WeightKind::Normalized)?;
        let p = louvain(&w, self.config.resolution, self.config.seed)?;
        let q = modularity(&w, &p.assignment, self.config.resolution)?;
        let mut induced = induce(&w, &p)?;
        induced.names = name_clusters(&p, &g.nodes, &self.institutions()?);
        write_partition(&self.path("partition.csv"), &g.nodes, &p)?;
        write_clusters(&self.path("clusters.csv"), &induced)?;
        write_induced(&self.path("induced.csv"), &induced)?;
        write_json(
            &self.path("communities.json"),
            &json!({
                "clusters": p.cluster_count(),
                "resolution": p.resolution,
                "seed": p.seed,
                "modularity": q,
                "modularity_at_1": p.modularity_at_1,
                "sizes": induced.sizes,
                "names": induced.names,
            }),
        )
    }

    fn partition_artifact(&self, g: &CoFollowerGraph) -> Result<Partition> {
        let labels = read_partition(&self.path("partition.csv"), &g.nodes)?;
        let w = g.weighted(WeightKind::Normalized)?;
        Ok(Partition::from_labels(&labels, self.config.resolution, self.config.seed, &w))
    }

    fn regress_monadic(&self) -> Result<()> {
        let table = self.institutions()?;
        let g = self.graph_artifact()?;
        let harmonic = read_json(&self.path("metrics.json"))?["harmonic_closeness"].as_bool().unwrap_or(false);
        let m = read_metrics(&self.path("metrics.csv"), &g.nodes, harmonic)?;
        let features = self.features(&table)?;
        let design = monadic_design(&features, &m, &g.nodes, &table, self.config.log_counters)?;
        let fits = monadic_fits(&design)?;
        let named: Vec<(String, &RegressionFit)> = fits.iter().map(|(n, f)| (n.to_string(), f)).collect();
        write_fits(&self.path("monadic_fits.csv"), &named)?;
        let sig = significance_table(&named, self.config.alpha);
        write_text(&self.path("monadic_table.md"), &table_markdown(&sig.to_markdown(3), self.config.alpha))?;
        write_json(
            &self.path("regress_monadic.json"),
            &json!({
                "samples": design.base.design.nrows(),
                "columns": design.base.design.ncols(),
                "dropped_rows": design.dropped_rows,
                "dropped_columns": design.base.dropped_columns,
                "significant_rows": sig.rows.len(),
            }),
        )
    }

    fn regress_dyadic(&self) -> Result<()> {
        let table = self.institutions()?;
        let g = self.graph_artifact()?;
        let features = self.features(&table)?;
        let opts = DyadicOptions {
            coding: self.config.dyadic_coding,
            response: self.config.dyadic_response,
            ..DyadicOptions::default()
        };
        let dy = dyadic_design(&g, &features, &opts)?;
        let (design, dropped) = dy.design();
        let fit = ols_fit(&design, &dy.response)?;
        let named = vec![("dyadic".to_string(), &fit)];
        write_fits(&self.path("dyadic_fit.csv"), &named)?;
        let sig = significance_table(&named, self.config.alpha);
        write_text(&self.path("dyadic_table.md"), &table_markdown(&sig.to_markdown(4), self.config.alpha))?;
        write_json(
            &self.path("regress_dyadic.json"),
            &json!({
                "edges": g.edge_count(),
                "rows": dy.rows.len(),
                "excluded_edges": dy.excluded,
                "dropped_columns": dropped,
                "r_squared": fit.r_squared,
                "coding": self.config.get("dyadic_coding"),
            }),
        )
    }

    fn regress_clusters(&self) -> Result<()> {
        let table = self.institutions()?;
        let g = self.graph_artifact()?;
        let p = self.partition_artifact(&g)?;
        let names = name_clusters(&p, &g.nodes, &table);
        let features = self.features(&table)?;
        let opts = MembershipOptions {
            model: self.config.cluster_model,
            min_members: self.config.cluster_min_size,
            alpha: self.config.alpha,
        };
        let fits = cluster_membership_fits(&p, &g.nodes, &features, &opts)?;
        let named: Vec<(String, &RegressionFit)> = fits.fits.iter().map(|(c, f)| (names[*c].clone(), f)).collect();
        write_fits(&self.path("cluster_fits.csv"), &named)?;
        write_cluster_skips(&self.path("cluster_skips.csv"), &fits, &names)?;
        let sig = significance_table(&named, self.config.alpha);
        write_text(&self.path("cluster_table.md"), &table_markdown(&sig.to_markdown(2), self.config.alpha))?;
        write_json(
            &self.path("regress_clusters.json"),
            &json!({
                "model": self.config.get("cluster_model"),
                "fitted": fits.fits.iter().map(|(c, _)| names[*c].clone()).collect::<Vec<_>>(),
                "skipped": fits.skipped.iter().map(|(c, r)| json!({"cluster": names[*c], "reason": r.to_string()})).collect::<Vec<_>>(),
                "without_significant": fits.without_significant.iter().map(|c| names[*c].clone()).collect::<Vec<_>>(),
                "dropped_columns": fits.dropped_columns,
            }),
        )
    }

    fn topics(&self) -> Result<()> {
        let ds = self.dataset()?;
        let table = self.institutions()?;
        let threshold = top_follower_threshold(ds.institution_count(), self.config.top_fraction)?;
        let selected = select_top_followers(&ds, self.config.top_fraction)?;
        let descriptions = load_descriptions(required(&self.config.descriptions, "descriptions")?)?;
        let by_id: std::collections::HashMap<&str, &str> =
            descriptions.iter().map(|(id, d)| (id.as_str(), d.as_str())).collect();
        let raw: Vec<(String, String)> =
            selected.iter().map(|id| (id.clone(), by_id.get(id.as_str()).unwrap_or(&"").to_string())).collect();
        let missing = selected.iter().filter(|id| !by_id.contains_key(id.as_str())).count();
        let stopwords = load_stopwords(self.config.stopwords.as_deref())?;
        let accounts: BTreeSet<String> =
            table.records().iter().flat_map(|r| [r.id.to_lowercase(), r.handle.to_lowercase()]).collect();
        let rules = TextRules::default();
        let (docs, net) = parallel::with_workers(self.config.workers, || {
            let docs = parallel::follower_docs(&raw, &stopwords, &rules, &accounts);
            let net = parallel::semantic_network(&docs, self.config.min_cooccurrence);
            (docs, net)
        });
        let net = net?;
        let topics = extract_topics(&net, self.config.topic_resolution, self.config.seed)?;
        let assignment = assign_topics(&docs, &topics, self.config.assign_mode)?;
        let summary = cofollow_core::topics::CorpusSummary::of(&docs);
        write_topics(&self.path("topics.csv"), &topics, &assignment)?;
        write_topic_assignments(&self.path("topic_assignments.csv"), &assignment)?;
        write_semantic_edges(&self.path("semantic_edges.csv"), &net)?;
        write_json(
            &self.path("topics.json"),
            &json!({
                "institution_threshold": threshold,
                "selected_followers": selected.len(),
                "without_description": missing,
                "empty": summary.empty,
                "non_english": summary.non_english,
                "institution_accounts": summary.institution_accounts,
                "unusable_fraction": summary.unusable_fraction(),
                "tokens": net.nodes.len(),
                "token_edges": net.edges.len(),
                "topics": topics.len(),
                "assigned": assignment.per_doc.iter().filter(|(_, t)| !t.is_empty()).count(),
            }),
        )
    }

    fn export_dot(&self) -> Result<()> {
        let induced = read_induced(&self.path("clusters.csv"), &self.path("induced.csv"))?;
        write_text(&self.path("clusters.dot"), &induced_dot(&induced))
    }

    fn report(&self) -> Result<()> {
        let ingest = read_json(&self.path("ingest.json"))?;
        let proj = read_json(&self.path("projection.json"))?;
        let comm = read_json(&self.path("communities.json"))?;
        let topics = read_json(&self.path("topics.json")).ok();
        let summary = json!({
            "institutions": ingest["institutions"],
            "nodes": proj["nodes"],
            "edges": proj["edges"],
            "density": proj["density"],
            "components": proj["components"],
            "clusters": comm["clusters"],
            "modularity_at_1": comm["modularity_at_1"],
            "topics": topics.as_ref().map(|t| t["topics"].clone()),
            "truncation_correction": proj["truncation_estimate"]["correction"],
            "config_hash": self.config.hash(),
        });
        write_json(&self.path("summary.json"), &summary)?;
        let show = |v: &Value| match v {
            Value::Null => "n/a".to_string(),
            Value::Number(n) => match n.as_f64() {
                Some(x) if n.is_f64() => format!("{x:.4}"),
                _ => n.to_string(),
            },
            other => other.to_string(),
        };
        let mut md = String::from("# Run summary\n\n| Quantity | Value |\n|---|---:|\n");
        for key in ["institutions", "nodes", "edges", "density", "components", "clusters", "modularity_at_1", "topics", "truncation_correction"] {
            md.push_str(&format!("| {key} | {} |\n", show(&summary[key])));
        }
        md.push_str(&format!("\nConfiguration hash: `{}`\n", self.config.hash()));
        write_text(&self.path("summary.md"), &md)
    }

    /// Lists every artifact under the output directory with its SHA-256,
    /// sorted by relative path. Stamps, the marker and the manifest are left out.
    pub fn artifact_hashes(&self) -> Result<Vec<(String, String)>> {
        fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, String)>) -> Result<()> {
            for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
                let entry = entry.map_err(|e| Error::io(dir, e))?;
                let path = entry.path();
                let rel = path.strip_prefix(root).unwrap_or(&path).to_string_lossy().replace('\\', "/");
                if rel == MANIFEST || rel == INCOMPLETE || rel.starts_with(STAMPS) {
                    continue;
                }
                if path.is_dir() {
                    walk(root, &path, out)?;
                } else {
                    out.push((rel, file_hash(&path)?));
                }
            }
            Ok(())
        }
        let mut out = Vec::new();
        walk(self.out(), self.out(), &mut out)?;
        out.sort();
        Ok(out)
    }

    pub fn write_manifest(&self) -> Result<()> {
        let config: serde_json::Map<String, Value> =
            self.config.hashed_pairs().into_iter().map(|(k, v)| (k.to_string(), Value::String(v))).collect();
        let artifacts: serde_json::Map<String, Value> =
            self.artifact_hashes()?.into_iter().map(|(k, v)| (k, Value::String(v))).collect();
        write_json(
            &self.path(MANIFEST),
            &json!({
                "tool": "cofollow",
                "tool_version": env!("CARGO_PKG_VERSION"),
                "config": config,
                "config_hash": self.config.hash(),
                "seeds": {"louvain": self.config.seed, "topics": self.config.seed},
                "artifacts": artifacts,
            }),
        )
    }
}

/// Reads the configuration recorded in a manifest; `output` and `workers`
/// are not recorded and keep their defaults.
pub fn config_from_manifest(path: &Path) -> Result<PipelineConfig> {
    let v = read_json(path)?;
    let map = v["config"].as_object().ok_or_else(|| Error::parse(path, "manifest has no `config` object"))?;
    let mut cfg = PipelineConfig::default();
    for (k, val) in map {
        let s = val.as_str().ok_or_else(|| Error::parse(path, format!("config value for `{k}` is not a string")))?;
        cfg.set(k, s).map_err(|e| Error::parse(path, e))?;
    }
    cfg.validate()?;
    if let Some(expected) = v["config_hash"].as_str() {
        if cfg.hash() != expected {
            return Err(Error::parse(path, "config hash does not match the recorded configuration"));
        }
    }
    Ok(cfg)
}

fn table_markdown(table: &str, alpha: f64) -> String {
    format!("{table}\nCoefficients shown where p <= {alpha}; † marks a categorical level.\n")
}
