//! Monadic, dyadic and cluster-membership designs.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::regression::{logistic_fit, ols_fit, ColumnMeta, Design, RegressionFit};
use crate::community::Partition;
use crate::data_model::{Cell, ColumnKind, FeatureTable, InstitutionTable, VariableKind};
use crate::metrics::NodeMetrics;
use crate::projection::{CoFollowerGraph, WeightKind};
use crate::{Error, Result};

fn feature_design(features: &FeatureTable, keep: impl Fn(usize) -> bool) -> (Design, Vec<usize>) {
    let mut columns = vec![ColumnMeta::intercept()];
    columns.extend(features.columns.iter().map(|c| ColumnMeta::new(c.name.clone(), c.label.clone(), c.kind == ColumnKind::Dummy)));
    let mut rows = Vec::new();
    let mut used = Vec::new();
    for (r, row) in features.rows.iter().enumerate() {
        let Some(values) = row else { continue };
        if !keep(r) {
            continue;
        }
        let mut full = Vec::with_capacity(values.len() + 1);
        full.push(1.0);
        full.extend_from_slice(values);
        rows.push(full);
        used.push(r);
    }
    (Design { columns, rows }, used)
}

fn indicator_names(features: &FeatureTable) -> Vec<String> {
    features
        .columns
        .iter()
        .filter(|c| c.kind != ColumnKind::Continuous)
        .map(|c| c.name.clone())
        .collect()
}

/// Predictor rows shared by the node-level regressions.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeDesign {
    pub design: Design,
    /// Graph node index of each design row.
    pub nodes: Vec<usize>,
    /// Institution ids of each design row.
    pub ids: Vec<String>,
    /// Graph nodes without a complete feature row.
    pub dropped_rows: usize,
    /// Indicator columns removed for being constant over the sample.
    pub dropped_columns: Vec<String>,
}

/// Joins feature rows to graph nodes, keeping complete rows of institutions
/// present in the graph, and drops constant indicator columns.
pub fn node_design(features: &FeatureTable, node_ids: &[String]) -> Result<NodeDesign> {
    let positions: BTreeMap<&str, usize> = node_ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let (mut design, used) = feature_design(features, |r| positions.contains_key(features.ids[r].as_str()));
    let indicators = indicator_names(features);
    let dropped_columns = design.drop_constant_indicators(|c| indicators.contains(&c.name));
    let nodes: Vec<usize> = used.iter().map(|&r| positions[features.ids[r].as_str()]).collect();
    let ids = used.iter().map(|&r| features.ids[r].clone()).collect();
    Ok(NodeDesign { dropped_rows: node_ids.len() - nodes.len(), design, nodes, ids, dropped_columns })
}

/// One design reused against the nine monadic responses.
#[derive(Debug, Clone, PartialEq)]
pub struct MonadicDesign {
    pub base: NodeDesign,
    pub responses: Vec<(&'static str, Vec<f64>)>,
    /// Rows dropped because the institution is not in the graph or has missing data.
    pub dropped_rows: usize,
}

pub const MONADIC_RESPONSES: [&str; 9] =
    ["betweenness", "closeness", "clustering", "degree", "eigenvector", "favorites", "followers", "friends", "posts"];

/// Builds the monadic design: network measures and account counters
/// (`ln(1 + x)` when `log_counters`) regressed on institution features.
pub fn monadic_design(
    features: &FeatureTable,
    metrics: &NodeMetrics,
    node_ids: &[String],
    institutions: &InstitutionTable,
    log_counters: bool,
) -> Result<MonadicDesign> {
    if metrics.degree.len() != node_ids.len() {
        return Err(Error::InvalidInput("metrics and node ids differ in length".into()));
    }
    let base = node_design(features, node_ids)?;
    base.design.check_rank()?;
    let counter = |x: u64| if log_counters { libm::log1p(x as f64) } else { x as f64 };
    let pick = |v: &[f64]| base.nodes.iter().map(|&n| v[n]).collect::<Vec<f64>>();
    let mut counters: [Vec<f64>; 4] = Default::default();
    for id in &base.ids {
        let rec = institutions
            .get(id)
            .ok_or_else(|| Error::InvalidInput(format!("feature row `{id}` missing from institution table")))?;
        counters[0].push(counter(rec.favorites));
        counters[1].push(counter(rec.followers_count));
        counters[2].push(counter(rec.friends_count));
        counters[3].push(counter(rec.statuses));
    }
    let [fav, fol, fri, posts] = counters;
    let responses = vec![
        ("betweenness", pick(&metrics.betweenness)),
        ("closeness", pick(&metrics.closeness)),
        ("clustering", pick(&metrics.clustering)),
        ("degree", pick(&metrics.degree)),
        ("eigenvector", pick(&metrics.eigenvector)),
        ("favorites", fav),
        ("followers", fol),
        ("friends", fri),
        ("posts", posts),
    ];
    let dropped_rows = institutions.len() - base.ids.len();
    Ok(MonadicDesign { base, responses, dropped_rows })
}

/// Fits every monadic response by OLS.
pub fn monadic_fits(design: &MonadicDesign) -> Result<Vec<(&'static str, RegressionFit)>> {
    design.responses.iter().map(|(name, y)| Ok((*name, ols_fit(&design.base.design, y)?))).collect()
}

/// Direction of the binary/categorical dyadic indicators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DyadicCoding {
    /// 1 when the endpoint values differ.
    #[default]
    Difference,
    /// 1 when they are the same.
    Sameness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DyadicKind {
    Indicator,
    AbsDifference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DyadicColumn {
    pub name: String,
    pub label: String,
    pub variable: &'static str,
    pub kind: DyadicKind,
}

/// One row per edge with both endpoints fully described.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicFeatureTable {
    pub columns: Vec<DyadicColumn>,
    pub rows: Vec<Vec<f64>>,
    /// Graph endpoints of each row.
    pub edges: Vec<(usize, usize)>,
    pub response: Vec<f64>,
    /// Edges left out because an endpoint lacks features.
    pub excluded: usize,
    pub coding: DyadicCoding,
}

pub const DYADIC_VARIABLES: [&str; 14] = [
    "state",
    "log_enrollment",
    "log_tuition",
    "ihe_type",
    "religious",
    "online",
    "account_age",
    "common_app",
    "no_app_fee",
    "race",
    "sat_act_optional",
    "verified",
    "gender",
    "liberal_arts",
];

#[derive(Debug, Clone, PartialEq)]
pub struct DyadicOptions {
    pub coding: DyadicCoding,
    pub response: WeightKind,
    pub variables: Vec<String>,
}

impl Default for DyadicOptions {
    fn default() -> Self {
        Self {
            coding: DyadicCoding::Difference,
            response: WeightKind::Normalized,
            variables: DYADIC_VARIABLES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Codes every edge by attribute differences of its endpoints: an indicator
/// for binary and categorical variables, the absolute difference for
/// continuous ones.
pub fn dyadic_design(graph: &CoFollowerGraph, features: &FeatureTable, opts: &DyadicOptions) -> Result<DyadicFeatureTable> {
    let mut vars = Vec::new();
    for name in &opts.variables {
        let v = features
            .variable(name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown dyadic variable `{name}`")))?;
        vars.push(v);
    }
    let columns = vars
        .iter()
        .map(|v| {
            let kind = match v.kind {
                VariableKind::Continuous => DyadicKind::AbsDifference,
                _ => DyadicKind::Indicator,
            };
            let label = match (kind, opts.coding) {
                (DyadicKind::AbsDifference, _) => format!("{} difference", v.label),
                (_, DyadicCoding::Difference) => format!("Different {}", v.label),
                (_, DyadicCoding::Sameness) => format!("Same {}", v.label),
            };
            let prefix = match (kind, opts.coding) {
                (DyadicKind::AbsDifference, _) => "absdiff",
                (_, DyadicCoding::Difference) => "diff",
                (_, DyadicCoding::Sameness) => "same",
            };
            DyadicColumn { name: format!("{prefix}_{}", v.name), label, variable: v.name, kind }
        })
        .collect();

    let row_of: BTreeMap<&str, usize> = features.ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut rows = Vec::new();
    let mut edges = Vec::new();
    let mut response = Vec::new();
    let mut excluded = 0;
    'edges: for e in &graph.edges {
        let (Some(&ra), Some(&rb)) = (row_of.get(graph.nodes[e.a].as_str()), row_of.get(graph.nodes[e.b].as_str())) else {
            excluded += 1;
            continue;
        };
        let mut row = Vec::with_capacity(vars.len());
        for v in &vars {
            let value = match (v.cells[ra], v.cells[rb]) {
                (Cell::Real(x), Cell::Real(y)) => (x - y).abs(),
                (Cell::Flag(x), Cell::Flag(y)) => indicator(x != y, opts.coding),
                (Cell::Level(x), Cell::Level(y)) => indicator(x != y, opts.coding),
                _ => {
                    excluded += 1;
                    continue 'edges;
                }
            };
            row.push(value);
        }
        rows.push(row);
        edges.push((e.a, e.b));
        response.push(match opts.response {
            WeightKind::Raw => e.raw as f64,
            WeightKind::Normalized => e.norm,
        });
    }
    Ok(DyadicFeatureTable { columns, rows, edges, response, excluded, coding: opts.coding })
}

fn indicator(differ: bool, coding: DyadicCoding) -> f64 {
    match (differ, coding) {
        (true, DyadicCoding::Difference) | (false, DyadicCoding::Sameness) => 1.0,
        _ => 0.0,
    }
}

impl DyadicFeatureTable {
    /// Design with an intercept; constant indicator columns are dropped and
    /// returned by name.
    pub fn design(&self) -> (Design, Vec<String>) {
        let mut columns = vec![ColumnMeta::intercept()];
        columns.extend(self.columns.iter().map(|c| ColumnMeta::new(c.name.clone(), c.label.clone(), false)));
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut full = Vec::with_capacity(r.len() + 1);
                full.push(1.0);
                full.extend_from_slice(r);
                full
            })
            .collect();
        let mut design = Design { columns, rows };
        let indicators: Vec<String> =
            self.columns.iter().filter(|c| c.kind == DyadicKind::Indicator).map(|c| c.name.clone()).collect();
        let dropped = design.drop_constant_indicators(|c| indicators.contains(&c.name));
        (design, dropped)
    }

    pub fn fit(&self) -> Result<RegressionFit> {
        ols_fit(&self.design().0, &self.response)
    }
}

/// Model family for cluster membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MembershipModel {
    #[default]
    Logistic,
    /// OLS on the 0/1 response.
    LinearProbability,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SkipReason {
    Isolate,
    TooSmall { members: usize },
    SingleClass,
    Separation { column: String },
    Numerical(String),
}

impl core::fmt::Display for SkipReason {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SkipReason::Isolate => f.write_str("isolate"),
            SkipReason::TooSmall { members } => write!(f, "too small ({members} members in sample)"),
            SkipReason::SingleClass => f.write_str("single class"),
            SkipReason::Separation { column } => write!(f, "separation on {column}"),
            SkipReason::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterFits {
    pub fits: Vec<(usize, RegressionFit)>,
    pub skipped: Vec<(usize, SkipReason)>,
    /// Fitted clusters with no non-intercept coefficient at `p <= alpha`.
    pub without_significant: Vec<usize>,
    pub dropped_columns: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipOptions {
    pub model: MembershipModel,
    pub min_members: usize,
    pub alpha: f64,
}

impl Default for MembershipOptions {
    fn default() -> Self {
        Self { model: MembershipModel::Logistic, min_members: 5, alpha: 0.01 }
    }
}

/// One binary fit per cluster: membership in the cluster against the
/// institution features. Isolates, clusters with fewer than `min_members`
/// members in the sample, single-class responses and separated fits are
/// skipped with a reason.
pub fn cluster_membership_fits(
    partition: &Partition,
    node_ids: &[String],
    features: &FeatureTable,
    opts: &MembershipOptions,
) -> Result<ClusterFits> {
    if partition.assignment.len() != node_ids.len() {
        return Err(Error::InvalidInput("partition and node ids differ in length".into()));
    }
    let base = node_design(features, node_ids)?;
    let sizes = partition.clusters().iter().map(Vec::len).collect::<Vec<_>>();
    let mut out = ClusterFits { fits: Vec::new(), skipped: Vec::new(), without_significant: Vec::new(), dropped_columns: base.dropped_columns.clone() };
    for (c, &size) in sizes.iter().enumerate() {
        if size == 1 {
            out.skipped.push((c, SkipReason::Isolate));
            continue;
        }
        let y: Vec<f64> = base.nodes.iter().map(|&n| if partition.assignment[n] == c { 1.0 } else { 0.0 }).collect();
        let members = y.iter().filter(|&&v| v == 1.0).count();
        if members == y.len() {
            out.skipped.push((c, SkipReason::SingleClass));
            continue;
        }
        if members < opts.min_members {
            out.skipped.push((c, SkipReason::TooSmall { members }));
            continue;
        }
        let fit = match opts.model {
            MembershipModel::Logistic => logistic_fit(&base.design, &y),
            MembershipModel::LinearProbability => ols_fit(&base.design, &y),
        };
        match fit {
            Ok(fit) => {
                let any = fit.columns.iter().zip(&fit.p_values).any(|(col, &p)| col.name != "intercept" && p <= opts.alpha);
                if !any {
                    out.without_significant.push(c);
                }
                out.fits.push((c, fit));
            }
            Err(Error::Separation { column }) => out.skipped.push((c, SkipReason::Separation { column })),
            Err(Error::SingleClass) => out.skipped.push((c, SkipReason::SingleClass)),
            Err(e) if e.is_numerical() => out.skipped.push((c, SkipReason::Numerical(e.to_string()))),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Coefficients significant at `alpha` across several fits.
#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceTable {
    pub headers: Vec<String>,
    pub rows: Vec<SignificanceRow>,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceRow {
    pub name: String,
    pub label: String,
    /// Categorical level, marked with a dagger when rendered.
    pub level: bool,
    pub cells: Vec<Option<f64>>,
}

/// Rows are variables (intercept excluded) significant in at least one
/// fit, in order of first appearance; cells hold the coefficient where
/// `p <= alpha`.
pub fn significance_table(fits: &[(String, &RegressionFit)], alpha: f64) -> SignificanceTable {
    let mut rows: Vec<SignificanceRow> = Vec::new();
    for (f, (_, fit)) in fits.iter().enumerate() {
        for (j, col) in fit.columns.iter().enumerate() {
            if col.name == "intercept" || !(fit.p_values[j] <= alpha) {
                continue;
            }
            let idx = match rows.iter().position(|r| r.name == col.name) {
                Some(i) => i,
                None => {
                    rows.push(SignificanceRow {
                        name: col.name.clone(),
                        label: col.label.clone(),
                        level: col.level,
                        cells: vec![None; fits.len()],
                    });
                    rows.len() - 1
                }
            };
            rows[idx].cells[f] = Some(fit.coefficients[j]);
        }
    }
    SignificanceTable { headers: fits.iter().map(|(h, _)| h.clone()).collect(), rows, alpha }
}

impl SignificanceTable {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Markdown rendering; categorical levels carry a `†`.
    pub fn to_markdown(&self, precision: usize) -> String {
        let mut out = String::new();
        out.push_str("| Variable |");
        for h in &self.headers {
            out.push_str(&format!(" {h} |"));
        }
        out.push_str("\n|---|");
        for _ in &self.headers {
            out.push_str("---:|");
        }
        out.push('\n');
        for r in &self.rows {
            let dagger = if r.level { "†" } else { "" };
            out.push_str(&format!("| {}{} |", r.label, dagger));
            for c in &r.cells {
                match c {
                    Some(v) => out.push_str(&format!(" {v:.precision$} |")),
                    None => out.push_str("  |"),
                }
            }
            out.push('\n');
        }
        out
    }
}
