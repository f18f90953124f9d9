//! Follower self-description topics.
//!
//! Descriptions of the most widely spread followers are normalized into
//! token multisets, linked into a co-occurrence network, and split into
//! topics by Louvain. Followers are then counted under every topic whose
//! tokens they use.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::community::louvain;
use crate::data_model::FollowerDataset;
use crate::graph::WeightedGraph;
use crate::{Error, Result};

/// Followers of at least `ceil(fraction * |N|)` institutions, by id in
/// first-seen order.
pub fn select_top_followers(ds: &FollowerDataset, fraction: f64) -> Result<Vec<String>> {
    let threshold = top_follower_threshold(ds.institution_count(), fraction)?;
    Ok((0..ds.follower_count())
        .filter(|&q| ds.inverse(q).len() >= threshold)
        .map(|q| ds.followers()[q].clone())
        .collect())
}

/// Minimum number of followed institutions for a top follower.
pub fn top_follower_threshold(institutions: usize, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidInput(format!("fraction must lie in (0, 1], got {fraction}")));
    }
    // guard against 0.01 * 1500 landing just above 15
    let t = libm::ceil(fraction * institutions as f64 - 1e-9);
    Ok((t as usize).max(1))
}

/// Plural-stripping rules applied to each token.
#[derive(Debug, Clone, PartialEq)]
pub struct PluralRules {
    /// `(suffix, replacement)` tried in order; the first match wins.
    pub rewrites: Vec<(String, String)>,
    /// Suffixes that block the bare `s` rule.
    pub keep_suffixes: Vec<String>,
    /// Tokens shorter than this are left alone.
    pub min_len: usize,
}

impl Default for PluralRules {
    fn default() -> Self {
        let s = |a: &str| a.to_string();
        Self {
            rewrites: alloc::vec![(s("ies"), s("y")), (s("sses"), s("ss")), (s("s"), s(""))],
            keep_suffixes: alloc::vec![s("ss"), s("us"), s("is"), s("ous")],
            min_len: 4,
        }
    }
}

impl PluralRules {
    pub fn apply(&self, token: &str) -> String {
        if token.chars().count() < self.min_len {
            return token.to_string();
        }
        for (suffix, replacement) in &self.rewrites {
            if !token.ends_with(suffix.as_str()) {
                continue;
            }
            if suffix == "s" && self.keep_suffixes.iter().any(|k| token.ends_with(k.as_str())) {
                return token.to_string();
            }
            let stem = &token[..token.len() - suffix.len()];
            return format!("{stem}{replacement}");
        }
        token.to_string()
    }
}

/// Normalizer settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TextRules {
    pub plural: PluralRules,
    /// Documents whose share of ASCII-alphabetic raw tokens falls below
    /// this are flagged as non-English.
    pub min_ascii_fraction: f64,
}

impl Default for TextRules {
    fn default() -> Self {
        Self { plural: PluralRules::default(), min_ascii_fraction: 0.8 }
    }
}

/// Output of [`normalize_text`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Normalized {
    pub tokens: Vec<String>,
    pub empty: bool,
    pub non_english: bool,
}

fn is_link(word: &str) -> bool {
    let w = word.to_ascii_lowercase();
    w.starts_with("http://") || w.starts_with("https://") || w.starts_with("www.")
}

/// Lowercases, drops URLs and @mentions, strips `#` marks and punctuation,
/// removes stopwords, digits and one-letter pieces, and strips plurals.
pub fn normalize_text(raw: &str, stopwords: &BTreeSet<String>, rules: &TextRules) -> Normalized {
    let mut words = 0usize;
    let mut ascii = 0usize;
    let mut tokens = Vec::new();
    for word in raw.split_whitespace() {
        if is_link(word) || word.starts_with('@') {
            continue;
        }
        let lower = word.to_lowercase();
        for piece in lower.split(|c: char| !c.is_alphanumeric()) {
            if piece.is_empty() {
                continue;
            }
            words += 1;
            if piece.chars().all(|c| c.is_ascii_alphanumeric()) {
                ascii += 1;
            }
            if piece.chars().all(|c| c.is_numeric()) || piece.chars().count() < 2 {
                continue;
            }
            if stopwords.contains(piece) {
                continue;
            }
            let token = rules.plural.apply(piece);
            if !stopwords.contains(&token) {
                tokens.push(token);
            }
        }
    }
    let empty = words == 0;
    let non_english = !empty && (ascii as f64) < rules.min_ascii_fraction * words as f64;
    if non_english {
        tokens.clear();
    }
    Normalized { tokens, empty, non_english }
}

/// A follower's description and its normalized tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowerDoc {
    pub id: String,
    pub raw: String,
    pub tokens: Vec<String>,
    pub empty: bool,
    pub non_english: bool,
    /// The follower is itself one of the institutions.
    pub institution_account: bool,
}

impl FollowerDoc {
    /// Normalizes `raw`; flagged documents keep no tokens.
    pub fn new(
        id: impl Into<String>,
        raw: impl Into<String>,
        stopwords: &BTreeSet<String>,
        rules: &TextRules,
        institution_accounts: &BTreeSet<String>,
    ) -> Self {
        let id = id.into();
        let raw = raw.into();
        let n = normalize_text(&raw, stopwords, rules);
        let institution_account = institution_accounts.contains(&id.to_lowercase());
        let tokens = if institution_account { Vec::new() } else { n.tokens };
        Self { id, raw, tokens, empty: n.empty, non_english: n.non_english, institution_account }
    }

    /// Included in the token network.
    pub fn usable(&self) -> bool {
        !self.empty && !self.non_english && !self.institution_account
    }
}

/// Share of flagged documents, for comparison against a reported figure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusSummary {
    pub documents: usize,
    pub empty: usize,
    pub non_english: usize,
    pub institution_accounts: usize,
}

impl CorpusSummary {
    pub fn of(docs: &[FollowerDoc]) -> Self {
        Self {
            documents: docs.len(),
            empty: docs.iter().filter(|d| d.empty).count(),
            non_english: docs.iter().filter(|d| d.non_english).count(),
            institution_accounts: docs.iter().filter(|d| d.institution_account).count(),
        }
    }

    /// Fraction of documents empty or non-English.
    pub fn unusable_fraction(&self) -> f64 {
        if self.documents == 0 {
            return 0.0;
        }
        (self.empty + self.non_english) as f64 / self.documents as f64
    }
}

/// Token frequencies and per-document pair counts; mergeable so that
/// shards of a corpus can be counted separately.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PairCounts {
    pub frequency: BTreeMap<String, u64>,
    pub pairs: BTreeMap<(String, String), u64>,
    pub documents: usize,
}

impl PairCounts {
    pub fn add(&mut self, tokens: &[String]) {
        self.documents += 1;
        for t in tokens {
            *self.frequency.entry(t.clone()).or_insert(0) += 1;
        }
        let distinct: BTreeSet<&String> = tokens.iter().collect();
        let distinct: Vec<&String> = distinct.into_iter().collect();
        for i in 0..distinct.len() {
            for j in i + 1..distinct.len() {
                *self.pairs.entry((distinct[i].clone(), distinct[j].clone())).or_insert(0) += 1;
            }
        }
    }

    pub fn merge(&mut self, other: PairCounts) {
        self.documents += other.documents;
        for (k, v) in other.frequency {
            *self.frequency.entry(k).or_insert(0) += v;
        }
        for (k, v) in other.pairs {
            *self.pairs.entry(k).or_insert(0) += v;
        }
    }
}

/// Tokens linked by co-occurrence counts at or above a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticNetwork {
    /// Tokens with at least one retained edge, sorted, with corpus frequency.
    pub nodes: Vec<(String, u64)>,
    /// `(a, b, count)` with `a < b` node indices.
    pub edges: Vec<(usize, usize, u64)>,
    pub min_cooccurrence: u64,
}

impl SemanticNetwork {
    pub fn from_counts(counts: &PairCounts, min_cooccurrence: u64) -> Result<Self> {
        if min_cooccurrence == 0 {
            return Err(Error::InvalidInput("min_cooccurrence must be at least 1".into()));
        }
        if counts.documents == 0 || counts.frequency.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let kept: Vec<(&(String, String), u64)> =
            counts.pairs.iter().filter(|(_, &c)| c >= min_cooccurrence).map(|(k, &c)| (k, c)).collect();
        let mut names = BTreeSet::new();
        for ((a, b), _) in &kept {
            names.insert(a.as_str());
            names.insert(b.as_str());
        }
        let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let nodes = names.iter().map(|&s| (s.to_string(), counts.frequency[s])).collect();
        let edges = kept.iter().map(|((a, b), c)| (index[a.as_str()], index[b.as_str()], *c)).collect();
        Ok(Self { nodes, edges, min_cooccurrence })
    }

    pub fn node_index(&self, token: &str) -> Option<usize> {
        self.nodes.binary_search_by(|(t, _)| t.as_str().cmp(token)).ok()
    }

    pub fn weight(&self, a: &str, b: &str) -> Option<u64> {
        let (x, y) = (self.node_index(a)?, self.node_index(b)?);
        let (x, y) = if x < y { (x, y) } else { (y, x) };
        self.edges.iter().find(|e| e.0 == x && e.1 == y).map(|e| e.2)
    }

    pub fn graph(&self) -> Result<WeightedGraph> {
        WeightedGraph::from_edges(self.nodes.len(), self.edges.iter().map(|&(a, b, c)| (a, b, c as f64)))
    }
}

/// Counts pairs once per usable document and keeps those seen in at least
/// `min_cooccurrence` documents.
pub fn build_semantic_network(docs: &[FollowerDoc], min_cooccurrence: u64) -> Result<SemanticNetwork> {
    let mut counts = PairCounts::default();
    for d in docs.iter().filter(|d| d.usable() && !d.tokens.is_empty()) {
        counts.add(&d.tokens);
    }
    SemanticNetwork::from_counts(&counts, min_cooccurrence)
}

/// Number of tokens used to name a topic.
pub const NAME_TOKENS: usize = 9;

#[derive(Debug, Clone, PartialEq)]
pub struct Topic {
    pub id: usize,
    /// Member tokens by descending frequency, ties alphabetical.
    pub tokens: Vec<String>,
    pub name: String,
    pub frequency: u64,
}

impl Topic {
    pub fn top_terms(&self) -> &[String] {
        &self.tokens[..self.tokens.len().min(NAME_TOKENS)]
    }
}

/// Louvain on the token network; topics are numbered by descending total
/// token frequency.
pub fn extract_topics(network: &SemanticNetwork, resolution: f64, seed: u64) -> Result<Vec<Topic>> {
    if network.nodes.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let g = network.graph()?;
    let partition = louvain(&g, resolution, seed)?;
    let mut topics: Vec<Topic> = partition
        .clusters()
        .into_iter()
        .map(|members| {
            let mut tokens: Vec<(String, u64)> = members.iter().map(|&m| network.nodes[m].clone()).collect();
            tokens.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            let frequency = tokens.iter().map(|t| t.1).sum();
            let tokens: Vec<String> = tokens.into_iter().map(|t| t.0).collect();
            let name = tokens[..tokens.len().min(NAME_TOKENS)].join(", ");
            Topic { id: 0, tokens, name, frequency }
        })
        .collect();
    topics.sort_by(|a, b| b.frequency.cmp(&a.frequency).then_with(|| a.tokens[0].cmp(&b.tokens[0])));
    for (i, t) in topics.iter_mut().enumerate() {
        t.id = i;
    }
    Ok(topics)
}

/// How a document is matched to topics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AssignMode {
    /// Every topic sharing at least one token.
    #[default]
    ContainsAny,
    /// Only the topics sharing the most tokens (ties keep all).
    MaxScore,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicAssignment {
    /// Topic ids per document, ascending.
    pub per_doc: Vec<(String, Vec<usize>)>,
    /// Number of documents counted under each topic.
    pub counts: Vec<usize>,
}

/// Counts each usable document under the topics it matches; the counts may
/// sum to more than the number of documents.
pub fn assign_topics(docs: &[FollowerDoc], topics: &[Topic], mode: AssignMode) -> Result<TopicAssignment> {
    let mut owner: BTreeMap<&str, usize> = BTreeMap::new();
    for t in topics {
        for tok in &t.tokens {
            if owner.insert(tok.as_str(), t.id).is_some() {
                return Err(Error::InvalidInput(format!("token `{tok}` belongs to more than one topic")));
            }
        }
    }
    let mut counts = alloc::vec![0usize; topics.len()];
    let mut per_doc = Vec::with_capacity(docs.len());
    for d in docs {
        let mut scores = alloc::vec![0usize; topics.len()];
        if d.usable() {
            let distinct: BTreeSet<&str> = d.tokens.iter().map(String::as_str).collect();
            for tok in distinct {
                if let Some(&t) = owner.get(tok) {
                    scores[t] += 1;
                }
            }
        }
        let best = scores.iter().copied().max().unwrap_or(0);
        let chosen: Vec<usize> = (0..topics.len())
            .filter(|&t| match mode {
                AssignMode::ContainsAny => scores[t] > 0,
                AssignMode::MaxScore => best > 0 && scores[t] == best,
            })
            .collect();
        for &t in &chosen {
            counts[t] += 1;
        }
        per_doc.push((d.id.clone(), chosen));
    }
    Ok(TopicAssignment { per_doc, counts })
}
