//! Pipeline configuration in a `key = value` text format.
//!
//! Blank lines and `#` comments are ignored. Unknown keys are errors.
//! [`PipelineConfig::to_text`] writes every key in a fixed order, so
//! parsing its output reproduces the configuration exactly.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cofollow_core::metrics::DistanceTransform;
use cofollow_core::projection::{Normalization, WeightKind};
use cofollow_core::stats::{DyadicCoding, MembershipModel};
use cofollow_core::topics::AssignMode;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub institutions: Option<PathBuf>,
    pub followers: Option<PathBuf>,
    pub descriptions: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    /// Institution CSV column mapping, `field=column` pairs.
    pub schema: String,
    pub output: PathBuf,
    pub truncation: usize,
    pub threshold: usize,
    pub normalization: Normalization,
    pub distance: DistanceTransform,
    /// Weights used for centralities; clustering always uses normalized ones.
    pub centrality_weights: WeightKind,
    pub harmonic_fallback: bool,
    pub eigen_tol: f64,
    pub eigen_max_iter: usize,
    pub resolution: f64,
    pub seed: u64,
    pub alpha: f64,
    pub z_score: bool,
    pub combine_type_religious: bool,
    pub log_counters: bool,
    pub dyadic_coding: DyadicCoding,
    pub dyadic_response: WeightKind,
    pub cluster_model: MembershipModel,
    pub cluster_min_size: usize,
    pub top_fraction: f64,
    pub min_cooccurrence: u64,
    pub topic_resolution: f64,
    pub assign_mode: AssignMode,
    /// Worker threads; 0 uses every core. Does not affect results.
    pub workers: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            institutions: None,
            followers: None,
            descriptions: None,
            stopwords: None,
            schema: String::new(),
            output: PathBuf::from("out"),
            truncation: 10_000,
            threshold: 3,
            normalization: Normalization::Jaccard,
            distance: DistanceTransform::InverseWeight,
            centrality_weights: WeightKind::Normalized,
            harmonic_fallback: false,
            eigen_tol: 1e-10,
            eigen_max_iter: 100_000,
            resolution: 0.8,
            seed: 42,
            alpha: 0.01,
            z_score: true,
            combine_type_religious: true,
            log_counters: true,
            dyadic_coding: DyadicCoding::Difference,
            dyadic_response: WeightKind::Normalized,
            cluster_model: MembershipModel::Logistic,
            cluster_min_size: 5,
            top_fraction: 0.01,
            min_cooccurrence: 10,
            topic_resolution: 1.0,
            assign_mode: AssignMode::ContainsAny,
            workers: 0,
        }
    }
}

/// Every key, in the order written by [`PipelineConfig::to_text`].
pub const KEYS: [&str; 30] = [
    "institutions",
    "followers",
    "descriptions",
    "stopwords",
    "schema",
    "output",
    "truncation",
    "threshold",
    "normalization",
    "distance",
    "centrality_weights",
    "harmonic_fallback",
    "eigen_tol",
    "eigen_max_iter",
    "resolution",
    "seed",
    "alpha",
    "z_score",
    "combine_type_religious",
    "log_counters",
    "dyadic_coding",
    "dyadic_response",
    "cluster_model",
    "cluster_min_size",
    "top_fraction",
    "min_cooccurrence",
    "topic_resolution",
    "assign_mode",
    "workers",
    "version",
];

/// Keys that never change an artifact and are left out of hashes.
pub const UNHASHED: [&str; 2] = ["output", "workers"];

fn num<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    v.parse().map_err(|e| Error::Usage(format!("config `{key}`: cannot parse `{v}`: {e}")))
}

fn flag(key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Usage(format!("config `{key}`: expected true or false, got `{v}`"))),
    }
}

fn choice<T: Copy>(key: &str, v: &str, options: &[(&str, T)]) -> Result<T> {
    options.iter().find(|(name, _)| name.eq_ignore_ascii_case(v)).map(|&(_, t)| t).ok_or_else(|| {
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        Error::Usage(format!("config `{key}`: expected one of {}, got `{v}`", names.join(", ")))
    })
}

fn name_of<T: PartialEq + Copy>(value: T, options: &[(&'static str, T)]) -> &'static str {
    options.iter().find(|(_, t)| *t == value).map(|(n, _)| *n).unwrap_or("?")
}

const NORMALIZATIONS: [(&str, Normalization); 2] = [("jaccard", Normalization::Jaccard), ("max", Normalization::MaxScale)];
const DISTANCES: [(&str, DistanceTransform); 2] =
    [("inverse", DistanceTransform::InverseWeight), ("one-minus", DistanceTransform::OneMinusWeight)];
const WEIGHTS: [(&str, WeightKind); 2] = [("normalized", WeightKind::Normalized), ("raw", WeightKind::Raw)];
const CODINGS: [(&str, DyadicCoding); 2] = [("difference", DyadicCoding::Difference), ("sameness", DyadicCoding::Sameness)];
const MODELS: [(&str, MembershipModel); 2] =
    [("logistic", MembershipModel::Logistic), ("linear", MembershipModel::LinearProbability)];
const ASSIGN: [(&str, AssignMode); 2] = [("any", AssignMode::ContainsAny), ("max", AssignMode::MaxScore)];

/// Format version recorded with every configuration.
pub const VERSION: &str = "1";

impl PipelineConfig {
    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let path = |v: &str| if v.is_empty() { None } else { Some(PathBuf::from(v)) };
        match key.trim() {
            "institutions" => self.institutions = path(v),
            "followers" => self.followers = path(v),
            "descriptions" => self.descriptions = path(v),
            "stopwords" => self.stopwords = path(v),
            "schema" => {
                crate::io::Schema::parse(v)?;
                self.schema = v.to_string();
            }
            "output" => self.output = PathBuf::from(v),
            "truncation" => self.truncation = num(key, v)?,
            "threshold" => self.threshold = num(key, v)?,
            "normalization" => self.normalization = choice(key, v, &NORMALIZATIONS)?,
            "distance" => self.distance = choice(key, v, &DISTANCES)?,
            "centrality_weights" => self.centrality_weights = choice(key, v, &WEIGHTS)?,
            "harmonic_fallback" => self.harmonic_fallback = flag(key, v)?,
            "eigen_tol" => self.eigen_tol = num(key, v)?,
            "eigen_max_iter" => self.eigen_max_iter = num(key, v)?,
            "resolution" => self.resolution = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "alpha" => self.alpha = num(key, v)?,
            "z_score" => self.z_score = flag(key, v)?,
            "combine_type_religious" => self.combine_type_religious = flag(key, v)?,
            "log_counters" => self.log_counters = flag(key, v)?,
            "dyadic_coding" => self.dyadic_coding = choice(key, v, &CODINGS)?,
            "dyadic_response" => self.dyadic_response = choice(key, v, &WEIGHTS)?,
            "cluster_model" => self.cluster_model = choice(key, v, &MODELS)?,
            "cluster_min_size" => self.cluster_min_size = num(key, v)?,
            "top_fraction" => self.top_fraction = num(key, v)?,
            "min_cooccurrence" => self.min_cooccurrence = num(key, v)?,
            "topic_resolution" => self.topic_resolution = num(key, v)?,
            "assign_mode" => self.assign_mode = choice(key, v, &ASSIGN)?,
            "workers" => self.workers = num(key, v)?,
            "version" => {
                if v != VERSION {
                    return Err(Error::Usage(format!("config version `{v}` is not supported")));
                }
            }
            other => return Err(Error::Usage(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        Some(match key {
            "institutions" => path(&self.institutions),
            "followers" => path(&self.followers),
            "descriptions" => path(&self.descriptions),
            "stopwords" => path(&self.stopwords),
            "schema" => self.schema.clone(),
            "output" => self.output.display().to_string(),
            "truncation" => self.truncation.to_string(),
            "threshold" => self.threshold.to_string(),
            "normalization" => name_of(self.normalization, &NORMALIZATIONS).into(),
            "distance" => name_of(self.distance, &DISTANCES).into(),
            "centrality_weights" => name_of(self.centrality_weights, &WEIGHTS).into(),
            "harmonic_fallback" => self.harmonic_fallback.to_string(),
            "eigen_tol" => self.eigen_tol.to_string(),
            "eigen_max_iter" => self.eigen_max_iter.to_string(),
            "resolution" => self.resolution.to_string(),
            "seed" => self.seed.to_string(),
            "alpha" => self.alpha.to_string(),
            "z_score" => self.z_score.to_string(),
            "combine_type_religious" => self.combine_type_religious.to_string(),
            "log_counters" => self.log_counters.to_string(),
            "dyadic_coding" => name_of(self.dyadic_coding, &CODINGS).into(),
            "dyadic_response" => name_of(self.dyadic_response, &WEIGHTS).into(),
            "cluster_model" => name_of(self.cluster_model, &MODELS).into(),
            "cluster_min_size" => self.cluster_min_size.to_string(),
            "top_fraction" => self.top_fraction.to_string(),
            "min_cooccurrence" => self.min_cooccurrence.to_string(),
            "topic_resolution" => self.topic_resolution.to_string(),
            "assign_mode" => name_of(self.assign_mode, &ASSIGN).into(),
            "workers" => self.workers.to_string(),
            "version" => VERSION.into(),
            _ => return None,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("config line {}: expected key = value", i + 1)))?;
            cfg.set(k.trim(), v).map_err(|e| Error::Usage(format!("config line {}: {e}", i + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Usage(m) => Error::Usage(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Every key in fixed order.
    pub fn to_text(&self) -> String {
        KEYS.iter().map(|k| format!("{k} = {}\n", self.get(k).unwrap_or_default())).collect()
    }

    /// Pairs that determine the artifacts, i.e. all keys but [`UNHASHED`].
    pub fn hashed_pairs(&self) -> Vec<(&'static str, String)> {
        KEYS.iter().filter(|k| !UNHASHED.contains(k)).map(|&k| (k, self.get(k).unwrap_or_default())).collect()
    }

    /// SHA-256 over the hashed keys, hex encoded.
    pub fn hash(&self) -> String {
        hash_pairs(self.hashed_pairs().iter().map(|(k, v)| (*k, v.as_str())))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Usage(m));
        if self.truncation == 0 {
            return bad("truncation must be positive".into());
        }
        if self.threshold == 0 {
            return bad("threshold must be at least 1".into());
        }
        if !(self.resolution > 0.0 && self.topic_resolution > 0.0) {
            return bad("resolutions must be positive".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.top_fraction > 0.0 && self.top_fraction <= 1.0) {
            return bad(format!("top_fraction must lie in (0, 1], got {}", self.top_fraction));
        }
        if self.min_cooccurrence == 0 {
            return bad("min_cooccurrence must be at least 1".into());
        }
        if self.eigen_tol.is_nan() || self.eigen_tol <= 0.0 {
            return bad("eigen_tol must be positive".into());
        }
        Ok(())
    }
}

/// SHA-256 of `key=value\n` lines.
pub fn hash_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> String {
    let mut h = Sha256::new();
    for (k, v) in pairs {
        h.update(k.as_bytes());
        h.update(b"=");
        h.update(v.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
