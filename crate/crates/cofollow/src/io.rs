//! Input loaders and their canonical writers.
//!
//! Institution attributes are CSV with a header; follower lists and
//! descriptions are JSON Lines. Every parse error names the file and line.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use cofollow_core::data_model::{parse_flag, InstitutionRecord, InstitutionTable};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Institution record fields, in canonical column order.
pub const FIELDS: [&str; 20] = [
    "id",
    "handle",
    "state",
    "type",
    "religious",
    "online",
    "gender",
    "race",
    "liberal_arts",
    "sat_act_optional",
    "common_app",
    "no_app_fee",
    "enrollment",
    "tuition",
    "account_age",
    "verified",
    "favorites",
    "followers",
    "friends",
    "posts",
];

/// Maps record fields to CSV header names. Only `id` and `type` are
/// required; absent optional columns take their defaults.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    columns: Vec<(&'static str, String)>,
}

impl Default for Schema {
    fn default() -> Self {
        Self { columns: FIELDS.iter().map(|&f| (f, f.to_string())).collect() }
    }
}

impl Schema {
    /// Parses `field=column` pairs separated by commas, overriding defaults.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut schema = Self::default();
        for pair in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (field, column) =
                pair.split_once('=').ok_or_else(|| Error::Usage(format!("schema entry `{pair}` is not field=column")))?;
            schema.set(field.trim(), column.trim())?;
        }
        Ok(schema)
    }

    pub fn set(&mut self, field: &str, column: &str) -> Result<()> {
        let slot = self
            .columns
            .iter_mut()
            .find(|(f, _)| *f == field)
            .ok_or_else(|| Error::Usage(format!("unknown schema field `{field}`")))?;
        slot.1 = column.to_string();
        Ok(())
    }

    pub fn column(&self, field: &str) -> &str {
        self.columns.iter().find(|(f, _)| *f == field).map(|(_, c)| c.as_str()).unwrap_or("")
    }

    /// Non-default mappings as `field=column`, comma separated.
    pub fn to_spec(&self) -> String {
        self.columns.iter().filter(|(f, c)| f != c).map(|(f, c)| format!("{f}={c}")).collect::<Vec<_>>().join(",")
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Reads the institution table.
pub fn load_institutions(path: &Path, schema: &Schema) -> Result<InstitutionTable> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open(path)?);
    let header = reader.headers().map_err(|e| Error::line(path, 1, e))?.clone();
    let index = |field: &str| header.iter().position(|h| h == schema.column(field));
    for required in ["id", "type"] {
        if index(required).is_none() {
            return Err(Error::line(path, 1, format!("missing required column `{}`", schema.column(required))));
        }
    }
    let cols: Vec<Option<usize>> = FIELDS.iter().map(|f| index(f)).collect();
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::line(path, line, e)
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let cells: Vec<&str> = cols.iter().map(|c| c.and_then(|c| row.get(c)).unwrap_or("")).collect();
        let rec = parse_record(&cells).map_err(|e| Error::line(path, line, e))?;
        records.push(rec);
    }
    InstitutionTable::new(records).map_err(|e| Error::parse(path, e))
}

fn parse_record(cells: &[&str]) -> std::result::Result<InstitutionRecord, String> {
    let cell = |field: &str| cells[FIELDS.iter().position(|f| *f == field).expect("known field")];
    let id = cell("id");
    if id.is_empty() {
        return Err("empty id".into());
    }
    let level = |e: cofollow_core::Error| e.to_string();
    let mut rec = InstitutionRecord::new(id, cell("type").parse().map_err(level)?);
    let handle = cell("handle");
    if !handle.is_empty() {
        rec.handle = handle.to_string();
    }
    let state = cell("state");
    if !state.is_empty() {
        rec.state = state.to_string();
    }
    rec.religious = cell("religious").parse().map_err(level)?;
    rec.online = cell("online").parse().map_err(level)?;
    rec.gender = cell("gender").parse().map_err(level)?;
    rec.race = cell("race").parse().map_err(level)?;
    rec.liberal_arts = parse_flag("liberal_arts", cell("liberal_arts")).map_err(level)?;
    rec.sat_act_optional = parse_flag("sat_act_optional", cell("sat_act_optional")).map_err(level)?;
    rec.common_app = parse_flag("common_app", cell("common_app")).map_err(level)?;
    rec.no_app_fee = parse_flag("no_app_fee", cell("no_app_fee")).map_err(level)?;
    rec.verified = parse_flag("verified", cell("verified")).map_err(level)?;
    rec.enrollment = optional(cell("enrollment"), "enrollment")?;
    rec.tuition = optional(cell("tuition"), "tuition")?;
    rec.account_age = optional(cell("account_age"), "account_age")?.unwrap_or(0.0);
    rec.favorites = optional(cell("favorites"), "favorites")?.unwrap_or(0);
    rec.followers_count = optional(cell("followers"), "followers")?.unwrap_or(0);
    rec.friends_count = optional(cell("friends"), "friends")?.unwrap_or(0);
    rec.statuses = optional(cell("posts"), "posts")?.unwrap_or(0);
    Ok(rec)
}

fn optional<T: std::str::FromStr>(s: &str, field: &str) -> std::result::Result<Option<T>, String>
where
    T::Err: std::fmt::Display,
{
    if s.is_empty() || s.eq_ignore_ascii_case("na") {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|e| format!("{field}: cannot parse `{s}`: {e}"))
}

/// Writes the table with the default header, one row per record.
pub fn write_institutions(path: &Path, table: &InstitutionTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let err = |e: csv::Error| Error::parse(path, e);
    w.write_record(FIELDS).map_err(err)?;
    for r in table.records() {
        let opt = |v: Option<String>| v.unwrap_or_default();
        w.write_record([
            r.id.clone(),
            r.handle.clone(),
            r.state.clone(),
            r.ihe_type.to_string(),
            r.religious.to_string(),
            r.online.to_string(),
            r.gender.to_string(),
            r.race.to_string(),
            r.liberal_arts.to_string(),
            r.sat_act_optional.to_string(),
            r.common_app.to_string(),
            r.no_app_fee.to_string(),
            opt(r.enrollment.map(|v| v.to_string())),
            opt(r.tuition.map(|v| v.to_string())),
            r.account_age.to_string(),
            r.verified.to_string(),
            r.favorites.to_string(),
            r.followers_count.to_string(),
            r.friends_count.to_string(),
            r.statuses.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowerLine {
    pub id: String,
    pub followers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptionLine {
    pub id: String,
    #[serde(default)]
    pub description: String,
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let reader = BufReader::new(open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::line(path, i as u64 + 1, e))?);
    }
    Ok(out)
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut w = create(path)?;
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|e| Error::parse(path, e))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Follower lists, one `{"id", "followers"}` object per line.
pub fn load_followers(path: &Path) -> Result<Vec<(String, Vec<String>)>> {
    Ok(read_jsonl::<FollowerLine>(path)?.into_iter().map(|l| (l.id, l.followers)).collect())
}

pub fn write_followers(path: &Path, lists: &[(String, Vec<String>)]) -> Result<()> {
    let lines: Vec<FollowerLine> =
        lists.iter().map(|(id, f)| FollowerLine { id: id.clone(), followers: f.clone() }).collect();
    write_jsonl(path, &lines)
}

/// Follower descriptions, one `{"id", "description"}` object per line.
pub fn load_descriptions(path: &Path) -> Result<Vec<(String, String)>> {
    Ok(read_jsonl::<DescriptionLine>(path)?.into_iter().map(|l| (l.id, l.description)).collect())
}

pub fn write_descriptions(path: &Path, docs: &[(String, String)]) -> Result<()> {
    let lines: Vec<DescriptionLine> =
        docs.iter().map(|(id, d)| DescriptionLine { id: id.clone(), description: d.clone() }).collect();
    write_jsonl(path, &lines)
}

/// The bundled English stopword list.
pub const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");

/// One word per line; blank lines and `#` comments are skipped.
pub fn parse_stopwords(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

pub fn load_stopwords(path: Option<&Path>) -> Result<BTreeSet<String>> {
    match path {
        Some(p) => Ok(parse_stopwords(&std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?)),
        None => Ok(parse_stopwords(DEFAULT_STOPWORDS)),
    }
}
