//! Institution attributes, follower lists and the encoded feature table.
//!
//! Records are validated on construction: ids are unique, enrollment and
//! tuition are positive when present, and community colleges and trade
//! schools are secular. Missing enrollment or tuition is kept as `None`; the
//! feature table flags those rows instead of dropping them.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::{Error, Result};

/// A categorical attribute with a fixed set of levels.
pub trait Level: Copy + Eq + Sized + 'static {
    const FIELD: &'static str;
    const ALL: &'static [Self];
    fn name(self) -> &'static str;

    fn index(self) -> usize {
        Self::ALL.iter().position(|&l| l == self).unwrap_or(0)
    }

    fn names() -> Vec<String> {
        Self::ALL.iter().map(|l| l.name().to_string()).collect()
    }
}

fn normalize_token(s: &str) -> String {
    s.trim()
        .chars()
        .filter(|c| !matches!(c, ' ' | '-' | '_' | '\''))
        .flat_map(char::to_lowercase)
        .collect()
}

macro_rules! level_enum {
    (
        $(#[$meta:meta])*
        $name:ident, $field:literal, default = $default:expr,
        { $($variant:ident => $label:literal [$($alias:literal),*]),+ $(,)? }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl Level for $name {
            const FIELD: &'static str = $field;
            const ALL: &'static [Self] = &[$($name::$variant),+];
            fn name(self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                let t = normalize_token(s);
                let default: Option<$name> = $default;
                if t.is_empty() {
                    return default.ok_or_else(|| Error::UnknownLevel { field: $field, token: s.to_string() });
                }
                $(
                    if t == normalize_token($label) $(|| t == $alias)* {
                        return Ok($name::$variant);
                    }
                )+
                Err(Error::UnknownLevel { field: $field, token: s.to_string() })
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }
    };
}

level_enum! {
    /// Institution type.
    IheType, "type", default = None, {
        Public => "Public" [],
        Private => "Private" [],
        CommunityCollege => "CommunityCollege" ["cc", "comm.coll."],
        TradeSchool => "TradeSchool" [],
    }
}

level_enum! {
    /// Religious affiliation; Catholic is folded into Christian.
    Religious, "religious", default = Some(Religious::Secular), {
        Secular => "Secular" ["none"],
        Christian => "Christian" ["catholic"],
        Jewish => "Jewish" [],
        Muslim => "Muslim" [],
    }
}

level_enum! {
    /// Online learning options.
    Online, "online", default = Some(Online::None), {
        None => "None" [],
        SomeOnline => "SomeOnline" ["someonlinedegrees", "some"],
        LargeOnline => "LargeOnline" ["largeonlineprogram", "large"],
        FullyOnline => "FullyOnline" ["fully"],
    }
}

level_enum! {
    /// Gender preference.
    Gender, "gender", default = Some(Gender::Coed), {
        Coed => "Coed" ["none"],
        AllWomen => "AllWomen" ["women", "allfemale"],
        AllMen => "AllMen" ["men", "allmale"],
    }
}

level_enum! {
    /// Race preference.
    Race, "race", default = Some(Race::None), {
        None => "None" [],
        Hsi => "HSI" ["hispanicservinginstitution"],
        Hbcu => "HBCU" ["historicallyblackcollegeoruniversity"],
    }
}

/// Parses a boolean cell. Empty cells read as `false`.
pub fn parse_flag(field: &'static str, s: &str) -> Result<bool> {
    match normalize_token(s).as_str() {
        "" | "0" | "false" | "no" | "n" | "f" => Ok(false),
        "1" | "true" | "yes" | "y" | "t" => Ok(true),
        _ => Err(Error::UnknownLevel { field, token: s.to_string() }),
    }
}

/// One institution's attributes plus its account counters.
#[derive(Debug, Clone, PartialEq)]
pub struct InstitutionRecord {
    pub id: String,
    pub handle: String,
    pub state: String,
    pub ihe_type: IheType,
    pub religious: Religious,
    pub online: Online,
    pub gender: Gender,
    pub race: Race,
    pub liberal_arts: bool,
    pub sat_act_optional: bool,
    pub common_app: bool,
    pub no_app_fee: bool,
    pub enrollment: Option<u64>,
    pub tuition: Option<f64>,
    pub account_age: f64,
    pub verified: bool,
    pub favorites: u64,
    pub followers_count: u64,
    pub friends_count: u64,
    pub statuses: u64,
}

impl InstitutionRecord {
    /// A record with default levels, handy for building tables in code.
    pub fn new(id: impl Into<String>, ihe_type: IheType) -> Self {
        let id = id.into();
        Self {
            handle: id.clone(),
            id,
            state: "unknown".to_string(),
            ihe_type,
            religious: Religious::Secular,
            online: Online::None,
            gender: Gender::Coed,
            race: Race::None,
            liberal_arts: false,
            sat_act_optional: false,
            common_app: false,
            no_app_fee: false,
            enrollment: None,
            tuition: None,
            account_age: 0.0,
            verified: false,
            favorites: 0,
            followers_count: 0,
            friends_count: 0,
            statuses: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Err(Error::InconsistentRecord { id: self.id.clone(), reason: reason.to_string() });
        if self.enrollment == Some(0) {
            return bad("enrollment must be at least 1");
        }
        if let Some(t) = self.tuition {
            if !(t > 0.0 && t.is_finite()) {
                return bad("tuition must be positive");
            }
        }
        if !(self.account_age >= 0.0 && self.account_age.is_finite()) {
            return bad("account age must be non-negative");
        }
        if matches!(self.ihe_type, IheType::CommunityCollege | IheType::TradeSchool) && self.religious != Religious::Secular
        {
            return bad("community colleges and trade schools must be secular");
        }
        Ok(())
    }

    /// Combined type/religion level: a religious affiliation overrides the type.
    pub fn type_religion(&self) -> TypeReligion {
        match self.religious {
            Religious::Christian => TypeReligion::Christian,
            Religious::Jewish => TypeReligion::Jewish,
            Religious::Muslim => TypeReligion::Muslim,
            Religious::Secular => match self.ihe_type {
                IheType::Public => TypeReligion::Public,
                IheType::Private => TypeReligion::Private,
                IheType::CommunityCollege => TypeReligion::CommunityCollege,
                IheType::TradeSchool => TypeReligion::TradeSchool,
            },
        }
    }
}

level_enum! {
    /// Type and religious affiliation merged into one variable. Public
    /// institutions are secular, so religion only splits private ones.
    TypeReligion, "type_religion", default = None, {
        Public => "Public" [],
        Private => "Private" [],
        CommunityCollege => "CommunityCollege" [],
        TradeSchool => "TradeSchool" [],
        Christian => "Christian" [],
        Jewish => "Jewish" [],
        Muslim => "Muslim" [],
    }
}

/// Validated institution table, in input order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InstitutionTable {
    records: Vec<InstitutionRecord>,
    index: BTreeMap<String, usize>,
}

impl InstitutionTable {
    pub fn new(records: Vec<InstitutionRecord>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            r.validate()?;
            if index.insert(r.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(r.id.clone()));
            }
        }
        Ok(Self { records, index })
    }

    pub fn records(&self) -> &[InstitutionRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&InstitutionRecord> {
        self.index.get(id).map(|&i| &self.records[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }
}

/// Truncated follower lists and their transpose.
///
/// Institutions and followers are interned to dense indices; institution
/// order is input order, follower order is first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowerDataset {
    institutions: Vec<String>,
    followers: Vec<String>,
    lists: Vec<Vec<u32>>,
    inverse: Vec<Vec<u32>>,
    original_lengths: Vec<usize>,
    truncation_limit: usize,
}

impl FollowerDataset {
    /// Builds the dataset, keeping the first `truncation_limit` entries of
    /// every list. Repeated followers within a list are kept once.
    pub fn from_lists<I, S>(lists: I, truncation_limit: usize) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<S>)>,
        S: AsRef<str>,
    {
        if truncation_limit == 0 {
            return Err(Error::InvalidInput("truncation limit must be positive".into()));
        }
        let mut institutions = Vec::new();
        let mut seen_inst = BTreeMap::new();
        let mut followers: Vec<String> = Vec::new();
        let mut interned: BTreeMap<String, u32> = BTreeMap::new();
        let mut out_lists = Vec::new();
        let mut original_lengths = Vec::new();
        for (inst, list) in lists {
            let inst = inst.as_ref();
            if seen_inst.insert(inst.to_string(), institutions.len()).is_some() {
                return Err(Error::DuplicateId(inst.to_string()));
            }
            institutions.push(inst.to_string());
            original_lengths.push(list.len());
            let mut kept: Vec<u32> = Vec::with_capacity(list.len().min(truncation_limit));
            for q in list.iter().take(truncation_limit) {
                let q = q.as_ref();
                let next = followers.len() as u32;
                let id = *interned.entry(q.to_string()).or_insert_with(|| {
                    followers.push(q.to_string());
                    next
                });
                if !kept.contains(&id) {
                    kept.push(id);
                }
            }
            out_lists.push(kept);
        }
        let mut inverse = vec![Vec::new(); followers.len()];
        for (n, list) in out_lists.iter().enumerate() {
            for &q in list {
                inverse[q as usize].push(n as u32);
            }
        }
        Ok(Self {
            institutions,
            followers,
            lists: out_lists,
            inverse,
            original_lengths,
            truncation_limit,
        })
    }

    pub fn institutions(&self) -> &[String] {
        &self.institutions
    }

    pub fn institution_count(&self) -> usize {
        self.institutions.len()
    }

    pub fn institution_index(&self, id: &str) -> Option<usize> {
        self.institutions.iter().position(|s| s == id)
    }

    pub fn followers(&self) -> &[String] {
        &self.followers
    }

    pub fn follower_count(&self) -> usize {
        self.followers.len()
    }

    pub fn truncation_limit(&self) -> usize {
        self.truncation_limit
    }

    /// Follower indices of institution `n`, in reported order.
    pub fn list(&self, n: usize) -> &[u32] {
        &self.lists[n]
    }

    /// Follower ids of institution `n`, in reported order.
    pub fn list_ids(&self, n: usize) -> impl Iterator<Item = &str> + '_ {
        self.lists[n].iter().map(move |&q| self.followers[q as usize].as_str())
    }

    /// Institutions followed by follower `q`, ascending.
    pub fn inverse(&self, q: usize) -> &[u32] {
        &self.inverse[q]
    }

    /// List lengths before truncation.
    pub fn original_lengths(&self) -> &[usize] {
        &self.original_lengths
    }
}

/// How a variable is coded.
#[derive(Debug, Clone, PartialEq)]
pub enum VariableKind {
    Continuous,
    Binary,
    Categorical { levels: Vec<String>, reference: usize },
}

/// One variable's value for one institution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Real(f64),
    Flag(bool),
    Level(usize),
    Missing,
}

/// Variable-level values for every row, before dummy expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: &'static str,
    pub label: &'static str,
    pub kind: VariableKind,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Continuous,
    Binary,
    Dummy,
}

/// One column of an encoded design.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub label: String,
    pub variable: &'static str,
    pub kind: ColumnKind,
    /// The variable's reference level, for dummy columns.
    pub reference: Option<String>,
}

impl Column {
    pub fn is_level(&self) -> bool {
        self.kind == ColumnKind::Dummy
    }
}

/// Options for [`build_features`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureConfig {
    pub z_score: bool,
    /// Merge type and religious affiliation into one variable.
    pub combine_type_religious: bool,
    /// Variables expanded into design columns; `None` selects the monadic set.
    pub design_variables: Option<Vec<String>>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self { z_score: true, combine_type_religious: true, design_variables: None }
    }
}

impl FeatureConfig {
    pub fn selected(&self) -> Vec<&str> {
        match &self.design_variables {
            Some(v) => v.iter().map(String::as_str).collect(),
            None => {
                let mut v = vec![
                    "log_tuition",
                    "log_enrollment",
                    "account_age",
                    "verified",
                    "no_app_fee",
                    "liberal_arts",
                    "sat_act_optional",
                    "common_app",
                    "race",
                    "online",
                ];
                if self.combine_type_religious {
                    v.push("type_religion");
                } else {
                    v.extend(["ihe_type", "religious"]);
                }
                v.push("gender");
                v
            }
        }
    }
}

/// Encoded predictors aligned with the institution table.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub ids: Vec<String>,
    pub variables: Vec<Variable>,
    pub columns: Vec<Column>,
    /// Row-major design values; `None` for flagged rows.
    pub rows: Vec<Option<Vec<f64>>>,
    /// Names of missing design variables per row; non-empty means flagged.
    pub missing: Vec<Vec<&'static str>>,
    /// `(mean, sd)` used to standardize each column, when z-scored.
    pub scaling: Vec<Option<(f64, f64)>>,
}

impl FeatureTable {
    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|s| s == id)
    }

    pub fn flagged_count(&self) -> usize {
        self.rows.iter().filter(|r| r.is_none()).count()
    }
}

fn categorical<L: Level>(name: &'static str, label: &'static str, table: &InstitutionTable, get: impl Fn(&InstitutionRecord) -> L) -> Variable {
    Variable {
        name,
        label,
        kind: VariableKind::Categorical { levels: L::names(), reference: 0 },
        cells: table.records().iter().map(|r| Cell::Level(get(r).index())).collect(),
    }
}

fn binary(name: &'static str, label: &'static str, table: &InstitutionTable, get: impl Fn(&InstitutionRecord) -> bool) -> Variable {
    Variable { name, label, kind: VariableKind::Binary, cells: table.records().iter().map(|r| Cell::Flag(get(r))).collect() }
}

/// All variables available for designs, including `state`.
pub fn variables(table: &InstitutionTable) -> Result<Vec<Variable>> {
    let mut log_enrollment = Vec::with_capacity(table.len());
    let mut log_tuition = Vec::with_capacity(table.len());
    for (row, r) in table.records().iter().enumerate() {
        log_enrollment.push(match r.enrollment {
            Some(0) => return Err(Error::NonPositiveLog { row, id: r.id.clone(), column: "enrollment" }),
            Some(e) => Cell::Real(libm::log(e as f64)),
            None => Cell::Missing,
        });
        log_tuition.push(match r.tuition {
            Some(t) if t > 0.0 => Cell::Real(libm::log(t)),
            Some(_) => return Err(Error::NonPositiveLog { row, id: r.id.clone(), column: "tuition" }),
            None => Cell::Missing,
        });
    }

    let mut states: Vec<String> = table.records().iter().map(|r| r.state.clone()).collect();
    states.sort();
    states.dedup();
    let state_cells = table
        .records()
        .iter()
        .map(|r| Cell::Level(states.binary_search(&r.state).unwrap_or(0)))
        .collect();

    Ok(vec![
        Variable { name: "log_enrollment", label: "Enrollment", kind: VariableKind::Continuous, cells: log_enrollment },
        Variable { name: "log_tuition", label: "Tuition", kind: VariableKind::Continuous, cells: log_tuition },
        Variable {
            name: "account_age",
            label: "Account Age",
            kind: VariableKind::Continuous,
            cells: table.records().iter().map(|r| Cell::Real(r.account_age)).collect(),
        },
        binary("verified", "Verified", table, |r| r.verified),
        binary("no_app_fee", "No App Fee", table, |r| r.no_app_fee),
        binary("liberal_arts", "Liberal Arts", table, |r| r.liberal_arts),
        binary("sat_act_optional", "SAT/ACT Optional", table, |r| r.sat_act_optional),
        binary("common_app", "Common App", table, |r| r.common_app),
        categorical("race", "Race", table, |r| r.race),
        categorical("online", "Online", table, |r| r.online),
        categorical("gender", "Gender", table, |r| r.gender),
        categorical("ihe_type", "Type", table, |r| r.ihe_type),
        categorical("religious", "Religious", table, |r| r.religious),
        categorical("type_religion", "Type/Religion", table, |r| r.type_religion()),
        Variable {
            name: "state",
            label: "State",
            kind: VariableKind::Categorical { levels: states, reference: 0 },
            cells: state_cells,
        },
    ])
}

/// Encodes the institution table into design columns.
///
/// Continuous variables become one column each (z-scored over unflagged rows
/// when configured); binary variables one 0/1 column; a categorical variable
/// with `k` levels contributes `k - 1` dummies, the reference level omitted.
pub fn build_features(table: &InstitutionTable, config: &FeatureConfig) -> Result<FeatureTable> {
    let variables = variables(table)?;
    let selected = config.selected();
    let mut chosen = Vec::new();
    for name in &selected {
        let idx = variables
            .iter()
            .position(|v| v.name == *name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown design variable `{name}`")))?;
        chosen.push(idx);
    }

    let mut columns = Vec::new();
    for &vi in &chosen {
        let v = &variables[vi];
        match &v.kind {
            VariableKind::Continuous => columns.push(Column {
                name: v.name.to_string(),
                label: v.label.to_string(),
                variable: v.name,
                kind: ColumnKind::Continuous,
                reference: None,
            }),
            VariableKind::Binary => columns.push(Column {
                name: v.name.to_string(),
                label: v.label.to_string(),
                variable: v.name,
                kind: ColumnKind::Binary,
                reference: None,
            }),
            VariableKind::Categorical { levels, reference } => {
                for (li, level) in levels.iter().enumerate() {
                    if li == *reference {
                        continue;
                    }
                    columns.push(Column {
                        name: format!("{}={}", v.name, level),
                        label: level_label(level),
                        variable: v.name,
                        kind: ColumnKind::Dummy,
                        reference: Some(levels[*reference].clone()),
                    });
                }
            }
        }
    }

    let n = table.len();
    let mut rows = Vec::with_capacity(n);
    let mut missing = Vec::with_capacity(n);
    for r in 0..n {
        let mut row = Vec::with_capacity(columns.len());
        let mut miss = Vec::new();
        for &vi in &chosen {
            let v = &variables[vi];
            match (&v.kind, v.cells[r]) {
                (_, Cell::Missing) => miss.push(v.name),
                (VariableKind::Continuous, Cell::Real(x)) => row.push(x),
                (VariableKind::Binary, Cell::Flag(b)) => row.push(if b { 1.0 } else { 0.0 }),
                (VariableKind::Categorical { levels, reference }, Cell::Level(l)) => {
                    for li in 0..levels.len() {
                        if li != *reference {
                            row.push(if li == l { 1.0 } else { 0.0 });
                        }
                    }
                }
                _ => return Err(Error::InvalidInput(format!("cell type mismatch in `{}`", v.name))),
            }
        }
        if miss.is_empty() {
            rows.push(Some(row));
        } else {
            rows.push(None);
        }
        missing.push(miss);
    }

    let mut scaling = vec![None; columns.len()];
    if config.z_score {
        for (c, col) in columns.iter().enumerate() {
            if col.kind != ColumnKind::Continuous {
                continue;
            }
            let vals: Vec<f64> = rows.iter().flatten().map(|row| row[c]).collect();
            if vals.is_empty() {
                continue;
            }
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = if vals.len() > 1 {
                vals.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (vals.len() - 1) as f64
            } else {
                0.0
            };
            let sd = libm::sqrt(var);
            let div = if sd > 0.0 { sd } else { 1.0 };
            for row in rows.iter_mut().flatten() {
                row[c] = (row[c] - mean) / div;
            }
            scaling[c] = Some((mean, sd));
        }
    }

    Ok(FeatureTable {
        ids: table.records().iter().map(|r| r.id.clone()).collect(),
        variables,
        columns,
        rows,
        missing,
        scaling,
    })
}

fn level_label(level: &str) -> String {
    match level {
        "SomeOnline" => "Some Online".into(),
        "LargeOnline" => "Large Online".into(),
        "FullyOnline" => "Fully Online".into(),
        "CommunityCollege" => "Comm. Coll.".into(),
        "TradeSchool" => "Trade School".into(),
        "AllWomen" => "All-Women".into(),
        "AllMen" => "All-Men".into(),
        other => other.to_string(),
    }
}
