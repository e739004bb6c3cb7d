//! Canonical operator classes and the shipped name tables.
//!
//! Which dialect-native names belong to which class, and how each class is
//! labelled under each terminology, lives in `data/operator_map.json`.
//! Adding an operator name is a data change.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::plan::Dialect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OperatorClass {
    FullScan,
    IndexScan,
    IndexLookup,
    Sort,
    Aggregate,
    NestedLoopJoin,
    HashJoin,
    MergeJoin,
    Materialize,
    Limit,
    Distinct,
    Gather,
    SubqueryScan,
    /// Anything the mapping table does not know; the raw label is kept.
    Other,
}

impl OperatorClass {
    pub const ALL: [OperatorClass; 14] = [
        OperatorClass::FullScan,
        OperatorClass::IndexScan,
        OperatorClass::IndexLookup,
        OperatorClass::Sort,
        OperatorClass::Aggregate,
        OperatorClass::NestedLoopJoin,
        OperatorClass::HashJoin,
        OperatorClass::MergeJoin,
        OperatorClass::Materialize,
        OperatorClass::Limit,
        OperatorClass::Distinct,
        OperatorClass::Gather,
        OperatorClass::SubqueryScan,
        OperatorClass::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OperatorClass::FullScan => "FullScan",
            OperatorClass::IndexScan => "IndexScan",
            OperatorClass::IndexLookup => "IndexLookup",
            OperatorClass::Sort => "Sort",
            OperatorClass::Aggregate => "Aggregate",
            OperatorClass::NestedLoopJoin => "NestedLoopJoin",
            OperatorClass::HashJoin => "HashJoin",
            OperatorClass::MergeJoin => "MergeJoin",
            OperatorClass::Materialize => "Materialize",
            OperatorClass::Limit => "Limit",
            OperatorClass::Distinct => "Distinct",
            OperatorClass::Gather => "Gather",
            OperatorClass::SubqueryScan => "SubqueryScan",
            OperatorClass::Other => "Other",
        }
    }
}

impl fmt::Display for OperatorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperatorClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OperatorClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown operator class `{s}`"))
    }
}

/// Vocabulary used for display labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Terminology {
    #[default]
    Canonical,
    #[serde(rename = "postgres")]
    PostgresStyle,
    #[serde(rename = "mysql")]
    MySqlStyle,
    #[serde(rename = "mariadb")]
    MariaDbStyle,
}

impl Terminology {
    pub const ALL: [Terminology; 4] = [
        Terminology::Canonical,
        Terminology::PostgresStyle,
        Terminology::MySqlStyle,
        Terminology::MariaDbStyle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Terminology::Canonical => "canonical",
            Terminology::PostgresStyle => "postgres",
            Terminology::MySqlStyle => "mysql",
            Terminology::MariaDbStyle => "mariadb",
        }
    }
}

impl FromStr for Terminology {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Terminology::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown terminology `{s}`"))
    }
}

#[derive(Deserialize)]
struct StyleNames {
    canonical: String,
    postgres: String,
    mysql: String,
    mariadb: String,
}

#[derive(Deserialize)]
struct OperatorGroup {
    dialect: Dialect,
    class: OperatorClass,
    names: Vec<String>,
}

#[derive(Deserialize)]
struct MappingFile {
    styles: HashMap<OperatorClass, StyleNames>,
    operators: Vec<OperatorGroup>,
}

struct MappingTable {
    styles: HashMap<OperatorClass, StyleNames>,
    exact: HashMap<(Dialect, String), OperatorClass>,
    folded: HashMap<(Dialect, String), OperatorClass>,
}

static MAPPING: LazyLock<MappingTable> = LazyLock::new(|| {
    let file: MappingFile = serde_json::from_str(include_str!("../../data/operator_map.json"))
        .expect("operator_map.json is valid");
    let mut exact = HashMap::new();
    let mut folded = HashMap::new();
    for group in file.operators {
        for name in group.names {
            folded.insert((group.dialect, name.to_lowercase()), group.class);
            exact.insert((group.dialect, name), group.class);
        }
    }
    MappingTable {
        styles: file.styles,
        exact,
        folded,
    }
});

fn lookup(name: &str, dialect: Dialect) -> Option<OperatorClass> {
    let table = &*MAPPING;
    table
        .exact
        .get(&(dialect, name.to_string()))
        .or_else(|| table.folded.get(&(dialect, name.to_lowercase())))
        .copied()
}

/// Maps a dialect-native operator label onto the canonical taxonomy.
///
/// Parenthesised qualifiers such as `Aggregate (Sorted)` are ignored when
/// the full label is not in the table. Unknown labels map to `Other`.
pub fn classify(raw_op_name: &str, dialect: Dialect) -> OperatorClass {
    let name = raw_op_name.trim();
    if let Some(class) = lookup(name, dialect) {
        return class;
    }
    if let Some(base) = name.split(" (").next().filter(|b| b.len() < name.len()) {
        if let Some(class) = lookup(base.trim(), dialect) {
            return class;
        }
    }
    OperatorClass::Other
}

/// Label for `class` under `term`; `None` for [`OperatorClass::Other`].
pub fn style_name(class: OperatorClass, term: Terminology) -> Option<&'static str> {
    let names = MAPPING.styles.get(&class)?;
    Some(match term {
        Terminology::Canonical => &names.canonical,
        Terminology::PostgresStyle => &names.postgres,
        Terminology::MySqlStyle => &names.mysql,
        Terminology::MariaDbStyle => &names.mariadb,
    })
}
