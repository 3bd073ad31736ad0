use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::record::{RawRecord, BINARY_COLUMNS, CATEGORICAL_COLUMNS, NSL_KDD_COLUMNS, NUMERIC_COLUMNS};
use super::DatasetError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Continuous,
    Binary,
    OneHotMember,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    /// Raw categorical column this member belongs to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    /// Raw categorical value this member stands for.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    pub train_min: f64,
    pub train_max: f64,
}

/// A one-hot group resolved to column indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneHotGroup {
    pub name: String,
    pub members: Vec<usize>,
}

/// Column metadata for the encoded feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub columns: Vec<ColumnSpec>,
}

impl FeatureSchema {
    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// One-hot groups in column order of their first member.
    pub fn groups(&self) -> Vec<OneHotGroup> {
        let mut out: Vec<OneHotGroup> = Vec::new();
        for (i, c) in self.columns.iter().enumerate() {
            if let Some(g) = &c.group {
                match out.iter_mut().find(|grp| &grp.name == g) {
                    Some(grp) => grp.members.push(i),
                    None => out.push(OneHotGroup {
                        name: g.clone(),
                        members: alloc::vec![i],
                    }),
                }
            }
        }
        out
    }

    pub fn group(&self, name: &str) -> Option<OneHotGroup> {
        self.groups().into_iter().find(|g| g.name == name)
    }

    /// Column index of the one-hot member for `value` in group `group`.
    pub fn member_index(&self, group: &str, value: &str) -> Option<usize> {
        self.columns
            .iter()
            .position(|c| c.group.as_deref() == Some(group) && c.category.as_deref() == Some(value))
    }

    pub fn binary_columns(&self) -> Vec<usize> {
        self.indices_of(ColumnKind::Binary)
    }

    pub fn continuous_columns(&self) -> Vec<usize> {
        self.indices_of(ColumnKind::Continuous)
    }

    fn indices_of(&self, kind: ColumnKind) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == kind)
            .map(|(i, _)| i)
            .collect()
    }

    /// Raw category of `group` active in `row`, if exactly one member is 1.
    pub fn decode_category<'a>(&'a self, row: &[f64], group: &str) -> Option<&'a str> {
        let mut active = None;
        for (i, c) in self.columns.iter().enumerate() {
            if c.group.as_deref() != Some(group) {
                continue;
            }
            if row[i] == 1.0 {
                if active.is_some() {
                    return None;
                }
                active = c.category.as_deref();
            } else if row[i] != 0.0 {
                return None;
            }
        }
        active
    }
}

/// Builds the schema from `records`: one-hot vocabularies and min/max
/// statistics both come from the same records.
pub fn build_schema(records: &[RawRecord]) -> Result<FeatureSchema, DatasetError> {
    build_schema_with_ranges(records, records)
}

/// Builds the schema with one-hot vocabularies taken from `vocabulary` and
/// min/max statistics from `range_source` (typically the training split).
pub fn build_schema_with_ranges(
    vocabulary: &[RawRecord],
    range_source: &[RawRecord],
) -> Result<FeatureSchema, DatasetError> {
    if vocabulary.is_empty() || range_source.is_empty() {
        return Err(DatasetError::EmptyRecords);
    }
    for r in vocabulary.iter().chain(range_source) {
        if r.numeric.len() != NUMERIC_COLUMNS.len() {
            return Err(DatasetError::NumericArity {
                expected: NUMERIC_COLUMNS.len(),
                got: r.numeric.len(),
            });
        }
    }

    let mut columns = Vec::new();
    let mut numeric_pos = 0;
    for name in NSL_KDD_COLUMNS {
        if CATEGORICAL_COLUMNS.contains(&name) {
            let values: BTreeSet<&str> = vocabulary.iter().filter_map(|r| r.categorical(name)).collect();
            for v in values {
                columns.push(ColumnSpec {
                    name: format!("{name}_{v}"),
                    kind: ColumnKind::OneHotMember,
                    group: Some(name.to_string()),
                    category: Some(v.to_string()),
                    train_min: 0.0,
                    train_max: 1.0,
                });
            }
            continue;
        }
        let (kind, train_min, train_max) = if BINARY_COLUMNS.contains(&name) {
            (ColumnKind::Binary, 0.0, 1.0)
        } else {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for r in range_source {
                let v = r.numeric[numeric_pos];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            (ColumnKind::Continuous, lo, hi)
        };
        columns.push(ColumnSpec {
            name: name.to_string(),
            kind,
            group: None,
            category: None,
            train_min,
            train_max,
        });
        numeric_pos += 1;
    }
    Ok(FeatureSchema { columns })
}
