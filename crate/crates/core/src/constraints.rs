//! Network-domain constraints on encoded flow records.
//!
//! A [`ConstraintSet`] holds the protocol implication tables (protocol ⇒
//! allowed services and flags), the one-hot groups, the binary columns and
//! per-column numeric ranges. [`project_discrete`] snaps discrete entries
//! to {0, 1} and clips continuous ones; [`check_validity`] then reports
//! every rule a projected vector breaks, and [`filter_batch`] applies both
//! to a whole adversarial batch.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::attacks::AdversarialBatch;
use crate::dataset::{ColumnKind, EncodedDataset, FeatureSchema, OneHotGroup, PROTOCOLS};

pub const DEFAULT_PRIMARY_GROUP: &str = "protocol_type";
pub const DEFAULT_SERVICE_GROUP: &str = "service";
pub const DEFAULT_FLAG_GROUP: &str = "flag";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConstraintError {
    #[error("schema has no one-hot group named '{0}'")]
    MissingGroup(String),
    #[error("primary group '{group}' must have 1 to 3 protocol members, found {found:?}")]
    BadPrimaryGroup { group: String, found: Vec<String> },
    #[error("unknown column '{0}'")]
    UnknownColumn(String),
    #[error("unknown {kind} '{name}' in implication for '{protocol}'")]
    UnknownCategory {
        kind: &'static str,
        protocol: String,
        name: String,
    },
    #[error("implication for '{protocol}' has an empty {kind} set")]
    EmptyAllowedSet { protocol: String, kind: &'static str },
    #[error("one-hot group '{0}' does not match the schema")]
    GroupMismatch(String),
    #[error("column '{0}' is not of the expected kind")]
    WrongColumnKind(String),
    #[error("numeric range for '{column}' is invalid: [{lo}, {hi}]")]
    BadRange { column: String, lo: f64, hi: f64 },
}

/// Services and flags admissible under one protocol.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Implication {
    pub services: BTreeSet<String>,
    pub flags: BTreeSet<String>,
}

/// Closed interval in normalized feature space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericRange {
    pub column: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    pub primary_group: String,
    pub service_group: String,
    pub flag_group: String,
    pub implications: BTreeMap<String, Implication>,
    pub one_hot_groups: Vec<OneHotGroup>,
    pub binary_columns: Vec<usize>,
    /// One entry per continuous column, ordered by column index.
    pub numeric_ranges: Vec<NumericRange>,
    dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ReasonCode {
    OneHotSum,
    BinaryDomain,
    ServiceProtocolMismatch,
    FlagProtocolMismatch,
    NumericRange,
}

impl ReasonCode {
    pub const ALL: [ReasonCode; 5] = [
        ReasonCode::OneHotSum,
        ReasonCode::BinaryDomain,
        ReasonCode::ServiceProtocolMismatch,
        ReasonCode::FlagProtocolMismatch,
        ReasonCode::NumericRange,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReasonCode::OneHotSum => "ONE_HOT_SUM",
            ReasonCode::BinaryDomain => "BINARY_DOMAIN",
            ReasonCode::ServiceProtocolMismatch => "SERVICE_PROTOCOL_MISMATCH",
            ReasonCode::FlagProtocolMismatch => "FLAG_PROTOCOL_MISMATCH",
            ReasonCode::NumericRange => "NUMERIC_RANGE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub reason: ReasonCode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidityVerdict {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl ValidityVerdict {
    pub fn reasons(&self) -> BTreeSet<ReasonCode> {
        self.violations.iter().map(|v| v.reason).collect()
    }
}

impl ConstraintSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Protocols with a member column in the schema but no implication entry.
    pub fn missing_primary_values(&self, schema: &FeatureSchema) -> Vec<String> {
        self.primary_members(schema)
            .into_iter()
            .filter(|p| !self.implications.contains_key(p))
            .collect()
    }

    fn primary_members(&self, schema: &FeatureSchema) -> Vec<String> {
        self.one_hot_groups
            .iter()
            .find(|g| g.name == self.primary_group)
            .map(|g| {
                g.members
                    .iter()
                    .filter_map(|&i| schema.columns[i].category.clone())
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Serializable form with column names instead of indices.
    pub fn to_document(&self, schema: &FeatureSchema) -> ConstraintDocument {
        let name = |i: usize| schema.columns[i].name.clone();
        ConstraintDocument {
            primary_group: self.primary_group.clone(),
            service_group: Some(self.service_group.clone()),
            flag_group: Some(self.flag_group.clone()),
            implications: self.implications.clone(),
            one_hot_groups: self
                .one_hot_groups
                .iter()
                .map(|g| GroupDocument {
                    name: g.name.clone(),
                    members: g.members.iter().map(|&i| name(i)).collect(),
                })
                .collect(),
            binary_columns: self.binary_columns.iter().map(|&i| name(i)).collect(),
            numeric_ranges: self
                .numeric_ranges
                .iter()
                .map(|r| (name(r.column), [r.lo, r.hi]))
                .collect(),
        }
    }
}

/// On-disk constraint file layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintDocument {
    pub primary_group: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub service_group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag_group: Option<String>,
    pub implications: BTreeMap<String, Implication>,
    pub one_hot_groups: Vec<GroupDocument>,
    pub binary_columns: Vec<String>,
    #[serde(default)]
    pub numeric_ranges: BTreeMap<String, [f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupDocument {
    pub name: String,
    pub members: Vec<String>,
}

fn require_group(schema: &FeatureSchema, name: &str) -> Result<OneHotGroup, ConstraintError> {
    schema
        .group(name)
        .ok_or_else(|| ConstraintError::MissingGroup(name.to_string()))
}

fn check_primary(schema: &FeatureSchema, group: &OneHotGroup) -> Result<(), ConstraintError> {
    let found: Vec<String> = group
        .members
        .iter()
        .filter_map(|&i| schema.columns[i].category.clone())
        .collect();
    let ok = !found.is_empty() && found.len() <= 3 && found.iter().all(|p| PROTOCOLS.contains(&p.as_str()));
    if ok {
        Ok(())
    } else {
        Err(ConstraintError::BadPrimaryGroup {
            group: group.name.clone(),
            found,
        })
    }
}

fn default_ranges(schema: &FeatureSchema) -> Vec<NumericRange> {
    schema
        .continuous_columns()
        .into_iter()
        .map(|column| NumericRange {
            column,
            lo: 0.0,
            hi: 1.0,
        })
        .collect()
}

/// Learns implication tables from co-occurrence in `data`; groups, binary
/// columns and default [0, 1] ranges come from its schema.
pub fn derive_constraints(data: &EncodedDataset) -> Result<ConstraintSet, ConstraintError> {
    let schema = &data.schema;
    let primary = require_group(schema, DEFAULT_PRIMARY_GROUP)?;
    check_primary(schema, &primary)?;

    let mut implications: BTreeMap<String, Implication> = BTreeMap::new();
    for row in data.features.iter_rows() {
        let Some(p) = schema.decode_category(row, DEFAULT_PRIMARY_GROUP) else {
            continue;
        };
        let entry = implications.entry(p.to_string()).or_default();
        if let Some(s) = schema.decode_category(row, DEFAULT_SERVICE_GROUP) {
            entry.services.insert(s.to_string());
        }
        if let Some(f) = schema.decode_category(row, DEFAULT_FLAG_GROUP) {
            entry.flags.insert(f.to_string());
        }
    }

    Ok(ConstraintSet {
        primary_group: DEFAULT_PRIMARY_GROUP.to_string(),
        service_group: DEFAULT_SERVICE_GROUP.to_string(),
        flag_group: DEFAULT_FLAG_GROUP.to_string(),
        implications,
        one_hot_groups: schema.groups(),
        binary_columns: schema.binary_columns(),
        numeric_ranges: default_ranges(schema),
        dim: schema.dim(),
    })
}

/// Resolves a constraint document against `schema`.
pub fn load_constraints(doc: &ConstraintDocument, schema: &FeatureSchema) -> Result<ConstraintSet, ConstraintError> {
    let primary = require_group(schema, &doc.primary_group)?;
    check_primary(schema, &primary)?;
    let service_group = doc
        .service_group
        .clone()
        .unwrap_or_else(|| DEFAULT_SERVICE_GROUP.to_string());
    let flag_group = doc.flag_group.clone().unwrap_or_else(|| DEFAULT_FLAG_GROUP.to_string());

    for (protocol, imp) in &doc.implications {
        if schema.member_index(&doc.primary_group, protocol).is_none() {
            return Err(ConstraintError::UnknownCategory {
                kind: "protocol",
                protocol: protocol.clone(),
                name: protocol.clone(),
            });
        }
        for (kind, group, set) in [
            ("service", &service_group, &imp.services),
            ("flag", &flag_group, &imp.flags),
        ] {
            if set.is_empty() {
                return Err(ConstraintError::EmptyAllowedSet {
                    protocol: protocol.clone(),
                    kind,
                });
            }
            if let Some(bad) = set.iter().find(|v| schema.member_index(group, v).is_none()) {
                return Err(ConstraintError::UnknownCategory {
                    kind,
                    protocol: protocol.clone(),
                    name: bad.clone(),
                });
            }
        }
    }

    let resolve = |name: &str| {
        schema
            .column_index(name)
            .ok_or_else(|| ConstraintError::UnknownColumn(name.to_string()))
    };

    let mut one_hot_groups = Vec::with_capacity(doc.one_hot_groups.len());
    for g in &doc.one_hot_groups {
        let members = g.members.iter().map(|m| resolve(m)).collect::<Result<Vec<_>, _>>()?;
        let expected = require_group(schema, &g.name)?;
        if expected.members != members {
            return Err(ConstraintError::GroupMismatch(g.name.clone()));
        }
        one_hot_groups.push(expected);
    }
    if !one_hot_groups.iter().any(|g| g.name == doc.primary_group) {
        return Err(ConstraintError::GroupMismatch(doc.primary_group.clone()));
    }

    let mut binary_columns = Vec::with_capacity(doc.binary_columns.len());
    for b in &doc.binary_columns {
        let i = resolve(b)?;
        if schema.columns[i].kind != ColumnKind::Binary {
            return Err(ConstraintError::WrongColumnKind(b.clone()));
        }
        binary_columns.push(i);
    }

    let mut numeric_ranges = default_ranges(schema);
    for (name, [lo, hi]) in &doc.numeric_ranges {
        let i = resolve(name)?;
        if schema.columns[i].kind != ColumnKind::Continuous {
            return Err(ConstraintError::WrongColumnKind(name.clone()));
        }
        if !(lo <= hi) {
            return Err(ConstraintError::BadRange {
                column: name.clone(),
                lo: *lo,
                hi: *hi,
            });
        }
        if let Some(r) = numeric_ranges.iter_mut().find(|r| r.column == i) {
            r.lo = *lo;
            r.hi = *hi;
        }
    }

    Ok(ConstraintSet {
        primary_group: doc.primary_group.clone(),
        service_group,
        flag_group,
        implications: doc.implications.clone(),
        one_hot_groups,
        binary_columns,
        numeric_ranges,
        dim: schema.dim(),
    })
}

fn round_binary(v: f64) -> f64 {
    if v >= 0.5 {
        1.0
    } else {
        0.0
    }
}

/// Rounds binary and one-hot entries to the nearest of {0, 1} (0.5 goes
/// to 1) and clips continuous entries to their numeric range.
pub fn project_discrete(x: &[f64], constraints: &ConstraintSet) -> Vec<f64> {
    let mut out = x.to_vec();
    for g in &constraints.one_hot_groups {
        for &i in &g.members {
            out[i] = round_binary(out[i]);
        }
    }
    for &i in &constraints.binary_columns {
        out[i] = round_binary(out[i]);
    }
    for r in &constraints.numeric_ranges {
        out[r.column] = out[r.column].clamp(r.lo, r.hi);
    }
    out
}

/// Column index of the single active member, if the group is exactly-one.
fn active_member(x: &[f64], group: &OneHotGroup) -> Option<usize> {
    let mut active = None;
    for &i in &group.members {
        if x[i] == 1.0 {
            if active.is_some() {
                return None;
            }
            active = Some(i);
        } else if x[i] != 0.0 {
            return None;
        }
    }
    active
}

/// Collects every rule `x` breaks, in a fixed order: one-hot groups,
/// binary domains, service and flag implications, numeric ranges. When
/// any one-hot group is broken the implication checks are skipped.
pub fn check_validity(x: &[f64], constraints: &ConstraintSet, schema: &FeatureSchema) -> ValidityVerdict {
    let mut violations = Vec::new();
    let mut broken_group = false;

    let mut active = BTreeMap::new();
    for g in &constraints.one_hot_groups {
        match active_member(x, g) {
            Some(i) => {
                active.insert(g.name.as_str(), i);
            }
            None => {
                broken_group = true;
                violations.push(Violation {
                    reason: ReasonCode::OneHotSum,
                    column: None,
                    group: Some(g.name.clone()),
                });
            }
        }
    }

    for &i in &constraints.binary_columns {
        if x[i] != 0.0 && x[i] != 1.0 {
            violations.push(Violation {
                reason: ReasonCode::BinaryDomain,
                column: Some(i),
                group: None,
            });
        }
    }

    if !broken_group {
        let category = |i: usize| schema.columns[i].category.as_deref().unwrap_or_default();
        let implication = active
            .get(constraints.primary_group.as_str())
            .and_then(|&p| constraints.implications.get(category(p)));
        for (group, reason, pick) in [
            (
                constraints.service_group.as_str(),
                ReasonCode::ServiceProtocolMismatch,
                (|imp: &Implication| &imp.services) as fn(&Implication) -> &BTreeSet<String>,
            ),
            (
                constraints.flag_group.as_str(),
                ReasonCode::FlagProtocolMismatch,
                |imp: &Implication| &imp.flags,
            ),
        ] {
            let Some(&col) = active.get(group) else {
                continue;
            };
            let allowed = implication.is_some_and(|imp| pick(imp).contains(category(col)));
            if !allowed {
                violations.push(Violation {
                    reason,
                    column: Some(col),
                    group: Some(group.to_string()),
                });
            }
        }
    }

    for r in &constraints.numeric_ranges {
        let v = x[r.column];
        if !(v >= r.lo && v <= r.hi) {
            violations.push(Violation {
                reason: ReasonCode::NumericRange,
                column: Some(r.column),
                group: None,
            });
        }
    }

    ValidityVerdict {
        valid: violations.is_empty(),
        violations,
    }
}

/// Result of running the filter over a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    pub valid: AdversarialBatch,
    pub invalid: AdversarialBatch,
    /// Number of samples showing each reason (at most one count per sample).
    pub stats: BTreeMap<ReasonCode, usize>,
    /// Per-sample verdicts in input order.
    pub verdicts: Vec<ValidityVerdict>,
}

/// Projects every adversarial sample, checks it, and partitions the batch
/// into valid and invalid parts. Both parts carry the projected vectors and
/// their verdicts; order is preserved.
pub fn filter_batch(batch: &AdversarialBatch, constraints: &ConstraintSet, schema: &FeatureSchema) -> FilterOutcome {
    let mut projected = crate::Matrix::with_capacity(batch.len(), batch.dim());
    let mut verdicts = Vec::with_capacity(batch.len());
    let mut stats = BTreeMap::new();
    for x in batch.adversarials.iter_rows() {
        let p = project_discrete(x, constraints);
        let verdict = check_validity(&p, constraints, schema);
        for reason in verdict.reasons() {
            *stats.entry(reason).or_insert(0) += 1;
        }
        projected.push_row(&p);
        verdicts.push(verdict);
    }
    let (valid_idx, invalid_idx): (Vec<usize>, Vec<usize>) = (0..batch.len()).partition(|&i| verdicts[i].valid);

    let mut projected_batch = batch.clone();
    projected_batch.adversarials = projected;
    projected_batch.validity = Some(verdicts.clone());

    FilterOutcome {
        valid: projected_batch.select(&valid_idx),
        invalid: projected_batch.select(&invalid_idx),
        stats,
        verdicts,
    }
}
