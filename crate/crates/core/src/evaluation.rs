//! Validity rates, severity before and after filtering, and the
//! transferability table.
//!
//! Severity is the evasion rate: the percentage of evaluated adversarial
//! samples that a target classifies as benign. Before filtering every
//! sample is evaluated; after filtering only the projected samples that
//! pass the constraint filter are. An empty evaluated set has no severity.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::attacks::{AdversarialBatch, AttackConfig, AttackKind};
use crate::constraints::{filter_batch, ConstraintSet, FilterOutcome, ReasonCode};
use crate::dataset::FeatureSchema;
use crate::models::{Classifier, ModelError};
use crate::Matrix;

pub const REPORT_VERSION: u32 = 1;

pub const SEVERITY_DEFINITION: &str =
    "evasion rate: percentage of evaluated adversarial samples the target classifies as benign";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvaluationError {
    #[error("target '{target}' expects dimension {expected}, batch has {got}")]
    SchemaMismatch {
        target: String,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Rounds a percentage to two decimals.
pub fn round_pct(v: f64) -> f64 {
    libm::round(v * 100.0) / 100.0
}

fn pct(part: usize, whole: usize) -> Option<f64> {
    (whole > 0).then(|| round_pct(100.0 * part as f64 / whole as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityEntry {
    pub attack: AttackKind,
    pub valid_count: usize,
    pub invalid_count: usize,
    pub validity_pct: Option<f64>,
    pub invalidity_pct: Option<f64>,
    /// Samples showing each violation reason.
    pub violations: BTreeMap<ReasonCode, usize>,
}

impl ValidityEntry {
    fn from_outcome(attack: AttackKind, outcome: &FilterOutcome) -> Self {
        let valid = outcome.valid.len();
        let invalid = outcome.invalid.len();
        let validity_pct = pct(valid, valid + invalid);
        Self {
            attack,
            valid_count: valid,
            invalid_count: invalid,
            validity_pct,
            // complement of the rounded value so the pair always sums to 100
            invalidity_pct: validity_pct.map(|v| round_pct(100.0 - v)),
            violations: outcome.stats.clone(),
        }
    }
}

pub fn validity_rate(batch: &AdversarialBatch, constraints: &ConstraintSet, schema: &FeatureSchema) -> ValidityEntry {
    ValidityEntry::from_outcome(batch.attack.attack_kind, &filter_batch(batch, constraints, schema))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeverityEntry {
    pub severity: Option<f64>,
    pub evaded: usize,
    pub evaluated: usize,
}

/// Evasion rate of `target` over the rows of `samples`.
pub fn severity_of(samples: &Matrix, target: &dyn Classifier) -> Result<SeverityEntry, EvaluationError> {
    let mut evaded = 0;
    for x in samples.iter_rows() {
        if target.predict(x)? == 0 {
            evaded += 1;
        }
    }
    Ok(SeverityEntry {
        severity: pct(evaded, samples.rows()),
        evaded,
        evaluated: samples.rows(),
    })
}

fn check_target(name: &str, target: &dyn Classifier, dim: usize) -> Result<(), EvaluationError> {
    if target.input_dim() != dim {
        return Err(EvaluationError::SchemaMismatch {
            target: name.into(),
            expected: target.input_dim(),
            got: dim,
        });
    }
    Ok(())
}

/// Severity on the raw batch (`use_filter = false`) or on its
/// filter-valid projected samples (`use_filter = true`).
pub fn severity(
    batch: &AdversarialBatch,
    target: &dyn Classifier,
    use_filter: bool,
    constraints: &ConstraintSet,
    schema: &FeatureSchema,
) -> Result<SeverityEntry, EvaluationError> {
    check_target(target.kind().as_str(), target, schema.dim())?;
    check_target(target.kind().as_str(), target, batch.dim())?;
    if use_filter {
        severity_of(&filter_batch(batch, constraints, schema).valid.adversarials, target)
    } else {
        severity_of(&batch.adversarials, target)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeverityCell {
    pub attack: AttackKind,
    pub target: String,
    pub severity_before: Option<f64>,
    pub severity_after: Option<f64>,
    pub n_before: usize,
    pub n_after: usize,
    pub evaded_before: usize,
    pub evaded_after: usize,
}

impl SeverityCell {
    /// `(before − after) / before`, when both exist and before is nonzero.
    pub fn relative_reduction(&self) -> Option<f64> {
        if self.n_before == 0 || self.n_after == 0 || self.evaded_before == 0 {
            return None;
        }
        let before = self.evaded_before as f64 / self.n_before as f64;
        let after = self.evaded_after as f64 / self.n_after as f64;
        Some((before - after) / before)
    }
}

/// A named target classifier.
pub struct Target<'a> {
    pub name: String,
    pub model: &'a dyn Classifier,
}

/// Before/after severity for every (attack, target) pair, attack-major.
pub fn transferability_matrix(
    batches: &[AdversarialBatch],
    targets: &[Target<'_>],
    constraints: &ConstraintSet,
    schema: &FeatureSchema,
) -> Result<Vec<SeverityCell>, EvaluationError> {
    for t in targets {
        check_target(&t.name, t.model, schema.dim())?;
    }
    let mut cells = Vec::with_capacity(batches.len() * targets.len());
    for batch in batches {
        let outcome = filter_batch(batch, constraints, schema);
        cells.extend(matrix_row(batch, &outcome, targets)?);
    }
    Ok(cells)
}

fn matrix_row(
    batch: &AdversarialBatch,
    outcome: &FilterOutcome,
    targets: &[Target<'_>],
) -> Result<Vec<SeverityCell>, EvaluationError> {
    targets
        .iter()
        .map(|t| {
            let before = severity_of(&batch.adversarials, t.model)?;
            let after = severity_of(&outcome.valid.adversarials, t.model)?;
            Ok(SeverityCell {
                attack: batch.attack.attack_kind,
                target: t.name.clone(),
                severity_before: before.severity,
                severity_after: after.severity,
                n_before: before.evaluated,
                n_after: after.evaluated,
                evaded_before: before.evaded,
                evaded_after: after.evaded,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub severity_definition: String,
    pub surrogate: String,
    pub seeds: BTreeMap<String, u64>,
    pub configs: Vec<AttackConfig>,
    /// SHA-256 of each attack config's canonical JSON, keyed by attack id.
    pub config_hashes: BTreeMap<String, String>,
    pub dataset_fingerprint: String,
    pub attacked_samples: usize,
    pub excluded_samples: usize,
    /// Free-form run facts (model metrics, architecture, ...).
    pub notes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub report_version: u32,
    pub validity: Vec<ValidityEntry>,
    pub severity: Vec<SeverityCell>,
    pub metadata: ReportMetadata,
}

impl EvaluationReport {
    pub fn cell(&self, attack: AttackKind, target: &str) -> Option<&SeverityCell> {
        self.severity.iter().find(|c| c.attack == attack && c.target == target)
    }

    pub fn validity_of(&self, attack: AttackKind) -> Option<&ValidityEntry> {
        self.validity.iter().find(|v| v.attack == attack)
    }

    /// Target names in first-appearance order.
    pub fn targets(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for c in &self.severity {
            if !out.contains(&c.target.as_str()) {
                out.push(&c.target);
            }
        }
        out
    }
}

/// Filters each batch once and computes validity and severity tables.
pub fn evaluate(
    batches: &[AdversarialBatch],
    targets: &[Target<'_>],
    constraints: &ConstraintSet,
    schema: &FeatureSchema,
    metadata: ReportMetadata,
) -> Result<EvaluationReport, EvaluationError> {
    for t in targets {
        check_target(&t.name, t.model, schema.dim())?;
    }
    let mut validity = Vec::with_capacity(batches.len());
    let mut severity = Vec::new();
    for batch in batches {
        let outcome = filter_batch(batch, constraints, schema);
        validity.push(ValidityEntry::from_outcome(batch.attack.attack_kind, &outcome));
        severity.extend(matrix_row(batch, &outcome, targets)?);
    }
    Ok(EvaluationReport {
        report_version: REPORT_VERSION,
        validity,
        severity,
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attacks::AttackKind;
    use crate::constraints::derive_constraints;
    use crate::models::{LinearModel, MlpModel};
    use crate::testutil::{batch_of, synth_encoded};
    use alloc::string::ToString;
    use alloc::vec;

    fn fixture() -> (crate::dataset::EncodedDataset, ConstraintSet) {
        let data = synth_encoded(12, 300);
        let cs = derive_constraints(&data).unwrap();
        (data, cs)
    }

    /// Four samples, the first valid; the rest break the service group.
    fn batch(data: &crate::dataset::EncodedDataset) -> AdversarialBatch {
        let s = &data.schema;
        let mut rows = Vec::new();
        for i in 0..4 {
            let mut x = data.row(i).to_vec();
            if i > 0 {
                for j in s.group("service").unwrap().members {
                    x[j] = 0.9;
                }
            }
            rows.push(x);
        }
        let originals = data.features.select(&[0, 1, 2, 3]);
        batch_of(originals, Matrix::from_rows(s.dim(), &rows))
    }

    #[test]
    fn one_of_four_valid() {
        let (data, cs) = fixture();
        let v = validity_rate(&batch(&data), &cs, &data.schema);
        assert_eq!((v.valid_count, v.invalid_count), (1, 3));
        assert_eq!(v.validity_pct, Some(25.0));
        assert_eq!(v.invalidity_pct, Some(75.0));
        assert_eq!(v.violations.get(&ReasonCode::OneHotSum), Some(&3));
    }

    #[test]
    fn percentages_complement_after_rounding() {
        // 1 of 800 is 0.125%, which rounds up; the complement must follow
        assert_eq!(pct(1, 800), Some(0.13));
        assert_eq!(round_pct(100.0 - 0.13), 99.87);
        assert_eq!(pct(0, 0), None);
    }

    #[test]
    fn all_benign_target_is_one_hundred_either_way() {
        let (data, cs) = fixture();
        let b = batch(&data);
        let benign = LinearModel::new(vec![0.0; data.dim()], -3.0);
        for filter in [false, true] {
            assert_eq!(
                severity(&b, &benign, filter, &cs, &data.schema).unwrap().severity,
                Some(100.0)
            );
        }
    }

    #[test]
    fn empty_valid_set_is_absent() {
        let (data, cs) = fixture();
        let b = batch(&data).select(&[1, 2, 3]);
        let m = LinearModel::new(vec![0.0; data.dim()], -3.0);
        let after = severity(&b, &m, true, &cs, &data.schema).unwrap();
        assert_eq!((after.severity, after.evaluated), (None, 0));
    }

    #[test]
    fn counts_match_a_recount_and_filter_path() {
        let (data, cs) = fixture();
        let b = batch(&data);
        let model = MlpModel::init(data.dim(), &[6], 5);
        let before = severity(&b, &model, false, &cs, &data.schema).unwrap();
        let tally = b
            .adversarials
            .iter_rows()
            .filter(|x| model.predict_proba(x).unwrap() < 0.5)
            .count();
        assert_eq!(before.evaded, tally);
        let outcome = filter_batch(&b, &cs, &data.schema);
        let direct = severity_of(&outcome.valid.adversarials, &model).unwrap();
        assert_eq!(severity(&b, &model, true, &cs, &data.schema).unwrap(), direct);
    }

    #[test]
    fn schema_mismatch_errors() {
        let (data, cs) = fixture();
        let small = LinearModel::new(vec![1.0; 3], 0.0);
        assert!(matches!(
            severity(&batch(&data), &small, false, &cs, &data.schema),
            Err(EvaluationError::SchemaMismatch { .. })
        ));
    }

    #[test]
    fn matrix_shape_and_report_lookup() {
        let (data, cs) = fixture();
        let mut batches = Vec::new();
        for kind in [AttackKind::Fgsm, AttackKind::Jsma, AttackKind::Pgd] {
            let mut b = batch(&data);
            b.attack.attack_kind = kind;
            batches.push(b);
        }
        let a = LinearModel::new(vec![0.1; data.dim()], -0.5);
        let m = MlpModel::init(data.dim(), &[4], 1);
        let targets = [
            Target {
                name: "lin".to_string(),
                model: &a,
            },
            Target {
                name: "mlp".to_string(),
                model: &m,
            },
        ];
        let cells = transferability_matrix(&batches, &targets, &cs, &data.schema).unwrap();
        assert_eq!(cells.len(), 6);
        assert!(cells.iter().all(|c| c.n_after <= c.n_before && c.n_before == 4));
        let report = evaluate(&batches, &targets, &cs, &data.schema, ReportMetadata::default()).unwrap();
        assert_eq!(report.severity, cells);
        assert_eq!(report.targets(), vec!["lin", "mlp"]);
        assert_eq!(report.cell(AttackKind::Jsma, "mlp"), Some(&cells[3]));
        assert_eq!(report.validity_of(AttackKind::Pgd).unwrap().valid_count, 1);
    }

    #[test]
    fn relative_reduction() {
        let cell = SeverityCell {
            attack: AttackKind::Bim,
            target: "t".to_string(),
            severity_before: Some(80.0),
            severity_after: Some(20.0),
            n_before: 10,
            n_after: 5,
            evaded_before: 8,
            evaded_after: 1,
        };
        assert!((cell.relative_reduction().unwrap() - 0.75).abs() < 1e-12);
        let empty = SeverityCell {
            n_after: 0,
            evaded_after: 0,
            severity_after: None,
            ..cell
        };
        assert_eq!(empty.relative_reduction(), None);
    }
}
