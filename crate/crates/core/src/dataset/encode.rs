use alloc::string::ToString;
use alloc::vec::Vec;

use super::record::{RawRecord, CATEGORICAL_COLUMNS, NUMERIC_COLUMNS};
use super::schema::{ColumnKind, FeatureSchema};
use super::DatasetError;
use crate::Matrix;

/// Encoded feature matrix plus binary labels (1 = malicious).
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    pub features: Matrix,
    pub labels: Vec<u8>,
    pub schema: FeatureSchema,
}

impl EncodedDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            features: self.features.select(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            schema: self.schema.clone(),
        }
    }

    pub fn has_both_classes(&self) -> bool {
        self.labels.contains(&0) && self.labels.contains(&1)
    }
}

enum Source<'a> {
    Numeric(usize, ColumnKind),
    Member(&'a str, &'a str),
}

/// One-hot encodes categorical columns, passes binaries through (any
/// nonzero value counts as 1) and min-max scales continuous columns.
/// Values outside the schema's training range are clamped into [0, 1].
pub fn encode(records: &[RawRecord], schema: &FeatureSchema) -> Result<EncodedDataset, DatasetError> {
    let sources: Vec<Source<'_>> = schema
        .columns
        .iter()
        .map(|c| match (&c.group, &c.category) {
            (Some(g), Some(v)) => Source::Member(g.as_str(), v.as_str()),
            _ => {
                let pos = NUMERIC_COLUMNS.iter().position(|n| *n == c.name).unwrap_or(usize::MAX);
                Source::Numeric(pos, c.kind)
            }
        })
        .collect();
    let groups: Vec<&str> = CATEGORICAL_COLUMNS
        .iter()
        .copied()
        .filter(|g| schema.columns.iter().any(|c| c.group.as_deref() == Some(*g)))
        .collect();

    let mut features = Matrix::with_capacity(records.len(), schema.dim());
    let mut labels = Vec::with_capacity(records.len());
    let mut row = alloc::vec![0.0; schema.dim()];
    for r in records {
        if r.numeric.len() != NUMERIC_COLUMNS.len() {
            return Err(DatasetError::NumericArity {
                expected: NUMERIC_COLUMNS.len(),
                got: r.numeric.len(),
            });
        }
        for g in &groups {
            let value = r.categorical(g).unwrap_or_default();
            if schema.member_index(g, value).is_none() {
                return Err(DatasetError::UnseenCategory {
                    column: g.to_string(),
                    value: value.to_string(),
                });
            }
        }
        for (j, (src, spec)) in sources.iter().zip(&schema.columns).enumerate() {
            row[j] = match *src {
                Source::Member(g, v) => {
                    if r.categorical(g) == Some(v) {
                        1.0
                    } else {
                        0.0
                    }
                }
                Source::Numeric(pos, ColumnKind::Binary) => {
                    if r.numeric[pos] != 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                }
                Source::Numeric(pos, _) => {
                    let span = spec.train_max - spec.train_min;
                    if span > 0.0 {
                        ((r.numeric[pos] - spec.train_min) / span).clamp(0.0, 1.0)
                    } else {
                        0.0
                    }
                }
            };
        }
        features.push_row(&row);
        labels.push(u8::from(r.is_malicious()));
    }
    Ok(EncodedDataset {
        features,
        labels,
        schema: schema.clone(),
    })
}

/// Partitions by label, preserving row order: `(benign, malicious)`.
pub fn split_traffic(data: &EncodedDataset) -> (EncodedDataset, EncodedDataset) {
    let (mal, ben): (Vec<usize>, Vec<usize>) = (0..data.len()).partition(|&i| data.labels[i] == 1);
    (data.select(&ben), data.select(&mal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{build_schema, build_schema_with_ranges, NUMERIC_COLUMNS};
    use alloc::string::ToString;
    use alloc::vec;

    fn record(protocol: &str, service: &str, flag: &str, duration: f64, label: &str) -> RawRecord {
        let mut numeric = vec![0.0; NUMERIC_COLUMNS.len()];
        numeric[0] = duration;
        RawRecord {
            protocol_type: protocol.to_string(),
            service: service.to_string(),
            flag: flag.to_string(),
            numeric,
            label: label.to_string(),
            difficulty: None,
        }
    }

    fn tiny() -> Vec<RawRecord> {
        vec![
            record("tcp", "http", "SF", 0.0, "normal"),
            record("udp", "domain_u", "SF", 10.0, "neptune"),
            record("icmp", "eco_i", "REJ", 4.0, "smurf"),
        ]
    }

    #[test]
    fn one_hot_columns_are_sorted_and_named() {
        let schema = build_schema(&tiny()).unwrap();
        let names: Vec<&str> = schema.columns.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(
            &names[..5],
            &[
                "duration",
                "protocol_type_icmp",
                "protocol_type_tcp",
                "protocol_type_udp",
                "service_domain_u"
            ]
        );
        // 38 numeric columns plus 3 + 3 + 2 members
        assert_eq!(schema.dim(), 38 + 8);
        assert_eq!(schema.group("flag").unwrap().members.len(), 2);
    }

    #[test]
    fn min_max_scaling() {
        let recs = tiny();
        let schema = build_schema(&recs).unwrap();
        let d = encode(&recs, &schema).unwrap();
        assert_eq!(d.labels, vec![0, 1, 1]);
        let dur: Vec<f64> = (0..3).map(|i| d.row(i)[0]).collect();
        assert_eq!(dur, vec![0.0, 1.0, 0.4]);
        // every other continuous column is constant and maps to 0
        let src = schema.column_index("src_bytes").unwrap();
        assert!((0..3).all(|i| d.row(i)[src] == 0.0));
    }

    #[test]
    fn ranges_from_train_clamp_test_values() {
        let recs = tiny();
        let schema = build_schema_with_ranges(&recs, &recs[..2]).unwrap();
        assert_eq!(schema.columns[0].train_max, 10.0);
        let out = encode(&[record("tcp", "http", "SF", 25.0, "normal")], &schema).unwrap();
        assert_eq!(out.row(0)[0], 1.0);
    }

    #[test]
    fn decode_recovers_categories() {
        let recs = tiny();
        let schema = build_schema(&recs).unwrap();
        let d = encode(&recs, &schema).unwrap();
        for (i, r) in recs.iter().enumerate() {
            for g in ["protocol_type", "service", "flag"] {
                assert_eq!(schema.decode_category(d.row(i), g), r.categorical(g));
            }
        }
    }

    #[test]
    fn binary_nonzero_is_one() {
        let mut r = record("tcp", "http", "SF", 0.0, "normal");
        let su = NUMERIC_COLUMNS.iter().position(|c| *c == "su_attempted").unwrap();
        r.numeric[su] = 2.0;
        let schema = build_schema(&[r.clone()]).unwrap();
        let d = encode(&[r], &schema).unwrap();
        assert_eq!(d.row(0)[schema.column_index("su_attempted").unwrap()], 1.0);
    }

    #[test]
    fn unseen_category_is_an_error() {
        let schema = build_schema(&tiny()).unwrap();
        let err = encode(&[record("tcp", "gopher", "SF", 0.0, "normal")], &schema).unwrap_err();
        assert_eq!(
            err,
            DatasetError::UnseenCategory {
                column: "service".into(),
                value: "gopher".into()
            }
        );
    }

    #[test]
    fn empty_and_short_records() {
        assert_eq!(build_schema(&[]), Err(DatasetError::EmptyRecords));
        let mut r = record("tcp", "http", "SF", 0.0, "normal");
        r.numeric.pop();
        assert!(matches!(
            build_schema(&[r]),
            Err(DatasetError::NumericArity { expected: 38, got: 37 })
        ));
    }

    #[test]
    fn split_traffic_keeps_order() {
        let recs = tiny();
        let d = encode(&recs, &build_schema(&recs).unwrap()).unwrap();
        let (ben, mal) = split_traffic(&d);
        assert_eq!(ben.len(), 1);
        assert_eq!(mal.labels, vec![1, 1]);
        assert_eq!(mal.row(0), d.row(1));
        assert_eq!(mal.row(1), d.row(2));
        assert!(d.has_both_classes() && !mal.has_both_classes());
    }
}
