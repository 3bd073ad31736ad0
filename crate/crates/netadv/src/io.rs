//! On-disk formats.
//!
//! Dataset directory: `train.csv`, `test.csv` (one column per encoded
//! feature plus `label`) and the `schema.json` sidecar. Batch directory:
//! `originals.csv`, `adversarials.csv` and `meta.json`. Floats are written
//! in shortest round-trip form, so every file reloads bit-exactly.

use std::fs;
use std::path::{Path, PathBuf};

use netadv_core::attacks::{AdversarialBatch, AttackConfig, AttackKind};
use netadv_core::constraints::{load_constraints, ConstraintDocument, ConstraintSet};
use netadv_core::dataset::{EncodedDataset, FeatureSchema};
use netadv_core::models::{AnyModel, ModelFile};
use netadv_core::Matrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const TRAIN_FILE: &str = "train.csv";
pub const TEST_FILE: &str = "test.csv";
pub const SCHEMA_FILE: &str = "schema.json";
pub const ORIGINALS_FILE: &str = "originals.csv";
pub const ADVERSARIALS_FILE: &str = "adversarials.csv";
pub const META_FILE: &str = "meta.json";
pub const LABEL_COLUMN: &str = "label";

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes `bytes`, creating parent directories as needed.
pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|e| Error::format(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_bytes(path, to_json(value).as_bytes())
}

pub fn sha256_hex(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
    }
    format!("{:x}", h.finalize())
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::format(path, e)
}

/// Matrix as CSV under `header`, with an optional trailing label column.
pub fn matrix_csv(header: &[String], m: &Matrix, labels: Option<&[u8]>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut head: Vec<&str> = header.iter().map(String::as_str).collect();
    if labels.is_some() {
        head.push(LABEL_COLUMN);
    }
    w.write_record(&head).expect("in-memory write");
    for (i, row) in m.iter_rows().enumerate() {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        if let Some(l) = labels {
            rec.push(l[i].to_string());
        }
        w.write_record(&rec).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Reads a CSV written by [`matrix_csv`]. The header must equal `header`
/// (plus `label` when `with_labels`).
pub fn read_matrix_csv(path: &Path, header: &[String], with_labels: bool) -> Result<(Matrix, Vec<u8>)> {
    let bytes = read_bytes(path)?;
    let mut r = csv::Reader::from_reader(bytes.as_slice());
    let got: Vec<String> = r
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut expected = header.to_vec();
    if with_labels {
        expected.push(LABEL_COLUMN.into());
    }
    if got != expected {
        return Err(Error::format(path, "header does not match the schema"));
    }
    let dim = header.len();
    let mut m = Matrix::empty(dim);
    let mut labels = Vec::new();
    let mut row = Vec::with_capacity(dim);
    for (n, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        row.clear();
        for (j, field) in rec.iter().take(dim).enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::format(path, format!("row {}: column '{}' is not a number", n + 1, header[j])))?;
            row.push(v);
        }
        m.push_row(&row);
        if with_labels {
            let l: u8 = rec[dim]
                .parse()
                .ok()
                .filter(|l| *l <= 1)
                .ok_or_else(|| Error::format(path, format!("row {}: label must be 0 or 1", n + 1)))?;
            labels.push(l);
        }
    }
    Ok((m, labels))
}

pub fn column_names(schema: &FeatureSchema) -> Vec<String> {
    schema.columns.iter().map(|c| c.name.clone()).collect()
}

/// Encoded train and test splits sharing one schema.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetDir {
    pub train: EncodedDataset,
    pub test: EncodedDataset,
    /// SHA-256 over the schema, train and test files.
    pub fingerprint: String,
}

pub fn write_dataset(dir: &Path, train: &EncodedDataset, test: &EncodedDataset) -> Result<Vec<PathBuf>> {
    let names = column_names(&train.schema);
    let files = [
        (dir.join(SCHEMA_FILE), to_json(&train.schema).into_bytes()),
        (
            dir.join(TRAIN_FILE),
            matrix_csv(&names, &train.features, Some(&train.labels)),
        ),
        (
            dir.join(TEST_FILE),
            matrix_csv(&names, &test.features, Some(&test.labels)),
        ),
    ];
    for (path, bytes) in &files {
        write_bytes(path, bytes)?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

pub fn read_schema(path: &Path) -> Result<FeatureSchema> {
    read_json(path)
}

pub fn read_dataset(dir: &Path) -> Result<DatasetDir> {
    let schema_path = dir.join(SCHEMA_FILE);
    let schema = read_schema(&schema_path)?;
    let names = column_names(&schema);
    let load = |file: &str| -> Result<EncodedDataset> {
        let (features, labels) = read_matrix_csv(&dir.join(file), &names, true)?;
        Ok(EncodedDataset {
            features,
            labels,
            schema: schema.clone(),
        })
    };
    let train = load(TRAIN_FILE)?;
    let test = load(TEST_FILE)?;
    let fingerprint = sha256_hex(&[
        &read_bytes(&schema_path)?,
        &read_bytes(&dir.join(TRAIN_FILE))?,
        &read_bytes(&dir.join(TEST_FILE))?,
    ]);
    Ok(DatasetDir {
        train,
        test,
        fingerprint,
    })
}

pub fn write_constraints(path: &Path, cs: &ConstraintSet, schema: &FeatureSchema) -> Result<()> {
    write_json(path, &cs.to_document(schema))
}

pub fn read_constraints(path: &Path, schema: &FeatureSchema) -> Result<ConstraintSet> {
    let doc: ConstraintDocument = read_json(path)?;
    load_constraints(&doc, schema).map_err(|e| Error::format(path, e))
}

pub fn write_model(path: &Path, model: &AnyModel) -> Result<()> {
    write_json(path, &model.to_file())
}

pub fn read_model(path: &Path) -> Result<AnyModel> {
    let file: ModelFile = read_json(path)?;
    AnyModel::from_file(file).map_err(|e| Error::format(path, e))
}

/// `meta.json` of a batch directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchMeta {
    pub config: AttackConfig,
    pub surrogate_id: String,
    pub success_on_surrogate: Vec<bool>,
    pub source_rows: Vec<usize>,
    pub excluded: usize,
    pub dataset_fingerprint: String,
}

pub fn write_batch(dir: &Path, batch: &AdversarialBatch, schema: &FeatureSchema, fingerprint: &str) -> Result<()> {
    let names = column_names(schema);
    write_bytes(&dir.join(ORIGINALS_FILE), &matrix_csv(&names, &batch.originals, None))?;
    write_bytes(
        &dir.join(ADVERSARIALS_FILE),
        &matrix_csv(&names, &batch.adversarials, None),
    )?;
    let meta = BatchMeta {
        config: batch.attack.clone(),
        surrogate_id: batch.surrogate_id.clone(),
        success_on_surrogate: batch.success_on_surrogate.clone(),
        source_rows: batch.source_rows.clone(),
        excluded: batch.excluded,
        dataset_fingerprint: fingerprint.to_string(),
    };
    write_json(&dir.join(META_FILE), &meta)
}

pub fn read_batch(dir: &Path, schema: &FeatureSchema) -> Result<(AdversarialBatch, BatchMeta)> {
    let names = column_names(schema);
    let meta: BatchMeta = read_json(&dir.join(META_FILE))?;
    let (originals, _) = read_matrix_csv(&dir.join(ORIGINALS_FILE), &names, false)?;
    let (adversarials, _) = read_matrix_csv(&dir.join(ADVERSARIALS_FILE), &names, false)?;
    let n = adversarials.rows();
    if originals.rows() != n || meta.success_on_surrogate.len() != n || meta.source_rows.len() != n {
        return Err(Error::format(dir, "batch files disagree on the sample count"));
    }
    let batch = AdversarialBatch {
        originals,
        adversarials,
        attack: meta.config.clone(),
        surrogate_id: meta.surrogate_id.clone(),
        success_on_surrogate: meta.success_on_surrogate.clone(),
        source_rows: meta.source_rows.clone(),
        excluded: meta.excluded,
        validity: None,
    };
    Ok((batch, meta))
}

/// Every batch directory under `root` (subdirectories holding a
/// `meta.json`), in attack reporting order, plus the schema stored in
/// `root/schema.json`.
pub fn read_batches(root: &Path) -> Result<(FeatureSchema, Vec<(AdversarialBatch, BatchMeta)>)> {
    let schema = read_schema(&root.join(SCHEMA_FILE))?;
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)
        .map_err(|e| Error::io(root, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(META_FILE).is_file())
        .collect();
    dirs.sort();
    let mut out = Vec::with_capacity(dirs.len());
    for d in dirs {
        out.push(read_batch(&d, &schema)?);
    }
    out.sort_by_key(|(b, _)| AttackKind::ALL.iter().position(|k| *k == b.attack.attack_kind));
    if out.is_empty() {
        return Err(Error::Data(format!("{}: no batch directories found", root.display())));
    }
    Ok((schema, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use netadv_core::dataset::{build_schema, encode, synth_dataset};

    fn data() -> EncodedDataset {
        let recs = synth_dataset(3, 40);
        let schema = build_schema(&recs).unwrap();
        encode(&recs, &schema).unwrap()
    }

    #[test]
    fn matrix_csv_round_trips_bit_exactly() {
        let d = data();
        let names = column_names(&d.schema);
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("m.csv");
        let mut m = d.features.clone();
        m.row_mut(0)[0] = 0.1 + 0.2;
        m.row_mut(1)[0] = 1e-300;
        write_bytes(&path, &matrix_csv(&names, &m, Some(&d.labels))).unwrap();
        let (back, labels) = read_matrix_csv(&path, &names, true).unwrap();
        assert_eq!(back, m);
        assert_eq!(labels, d.labels);
    }

    #[test]
    fn header_mismatch_is_rejected() {
        let d = data();
        let mut names = column_names(&d.schema);
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("m.csv");
        write_bytes(&path, &matrix_csv(&names, &d.features, None)).unwrap();
        names.swap(0, 1);
        let err = read_matrix_csv(&path, &names, false).unwrap_err();
        assert!(err.to_string().contains("header"), "{err}");
    }

    #[test]
    fn dataset_dir_round_trip() {
        let d = data();
        let tmp = tempfile::tempdir().unwrap();
        let train = d.select(&(0..30).collect::<Vec<_>>());
        let test = d.select(&(30..40).collect::<Vec<_>>());
        write_dataset(tmp.path(), &train, &test).unwrap();
        let back = read_dataset(tmp.path()).unwrap();
        assert_eq!((back.train, back.test), (train, test));
        assert_eq!(back.fingerprint.len(), 64);
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = read_bytes(Path::new("/nonexistent/dir/x.json")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/x.json"));
        assert_eq!(err.exit_code(), 2);
    }
}
