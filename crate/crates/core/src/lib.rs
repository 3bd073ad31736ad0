//! Core algorithms for generating adversarial examples against network
//! intrusion classifiers and checking them against network-domain
//! constraints.
//!
//! The crate is `no_std` (with `alloc`). Everything that touches the file
//! system, text formats, or threads lives in the `netadv` companion crate.
//!
//! Modules, bottom up:
//! - [`dataset`]: NSL-KDD record layout, feature schema, one-hot and min-max
//!   encoding, benign/malicious partitioning, and a synthetic corpus.
//! - [`constraints`]: protocol implication tables, one-hot/binary/range
//!   rules, discrete projection and the batch validity filter.
//! - [`models`]: the surrogate MLP and the classical target classifiers.
//! - [`attacks`]: FGSM, BIM, PGD, JSMA, DeepFool, C&W and ZOO.
//! - [`evaluation`]: validity rates, severity and transferability tables.

#![no_std]

extern crate alloc;

pub mod attacks;
pub mod constraints;
pub mod dataset;
pub mod evaluation;
pub mod matrix;
pub mod models;

mod math;
mod rng;

pub use matrix::Matrix;
pub use rng::derive_seed;

#[cfg(test)]
pub(crate) mod testutil {
    use alloc::vec::Vec;

    use crate::attacks::{AdversarialBatch, AttackConfig, AttackKind};
    use crate::dataset::{build_schema, encode, synth_dataset, ColumnKind, ColumnSpec, EncodedDataset, FeatureSchema};
    use crate::Matrix;

    /// Small MLP trained on the synthetic corpus, for attack tests.
    pub fn small_mlp(seed: u64) -> (EncodedDataset, crate::models::MlpModel) {
        let data = synth_encoded(seed, 400);
        let cfg = crate::models::MlpConfig {
            hidden_sizes: alloc::vec![16, 8],
            epochs: 5,
            batch_size: 32,
            seed,
            ..Default::default()
        };
        let model = crate::models::train_mlp(&data, &cfg).unwrap();
        (data, model)
    }

    /// Dataset over plain continuous columns `c0, c1, ...`.
    pub fn dataset_from(rows: &[&[f64]], labels: &[u8]) -> EncodedDataset {
        let dim = rows[0].len();
        let columns = (0..dim)
            .map(|i| ColumnSpec {
                name: alloc::format!("c{i}"),
                kind: ColumnKind::Continuous,
                group: None,
                category: None,
                train_min: 0.0,
                train_max: 1.0,
            })
            .collect();
        EncodedDataset {
            features: Matrix::from_rows(dim, rows),
            labels: labels.to_vec(),
            schema: FeatureSchema { columns },
        }
    }

    pub fn synth_encoded(seed: u64, n: usize) -> EncodedDataset {
        let recs = synth_dataset(seed, n);
        let schema = build_schema(&recs).unwrap();
        encode(&recs, &schema).unwrap()
    }

    pub fn batch_of(originals: Matrix, adversarials: Matrix) -> AdversarialBatch {
        let n = adversarials.rows();
        AdversarialBatch {
            originals,
            adversarials,
            attack: AttackConfig::default_for(AttackKind::Fgsm),
            surrogate_id: "test".into(),
            success_on_surrogate: alloc::vec![false; n],
            source_rows: (0..n).collect::<Vec<_>>(),
            excluded: 0,
            validity: None,
        }
    }
}
