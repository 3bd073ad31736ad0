use alloc::string::String;
use alloc::vec::Vec;

use super::{run_attack, AttackConfig, AttackError};
use crate::constraints::ValidityVerdict;
use crate::models::Classifier;
use crate::rng::derive_seed;
use crate::Matrix;

/// Originals and their adversarial counterparts for one attack config.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversarialBatch {
    pub originals: Matrix,
    pub adversarials: Matrix,
    pub attack: AttackConfig,
    pub surrogate_id: String,
    /// Surrogate labels the adversarial sample benign.
    pub success_on_surrogate: Vec<bool>,
    /// Row of each sample in the attacked sample set.
    pub source_rows: Vec<usize>,
    /// Samples skipped because the surrogate already misclassified them.
    pub excluded: usize,
    pub validity: Option<Vec<ValidityVerdict>>,
}

impl AdversarialBatch {
    pub fn len(&self) -> usize {
        self.adversarials.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.adversarials.cols()
    }

    /// Sub-batch of the given sample positions, in order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            originals: self.originals.select(indices),
            adversarials: self.adversarials.select(indices),
            attack: self.attack.clone(),
            surrogate_id: self.surrogate_id.clone(),
            success_on_surrogate: indices.iter().map(|&i| self.success_on_surrogate[i]).collect(),
            source_rows: indices.iter().map(|&i| self.source_rows[i]).collect(),
            excluded: self.excluded,
            validity: self
                .validity
                .as_ref()
                .map(|v| indices.iter().map(|&i| v[i].clone()).collect()),
        }
    }

    pub fn success_rate(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.success_on_surrogate.iter().filter(|&&s| s).count() as f64 / self.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutput {
    pub batches: Vec<AdversarialBatch>,
    pub attacked_rows: Vec<usize>,
    pub excluded: usize,
}

/// Rows of `samples` the model currently classifies as malicious.
pub fn eligible_rows(model: &dyn Classifier, samples: &Matrix) -> Result<Vec<usize>, AttackError> {
    let mut rows = Vec::new();
    for (i, x) in samples.iter_rows().enumerate() {
        if model.predict(x)? == 1 {
            rows.push(i);
        }
    }
    Ok(rows)
}

/// Attacks sample `row` with a per-sample seed derived from `cfg.seed`.
pub fn attack_sample(
    model: &dyn Classifier,
    x: &[f64],
    cfg: &AttackConfig,
    row: usize,
) -> Result<Vec<f64>, AttackError> {
    let per_sample = AttackConfig {
        seed: derive_seed(cfg.seed, row as u64),
        ..cfg.clone()
    };
    run_attack(model, x, &per_sample)
}

/// Assembles a batch from already computed adversarial rows.
pub fn assemble_batch(
    model: &dyn Classifier,
    samples: &Matrix,
    rows: &[usize],
    adversarials: Matrix,
    cfg: &AttackConfig,
    surrogate_id: &str,
    excluded: usize,
) -> Result<AdversarialBatch, AttackError> {
    let mut success = Vec::with_capacity(rows.len());
    for adv in adversarials.iter_rows() {
        success.push(model.predict(adv)? == 0);
    }
    Ok(AdversarialBatch {
        originals: samples.select(rows),
        adversarials,
        attack: cfg.clone(),
        surrogate_id: surrogate_id.into(),
        success_on_surrogate: success,
        source_rows: rows.to_vec(),
        excluded,
        validity: None,
    })
}

/// Runs every config over the samples the surrogate classifies correctly
/// (as malicious); misclassified samples are excluded and counted.
pub fn run_attack_suite(
    model: &dyn Classifier,
    surrogate_id: &str,
    samples: &Matrix,
    cfgs: &[AttackConfig],
) -> Result<SuiteOutput, AttackError> {
    if samples.is_empty() {
        return Err(AttackError::EmptySamples);
    }
    let rows = eligible_rows(model, samples)?;
    let excluded = samples.rows() - rows.len();
    let mut batches = Vec::with_capacity(cfgs.len());
    for cfg in cfgs {
        cfg.validate()?;
        let mut adversarials = Matrix::with_capacity(rows.len(), samples.cols());
        for &r in &rows {
            adversarials.push_row(&attack_sample(model, samples.row(r), cfg, r)?);
        }
        batches.push(assemble_batch(
            model,
            samples,
            &rows,
            adversarials,
            cfg,
            surrogate_id,
            excluded,
        )?);
    }
    Ok(SuiteOutput {
        batches,
        attacked_rows: rows,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attacks::AttackKind;
    use crate::dataset::split_traffic;
    use crate::models::{train_knn, KnnConfig, LinearModel};
    use crate::testutil::small_mlp;
    use alloc::vec;

    #[test]
    fn misclassified_samples_are_excluded() {
        // x0 ≥ 0.5 is malicious
        let m = LinearModel::new(vec![4.0, 0.0], -2.0);
        let samples = Matrix::from_rows(2, &[[0.9, 0.1], [0.1, 0.1], [0.7, 0.5]]);
        let cfgs = [AttackConfig {
            epsilon: 0.1,
            step_size: 0.1,
            ..AttackConfig::default_for(AttackKind::Fgsm)
        }];
        let out = run_attack_suite(&m, "lin", &samples, &cfgs).unwrap();
        assert_eq!(out.attacked_rows, vec![0, 2]);
        assert_eq!(out.excluded, 1);
        let b = &out.batches[0];
        assert_eq!((b.len(), b.excluded), (2, 1));
        assert_eq!(b.originals.row(1), samples.row(2));
        assert_eq!(b.success_on_surrogate, vec![false, false]);
    }

    #[test]
    fn default_suite_shape_and_determinism() {
        let (data, m) = small_mlp(10);
        let (_, mal) = split_traffic(&data);
        let samples = mal.features.select(&(0..12).collect::<Vec<_>>());
        let cfgs: Vec<AttackConfig> = AttackConfig::default_suite(5)
            .into_iter()
            .map(|c| AttackConfig {
                steps: c.steps.min(30),
                cw_binary_search_steps: 2,
                ..c
            })
            .collect();
        let a = run_attack_suite(&m, "mlp", &samples, &cfgs).unwrap();
        assert_eq!(a.batches.len(), 7);
        for b in &a.batches {
            assert!(b.len() <= 12);
            assert!(b.adversarials.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
        }
        assert_eq!(a, run_attack_suite(&m, "mlp", &samples, &cfgs).unwrap());
    }

    #[test]
    fn errors_surface() {
        let (data, m) = small_mlp(11);
        assert_eq!(
            run_attack_suite(&m, "mlp", &Matrix::empty(data.dim()), &[]),
            Err(AttackError::EmptySamples)
        );
        let knn = train_knn(&data, &KnnConfig::default()).unwrap();
        let err = run_attack(&knn, data.row(0), &AttackConfig::default_for(AttackKind::Fgsm)).unwrap_err();
        assert!(matches!(
            err,
            AttackError::NotDifferentiable {
                attack: AttackKind::Fgsm,
                ..
            }
        ));
    }
}
