use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow, FeatureSampler};
use super::{check_dim, check_training_data, Classifier, DecisionTree, ModelError, ModelKind, TreeConfig};
use crate::dataset::EncodedDataset;
use crate::rng::{derive_seed, seeded};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// `round(√d)`, at least 1.
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => (libm::round(libm::sqrt(d as f64)) as usize).clamp(1, d.max(1)),
            MaxFeatures::All => d,
            MaxFeatures::Count(c) => c.clamp(1, d.max(1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 50,
            max_depth: 12,
            min_leaf: 2,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub config: ForestConfig,
    pub trees: Vec<DecisionTree>,
}

/// Bagged Gini trees; tree `t` draws from its own stream seeded by
/// `derive_seed(seed, t)`.
pub fn train_forest(data: &EncodedDataset, config: &ForestConfig) -> Result<RandomForest, ModelError> {
    if config.n_trees == 0 {
        return Err(ModelError::InvalidHyperparameter(format!(
            "forest: n_trees must be positive, got {}",
            config.n_trees
        )));
    }
    let tree_config = TreeConfig {
        max_depth: config.max_depth,
        min_leaf: config.min_leaf,
    };
    tree_config.validate()?;
    check_training_data(data)?;
    let n = data.len();
    let per_node = config.max_features.resolve(data.dim());
    let trees = (0..config.n_trees)
        .map(|t| {
            let mut rng = seeded(derive_seed(config.seed, t as u64));
            let indices: Vec<usize> = if config.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let sampler = FeatureSampler {
                rng: &mut rng,
                per_node,
            };
            grow(data, indices, &tree_config, Some(sampler))
        })
        .collect();
    Ok(RandomForest {
        config: config.clone(),
        trees,
    })
}

impl Classifier for RandomForest {
    fn kind(&self) -> ModelKind {
        ModelKind::Forest
    }

    fn input_dim(&self) -> usize {
        self.trees.first().map_or(0, |t| t.dim)
    }

    fn predict_proba(&self, x: &[f64]) -> Result<f64, ModelError> {
        check_dim(self.input_dim(), x)?;
        let sum: f64 = self.trees.iter().map(|t| t.proba_unchecked(x)).sum();
        Ok(sum / self.trees.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::train_tree;
    use crate::testutil::synth_encoded;

    #[test]
    fn single_full_tree_equals_plain_tree() {
        let data = synth_encoded(2, 300);
        let cfg = ForestConfig {
            n_trees: 1,
            max_features: MaxFeatures::All,
            bootstrap: false,
            ..ForestConfig::default()
        };
        let f = train_forest(&data, &cfg).unwrap();
        let t = train_tree(&data, &TreeConfig::default()).unwrap();
        assert_eq!(f.trees[0], t);
        for x in data.features.iter_rows() {
            assert_eq!(f.predict_proba(x).unwrap(), t.predict_proba(x).unwrap());
        }
    }

    #[test]
    fn proba_is_mean_of_trees_and_seeded() {
        let data = synth_encoded(8, 200);
        let cfg = ForestConfig {
            n_trees: 4,
            seed: 5,
            ..ForestConfig::default()
        };
        let f = train_forest(&data, &cfg).unwrap();
        assert_eq!(f, train_forest(&data, &cfg).unwrap());
        let x = data.row(3);
        let mean = f.trees.iter().map(|t| t.predict_proba(x).unwrap()).sum::<f64>() / 4.0;
        assert_eq!(f.predict_proba(x).unwrap(), mean);
        assert!(train_forest(&data, &ForestConfig { n_trees: 0, ..cfg }).is_err());
    }

    #[test]
    fn sqrt_feature_count() {
        assert_eq!(MaxFeatures::Sqrt.resolve(53), 7);
        assert_eq!(MaxFeatures::Sqrt.resolve(1), 1);
        assert_eq!(MaxFeatures::Count(100).resolve(10), 10);
    }
}
