//! Model file container.
//!
//! A model file is a header followed by parameters:
//!
//! ```text
//! { "header": { "kind": "mlp", "version": 1, "schema_dim": 53,
//!               "hyperparameters": { "mlp": { ... } } },
//!   "parameters": { "mlp": { "layers": [ ... ] } } }
//! ```
//!
//! The `netadv` crate stores it as JSON with round-trip float formatting,
//! so a reloaded model predicts bit-identically.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::*;
use crate::Matrix;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelHeader {
    pub kind: ModelKind,
    pub version: u32,
    pub schema_dim: usize,
    pub hyperparameters: Hyperparameters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hyperparameters {
    Mlp(MlpConfig),
    Knn(KnnConfig),
    Tree(TreeConfig),
    Forest(ForestConfig),
    Svm(SvmConfig),
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameters {
    Mlp { layers: Vec<Dense> },
    Knn { features: Matrix, labels: Vec<u8> },
    Tree { nodes: Vec<Node> },
    Forest { trees: Vec<Vec<Node>> },
    Svm { weights: Vec<f64>, bias: f64 },
    Linear { weights: Vec<f64>, bias: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub header: ModelHeader,
    pub parameters: Parameters,
}

/// Any trained model, dispatching [`Classifier`] to the concrete type.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyModel {
    Mlp { config: MlpConfig, model: MlpModel },
    Knn(KnnModel),
    Tree(DecisionTree),
    Forest(RandomForest),
    Svm(LinearSvm),
    Linear(LinearModel),
}

impl AnyModel {
    fn inner(&self) -> &dyn Classifier {
        match self {
            AnyModel::Mlp { model, .. } => model,
            AnyModel::Knn(m) => m,
            AnyModel::Tree(m) => m,
            AnyModel::Forest(m) => m,
            AnyModel::Svm(m) => m,
            AnyModel::Linear(m) => m,
        }
    }

    pub fn to_file(&self) -> ModelFile {
        let (hyperparameters, parameters) = match self {
            AnyModel::Mlp { config, model } => (
                Hyperparameters::Mlp(config.clone()),
                Parameters::Mlp {
                    layers: model.layers.clone(),
                },
            ),
            AnyModel::Knn(m) => (
                Hyperparameters::Knn(m.config.clone()),
                Parameters::Knn {
                    features: m.features.clone(),
                    labels: m.labels.clone(),
                },
            ),
            AnyModel::Tree(m) => (
                Hyperparameters::Tree(m.config.clone()),
                Parameters::Tree { nodes: m.nodes.clone() },
            ),
            AnyModel::Forest(m) => (
                Hyperparameters::Forest(m.config.clone()),
                Parameters::Forest {
                    trees: m.trees.iter().map(|t| t.nodes.clone()).collect(),
                },
            ),
            AnyModel::Svm(m) => (
                Hyperparameters::Svm(m.config.clone()),
                Parameters::Svm {
                    weights: m.weights.clone(),
                    bias: m.bias,
                },
            ),
            AnyModel::Linear(m) => (
                Hyperparameters::Linear,
                Parameters::Linear {
                    weights: m.weights.clone(),
                    bias: m.bias,
                },
            ),
        };
        ModelFile {
            header: ModelHeader {
                kind: self.kind(),
                version: MODEL_FORMAT_VERSION,
                schema_dim: self.input_dim(),
                hyperparameters,
            },
            parameters,
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Self, ModelError> {
        let ModelFile { header, parameters } = file;
        if header.version != MODEL_FORMAT_VERSION {
            return Err(ModelError::UnsupportedVersion(header.version));
        }
        let dim = header.schema_dim;
        let model = match (header.hyperparameters, parameters) {
            (Hyperparameters::Mlp(config), Parameters::Mlp { layers }) => AnyModel::Mlp {
                config,
                model: MlpModel::from_layers(layers)?,
            },
            (Hyperparameters::Knn(config), Parameters::Knn { features, labels }) => {
                if features.rows() != labels.len() || labels.is_empty() {
                    return Err(ModelError::Corrupt("knn: feature and label counts differ".into()));
                }
                AnyModel::Knn(KnnModel {
                    config,
                    features,
                    labels,
                })
            }
            (Hyperparameters::Tree(config), Parameters::Tree { nodes }) => {
                let t = DecisionTree { config, dim, nodes };
                t.validate()?;
                AnyModel::Tree(t)
            }
            (Hyperparameters::Forest(config), Parameters::Forest { trees }) => {
                if trees.is_empty() {
                    return Err(ModelError::Corrupt("forest: no trees".into()));
                }
                let tree_config = TreeConfig {
                    max_depth: config.max_depth,
                    min_leaf: config.min_leaf,
                };
                let trees = trees
                    .into_iter()
                    .map(|nodes| {
                        let t = DecisionTree {
                            config: tree_config.clone(),
                            dim,
                            nodes,
                        };
                        t.validate().map(|_| t)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                AnyModel::Forest(RandomForest { config, trees })
            }
            (Hyperparameters::Svm(config), Parameters::Svm { weights, bias }) => {
                AnyModel::Svm(LinearSvm { config, weights, bias })
            }
            (Hyperparameters::Linear, Parameters::Linear { weights, bias }) => {
                AnyModel::Linear(LinearModel { weights, bias })
            }
            _ => {
                return Err(ModelError::Corrupt(
                    "hyperparameters and parameters disagree on kind".into(),
                ))
            }
        };
        if model.kind() != header.kind {
            return Err(ModelError::Corrupt(format!(
                "header kind {} does not match parameters ({})",
                header.kind,
                model.kind()
            )));
        }
        if model.input_dim() != dim {
            return Err(ModelError::Corrupt(format!(
                "schema_dim {dim} does not match parameters ({})",
                model.input_dim()
            )));
        }
        Ok(model)
    }
}

impl Classifier for AnyModel {
    fn kind(&self) -> ModelKind {
        self.inner().kind()
    }

    fn input_dim(&self) -> usize {
        self.inner().input_dim()
    }

    fn predict_proba(&self, x: &[f64]) -> Result<f64, ModelError> {
        self.inner().predict_proba(x)
    }

    fn differentiable(&self) -> bool {
        self.inner().differentiable()
    }

    fn logit(&self, x: &[f64]) -> Result<f64, ModelError> {
        self.inner().logit(x)
    }

    fn logit_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>), ModelError> {
        self.inner().logit_and_gradient(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::synth_encoded;

    fn all_models() -> Vec<AnyModel> {
        let data = synth_encoded(1, 120);
        let mlp_cfg = MlpConfig {
            hidden_sizes: alloc::vec![4],
            epochs: 1,
            ..MlpConfig::default()
        };
        alloc::vec![
            AnyModel::Mlp {
                model: train_mlp(&data, &mlp_cfg).unwrap(),
                config: mlp_cfg
            },
            AnyModel::Knn(train_knn(&data, &KnnConfig::default()).unwrap()),
            AnyModel::Tree(train_tree(&data, &TreeConfig::default()).unwrap()),
            AnyModel::Forest(
                train_forest(
                    &data,
                    &ForestConfig {
                        n_trees: 3,
                        ..ForestConfig::default()
                    }
                )
                .unwrap()
            ),
            AnyModel::Svm(train_svm(&data, &SvmConfig::default()).unwrap()),
            AnyModel::Linear(LinearModel::new(alloc::vec![0.1; data.dim()], -0.2)),
        ]
    }

    #[test]
    fn file_round_trip_preserves_models() {
        for m in all_models() {
            let file = m.to_file();
            assert_eq!(file.header.kind, m.kind());
            assert_eq!(file.header.schema_dim, m.input_dim());
            assert_eq!(AnyModel::from_file(file).unwrap(), m);
        }
    }

    #[test]
    fn version_and_shape_checks() {
        let m = &all_models()[4];
        let mut file = m.to_file();
        file.header.version = 2;
        assert_eq!(AnyModel::from_file(file), Err(ModelError::UnsupportedVersion(2)));

        let mut file = m.to_file();
        file.header.schema_dim += 1;
        assert!(AnyModel::from_file(file).is_err());

        let mut file = m.to_file();
        file.header.kind = ModelKind::Knn;
        assert!(AnyModel::from_file(file).is_err());
    }
}
