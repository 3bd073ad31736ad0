//! Classifiers: the differentiable surrogate MLP and the classical targets.

mod forest;
mod knn;
mod linear;
mod metrics;
mod mlp;
mod persist;
mod tree;

pub use forest::{train_forest, ForestConfig, MaxFeatures, RandomForest};
pub use knn::{train_knn, KnnConfig, KnnModel};
pub use linear::{train_svm, LinearModel, LinearSvm, SvmConfig};
pub use metrics::{evaluate_accuracy, Metrics};
pub use mlp::{train_mlp, Dense, MlpConfig, MlpModel};
pub use persist::{AnyModel, Hyperparameters, ModelFile, ModelHeader, Parameters, MODEL_FORMAT_VERSION};
pub use tree::{train_tree, DecisionTree, Node, TreeConfig};

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math::sigmoid;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("input has dimension {got}, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0} model does not expose gradients")]
    NotDifferentiable(ModelKind),
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("training data is empty")]
    EmptyData,
    #[error("training data contains a single class")]
    SingleClass,
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("unsupported model file version {0}")]
    UnsupportedVersion(u32),
    #[error("model file is inconsistent: {0}")]
    Corrupt(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Mlp,
    Knn,
    Tree,
    Forest,
    Svm,
    Linear,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Mlp => "mlp",
            ModelKind::Knn => "knn",
            ModelKind::Tree => "tree",
            ModelKind::Forest => "forest",
            ModelKind::Svm => "svm",
            ModelKind::Linear => "linear",
        }
    }
}

impl core::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Common contract for trained binary classifiers. Class 1 is malicious.
///
/// Gradient methods are capabilities: the defaults fail with
/// [`ModelError::NotDifferentiable`], and only models that report
/// `differentiable() == true` override them.
pub trait Classifier: Send + Sync {
    fn kind(&self) -> ModelKind;

    fn input_dim(&self) -> usize;

    /// Probability of the malicious class.
    fn predict_proba(&self, x: &[f64]) -> Result<f64, ModelError>;

    fn predict(&self, x: &[f64]) -> Result<u8, ModelError> {
        Ok(u8::from(self.predict_proba(x)? >= 0.5))
    }

    fn differentiable(&self) -> bool {
        false
    }

    /// Pre-sigmoid output `f(x)`; the decision boundary is `f(x) = 0`.
    fn logit(&self, _x: &[f64]) -> Result<f64, ModelError> {
        Err(ModelError::NotDifferentiable(self.kind()))
    }

    fn logit_gradient(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        self.logit_and_gradient(x).map(|(_, g)| g)
    }

    fn logit_and_gradient(&self, _x: &[f64]) -> Result<(f64, Vec<f64>), ModelError> {
        Err(ModelError::NotDifferentiable(self.kind()))
    }

    /// Gradient of binary cross-entropy at label `y` with respect to `x`:
    /// `(σ(f(x)) − y) · ∇f(x)`.
    fn loss_gradient(&self, x: &[f64], y: u8) -> Result<Vec<f64>, ModelError> {
        let (f, mut g) = self.logit_and_gradient(x)?;
        let scale = sigmoid(f) - f64::from(y);
        for v in &mut g {
            *v *= scale;
        }
        Ok(g)
    }
}

pub(crate) fn check_dim(expected: usize, x: &[f64]) -> Result<(), ModelError> {
    if x.len() == expected {
        Ok(())
    } else {
        Err(ModelError::DimensionMismatch { expected, got: x.len() })
    }
}

pub(crate) fn check_training_data(data: &crate::dataset::EncodedDataset) -> Result<(), ModelError> {
    if data.is_empty() {
        return Err(ModelError::EmptyData);
    }
    if !data.has_both_classes() {
        return Err(ModelError::SingleClass);
    }
    Ok(())
}
