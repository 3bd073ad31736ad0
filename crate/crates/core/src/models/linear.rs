use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{check_dim, check_training_data, Classifier, ModelError, ModelKind};
use crate::dataset::EncodedDataset;
use crate::math::{dot, sigmoid};

/// Logistic unit `σ(w·x + b)`. Differentiable; mostly useful as a model
/// with closed-form gradients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn new(weights: Vec<f64>, bias: f64) -> Self {
        Self { weights, bias }
    }
}

impl Classifier for LinearModel {
    fn kind(&self) -> ModelKind {
        ModelKind::Linear
    }

    fn input_dim(&self) -> usize {
        self.weights.len()
    }

    fn predict_proba(&self, x: &[f64]) -> Result<f64, ModelError> {
        Ok(sigmoid(self.logit(x)?))
    }

    fn differentiable(&self) -> bool {
        true
    }

    fn logit(&self, x: &[f64]) -> Result<f64, ModelError> {
        check_dim(self.input_dim(), x)?;
        Ok(dot(&self.weights, x) + self.bias)
    }

    fn logit_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>), ModelError> {
        Ok((self.logit(x)?, self.weights.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub regularization: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            learning_rate: 0.01,
            regularization: 1e-4,
        }
    }
}

/// Linear SVM trained with hinge-loss subgradient descent. Its probability
/// is the sigmoid of the margin and is only meant for thresholding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub config: SvmConfig,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearSvm {
    pub fn margin(&self, x: &[f64]) -> Result<f64, ModelError> {
        check_dim(self.weights.len(), x)?;
        Ok(dot(&self.weights, x) + self.bias)
    }
}

impl Classifier for LinearSvm {
    fn kind(&self) -> ModelKind {
        ModelKind::Svm
    }

    fn input_dim(&self) -> usize {
        self.weights.len()
    }

    fn predict_proba(&self, x: &[f64]) -> Result<f64, ModelError> {
        Ok(sigmoid(self.margin(x)?))
    }
}

/// Visits samples in dataset order every epoch; no randomness involved.
pub fn train_svm(data: &EncodedDataset, config: &SvmConfig) -> Result<LinearSvm, ModelError> {
    if config.epochs == 0 || !(config.learning_rate > 0.0) || !(config.regularization >= 0.0) {
        return Err(ModelError::InvalidHyperparameter(format!(
            "svm: epochs and learning_rate must be positive, regularization non-negative ({config:?})"
        )));
    }
    check_training_data(data)?;
    let mut w = vec![0.0; data.dim()];
    let mut b = 0.0;
    let lr = config.learning_rate;
    let shrink = 1.0 - lr * config.regularization;
    for _ in 0..config.epochs {
        for i in 0..data.len() {
            let x = data.row(i);
            let y = if data.labels[i] == 1 { 1.0 } else { -1.0 };
            let margin = y * (dot(&w, x) + b);
            for v in &mut w {
                *v *= shrink;
            }
            if margin < 1.0 {
                for (v, xi) in w.iter_mut().zip(x) {
                    *v += lr * y * xi;
                }
                b += lr * y;
            }
        }
    }
    Ok(LinearSvm {
        config: config.clone(),
        weights: w,
        bias: b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::dataset_from;

    #[test]
    fn linear_unit_example() {
        let m = LinearModel::new(vec![2.0], 0.0);
        assert!((m.predict_proba(&[0.5]).unwrap() - 0.731_058_578_630_005).abs() < 1e-12);
        assert_eq!(m.logit_gradient(&[0.1]).unwrap(), vec![2.0]);
        let g = m.loss_gradient(&[0.5], 1).unwrap();
        assert!((g[0] - (sigmoid(1.0) - 1.0) * 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_loss_gradient_at_stationary_point() {
        // σ(0) = 0.5 is not a label, but a saturated logit gives y
        let m = LinearModel::new(vec![0.0, 0.0], 800.0);
        assert_eq!(m.loss_gradient(&[0.3, 0.6], 1).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn svm_separates_and_is_deterministic() {
        let rows: Vec<[f64; 2]> = (0..40).map(|i| [f64::from(i) / 40.0, 0.5]).collect();
        let labels: Vec<u8> = (0..40).map(|i| u8::from(i >= 20)).collect();
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let data = dataset_from(&refs, &labels);
        let cfg = SvmConfig {
            epochs: 200,
            learning_rate: 0.1,
            ..SvmConfig::default()
        };
        let m = train_svm(&data, &cfg).unwrap();
        let correct = (0..40)
            .filter(|&i| m.predict(data.row(i)).unwrap() == labels[i])
            .count();
        assert!(correct >= 38, "{correct}");
        assert_eq!(train_svm(&data, &cfg).unwrap(), m);
        assert!(!m.differentiable());
        assert!(matches!(
            m.loss_gradient(data.row(0), 1),
            Err(ModelError::NotDifferentiable(ModelKind::Svm))
        ));
    }

    #[test]
    fn svm_rejects_bad_hyperparameters() {
        let data = dataset_from(&[&[0.0], &[1.0]], &[0, 1]);
        let cfg = SvmConfig {
            epochs: 0,
            ..SvmConfig::default()
        };
        assert!(matches!(
            train_svm(&data, &cfg),
            Err(ModelError::InvalidHyperparameter(_))
        ));
    }
}
