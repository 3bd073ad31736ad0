use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{check_dim, Classifier, ModelError, ModelKind};
use crate::dataset::EncodedDataset;
use crate::math::sq_dist;
use crate::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnConfig {
    pub k: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self { k: 5 }
    }
}

/// Brute-force k-nearest-neighbours under Euclidean distance. Distance ties
/// go to the lower training row index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub config: KnnConfig,
    pub features: Matrix,
    pub labels: Vec<u8>,
}

pub fn train_knn(data: &EncodedDataset, config: &KnnConfig) -> Result<KnnModel, ModelError> {
    if config.k == 0 {
        return Err(ModelError::InvalidHyperparameter(format!(
            "knn: k must be positive, got {}",
            config.k
        )));
    }
    if data.is_empty() {
        return Err(ModelError::EmptyData);
    }
    Ok(KnnModel {
        config: config.clone(),
        features: data.features.clone(),
        labels: data.labels.clone(),
    })
}

impl KnnModel {
    /// Training row indices of the k nearest neighbours, nearest first.
    pub fn neighbours(&self, x: &[f64]) -> Result<Vec<usize>, ModelError> {
        check_dim(self.features.cols(), x)?;
        let k = self.config.k.min(self.labels.len());
        // sorted by (distance, index); insertion keeps it small
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        for (i, row) in self.features.iter_rows().enumerate() {
            let d = sq_dist(row, x);
            if best.len() == k && d >= best[k - 1].0 {
                continue;
            }
            let pos = best.partition_point(|&(bd, _)| bd <= d);
            best.insert(pos, (d, i));
            best.truncate(k);
        }
        Ok(best.into_iter().map(|(_, i)| i).collect())
    }
}

impl Classifier for KnnModel {
    fn kind(&self) -> ModelKind {
        ModelKind::Knn
    }

    fn input_dim(&self) -> usize {
        self.features.cols()
    }

    fn predict_proba(&self, x: &[f64]) -> Result<f64, ModelError> {
        let nn = self.neighbours(x)?;
        let malicious = nn.iter().filter(|&&i| self.labels[i] == 1).count();
        Ok(malicious as f64 / nn.len() as f64)
    }
}
