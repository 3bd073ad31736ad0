//! Greedy Gini decision tree on midpoint thresholds.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_dim, check_training_data, Classifier, ModelError, ModelKind};
use crate::dataset::EncodedDataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            max_depth: 12,
            min_leaf: 2,
        }
    }
}

impl TreeConfig {
    pub(crate) fn validate(&self) -> Result<(), ModelError> {
        if self.max_depth == 0 || self.min_leaf == 0 {
            return Err(ModelError::InvalidHyperparameter(format!(
                "tree: max_depth and min_leaf must be positive ({self:?})"
            )));
        }
        Ok(())
    }
}

/// Samples go left when `x[feature] <= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Leaf {
        proba: f64,
        samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub config: TreeConfig,
    pub dim: usize,
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub(crate) fn proba_unchecked(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { proba, .. } => return proba,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub(crate) fn validate(&self) -> Result<(), ModelError> {
        let n = self.nodes.len();
        if n == 0 {
            return Err(ModelError::Corrupt("tree has no nodes".into()));
        }
        for node in &self.nodes {
            match *node {
                Node::Leaf { proba, .. } if !(0.0..=1.0).contains(&proba) => {
                    return Err(ModelError::Corrupt("leaf probability out of range".into()))
                }
                Node::Split {
                    feature, left, right, ..
                } if feature >= self.dim || left >= n || right >= n => {
                    return Err(ModelError::Corrupt("split refers outside the tree".into()))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

impl Classifier for DecisionTree {
    fn kind(&self) -> ModelKind {
        ModelKind::Tree
    }

    fn input_dim(&self) -> usize {
        self.dim
    }

    fn predict_proba(&self, x: &[f64]) -> Result<f64, ModelError> {
        check_dim(self.dim, x)?;
        Ok(self.proba_unchecked(x))
    }
}

pub fn train_tree(data: &EncodedDataset, config: &TreeConfig) -> Result<DecisionTree, ModelError> {
    config.validate()?;
    check_training_data(data)?;
    let indices: Vec<usize> = (0..data.len()).collect();
    Ok(grow(data, indices, config, None))
}

/// Per-node feature subsampling for forests.
pub(crate) struct FeatureSampler<'a> {
    pub rng: &'a mut ChaCha8Rng,
    pub per_node: usize,
}

pub(crate) fn grow(
    data: &EncodedDataset,
    indices: Vec<usize>,
    config: &TreeConfig,
    mut sampler: Option<FeatureSampler<'_>>,
) -> DecisionTree {
    let mut nodes = Vec::new();
    let mut builder = Builder {
        data,
        config,
        nodes: &mut nodes,
        features: (0..data.dim()).collect(),
    };
    builder.build(indices, 0, &mut sampler);
    DecisionTree {
        config: config.clone(),
        dim: data.dim(),
        nodes,
    }
}

struct Builder<'a> {
    data: &'a EncodedDataset,
    config: &'a TreeConfig,
    nodes: &'a mut Vec<Node>,
    features: Vec<usize>,
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

impl Builder<'_> {
    fn build(&mut self, indices: Vec<usize>, depth: usize, sampler: &mut Option<FeatureSampler<'_>>) -> usize {
        let n = indices.len();
        let pos = indices.iter().filter(|&&i| self.data.labels[i] == 1).count();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            proba: pos as f64 / n as f64,
            samples: n,
        });
        if depth >= self.config.max_depth || pos == 0 || pos == n || n < 2 * self.config.min_leaf {
            return id;
        }

        let candidates: Vec<usize> = match sampler {
            Some(s) if s.per_node < self.features.len() => {
                // partial Fisher-Yates over the feature list
                let mut f = self.features.clone();
                for i in 0..s.per_node {
                    let j = s.rng.random_range(i..f.len());
                    f.swap(i, j);
                }
                f.truncate(s.per_node);
                f.sort_unstable();
                f
            }
            _ => self.features.clone(),
        };

        let Some((feature, threshold)) = self.best_split(&indices, pos, &candidates) else {
            return id;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = indices
            .into_iter()
            .partition(|&i| self.data.row(i)[feature] <= threshold);
        let l = self.build(left, depth + 1, sampler);
        let r = self.build(right, depth + 1, sampler);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left: l,
            right: r,
        };
        id
    }

    fn best_split(&self, indices: &[usize], pos: usize, candidates: &[usize]) -> Option<(usize, f64)> {
        let n = indices.len();
        let min_leaf = self.config.min_leaf;
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted: Vec<(f64, u8)> = Vec::with_capacity(n);
        for &f in candidates {
            sorted.clear();
            sorted.extend(indices.iter().map(|&i| (self.data.row(i)[f], self.data.labels[i])));
            sorted.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_pos = 0;
            for k in 0..n - 1 {
                left_pos += usize::from(sorted[k].1);
                let (lo, hi) = (sorted[k].0, sorted[k + 1].0);
                if lo == hi {
                    continue;
                }
                let nl = k + 1;
                let nr = n - nl;
                if nl < min_leaf || nr < min_leaf {
                    continue;
                }
                let impurity = (nl as f64 * gini(left_pos, nl) + nr as f64 * gini(pos - left_pos, nr)) / n as f64;
                if best.is_none_or(|(b, _, _)| impurity < b) {
                    best = Some((impurity, f, lo + (hi - lo) / 2.0));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}
