//! Dense rectifier network with a single sigmoid output, trained by
//! mini-batch Adam on binary cross-entropy with inverted dropout.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_dim, check_training_data, Classifier, ModelError, ModelKind};
use crate::dataset::EncodedDataset;
use crate::math::{bce_with_logit, sigmoid};
use crate::rng::{derive_seed, seeded};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    pub hidden_sizes: Vec<usize>,
    pub dropout_rate: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden_sizes: vec![512, 256, 64],
            dropout_rate: 0.01,
            learning_rate: 1e-3,
            epochs: 30,
            batch_size: 128,
            seed: 0,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::InvalidHyperparameter(format!("mlp: {m}")));
        if self.hidden_sizes.is_empty() || self.hidden_sizes.contains(&0) {
            return bad("hidden_sizes must be non-empty and positive");
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad("dropout_rate must be in [0, 1)");
        }
        if !(self.learning_rate > 0.0) || self.epochs == 0 || self.batch_size == 0 {
            return bad("learning_rate, epochs and batch_size must be positive");
        }
        Ok(())
    }
}

/// Fully connected layer; `weights` is row-major `outputs × inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    fn row(&self, o: usize) -> &[f64] {
        &self.weights[o * self.inputs..(o + 1) * self.inputs]
    }

    fn forward_into(&self, input: &[f64], out: &mut [f64]) {
        for (o, z) in out.iter_mut().enumerate() {
            *z = self.bias[o] + crate::math::dot(self.row(o), input);
        }
    }

    /// Accumulates `Wᵀ·delta` into `grad_in`.
    fn backward_input(&self, delta: &[f64], grad_in: &mut [f64]) {
        grad_in.fill(0.0);
        for (o, &d) in delta.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            for (g, w) in grad_in.iter_mut().zip(self.row(o)) {
                *g += w * d;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layers: Vec<Dense>,
}

impl MlpModel {
    /// Builds a model from explicit layers. The last layer must have a
    /// single output and shapes must chain.
    pub fn from_layers(layers: Vec<Dense>) -> Result<Self, ModelError> {
        let model = Self { layers };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let corrupt = |m: &str| Err(ModelError::Corrupt(format!("mlp: {m}")));
        let Some(last) = self.layers.last() else {
            return corrupt("no layers");
        };
        if last.outputs != 1 {
            return corrupt("output layer must have one unit");
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                return corrupt("layer buffer sizes do not match shape");
            }
            if i > 0 && self.layers[i - 1].outputs != l.inputs {
                return corrupt("layer shapes do not chain");
            }
            if l.weights.iter().chain(&l.bias).any(|v| !v.is_finite()) {
                return corrupt("non-finite parameter");
            }
        }
        Ok(())
    }

    /// Hidden layer widths, for reporting.
    pub fn architecture(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1].iter().map(|l| l.outputs).collect()
    }

    /// Seeded initialization: weights uniform in ±√(6 / fan_in) for
    /// rectifier layers and ±√(1 / fan_in) for the output unit.
    pub fn init(input_dim: usize, hidden: &[usize], seed: u64) -> Self {
        let mut rng = seeded(seed);
        let mut sizes = vec![input_dim];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let n = sizes.len() - 1;
        let layers = (0..n)
            .map(|i| {
                let (fan_in, fan_out) = (sizes[i], sizes[i + 1]);
                let gain = if i + 1 == n { 1.0 } else { 6.0 };
                let limit = libm::sqrt(gain / fan_in.max(1) as f64);
                let mut layer = Dense::zeros(fan_in, fan_out);
                for w in &mut layer.weights {
                    *w = rng.random_range(-limit..=limit);
                }
                layer
            })
            .collect();
        Self { layers }
    }

    fn logit_unchecked(&self, x: &[f64]) -> f64 {
        let mut a = x.to_vec();
        let mut z = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            z.resize(layer.outputs, 0.0);
            layer.forward_into(&a, &mut z);
            if i < last {
                for v in &mut z {
                    *v = v.max(0.0);
                }
            }
            core::mem::swap(&mut a, &mut z);
        }
        a[0]
    }

    /// Forward pass keeping each layer's activations (post-rectifier, after
    /// the optional dropout mask); returns them with the logit.
    fn forward_trace(&self, x: &[f64], masks: Option<&[Vec<f64>]>) -> (Vec<Vec<f64>>, f64) {
        let last = self.layers.len() - 1;
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        acts.push(x.to_vec());
        let mut logit = 0.0;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = vec![0.0; layer.outputs];
            layer.forward_into(&acts[i], &mut z);
            if i == last {
                logit = z[0];
            } else {
                for (j, v) in z.iter_mut().enumerate() {
                    *v = v.max(0.0);
                    if let Some(m) = masks {
                        *v *= m[i][j];
                    }
                }
                acts.push(z);
            }
        }
        (acts, logit)
    }
}

impl Classifier for MlpModel {
    fn kind(&self) -> ModelKind {
        ModelKind::Mlp
    }

    fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    fn predict_proba(&self, x: &[f64]) -> Result<f64, ModelError> {
        Ok(sigmoid(self.logit(x)?))
    }

    fn differentiable(&self) -> bool {
        true
    }

    fn logit(&self, x: &[f64]) -> Result<f64, ModelError> {
        check_dim(self.input_dim(), x)?;
        Ok(self.logit_unchecked(x))
    }

    fn logit_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>), ModelError> {
        check_dim(self.input_dim(), x)?;
        let (acts, logit) = self.forward_trace(x, None);
        let mut delta = vec![1.0];
        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            let mut grad_in = vec![0.0; layer.inputs];
            layer.backward_input(&delta, &mut grad_in);
            if i > 0 {
                // rectifier derivative, taken as 0 at 0
                for (g, a) in grad_in.iter_mut().zip(&acts[i]) {
                    if *a <= 0.0 {
                        *g = 0.0;
                    }
                }
            }
            delta = grad_in;
        }
        Ok((logit, delta))
    }
}

struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64, t: i32) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        let c1 = 1.0 - libm::pow(B1, f64::from(t));
        let c2 = 1.0 - libm::pow(B2, f64::from(t));
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = B1 * *m + (1.0 - B1) * g;
            *v = B2 * *v + (1.0 - B2) * g * g;
            *p -= lr * (*m / c1) / (libm::sqrt(*v / c2) + EPS);
        }
    }
}

/// Trains the MLP on `data`. Deterministic for a given seed, data and
/// config.
pub fn train_mlp(data: &EncodedDataset, config: &MlpConfig) -> Result<MlpModel, ModelError> {
    config.validate()?;
    check_training_data(data)?;
    let mut model = MlpModel::init(data.dim(), &config.hidden_sizes, derive_seed(config.seed, 0));
    let mut rng = seeded(derive_seed(config.seed, 1));
    let n_layers = model.layers.len();
    let keep = 1.0 - config.dropout_rate;

    let mut adam_w: Vec<AdamState> = model.layers.iter().map(|l| AdamState::new(l.weights.len())).collect();
    let mut adam_b: Vec<AdamState> = model.layers.iter().map(|l| AdamState::new(l.bias.len())).collect();
    let mut grad_w: Vec<Vec<f64>> = model.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect();
    let mut grad_b: Vec<Vec<f64>> = model.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect();
    let mut masks: Vec<Vec<f64>> = model.layers[..n_layers - 1]
        .iter()
        .map(|l| vec![1.0; l.outputs])
        .collect();

    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut step = 0i32;
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for (batch_no, batch) in order.chunks(config.batch_size).enumerate() {
            grad_w.iter_mut().for_each(|g| g.fill(0.0));
            grad_b.iter_mut().for_each(|g| g.fill(0.0));
            let mut loss = 0.0;
            for &idx in batch {
                for m in &mut masks {
                    for v in m.iter_mut() {
                        *v = if config.dropout_rate > 0.0 && rng.random::<f64>() < config.dropout_rate {
                            0.0
                        } else {
                            1.0 / keep
                        };
                    }
                }
                let y = f64::from(data.labels[idx]);
                let (acts, logit) = model.forward_trace(data.row(idx), Some(&masks));
                loss += bce_with_logit(logit, y);

                let mut delta = vec![sigmoid(logit) - y];
                for l in (0..n_layers).rev() {
                    let layer = &model.layers[l];
                    let input = &acts[l];
                    for (o, &d) in delta.iter().enumerate() {
                        if d == 0.0 {
                            continue;
                        }
                        grad_b[l][o] += d;
                        let row = &mut grad_w[l][o * layer.inputs..(o + 1) * layer.inputs];
                        for (g, a) in row.iter_mut().zip(input) {
                            *g += d * a;
                        }
                    }
                    if l == 0 {
                        break;
                    }
                    let mut prev = vec![0.0; layer.inputs];
                    layer.backward_input(&delta, &mut prev);
                    // acts[l] already includes the dropout scale; zero means
                    // inactive or dropped
                    for (j, p) in prev.iter_mut().enumerate() {
                        if acts[l][j] <= 0.0 {
                            *p = 0.0;
                        } else {
                            *p *= masks[l - 1][j];
                        }
                    }
                    delta = prev;
                }
            }
            if !loss.is_finite() {
                return Err(ModelError::NonFiniteLoss { epoch, batch: batch_no });
            }
            let scale = 1.0 / batch.len() as f64;
            step += 1;
            for l in 0..n_layers {
                grad_w[l].iter_mut().for_each(|g| *g *= scale);
                grad_b[l].iter_mut().for_each(|g| *g *= scale);
                let layer = &mut model.layers[l];
                adam_w[l].step(&mut layer.weights, &grad_w[l], config.learning_rate, step);
                adam_b[l].step(&mut layer.bias, &grad_b[l], config.learning_rate, step);
            }
        }
    }
    model.validate()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::evaluate_accuracy;
    use crate::testutil::dataset_from;

    fn bce(model: &MlpModel, x: &[f64], y: f64) -> f64 {
        bce_with_logit(model.logit(x).unwrap(), y)
    }

    #[test]
    fn default_architecture() {
        let m = MlpModel::init(53, &MlpConfig::default().hidden_sizes, 1);
        let shapes: Vec<(usize, usize)> = m.layers.iter().map(|l| (l.inputs, l.outputs)).collect();
        assert_eq!(shapes, vec![(53, 512), (512, 256), (256, 64), (64, 1)]);
        assert_eq!(m.architecture(), vec![512, 256, 64]);
    }

    #[test]
    fn zero_weights_give_one_half() {
        let m = MlpModel::from_layers(vec![Dense::zeros(3, 4), Dense::zeros(4, 1)]).unwrap();
        assert_eq!(m.predict_proba(&[0.2, 0.9, 0.4]).unwrap(), 0.5);
        assert_eq!(m.predict(&[0.2, 0.9, 0.4]).unwrap(), 1);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = seeded(11);
        let h = 1e-4;
        for trial in 0..20u64 {
            let m = MlpModel::init(6, &[8, 8], 100 + trial);
            let x: Vec<f64> = (0..6).map(|_| rng.random::<f64>()).collect();
            let y = u8::from(rng.random::<bool>());
            let g = m.loss_gradient(&x, y).unwrap();
            for i in 0..6 {
                let mut up = x.clone();
                let mut dn = x.clone();
                up[i] += h;
                dn[i] -= h;
                let fd = (bce(&m, &up, f64::from(y)) - bce(&m, &dn, f64::from(y))) / (2.0 * h);
                let rel = (g[i] - fd).abs() / g[i].abs().max(fd.abs()).max(1e-8);
                assert!(
                    rel < 1e-3 || (g[i] - fd).abs() < 1e-9,
                    "trial {trial} i {i}: {} vs {fd}",
                    g[i]
                );
            }
        }
    }

    #[test]
    fn loss_gradient_is_scaled_logit_gradient() {
        let m = MlpModel::init(4, &[5], 3);
        let x = [0.1, 0.7, 0.3, 0.9];
        let (f, lg) = m.logit_and_gradient(&x).unwrap();
        for y in [0u8, 1] {
            let g = m.loss_gradient(&x, y).unwrap();
            let s = sigmoid(f) - f64::from(y);
            for (a, b) in g.iter().zip(&lg) {
                assert!((a - s * b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn separable_toy_set_is_learned_deterministically() {
        // label 1 iff x0 + x1 > 1, with a margin around the line
        let mut rng = seeded(4);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        while rows.len() < 200 {
            let p = [rng.random::<f64>(), rng.random::<f64>()];
            let s = p[0] + p[1];
            if (s - 1.0).abs() < 0.1 {
                continue;
            }
            labels.push(u8::from(s > 1.0));
            rows.push(p);
        }
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let data = dataset_from(&refs, &labels);
        let cfg = MlpConfig {
            hidden_sizes: vec![8],
            epochs: 200,
            batch_size: 16,
            learning_rate: 1e-2,
            seed: 9,
            ..MlpConfig::default()
        };
        let m = train_mlp(&data, &cfg).unwrap();
        assert!(evaluate_accuracy(&m, &data).unwrap().accuracy >= 0.99);
        assert_eq!(train_mlp(&data, &cfg).unwrap(), m);
    }

    #[test]
    fn rejects_bad_input() {
        let data = dataset_from(&[&[0.0], &[1.0]], &[1, 1]);
        assert_eq!(train_mlp(&data, &MlpConfig::default()), Err(ModelError::SingleClass));
        let bad = MlpConfig {
            dropout_rate: 1.0,
            ..MlpConfig::default()
        };
        assert!(matches!(bad.validate(), Err(ModelError::InvalidHyperparameter(_))));
        let no_hidden = MlpConfig {
            hidden_sizes: vec![],
            ..MlpConfig::default()
        };
        assert!(no_hidden.validate().is_err());
        let m = MlpModel::init(3, &[2], 0);
        assert!(matches!(
            m.predict_proba(&[0.0; 4]),
            Err(ModelError::DimensionMismatch { .. })
        ));
    }
}
