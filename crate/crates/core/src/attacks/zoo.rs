use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::{AttackConfig, AttackError};
use crate::math::clip_unit;
use crate::models::Classifier;
use crate::rng::seeded;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
/// How often (in coordinate iterations) the decision is re-checked.
const CHECK_EVERY: usize = 10;

/// `(f(x + h·eᵢ) − f(x − h·eᵢ)) / 2h`.
pub fn symmetric_difference<F>(f: F, x: &[f64], i: usize, h: f64) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    probe[i] = x[i] + h;
    let up = f(&probe);
    probe[i] = x[i] - h;
    let down = f(&probe);
    (up - down) / (2.0 * h)
}

/// Cross-entropy against the malicious label, from probabilities only.
fn malicious_loss(model: &dyn Classifier, x: &[f64]) -> Result<f64, AttackError> {
    let p = model.predict_proba(x)?;
    Ok(-libm::log(p.max(1e-12)))
}

/// Symmetric-difference estimate of coordinate `i` of the malicious
/// cross-entropy gradient, from two probability queries.
pub fn zoo_estimate(model: &dyn Classifier, x: &[f64], i: usize, h: f64) -> Result<f64, AttackError> {
    let mut probe = x.to_vec();
    probe[i] = x[i] + h;
    let up = malicious_loss(model, &probe)?;
    probe[i] = x[i] - h;
    let down = malicious_loss(model, &probe)?;
    Ok((up - down) / (2.0 * h))
}

/// Zeroth-order coordinate attack: only `predict_proba` is queried.
/// Each iteration estimates one coordinate derivative of the malicious
/// cross-entropy by symmetric differences and takes an Adam-style ascent
/// step on that coordinate. Stops early once the model says benign.
pub fn zoo(model: &dyn Classifier, x: &[f64], cfg: &AttackConfig) -> Result<Vec<f64>, AttackError> {
    let d = x.len();
    let mut adv = x.to_vec();
    if d == 0 {
        return Ok(adv);
    }
    let mut rng = seeded(cfg.seed);
    let mut m = vec![0.0; d];
    let mut v = vec![0.0; d];
    let mut t = vec![0i32; d];
    let h = cfg.zoo_h;

    for it in 0..cfg.steps {
        if it % CHECK_EVERY == 0 && model.predict(&adv)? == 0 {
            break;
        }
        let i = if cfg.zoo_random_coordinates {
            rng.random_range(0..d)
        } else {
            it % d
        };
        let saved = adv[i];
        let g = zoo_estimate(model, &adv, i, h)?;

        t[i] += 1;
        m[i] = BETA1 * m[i] + (1.0 - BETA1) * g;
        v[i] = BETA2 * v[i] + (1.0 - BETA2) * g * g;
        let m_hat = m[i] / (1.0 - libm::pow(BETA1, f64::from(t[i])));
        let v_hat = v[i] / (1.0 - libm::pow(BETA2, f64::from(t[i])));
        adv[i] = clip_unit(saved + cfg.zoo_lr * m_hat / (libm::sqrt(v_hat) + ADAM_EPS));
    }
    Ok(adv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attacks::AttackKind;
    use crate::models::{train_knn, Classifier, KnnConfig, ModelError, ModelKind};
    use crate::testutil::{small_mlp, synth_encoded};
    use core::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn square_example() {
        let g = symmetric_difference(|x| x[0] * x[0], &[1.0], 0, 1e-4);
        assert!((g - 2.0).abs() < 1e-6);
    }

    /// Wraps a model and counts every gradient-capability call.
    struct Counting<'a> {
        inner: &'a dyn Classifier,
        gradient_calls: AtomicUsize,
    }

    impl Classifier for Counting<'_> {
        fn kind(&self) -> ModelKind {
            self.inner.kind()
        }
        fn input_dim(&self) -> usize {
            self.inner.input_dim()
        }
        fn predict_proba(&self, x: &[f64]) -> Result<f64, ModelError> {
            self.inner.predict_proba(x)
        }
        fn logit(&self, x: &[f64]) -> Result<f64, ModelError> {
            self.gradient_calls.fetch_add(1, Ordering::Relaxed);
            self.inner.logit(x)
        }
        fn logit_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>), ModelError> {
            self.gradient_calls.fetch_add(1, Ordering::Relaxed);
            self.inner.logit_and_gradient(x)
        }
        fn loss_gradient(&self, x: &[f64], y: u8) -> Result<Vec<f64>, ModelError> {
            self.gradient_calls.fetch_add(1, Ordering::Relaxed);
            self.inner.loss_gradient(x, y)
        }
    }

    #[test]
    fn black_box_on_knn() {
        let data = synth_encoded(6, 200);
        let knn = train_knn(&data, &KnnConfig::default()).unwrap();
        let counted = Counting {
            inner: &knn,
            gradient_calls: AtomicUsize::new(0),
        };
        let cfg = AttackConfig {
            steps: 200,
            ..AttackConfig::default_for(AttackKind::Zoo)
        };
        let out = crate::attacks::run_attack(&counted, data.row(0), &cfg).unwrap();
        assert_eq!(out.len(), data.dim());
        assert_eq!(counted.gradient_calls.load(Ordering::Relaxed), 0);
    }

    #[test]
    fn estimates_match_exact_gradient() {
        let (data, m) = small_mlp(7);
        let mut rng = seeded(3);
        for k in 0..20 {
            let x = data.row(k);
            let g = m.loss_gradient(x, 1).unwrap();
            let i = rng.random_range(0..x.len());
            let est = zoo_estimate(&m, x, i, 1e-4).unwrap();
            let rel = (est - g[i]).abs() / g[i].abs().max(1e-6);
            assert!(rel < 1e-3 || (est - g[i]).abs() < 1e-9, "{est} vs {}", g[i]);
        }
    }

    #[test]
    fn seeded_and_boxed() {
        let (data, m) = small_mlp(8);
        let cfg = AttackConfig {
            steps: 300,
            seed: 4,
            ..AttackConfig::default_for(AttackKind::Zoo)
        };
        let a = zoo(&m, data.row(1), &cfg).unwrap();
        assert_eq!(a, zoo(&m, data.row(1), &cfg).unwrap());
        assert!(a.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
