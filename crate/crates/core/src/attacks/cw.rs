//! Carlini & Wagner L2 attack for a single-logit classifier.

use alloc::vec;
use alloc::vec::Vec;

use super::{benign_logit, AttackConfig, AttackError};
use crate::models::Classifier;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
const UPPER_INIT: f64 = 1e10;

fn to_tanh_space(v: f64) -> f64 {
    libm::atanh((2.0 * v - 1.0).clamp(-1.0 + 1e-6, 1.0 - 1e-6))
}

fn from_tanh_space(w: &[f64]) -> Vec<f64> {
    w.iter().map(|&wi| (libm::tanh(wi) + 1.0) / 2.0).collect()
}

/// Minimizes `‖x' − x‖² + c·max(f(x') + κ, 0)` over `x' = (tanh(w) + 1)/2`
/// with Adam, binary-searching `c` from `cfg.cw_c`. Returns the closest
/// successful iterate, or the last iterate if no round succeeded.
pub fn cw(model: &dyn Classifier, x: &[f64], cfg: &AttackConfig) -> Result<Vec<f64>, AttackError> {
    let d = x.len();
    let kappa = cfg.cw_kappa;
    let succeeded = |f: f64| benign_logit(f) && f <= -kappa;

    let mut c = cfg.cw_c;
    let mut lower: f64 = 0.0;
    let mut upper = UPPER_INIT;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut last = x.to_vec();

    for _ in 0..cfg.cw_binary_search_steps {
        let mut w: Vec<f64> = x.iter().map(|&v| to_tanh_space(v)).collect();
        let mut m = vec![0.0; d];
        let mut v = vec![0.0; d];
        let mut round_success = false;

        for step in 0..=cfg.steps {
            let xp = from_tanh_space(&w);
            let (f, g) = model.logit_and_gradient(&xp)?;
            let l2: f64 = xp.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if succeeded(f) {
                round_success = true;
                if best.as_ref().is_none_or(|(b, _)| l2 < *b) {
                    best = Some((l2, xp.clone()));
                }
            }
            if step == cfg.steps {
                last = xp;
                break;
            }
            let active = f + kappa > 0.0;
            let t = (step + 1) as i32;
            let c1 = 1.0 - libm::pow(BETA1, f64::from(t));
            let c2 = 1.0 - libm::pow(BETA2, f64::from(t));
            for i in 0..d {
                let th = libm::tanh(w[i]);
                let dxp_dw = (1.0 - th * th) / 2.0;
                let mut grad = 2.0 * (xp[i] - x[i]);
                if active {
                    grad += c * g[i];
                }
                grad *= dxp_dw;
                m[i] = BETA1 * m[i] + (1.0 - BETA1) * grad;
                v[i] = BETA2 * v[i] + (1.0 - BETA2) * grad * grad;
                w[i] -= cfg.cw_learning_rate * (m[i] / c1) / (libm::sqrt(v[i] / c2) + ADAM_EPS);
            }
        }

        if round_success {
            upper = upper.min(c);
        } else {
            lower = lower.max(c);
        }
        c = if upper < UPPER_INIT {
            (lower + upper) / 2.0
        } else {
            c * 10.0
        };
    }
    Ok(best.map_or(last, |(_, xp)| xp))
}
