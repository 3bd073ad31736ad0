use alloc::vec;
use alloc::vec::Vec;

use super::{benign_logit, AttackConfig, AttackError};
use crate::math::{clip_unit, sign};
use crate::models::Classifier;

/// Single-logit saliency attack.
///
/// With one output, the saliency of feature `i` is `|∂f/∂xᵢ|` for features
/// that can still move in the direction `−sign(∂f/∂xᵢ)`. Each step moves
/// the most salient feature by `θ`. Stops on a benign decision, once
/// `⌈γ·d⌉` distinct features have been touched, or when nothing can move.
pub fn jsma(model: &dyn Classifier, x: &[f64], cfg: &AttackConfig) -> Result<Vec<f64>, AttackError> {
    let d = x.len();
    let budget = libm::ceil(cfg.jsma_gamma * d as f64) as usize;
    let mut adv = x.to_vec();
    let mut touched = vec![false; d];
    let mut n_touched = 0;
    loop {
        let (f, g) = model.logit_and_gradient(&adv)?;
        if benign_logit(f) || n_touched >= budget {
            break;
        }
        let pick = g
            .iter()
            .enumerate()
            .filter(|&(i, &gi)| (gi > 0.0 && adv[i] > 0.0) || (gi < 0.0 && adv[i] < 1.0))
            .fold(None::<(usize, f64)>, |best, (i, &gi)| match best {
                Some((_, b)) if b >= gi.abs() => best,
                _ => Some((i, gi.abs())),
            });
        let Some((i, _)) = pick else {
            break;
        };
        adv[i] = clip_unit(adv[i] - sign(g[i]) * cfg.jsma_theta);
        if !touched[i] {
            touched[i] = true;
            n_touched += 1;
        }
    }
    Ok(adv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attacks::AttackKind;
    use crate::models::LinearModel;
    use crate::testutil::small_mlp;

    fn cfg(gamma: f64) -> AttackConfig {
        AttackConfig {
            jsma_gamma: gamma,
            ..AttackConfig::default_for(AttackKind::Jsma)
        }
    }

    #[test]
    fn zero_gradient_leaves_input() {
        let m = LinearModel::new(vec![0.0, 0.0], 1.0);
        assert_eq!(jsma(&m, &[0.3, 0.6], &cfg(1.0)).unwrap(), vec![0.3, 0.6]);
    }

    #[test]
    fn most_salient_feature_moves_first() {
        let m = LinearModel::new(vec![5.0, 0.1], 0.0);
        let out = jsma(&m, &[0.5, 0.5], &cfg(0.5)).unwrap();
        assert!(out[0] < 0.5);
        assert_eq!(out[1], 0.5);
    }

    #[test]
    fn saturated_features_are_skipped() {
        // feature 0 is already 0 and cannot move further down
        let m = LinearModel::new(vec![5.0, 0.1], 0.0);
        let out = jsma(&m, &[0.0, 0.5], &cfg(0.5)).unwrap();
        assert_eq!(out[0], 0.0);
        assert!(out[1] < 0.5);
    }

    #[test]
    fn touched_features_stay_within_budget() {
        let (data, m) = small_mlp(4);
        let gamma = 0.05;
        let budget = libm::ceil(gamma * data.dim() as f64) as usize;
        for i in 0..60 {
            let x = data.row(i);
            let adv = jsma(&m, x, &cfg(gamma)).unwrap();
            let changed = adv.iter().zip(x).filter(|(a, b)| a != b).count();
            assert!(changed <= budget);
        }
    }
}
