//! Sign-gradient attacks: FGSM and its iterated forms.

use alloc::vec::Vec;

use rand::Rng;

use super::{AttackConfig, AttackError};
use crate::math::{clip_unit, sign};
use crate::models::Classifier;
use crate::rng::seeded;

/// `clip(x + ε·sign(∇ₓL(x, 1)))`.
pub fn fgsm(model: &dyn Classifier, x: &[f64], cfg: &AttackConfig) -> Result<Vec<f64>, AttackError> {
    let g = model.loss_gradient(x, 1)?;
    Ok(x.iter()
        .zip(&g)
        .map(|(&xi, &gi)| clip_unit(xi + cfg.epsilon * sign(gi)))
        .collect())
}

/// Iterated FGSM with step `cfg.step_size`, projected back onto the box and
/// the ε-ball around `x` after every step.
pub fn bim(model: &dyn Classifier, x: &[f64], cfg: &AttackConfig) -> Result<Vec<f64>, AttackError> {
    iterate(model, x, x.to_vec(), cfg)
}

/// BIM started from a uniform random point of the ε-ball (seeded by
/// `cfg.seed`), unless `cfg.pgd_random_init` is off.
pub fn pgd(model: &dyn Classifier, x: &[f64], cfg: &AttackConfig) -> Result<Vec<f64>, AttackError> {
    let start = if cfg.pgd_random_init {
        let mut rng = seeded(cfg.seed);
        x.iter()
            .map(|&xi| {
                let u = rng.random::<f64>() * 2.0 - 1.0;
                clip_unit(xi + u * cfg.epsilon).clamp(xi - cfg.epsilon, xi + cfg.epsilon)
            })
            .collect()
    } else {
        x.to_vec()
    };
    iterate(model, x, start, cfg)
}

fn iterate(model: &dyn Classifier, x: &[f64], mut adv: Vec<f64>, cfg: &AttackConfig) -> Result<Vec<f64>, AttackError> {
    for _ in 0..cfg.steps {
        if cfg.early_stop && model.predict(&adv)? == 0 {
            break;
        }
        let g = model.loss_gradient(&adv, 1)?;
        for ((a, &xi), &gi) in adv.iter_mut().zip(x).zip(&g) {
            let stepped = clip_unit(*a + cfg.step_size * sign(gi));
            *a = stepped.clamp(xi - cfg.epsilon, xi + cfg.epsilon);
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
    use alloc::vec;

    fn cfg(kind: AttackKind, eps: f64, steps: usize, alpha: f64) -> AttackConfig {
        AttackConfig {
            epsilon: eps,
            steps,
            step_size: alpha,
            early_stop: false,
            ..AttackConfig::default_for(kind)
        }
    }

    #[test]
    fn fgsm_one_dimensional_example() {
        let m = LinearModel::new(vec![2.0], 0.0);
        let out = fgsm(&m, &[0.5], &cfg(AttackKind::Fgsm, 0.1, 1, 0.1)).unwrap();
        assert!((out[0] - 0.4).abs() < 1e-15);
        assert_eq!(
            fgsm(&m, &[0.5], &cfg(AttackKind::Fgsm, 0.0, 1, 0.0)).unwrap(),
            vec![0.5]
        );
    }

    #[test]
    fn bim_one_dimensional_example() {
        let m = LinearModel::new(vec![2.0], 0.0);
        let out = bim(&m, &[0.5], &cfg(AttackKind::Bim, 0.1, 5, 0.02)).unwrap();
        assert!((out[0] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn early_stop_halts_at_first_benign_iterate() {
        // f(x) = 2x − 0.9 turns negative after three steps of 0.02
        let m = LinearModel::new(vec![2.0], -0.9);
        let mut c = cfg(AttackKind::Bim, 0.1, 5, 0.02);
        c.early_stop = true;
        let out = bim(&m, &[0.5], &c).unwrap();
        assert!((out[0] - 0.44).abs() < 1e-12, "{}", out[0]);
    }

    #[test]
    fn reductions_hold_exactly() {
        let (data, m) = small_mlp(1);
        for i in 0..40 {
            let x = data.row(i);
            let f = fgsm(&m, x, &cfg(AttackKind::Fgsm, 0.3, 1, 0.3)).unwrap();
            let b = bim(&m, x, &cfg(AttackKind::Bim, 0.3, 1, 0.3)).unwrap();
            assert_eq!(f, b);
            let mut p = cfg(AttackKind::Pgd, 0.3, 7, 0.05);
            p.pgd_random_init = false;
            assert_eq!(
                pgd(&m, x, &p).unwrap(),
                bim(&m, x, &cfg(AttackKind::Bim, 0.3, 7, 0.05)).unwrap()
            );
        }
    }

    #[test]
    fn budget_and_box_hold() {
        let (data, m) = small_mlp(2);
        for kind in [AttackKind::Fgsm, AttackKind::Bim, AttackKind::Pgd] {
            for i in 0..50 {
                let c = AttackConfig {
                    seed: i as u64,
                    ..cfg(kind, 0.2, 6, 0.07)
                };
                let x = data.row(i);
                let adv = crate::attacks::run_attack(&m, x, &c).unwrap();
                for (a, b) in adv.iter().zip(x) {
                    assert!((a - b).abs() <= 0.2 + 1e-9 && (0.0..=1.0).contains(a));
                }
            }
        }
    }

    #[test]
    fn pgd_is_seeded() {
        let (data, m) = small_mlp(3);
        let c = cfg(AttackKind::Pgd, 0.2, 3, 0.05);
        let x = data.row(0);
        assert_eq!(pgd(&m, x, &c).unwrap(), pgd(&m, x, &c).unwrap());
        let other = AttackConfig { seed: 99, ..c.clone() };
        assert_ne!(pgd(&m, x, &c).unwrap(), pgd(&m, x, &other).unwrap());
        let zero = cfg(AttackKind::Pgd, 0.0, 3, 0.0);
        assert_eq!(pgd(&m, x, &zero).unwrap(), x.to_vec());
    }
}
