use alloc::vec::Vec;

use super::{AttackConfig, AttackError};
use crate::math::{clip_unit, norm_sq};
use crate::models::Classifier;

/// Binary DeepFool: repeated steps `−f(x)·∇f/‖∇f‖²` onto the linearized
/// boundary while `f > 0`, then the total displacement is scaled by
/// `1 + overshoot` and clipped to the box. A vanishing gradient
/// (‖∇f‖ < 1e−12) aborts and returns `x`.
pub fn deepfool(model: &dyn Classifier, x: &[f64], cfg: &AttackConfig) -> Result<Vec<f64>, AttackError> {
    let mut xt = x.to_vec();
    let (mut f, mut g) = model.logit_and_gradient(&xt)?;
    let mut t = 0;
    while f > 0.0 && t < cfg.steps {
        let n2 = norm_sq(&g);
        if n2 < 1e-24 {
            return Ok(x.to_vec());
        }
        let scale = f / n2;
        for (v, gi) in xt.iter_mut().zip(&g) {
            *v -= scale * gi;
        }
        t += 1;
        (f, g) = model.logit_and_gradient(&xt)?;
    }
    let k = 1.0 + cfg.deepfool_overshoot;
    Ok(x.iter().zip(&xt).map(|(&a, &b)| clip_unit(a + k * (b - a))).collect())
}
