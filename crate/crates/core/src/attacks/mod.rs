//! Evasion attacks on binary intrusion classifiers.
//!
//! Every attack takes a malicious sample (label 1), tries to push the
//! classifier's decision to benign, and keeps every iterate inside the
//! [0, 1] feature box. No feature is masked: one-hot and binary columns
//! are perturbed like any other, and validity is left to the
//! [`constraints`](crate::constraints) filter.

mod config;
mod cw;
mod deepfool;
mod gradient;
mod jsma;
mod suite;
mod zoo;

pub use config::{AttackConfig, AttackConfigPatch, AttackKind};
pub use cw::cw;
pub use deepfool::deepfool;
pub use gradient::{bim, fgsm, pgd};
pub use jsma::jsma;
pub use suite::{assemble_batch, attack_sample, eligible_rows, run_attack_suite, AdversarialBatch, SuiteOutput};
pub use zoo::{symmetric_difference, zoo, zoo_estimate};

use alloc::string::String;

use crate::math::sigmoid;
use crate::models::{Classifier, ModelError, ModelKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AttackError {
    #[error("{attack} needs gradients, but the {model} model does not provide them")]
    NotDifferentiable { attack: AttackKind, model: ModelKind },
    #[error("invalid attack configuration: {0}")]
    InvalidConfig(String),
    #[error("no samples to attack")]
    EmptySamples,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Runs the attack selected by `cfg.attack_kind` on one sample.
pub fn run_attack(model: &dyn Classifier, x: &[f64], cfg: &AttackConfig) -> Result<alloc::vec::Vec<f64>, AttackError> {
    cfg.validate()?;
    if cfg.attack_kind.needs_gradients() && !model.differentiable() {
        return Err(AttackError::NotDifferentiable {
            attack: cfg.attack_kind,
            model: model.kind(),
        });
    }
    match cfg.attack_kind {
        AttackKind::Fgsm => fgsm(model, x, cfg),
        AttackKind::Bim => bim(model, x, cfg),
        AttackKind::Pgd => pgd(model, x, cfg),
        AttackKind::Jsma => jsma(model, x, cfg),
        AttackKind::DeepFool => deepfool(model, x, cfg),
        AttackKind::Cw => cw(model, x, cfg),
        AttackKind::Zoo => zoo(model, x, cfg),
    }
}

/// The classifier labels a point benign iff `σ(f) < 0.5`.
pub(crate) fn benign_logit(f: f64) -> bool {
    sigmoid(f) < 0.5
}
