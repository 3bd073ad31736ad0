use alloc::format;

use serde::{Deserialize, Serialize};

use super::AttackError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AttackKind {
    #[serde(rename = "FGSM")]
    Fgsm,
    #[serde(rename = "BIM")]
    Bim,
    #[serde(rename = "PGD")]
    Pgd,
    #[serde(rename = "JSMA")]
    Jsma,
    #[serde(rename = "DEEPFOOL")]
    DeepFool,
    #[serde(rename = "CW")]
    Cw,
    #[serde(rename = "ZOO")]
    Zoo,
}

impl AttackKind {
    pub const ALL: [AttackKind; 7] = [
        AttackKind::Fgsm,
        AttackKind::Cw,
        AttackKind::Jsma,
        AttackKind::DeepFool,
        AttackKind::Pgd,
        AttackKind::Zoo,
        AttackKind::Bim,
    ];

    /// Identifier used in config files and directory names.
    pub fn id(self) -> &'static str {
        match self {
            AttackKind::Fgsm => "FGSM",
            AttackKind::Bim => "BIM",
            AttackKind::Pgd => "PGD",
            AttackKind::Jsma => "JSMA",
            AttackKind::DeepFool => "DEEPFOOL",
            AttackKind::Cw => "CW",
            AttackKind::Zoo => "ZOO",
        }
    }

    /// Name used in rendered tables.
    pub fn display_name(self) -> &'static str {
        match self {
            AttackKind::DeepFool => "DeepFool",
            AttackKind::Cw => "C&W",
            other => other.id(),
        }
    }

    pub fn needs_gradients(self) -> bool {
        self != AttackKind::Zoo
    }

    pub fn is_budgeted(self) -> bool {
        matches!(self, AttackKind::Fgsm | AttackKind::Bim | AttackKind::Pgd)
    }
}

impl core::fmt::Display for AttackKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.display_name())
    }
}

/// Fully resolved attack parameters. Fields irrelevant to the selected
/// attack are carried along but ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub attack_kind: AttackKind,
    /// ∞-norm budget for FGSM, BIM and PGD.
    pub epsilon: f64,
    /// Iteration count: BIM/PGD steps, DeepFool iterations, C&W Adam steps
    /// per binary-search round, ZOO coordinate iterations.
    pub steps: usize,
    pub step_size: f64,
    pub pgd_random_init: bool,
    /// BIM/PGD: stop iterating as soon as the surrogate says benign.
    pub early_stop: bool,
    pub jsma_theta: f64,
    pub jsma_gamma: f64,
    pub deepfool_overshoot: f64,
    pub cw_c: f64,
    pub cw_kappa: f64,
    pub cw_binary_search_steps: usize,
    pub cw_learning_rate: f64,
    pub zoo_h: f64,
    pub zoo_lr: f64,
    pub zoo_random_coordinates: bool,
    pub seed: u64,
}

pub const DEFAULT_EPSILON: f64 = 0.5;
/// Default BIM/PGD step size as a fraction of epsilon.
pub const STEP_FRACTION: f64 = 0.05;

impl AttackConfig {
    pub fn default_for(kind: AttackKind) -> Self {
        let epsilon = DEFAULT_EPSILON;
        let steps = match kind {
            AttackKind::Fgsm | AttackKind::Jsma => 1,
            AttackKind::Bim | AttackKind::Pgd => 20,
            AttackKind::DeepFool => 50,
            AttackKind::Cw => 100,
            AttackKind::Zoo => 1000,
        };
        Self {
            attack_kind: kind,
            epsilon,
            steps,
            step_size: epsilon * STEP_FRACTION,
            pgd_random_init: true,
            early_stop: true,
            jsma_theta: 0.2,
            jsma_gamma: 0.15,
            deepfool_overshoot: 0.02,
            cw_c: 1.0,
            cw_kappa: 0.0,
            cw_binary_search_steps: 9,
            cw_learning_rate: 1e-2,
            zoo_h: 1e-4,
            zoo_lr: 1e-2,
            zoo_random_coordinates: true,
            seed: 0,
        }
    }

    /// Default configs for all seven attacks, in reporting order.
    pub fn default_suite(seed: u64) -> alloc::vec::Vec<Self> {
        AttackKind::ALL
            .iter()
            .map(|&k| Self {
                seed,
                ..Self::default_for(k)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), AttackError> {
        let bad = |m: &str| Err(AttackError::InvalidConfig(format!("{}: {m}", self.attack_kind.id())));
        if !(self.epsilon >= 0.0) {
            return bad("epsilon must be non-negative");
        }
        if self.steps == 0 {
            return bad("steps must be at least 1");
        }
        if !(self.jsma_gamma > 0.0 && self.jsma_gamma <= 1.0) {
            return bad("jsma_gamma must be in (0, 1]");
        }
        if !(self.jsma_theta > 0.0) || !(self.step_size >= 0.0) {
            return bad("jsma_theta must be positive and step_size non-negative");
        }
        if !(self.zoo_h > 0.0) || !(self.zoo_lr > 0.0) || !(self.cw_learning_rate > 0.0) {
            return bad("zoo_h, zoo_lr and cw_learning_rate must be positive");
        }
        if !(self.cw_c >= 0.0) || self.cw_binary_search_steps == 0 {
            return bad("cw_c must be non-negative and cw_binary_search_steps at least 1");
        }
        Ok(())
    }
}

/// Partial config as written in attack files; omitted fields take the
/// defaults of `attack_kind`. If `epsilon` is given but `step_size` is
/// not, the step size follows as `epsilon * STEP_FRACTION`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackConfigPatch {
    pub attack_kind: Option<AttackKind>,
    pub epsilon: Option<f64>,
    pub steps: Option<usize>,
    pub step_size: Option<f64>,
    pub pgd_random_init: Option<bool>,
    pub early_stop: Option<bool>,
    pub jsma_theta: Option<f64>,
    pub jsma_gamma: Option<f64>,
    pub deepfool_overshoot: Option<f64>,
    pub cw_c: Option<f64>,
    pub cw_kappa: Option<f64>,
    pub cw_binary_search_steps: Option<usize>,
    pub cw_learning_rate: Option<f64>,
    pub zoo_h: Option<f64>,
    pub zoo_lr: Option<f64>,
    pub zoo_random_coordinates: Option<bool>,
    pub seed: Option<u64>,
}

impl AttackConfigPatch {
    pub fn resolve(&self, default_seed: u64) -> Result<AttackConfig, AttackError> {
        let kind = self
            .attack_kind
            .ok_or_else(|| AttackError::InvalidConfig("attack_kind is required".into()))?;
        let mut c = AttackConfig::default_for(kind);
        c.seed = default_seed;
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { c.$f = v; } )* };
        }
        take!(
            epsilon,
            steps,
            step_size,
            pgd_random_init,
            early_stop,
            jsma_theta,
            jsma_gamma,
            deepfool_overshoot,
            cw_c,
            cw_kappa,
            cw_binary_search_steps,
            cw_learning_rate,
            zoo_h,
            zoo_lr,
            zoo_random_coordinates,
            seed
        );
        if self.epsilon.is_some() && self.step_size.is_none() {
            c.step_size = c.epsilon * STEP_FRACTION;
        }
        c.validate()?;
        Ok(c)
    }
}
