//! Feature-attribution methods.
//!
//! Every explainer attributes one output logit (the *target*, normally the
//! argmax class from [`select_target`]) to the input token positions and
//! returns one score per position, special tokens included.
//!
//! | method | needs | perturbation |
//! |---|---|---|
//! | [`gradient_x_activation`] | gradients | none |
//! | [`integrated_gradients`] | gradients | path from the all-`[PAD]` embedding |
//! | [`occlusion`] | forward only | sliding window of `[PAD]` |
//! | [`shapley_sampling`] | forward only | random permutations, absent = `[PAD]` |
//! | [`lime`] | forward only | random `[PAD]` masks + weighted ridge fit |
//!
//! [`exact_shapley`] enumerates all coalitions and serves as the reference
//! for the sampling estimator on short inputs.

mod config;
mod gradient;
mod lime;
mod occlusion;
mod shapley;

use serde::{Deserialize, Serialize};

use crate::model::{EmbeddingClassifier, ModelError, TokenId};

pub use config::{
    ExplainerConfig, LigParams, LimeParams, Method, OcclusionParams, SvsParams, DEFAULT_SEED,
};
pub use gradient::{gradient_x_activation, integrated_gradients};
pub use lime::lime;
pub use occlusion::occlusion;
pub use shapley::{exact_shapley, shapley_sampling, MAX_EXACT_SHAPLEY_LEN};

#[derive(Debug, thiserror::Error)]
pub enum ExplainError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid explainer configuration: {0}")]
    InvalidConfig(String),
    #[error("occlusion window {window} exceeds input length {len}")]
    WindowTooLarge { window: usize, len: usize },
    #[error("exact Shapley values need at most {max} tokens, input has {len}")]
    TooLong { len: usize, max: usize },
    #[error("surrogate regression is singular; increase samples or ridge_lambda")]
    SingularSystem,
    #[error("explainer produced a non-finite score at position {0}")]
    NonFinite(usize),
}

/// Scores for one input, aligned with its token positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributionMap {
    pub scores: Vec<f64>,
    pub target_class: usize,
    pub config: ExplainerConfig,
}

impl AttributionMap {
    pub(crate) fn checked(
        scores: Vec<f64>,
        target_class: usize,
        config: ExplainerConfig,
    ) -> Result<Self, ExplainError> {
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(ExplainError::NonFinite(i));
        }
        Ok(Self {
            scores,
            target_class,
            config,
        })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Index of the largest logit; ties go to the lowest index.
///
/// ```
/// use thermostat::explainers::select_target;
/// assert_eq!(select_target(&[0.1, 0.9]), 1);
/// assert_eq!(select_target(&[3.0, 3.0]), 0);
/// ```
///
/// # Panics
///
/// On an empty slice.
pub fn select_target(logits: &[f64]) -> usize {
    assert!(!logits.is_empty(), "select_target on empty logits");
    let mut best = 0;
    for (i, &v) in logits.iter().enumerate().skip(1) {
        if v > logits[best] {
            best = i;
        }
    }
    best
}

/// Runs the explainer selected by `cfg`.
pub fn explain<M: EmbeddingClassifier + ?Sized>(
    model: &M,
    ids: &[TokenId],
    target: usize,
    cfg: &ExplainerConfig,
) -> Result<AttributionMap, ExplainError> {
    cfg.validate()?;
    match &cfg.method {
        Method::Lgxa => gradient_x_activation(model, ids, target),
        Method::Lig(p) => integrated_gradients(model, ids, target, p.steps),
        Method::Lime(p) => lime(model, ids, target, p, cfg.seed),
        Method::Occ(p) => occlusion(model, ids, target, p.window),
        Method::Svs(p) => shapley_sampling(model, ids, target, p.samples, cfg.seed),
    }
    .map(|mut m| {
        m.config = cfg.clone();
        m
    })
}

/// Derives an independent per-instance seed from a run seed, so that results
/// do not depend on the order instances are processed in.
pub fn instance_seed(global_seed: u64, index: u64) -> u64 {
    splitmix64(global_seed ^ splitmix64(index))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn check_target(target: usize, classes: usize) -> Result<(), ExplainError> {
    if target >= classes {
        return Err(ModelError::TargetOutOfRange { target, classes }.into());
    }
    Ok(())
}

/// Positions that perturbation explainers may blank out.
fn players<M: crate::model::Classifier + ?Sized>(model: &M, ids: &[TokenId]) -> Vec<usize> {
    (0..ids.len()).filter(|&i| !model.is_special(ids[i])).collect()
}
