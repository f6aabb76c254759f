//! Corpus-level comparisons: predicted labels, model disagreement, and rank
//! correlation between attribution maps.

mod kendall;

use crate::hub::{ExplanationDataset, Instance};
use crate::model::TokenId;

pub use kendall::{kendall_tau, kendall_tau_naive, TauResult};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least 2 values, got {0}")]
    TooShort(usize),
    #[error("non-finite value in input")]
    NonFinite,
    #[error("tau is undefined: one input is constant")]
    ZeroVariance,
    #[error("datasets are not aligned: {0}")]
    Alignment(String),
}

/// An instance on which two datasets' models predict different labels.
#[derive(Clone, Debug, PartialEq)]
pub struct DisagreementPair {
    pub idx: usize,
    pub instance_a: Instance,
    pub instance_b: Instance,
    /// `(predicted by a, predicted by b)`
    pub labels: (usize, usize),
}

/// Argmax of the instance's logits, lowest index on ties.
pub fn predicted_label(inst: &Instance) -> usize {
    inst.predicted_label()
}

/// Checks that both datasets hold the same inputs in the same order.
pub fn check_aligned(a: &ExplanationDataset, b: &ExplanationDataset) -> Result<(), AnalysisError> {
    if a.len() != b.len() {
        return Err(AnalysisError::Alignment(format!(
            "{} has {} instances, {} has {}",
            a.coordinate(),
            a.len(),
            b.coordinate(),
            b.len()
        )));
    }
    for (pos, (x, y)) in a.instances.iter().zip(&b.instances).enumerate() {
        if x.idx != y.idx {
            return Err(AnalysisError::Alignment(format!(
                "position {pos}: idx {} vs {}",
                x.idx, y.idx
            )));
        }
        if x.input_ids != y.input_ids {
            return Err(AnalysisError::Alignment(format!(
                "idx {}: input ids differ",
                x.idx
            )));
        }
    }
    Ok(())
}

/// Instances where the two datasets' predicted labels differ, in order.
pub fn disagreement(
    a: &ExplanationDataset,
    b: &ExplanationDataset,
) -> Result<Vec<DisagreementPair>, AnalysisError> {
    check_aligned(a, b)?;
    Ok(a.instances
        .iter()
        .zip(&b.instances)
        .filter_map(|(x, y)| {
            let labels = (x.predicted_label(), y.predicted_label());
            (labels.0 != labels.1).then(|| DisagreementPair {
                idx: x.idx,
                instance_a: x.clone(),
                instance_b: y.clone(),
                labels,
            })
        })
        .collect())
}

/// All attribution scores concatenated in instance order. With
/// `drop_token = Some(pad)`, positions holding that token are skipped.
pub fn flatten_attributions(ds: &ExplanationDataset, drop_token: Option<TokenId>) -> Vec<f64> {
    ds.instances
        .iter()
        .flat_map(|inst| {
            inst.input_ids
                .ids()
                .iter()
                .zip(&inst.attributions)
                .filter(move |(id, _)| Some(**id) != drop_token)
                .map(|(_, &s)| s)
        })
        .collect()
}

/// Kendall's τ between the flattened attributions of two aligned datasets.
pub fn explainer_agreement(
    a: &ExplanationDataset,
    b: &ExplanationDataset,
    drop_token: Option<TokenId>,
) -> Result<TauResult, AnalysisError> {
    check_aligned(a, b)?;
    kendall_tau(
        &flatten_attributions(a, drop_token),
        &flatten_attributions(b, drop_token),
    )
}
