use crate::model::{Classifier, TokenId};

use super::{check_target, AttributionMap, ExplainError, ExplainerConfig};

/// Sliding-window occlusion with stride 1.
///
/// For each window start `p`, positions `p..p + window` are replaced by
/// `[PAD]` and the drop `f(ids) − f(occluded)` of the target logit is
/// recorded. A position's score is the mean drop over every window covering
/// it. Special tokens are occluded like any other position.
pub fn occlusion<M: Classifier + ?Sized>(
    model: &M,
    ids: &[TokenId],
    target: usize,
    window: usize,
) -> Result<AttributionMap, ExplainError> {
    let cfg = ExplainerConfig::occlusion(window);
    cfg.validate()?;
    check_target(target, model.num_classes())?;
    let n = ids.len();
    if window > n {
        return Err(ExplainError::WindowTooLarge { window, len: n });
    }
    let full = model.forward(ids)?[target];
    let mut sums = vec![0.0; n];
    let mut counts = vec![0usize; n];
    let mut occluded = ids.to_vec();
    for start in 0..=n - window {
        let span = start..start + window;
        occluded[span.clone()].fill(model.pad_id());
        let drop = full - model.forward(&occluded)?[target];
        occluded[span.clone()].copy_from_slice(&ids[span.clone()]);
        for i in span {
            sums[i] += drop;
            counts[i] += 1;
        }
    }
    let scores = sums
        .into_iter()
        .zip(counts)
        .map(|(s, c)| s / c as f64)
        .collect();
    AttributionMap::checked(scores, target, cfg)
}
