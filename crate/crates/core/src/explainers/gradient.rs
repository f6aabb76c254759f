use crate::model::{EmbeddingClassifier, Matrix, TokenId};

use super::{check_target, AttributionMap, ExplainError, ExplainerConfig};

/// `score[i] = Σ_k ∂f/∂X[i,k] · X[i,k]` at the input embeddings `X`.
pub fn gradient_x_activation<M: EmbeddingClassifier + ?Sized>(
    model: &M,
    ids: &[TokenId],
    target: usize,
) -> Result<AttributionMap, ExplainError> {
    check_target(target, model.num_classes())?;
    let x = model.embed(ids)?;
    let grad = model.gradient_wrt_embeddings(&x, target)?;
    AttributionMap::checked(
        grad.rowwise_dot(&x),
        target,
        ExplainerConfig::lgxa(),
    )
}

/// Integrated gradients in embedding space.
///
/// The baseline is the embedding of an all-`[PAD]` sequence of the same
/// length. The path integral is approximated with the midpoint rule over
/// `steps` equal intervals:
///
/// `score[i] = Σ_k (X − B)[i,k] · (1/steps) Σ_s ∂f/∂X[i,k] (B + (s − ½)/steps · (X − B))`
pub fn integrated_gradients<M: EmbeddingClassifier + ?Sized>(
    model: &M,
    ids: &[TokenId],
    target: usize,
    steps: usize,
) -> Result<AttributionMap, ExplainError> {
    let cfg = ExplainerConfig::lig(steps);
    cfg.validate()?;
    check_target(target, model.num_classes())?;
    let x = model.embed(ids)?;
    let baseline = model.embed(&vec![model.pad_id(); ids.len()])?;
    let mut avg_grad = Matrix::zeros(x.rows(), x.cols());
    let inv = 1.0 / steps as f64;
    for s in 0..steps {
        let alpha = (s as f64 + 0.5) * inv;
        let point = baseline.lerp(&x, alpha);
        let grad = model.gradient_wrt_embeddings(&point, target)?;
        for (a, g) in avg_grad.as_mut_slice().iter_mut().zip(grad.as_slice()) {
            *a += g * inv;
        }
    }
    let diff = x.sub(&baseline);
    AttributionMap::checked(avg_grad.rowwise_dot(&diff), target, cfg)
}
