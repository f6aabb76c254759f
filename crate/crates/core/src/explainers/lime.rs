use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Classifier, TokenId};

use super::{check_target, players, AttributionMap, ExplainError, ExplainerConfig, LimeParams};

/// Relative pivot size below which the normal equations count as singular.
const PIVOT_TOLERANCE: f64 = 1e-10;

/// LIME with a `[PAD]`-mask perturbation and a weighted ridge surrogate.
///
/// Sample 0 is the unperturbed input. Every further sample drops each
/// non-special token independently with probability `mask_prob`. A sample
/// with keep-mask `m` (special tokens counted as kept) is weighted by
///
/// `k(m) = exp(−(1 − cos(m, 1))² / kernel_width²)`
///
/// and the target logit is regressed on the keep-mask of the non-special
/// positions plus an unpenalized intercept, with an L2 penalty
/// `ridge_lambda` on the token coefficients. Those coefficients are the
/// scores; special tokens score 0.
pub fn lime<M: Classifier + ?Sized>(
    model: &M,
    ids: &[TokenId],
    target: usize,
    params: &LimeParams,
    seed: u64,
) -> Result<AttributionMap, ExplainError> {
    let cfg = ExplainerConfig::lime(*params, seed);
    cfg.validate()?;
    check_target(target, model.num_classes())?;
    let free = players(model, ids);
    let k = free.len();
    let n = ids.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // normal equations over [intercept, free positions...]
    let dim = k + 1;
    let mut gram = DMatrix::<f64>::zeros(dim, dim);
    let mut rhs = DVector::<f64>::zeros(dim);
    let mut keep = vec![true; k];
    let mut seq = ids.to_vec();
    let mut z = DVector::<f64>::zeros(dim);
    for sample in 0..params.samples {
        if sample > 0 {
            for flag in keep.iter_mut() {
                *flag = rng.random::<f64>() >= params.mask_prob;
            }
        }
        z[0] = 1.0;
        for (j, (&p, &kept)) in free.iter().zip(&keep).enumerate() {
            seq[p] = if kept { ids[p] } else { model.pad_id() };
            z[j + 1] = if kept { 1.0 } else { 0.0 };
        }
        let y = model.forward(&seq)?[target];
        let kept_total = (n - k) + keep.iter().filter(|&&b| b).count();
        let weight = kernel(kept_total, n, params.kernel_width);
        gram.ger(weight, &z, &z, 1.0);
        rhs.axpy(weight * y, &z, 1.0);
    }
    for j in 1..dim {
        gram[(j, j)] += params.ridge_lambda;
    }
    let coef = solve_spd(gram, rhs)?;
    let mut scores = vec![0.0; n];
    for (j, &p) in free.iter().enumerate() {
        scores[p] = coef[j + 1];
    }
    AttributionMap::checked(scores, target, cfg)
}

/// Exponential kernel on the cosine distance between a keep-mask with
/// `kept` ones out of `n` and the all-ones mask.
fn kernel(kept: usize, n: usize, width: f64) -> f64 {
    let cosine = if kept == 0 {
        0.0
    } else {
        (kept as f64 / n as f64).sqrt()
    };
    let distance = 1.0 - cosine;
    (-(distance * distance) / (width * width)).exp()
}

fn solve_spd(gram: DMatrix<f64>, rhs: DVector<f64>) -> Result<DVector<f64>, ExplainError> {
    let scale = gram.diagonal().amax();
    let chol = gram.cholesky().ok_or(ExplainError::SingularSystem)?;
    let l = chol.l_dirty();
    let min_pivot = l.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v * v));
    // NaN pivots fail the comparison too
    if min_pivot.is_nan() || min_pivot <= PIVOT_TOLERANCE * scale {
        return Err(ExplainError::SingularSystem);
    }
    Ok(chol.solve(&rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelError, Vocab};
    use crate::test_util::{constant_model, nonlinear_model};

    /// Target logit is `bias + Σ_i weights[ids[i]]` with `weights[pad] = 0`,
    /// so it is exactly linear in the keep-mask.
    struct BagOfWeights {
        weights: Vec<f64>,
        bias: f64,
        vocab: Vocab,
    }

    impl Classifier for BagOfWeights {
        fn num_classes(&self) -> usize {
            2
        }
        fn vocab_size(&self) -> usize {
            self.weights.len()
        }
        fn pad_id(&self) -> TokenId {
            self.vocab.pad_id()
        }
        fn is_special(&self, id: TokenId) -> bool {
            self.vocab.is_special(id)
        }
        fn forward(&self, ids: &[TokenId]) -> Result<Vec<f64>, ModelError> {
            let s: f64 = ids.iter().map(|&i| self.weights[i as usize]).sum();
            Ok(vec![-s, self.bias + s])
        }
    }

    fn bag() -> BagOfWeights {
        let vocab = Vocab::synthetic(10);
        let mut weights = vec![0.0, 0.0, 0.4, -0.2, 1.5, -2.0, 0.75, 3.0, -0.5, 0.25];
        weights[vocab.pad_id() as usize] = 0.0;
        BagOfWeights {
            weights,
            bias: 0.3,
            vocab,
        }
    }

    #[test]
    fn recovers_mask_linear_coefficients() {
        let m = bag();
        let ids = [2u32, 4, 5, 6, 7, 8, 9, 3];
        let p = LimeParams {
            samples: 5000,
            ridge_lambda: 1e-6,
            ..LimeParams::default()
        };
        let got = lime(&m, &ids, 1, &p, 11).unwrap().scores;
        assert_eq!((got[0], got[7]), (0.0, 0.0));
        for i in 1..7 {
            let truth = m.weights[ids[i] as usize];
            assert!(
                (got[i] - truth).abs() <= 0.05 * truth.abs(),
                "pos {i}: {} vs {truth}",
                got[i]
            );
        }
    }

    #[test]
    fn constant_response_shrinks_to_zero() {
        let m = constant_model();
        let got = lime(&m, &[2, 4, 5, 6, 3], 0, &LimeParams::default(), 5).unwrap();
        assert!(got.scores.iter().all(|s| s.abs() <= 1e-6), "{:?}", got.scores);
    }

    #[test]
    fn bit_identical_under_fixed_seed() {
        let m = nonlinear_model(3);
        let ids = [2u32, 4, 5, 6, 7, 3];
        let a = lime(&m, &ids, 0, &LimeParams::default(), 99).unwrap();
        let b = lime(&m, &ids, 0, &LimeParams::default(), 99).unwrap();
        let c = lime(&m, &ids, 0, &LimeParams::default(), 100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.scores, c.scores);
    }

    #[test]
    fn singular_without_ridge() {
        // one sample cannot identify several coefficients
        let m = nonlinear_model(3);
        let p = LimeParams {
            samples: 1,
            ridge_lambda: 0.0,
            ..LimeParams::default()
        };
        assert!(matches!(
            lime(&m, &[2, 4, 5, 3], 0, &p, 0),
            Err(ExplainError::SingularSystem)
        ));
        let p = LimeParams { ridge_lambda: 1.0, ..p };
        assert!(lime(&m, &[2, 4, 5, 3], 0, &p, 0).is_ok());
    }

    #[test]
    fn kernel_values() {
        assert_eq!(kernel(4, 4, 1.0), 1.0);
        assert!((kernel(0, 4, 1.0) - (-1.0f64).exp()).abs() < 1e-15);
        let half = 1.0 - 0.5f64.sqrt();
        assert!((kernel(2, 4, 0.5) - (-(half * half) / 0.25).exp()).abs() < 1e-15);
    }
}
