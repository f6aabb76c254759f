use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{Classifier, TokenId};

use super::{
    check_target, players, AttributionMap, ExplainError, ExplainerConfig, Method, SvsParams,
};

/// Longest input [`exact_shapley`] accepts.
pub const MAX_EXACT_SHAPLEY_LEN: usize = 16;

/// Monte-Carlo Shapley value estimate from `samples` random permutations.
///
/// Players are the non-special positions; an absent player is replaced by
/// `[PAD]`. Each permutation starts from the all-absent input and reveals
/// players one by one, crediting each with the change in the target logit.
/// Special tokens stay in place and score 0.
pub fn shapley_sampling<M: Classifier + ?Sized>(
    model: &M,
    ids: &[TokenId],
    target: usize,
    samples: usize,
    seed: u64,
) -> Result<AttributionMap, ExplainError> {
    let cfg = ExplainerConfig::svs(samples, seed);
    cfg.validate()?;
    check_target(target, model.num_classes())?;
    let value = |seq: &[TokenId]| model.forward(seq).map(|l| l[target]);
    let mut order = players(model, ids);
    let mut empty = ids.to_vec();
    for &p in &order {
        empty[p] = model.pad_id();
    }
    let v_empty = value(&empty)?;
    let v_full = value(ids)?;
    let mut totals = vec![0.0; ids.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = empty.clone();
    for _ in 0..samples {
        order.shuffle(&mut rng);
        current.copy_from_slice(&empty);
        let mut prev = v_empty;
        for (k, &p) in order.iter().enumerate() {
            current[p] = ids[p];
            let next = if k + 1 == order.len() {
                v_full
            } else {
                value(&current)?
            };
            totals[p] += next - prev;
            prev = next;
        }
    }
    let scores = totals.into_iter().map(|t| t / samples as f64).collect();
    AttributionMap::checked(scores, target, cfg)
}

/// Exact Shapley values by enumerating every coalition of players.
///
/// Uses the same game as [`shapley_sampling`]: `v(S)` is the target logit
/// with every non-special position outside `S` set to `[PAD]`. The returned
/// map carries an SVS config with `samples = 0` as a marker.
pub fn exact_shapley<M: Classifier + ?Sized>(
    model: &M,
    ids: &[TokenId],
    target: usize,
) -> Result<AttributionMap, ExplainError> {
    if ids.len() > MAX_EXACT_SHAPLEY_LEN {
        return Err(ExplainError::TooLong {
            len: ids.len(),
            max: MAX_EXACT_SHAPLEY_LEN,
        });
    }
    check_target(target, model.num_classes())?;
    let order = players(model, ids);
    let k = order.len();
    let mut values = Vec::with_capacity(1 << k);
    let mut seq = ids.to_vec();
    for coalition in 0usize..1 << k {
        for (bit, &p) in order.iter().enumerate() {
            seq[p] = if coalition >> bit & 1 == 1 {
                ids[p]
            } else {
                model.pad_id()
            };
        }
        values.push(model.forward(&seq)?[target]);
    }
    // weight[s] = s! (k − s − 1)! / k!
    let weights: Vec<f64> = (0..k)
        .map(|s| {
            let mut w = 1.0 / k as f64;
            for j in 1..=s {
                w *= j as f64 / (k - j) as f64;
            }
            w
        })
        .collect();
    let mut scores = vec![0.0; ids.len()];
    for (bit, &p) in order.iter().enumerate() {
        let mask = 1usize << bit;
        scores[p] = (0..1usize << k)
            .filter(|c| c & mask == 0)
            .map(|c| weights[c.count_ones() as usize] * (values[c | mask] - values[c]))
            .sum();
    }
    let marker = ExplainerConfig::new(Method::Svs(SvsParams { samples: 0 }), 0);
    AttributionMap::checked(scores, target, marker)
}
