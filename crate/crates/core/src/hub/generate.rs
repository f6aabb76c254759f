use std::path::Path;

use rayon::prelude::*;

use crate::corpus::LabeledText;
use crate::explainers::{explain, instance_seed, select_target, ExplainerConfig};
use crate::model::{EmbeddingClassifier, ReferenceModel, Vocab};

use super::{CoordinateId, DatasetConfig, ExplanationDataset, HubError, Instance};

#[derive(Clone, Debug)]
pub struct GenerateOptions {
    /// Worker threads; output does not depend on this.
    pub workers: usize,
    /// Empty means `class_0`, `class_1`, ... when rendering.
    pub label_names: Vec<String>,
    /// Recorded in the config; overrides the timestamp taken at generation.
    pub created: Option<String>,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            label_names: Vec::new(),
            created: None,
        }
    }
}

/// Loads a [`ReferenceModel`] from `model_file` and explains every corpus
/// text with it. See [`generate_with_model`].
pub fn generate(
    corpus: &[LabeledText],
    model_file: &Path,
    cfg: &ExplainerConfig,
    coordinate: CoordinateId,
    opts: &GenerateOptions,
) -> Result<ExplanationDataset, HubError> {
    let model = ReferenceModel::load(model_file)?;
    generate_with_model(corpus, &model, model.vocab(), model_file, cfg, coordinate, opts)
}

/// For each text: tokenize, run the model, pick the argmax class and
/// explain it. Instances come back in corpus order.
///
/// Stochastic explainers run instance `i` with seed
/// `instance_seed(cfg.seed, i)`, so the result does not depend on
/// `opts.workers`.
pub fn generate_with_model<M>(
    corpus: &[LabeledText],
    model: &M,
    vocab: &Vocab,
    model_file: &Path,
    cfg: &ExplainerConfig,
    coordinate: CoordinateId,
    opts: &GenerateOptions,
) -> Result<ExplanationDataset, HubError>
where
    M: EmbeddingClassifier + Sync + ?Sized,
{
    coordinate.check()?;
    cfg.validate().map_err(HubError::Explainer)?;
    if coordinate.explainer != cfg.short_name() {
        return Err(HubError::InvalidCoordinate(format!(
            "coordinate explainer {:?} does not match configured explainer {:?}",
            coordinate.explainer,
            cfg.short_name()
        )));
    }
    if corpus.is_empty() {
        return Err(HubError::EmptyCorpus);
    }
    let classes = model.num_classes();

    let explain_one = |(idx, item): (usize, &LabeledText)| -> Result<Instance, HubError> {
        if item.label >= classes {
            return Err(HubError::Label {
                index: idx,
                label: item.label,
                classes,
            });
        }
        let at = |source| HubError::Generate { index: idx, source };
        let ids = vocab.tokenize(&item.text);
        let logits = model.forward(ids.ids()).map_err(|e| at(e.into()))?;
        let target = select_target(&logits);
        let run_cfg = cfg.clone().with_seed(instance_seed(cfg.seed, idx as u64));
        let map = explain(model, ids.ids(), target, &run_cfg).map_err(at)?;
        Ok(Instance {
            idx,
            input_ids: ids,
            attributions: map.scores,
            true_label: item.label,
            logits,
        })
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .expect("thread pool");
    let instances = pool.install(|| {
        corpus
            .par_iter()
            .enumerate()
            .map(explain_one)
            .collect::<Result<Vec<_>, _>>()
    })?;

    let config = DatasetConfig {
        coordinate,
        explainer: cfg.clone(),
        model_file: model_file.to_path_buf(),
        num_classes: classes,
        label_names: opts.label_names.clone(),
        created: opts
            .created
            .clone()
            .unwrap_or_else(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
    };
    Ok(ExplanationDataset::new(config, instances))
}
