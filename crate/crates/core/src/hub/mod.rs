//! The explanation dataset schema and its on-disk store.
//!
//! Datasets live under a root directory, one directory per coordinate and
//! version:
//!
//! ```text
//! <root>/<dataset>-<model>-<explainer>/<version>/config.json
//! <root>/<dataset>-<model>-<explainer>/<version>/data.jsonl
//! ```
//!
//! `config.json` holds the [`DatasetConfig`], including the full explainer
//! hyperparameters. `data.jsonl` holds one [`Instance`] per line:
//!
//! ```text
//! {"idx":0,"input_ids":[2,17,5,3],"attributions":[0.01,0.4,-0.2,0.0],"true_label":1,"logits":[-0.8,1.1]}
//! ```
//!
//! Floats are written in shortest round-trip form, so a save/load cycle is
//! bit-exact and two runs with the same seeds produce identical files.

mod coordinate;
mod generate;
mod store;

use std::cmp::Ordering;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::explainers::{select_target, ExplainError, ExplainerConfig};
use crate::model::{ModelError, TokenSequence};

pub use coordinate::{CoordinateId, IntoCoordinate, DEFAULT_VERSION};
pub use generate::{generate, generate_with_model, GenerateOptions};
pub use store::{dataset_dir, list_versions, load, load_unvalidated, save, CONFIG_FILE, DATA_FILE};

#[derive(Debug, thiserror::Error)]
pub enum HubError {
    #[error("invalid coordinate: {0}")]
    InvalidCoordinate(String),
    #[error("dataset {coordinate} not found: {} does not exist", path.display())]
    NotFound { coordinate: String, path: PathBuf },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{line}: {source}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        source: serde_json::Error,
    },
    #[error("dataset {coordinate} failed validation:{}", list(violations))]
    Invalid {
        coordinate: String,
        violations: Vec<Violation>,
    },
    #[error("instance {index}: {source}")]
    Generate { index: usize, source: ExplainError },
    #[error("instance {index}: label {label} out of range for {classes} classes")]
    Label {
        index: usize,
        label: usize,
        classes: usize,
    },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Explainer(ExplainError),
}

fn list(violations: &[Violation]) -> String {
    violations.iter().map(|v| format!("\n  {v}")).collect()
}

/// One explained example.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub idx: usize,
    pub input_ids: TokenSequence,
    pub attributions: Vec<f64>,
    pub true_label: usize,
    pub logits: Vec<f64>,
}

impl Instance {
    /// Argmax of the logits, lowest index on ties.
    pub fn predicted_label(&self) -> usize {
        select_target(&self.logits)
    }

    pub fn max_logit(&self) -> f64 {
        self.logits.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn len(&self) -> usize {
        self.input_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.input_ids.is_empty()
    }
}

/// Provenance record stored next to every dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub coordinate: CoordinateId,
    /// Per-instance seeds are derived from `explainer.seed` and the instance
    /// index.
    pub explainer: ExplainerConfig,
    pub model_file: PathBuf,
    pub num_classes: usize,
    #[serde(default)]
    pub label_names: Vec<String>,
    pub created: String,
    pub tool_version: String,
}

impl DatasetConfig {
    pub fn label_name(&self, label: usize) -> String {
        self.label_names
            .get(label)
            .cloned()
            .unwrap_or_else(|| format!("class_{label}"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExplanationDataset {
    pub config: DatasetConfig,
    pub instances: Vec<Instance>,
}

/// A broken invariant. `idx` is the position of the offending instance,
/// `line` its 1-based line in `data.jsonl`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub idx: Option<usize>,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.idx) {
            (Some(line), Some(idx)) => write!(f, "line {line} (idx {idx}): {}", self.message),
            (None, Some(idx)) => write!(f, "idx {idx}: {}", self.message),
            _ => write!(f, "config: {}", self.message),
        }
    }
}

impl ExplanationDataset {
    pub fn new(config: DatasetConfig, instances: Vec<Instance>) -> Self {
        Self { config, instances }
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn coordinate(&self) -> &CoordinateId {
        &self.config.coordinate
    }

    /// Instance whose `idx` field equals `idx`.
    pub fn get(&self, idx: usize) -> Option<&Instance> {
        match self.instances.get(idx) {
            Some(inst) if inst.idx == idx => Some(inst),
            _ => self.instances.iter().find(|i| i.idx == idx),
        }
    }

    /// Checks every schema invariant. An empty list means the dataset is
    /// valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let cfg = &self.config;
        let mut config_issue = |message: String| {
            out.push(Violation {
                idx: None,
                line: None,
                message,
            })
        };
        if let Err(e) = cfg.coordinate.check() {
            config_issue(e.to_string());
        }
        if cfg.explainer.short_name() != cfg.coordinate.explainer {
            config_issue(format!(
                "explainer {:?} does not match coordinate explainer {:?}",
                cfg.explainer.short_name(),
                cfg.coordinate.explainer
            ));
        }
        if let Err(e) = cfg.explainer.validate() {
            config_issue(e.to_string());
        }
        if cfg.num_classes < 2 {
            config_issue(format!("num_classes = {} (need >= 2)", cfg.num_classes));
        }
        if !cfg.label_names.is_empty() && cfg.label_names.len() != cfg.num_classes {
            config_issue(format!(
                "{} label names for {} classes",
                cfg.label_names.len(),
                cfg.num_classes
            ));
        }

        let classes = cfg.num_classes;
        for (pos, inst) in self.instances.iter().enumerate() {
            let mut issue = |message: String| {
                out.push(Violation {
                    idx: Some(inst.idx),
                    line: Some(pos + 1),
                    message,
                })
            };
            if inst.idx != pos {
                issue(format!("idx {} at position {pos}", inst.idx));
            }
            if inst.input_ids.is_empty() {
                issue("empty input_ids".into());
            }
            if inst.attributions.len() != inst.input_ids.len() {
                issue(format!(
                    "{} attributions for {} input ids",
                    inst.attributions.len(),
                    inst.input_ids.len()
                ));
            }
            if inst.logits.len() != classes {
                issue(format!("{} logits for {classes} classes", inst.logits.len()));
            }
            if inst.true_label >= classes {
                issue(format!("true_label {} >= {classes}", inst.true_label));
            }
            if let Some(p) = inst.attributions.iter().position(|v| !v.is_finite()) {
                issue(format!("non-finite attribution at position {p}"));
            }
            if let Some(p) = inst.logits.iter().position(|v| !v.is_finite()) {
                issue(format!("non-finite logit at position {p}"));
            }
        }
        out
    }

    /// Instances satisfying `keep`, in their original order and with their
    /// original `idx` values.
    pub fn filter(&self, mut keep: impl FnMut(&Instance) -> bool) -> Self {
        Self {
            config: self.config.clone(),
            instances: self.instances.iter().filter(|i| keep(i)).cloned().collect(),
        }
    }

    /// Stable sort by a comparator.
    pub fn sort_by(&self, compare: impl FnMut(&Instance, &Instance) -> Ordering) -> Self {
        let mut instances = self.instances.clone();
        instances.sort_by(compare);
        Self {
            config: self.config.clone(),
            instances,
        }
    }

    /// Stable ascending sort by a float key, using IEEE total order.
    pub fn sort_by_key_f64(&self, key: impl Fn(&Instance) -> f64) -> Self {
        self.sort_by(|a, b| key(a).total_cmp(&key(b)))
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::explainers::ExplainerConfig;

    pub fn sample_dataset(n: usize) -> ExplanationDataset {
        let config = DatasetConfig {
            coordinate: "toy-ref-lgxa".parse().unwrap(),
            explainer: ExplainerConfig::lgxa(),
            model_file: "model.json".into(),
            num_classes: 2,
            label_names: vec!["neg".into(), "pos".into()],
            created: "2026-01-01T00:00:00Z".into(),
            tool_version: "0.1.0".into(),
        };
        let instances = (0..n)
            .map(|i| Instance {
                idx: i,
                input_ids: TokenSequence::new(vec![2, 4 + i as u32, 3]).unwrap(),
                attributions: vec![0.0, 0.1 * i as f64, -0.5],
                true_label: i % 2,
                logits: vec![i as f64 * 0.3 - 1.0, 0.2],
            })
            .collect();
        ExplanationDataset::new(config, instances)
    }

    #[test]
    fn valid_dataset_has_no_violations() {
        assert!(sample_dataset(5).validate().is_empty());
        assert!(sample_dataset(0).validate().is_empty());
    }

    #[test]
    fn nan_attribution_names_idx() {
        let mut ds = sample_dataset(4);
        ds.instances[2].attributions[1] = f64::NAN;
        let v = ds.validate();
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].idx, v[0].line), (Some(2), Some(3)));
    }

    #[test]
    fn wrong_logit_count_and_label() {
        let mut ds = sample_dataset(3);
        ds.instances[0].logits.push(0.0);
        ds.instances[1].true_label = 7;
        ds.instances[2].attributions.pop();
        let v = ds.validate();
        assert_eq!(v.len(), 3);
        assert!(v[0].message.contains("3 logits"));
    }

    #[test]
    fn config_mismatch_detected() {
        let mut ds = sample_dataset(1);
        ds.config.coordinate.explainer = "lime".into();
        ds.config.label_names.pop();
        let v = ds.validate();
        assert_eq!(v.len(), 2);
        assert!(v.iter().all(|v| v.idx.is_none()));
    }

    #[test]
    fn idx_out_of_order_detected() {
        let mut ds = sample_dataset(3);
        ds.instances.swap(0, 1);
        assert_eq!(ds.validate().len(), 2);
    }

    #[test]
    fn filter_and_sort() {
        let ds = sample_dataset(6);
        assert_eq!(ds.filter(|_| true), ds);
        assert!(ds.filter(|_| false).is_empty());
        let odd = ds.filter(|i| i.idx % 2 == 1);
        assert_eq!(
            odd.instances.iter().map(|i| i.idx).collect::<Vec<_>>(),
            vec![1, 3, 5]
        );
        assert_eq!(odd.get(3).unwrap().idx, 3);
        assert!(odd.get(2).is_none());

        let by_confidence = ds.sort_by_key_f64(|i| -i.max_logit());
        let top = by_confidence.instances[0].max_logit();
        assert!(ds.instances.iter().all(|i| i.max_logit() <= top));
        // stable: equal keys keep input order
        let flat = ds.sort_by_key_f64(|_| 0.0);
        assert_eq!(flat, ds);
    }
}
