//! Generate, store, validate, analyze and render feature-attribution
//! datasets.
//!
//! A dataset is identified by three coordinates, `dataset-model-explainer`
//! (e.g. `imdb-bert-lig`), plus a version. Each stores one [`hub::Instance`]
//! per input text: the token ids, the per-token attribution scores, the true
//! label and the model's logits, alongside a [`hub::DatasetConfig`] recording
//! every hyperparameter that produced it.
//!
//! ```
//! use thermostat::explainers::{explain, select_target, ExplainerConfig};
//! use thermostat::model::{Activation, Classifier, ReferenceModel, Vocab};
//!
//! let vocab = Vocab::new(["a", "great", "movie"]);
//! let model = ReferenceModel::new(vocab, 8, 8, 2, Activation::Tanh, 42).unwrap();
//! let ids = model.tokenize("a great movie");
//! let target = select_target(&model.forward(ids.ids()).unwrap());
//! let map = explain(&model, ids.ids(), target, &ExplainerConfig::lig(25)).unwrap();
//! assert_eq!(map.scores.len(), 5); // [CLS] a great movie [SEP]
//! ```

pub mod analysis;
pub mod corpus;
pub mod explainers;
pub mod hub;
pub mod model;
pub mod render;

#[cfg(test)]
pub(crate) mod test_util;
